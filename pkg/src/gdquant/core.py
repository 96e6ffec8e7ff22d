"""Markov systems, admissible words and finite maximal antichains.

Vertices are 0-based everywhere in the Python API.  Text exports (CSV, JSON)
use 1-based vertex labels joined by dashes, e.g. ``1-3-4``.

Word weights are carried in log space: for a word ``w`` of length ``k``

    log p_w = sum of log p[w[h], w[h+1]]
    log c_w = sum of log c[w[h], w[h+1]]

so that products over long words never underflow.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    CapExceeded,
    FanOutBelowTwo,
    InadmissibleJunction,
    InadmissibleWord,
    InitialNotPositiveProbability,
    RatioOutOfRange,
    RatioSupportMismatch,
    RowNotStochastic,
    ValidationError,
)

ROW_SUM_TOL = 1e-12
DEFAULT_CAP = 10**6
# words-free enumeration keeps only floats, so it affords a larger cap
SUM_CAP = 10**7
# Relative slack used to snap log-weights onto the threshold eta**j.  Values
# that agree with the threshold to this precision count as equal, so the
# strict right-hand inequality of the level condition is honoured for exact
# ties such as p*c**r == eta.
TIE_RTOL = 1e-11


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarkovSystem:
    """Validated (P, C, chi, r) bundle.  Build it with :func:`validate_system`."""

    transition: np.ndarray
    ratios: np.ndarray
    initial: np.ndarray
    order_r: float

    @property
    def n(self) -> int:
        return self.transition.shape[0]

    @cached_property
    def support(self) -> np.ndarray:
        s = self.transition > 0
        s.setflags(write=False)
        return s

    @cached_property
    def successors(self) -> tuple:
        return tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in self.support)

    @cached_property
    def log_mass(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return _frozen(np.where(self.support, np.log(self.transition), -np.inf))

    @cached_property
    def log_ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return _frozen(np.where(self.support, np.log(self.ratios), -np.inf))

    @cached_property
    def log_weights(self) -> np.ndarray:
        """``log(p_ij * c_ij**r)`` on the support, ``-inf`` elsewhere."""
        return _frozen(np.where(self.support, self.log_mass + self.order_r * self.log_ratio, -np.inf))

    @property
    def p_min(self) -> float:
        return float(self.transition[self.support].min())

    @property
    def p_max(self) -> float:
        return float(self.transition[self.support].max())

    @property
    def c_min(self) -> float:
        return float(self.ratios[self.support].min())

    @property
    def c_max(self) -> float:
        return float(self.ratios[self.support].max())

    @property
    def log_eta(self) -> float:
        return math.log(self.p_min) + self.order_r * math.log(self.c_min)

    @property
    def eta(self) -> float:
        """``p_min * c_min**r``, the per-level threshold factor."""
        return math.exp(self.log_eta)

    def with_order(self, order_r: float) -> "MarkovSystem":
        return validate_system(self.transition, self.ratios, self.initial, order_r)


def validate_system(transition, ratios, initial, order_r) -> MarkovSystem:
    """Check every structural requirement and return a :class:`MarkovSystem`.

    All violations are collected before raising; the raised exception is of
    the class of the first violation and its ``violations`` attribute lists
    all of them.
    """
    P = np.asarray(transition, dtype=float)
    C = np.asarray(ratios, dtype=float)
    chi = np.asarray(initial, dtype=float)
    try:
        r = float(order_r)
    except (TypeError, ValueError):
        raise ValidationError(f"order_r must be a number, got {order_r!r}",
                              [("Shape", "order_r not numeric")]) from None

    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
        raise ValidationError(f"transition must be N x N with N >= 2, got shape {P.shape}",
                              [("Shape", "transition shape")])
    n = P.shape[0]
    if C.shape != (n, n):
        raise ValidationError(f"ratios must have shape {(n, n)}, got {C.shape}",
                              [("Shape", "ratios shape")])
    if chi.shape != (n,):
        raise ValidationError(f"initial must have length {n}, got shape {chi.shape}",
                              [("Shape", "initial shape")])
    if not (np.isfinite(P).all() and np.isfinite(C).all() and np.isfinite(chi).all()):
        raise ValidationError("inputs contain non-finite values", [("Shape", "non-finite")])
    if not r > 0 or not math.isfinite(r):
        raise ValidationError(f"order_r must be positive, got {r}", [("Shape", "order_r <= 0")])

    found = []
    if (P < 0).any() or (P > 1).any():
        found.append((RowNotStochastic, "transition entries must lie in [0, 1]"))
    sums = P.sum(axis=1)
    for i in np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL):
        found.append((RowNotStochastic, f"row {i + 1} of transition sums to {sums[i]!r}"))
    fan = (P > 0).sum(axis=1)
    for i in np.flatnonzero(fan < 2):
        found.append((FanOutBelowTwo, f"vertex {i + 1} has {fan[i]} successor(s); at least 2 required"))
    mismatch = (C > 0) != (P > 0)
    for i, j in zip(*np.nonzero(mismatch)):
        found.append((RatioSupportMismatch, f"c[{i + 1},{j + 1}]={C[i, j]!r} but p[{i + 1},{j + 1}]={P[i, j]!r}"))
    bad = (P > 0) & ((C <= 0) | (C >= 1))
    for i, j in zip(*np.nonzero(bad)):
        found.append((RatioOutOfRange, f"c[{i + 1},{j + 1}]={C[i, j]!r} not in (0, 1)"))
    if (C < 0).any():
        found.append((RatioOutOfRange, "ratios must be non-negative"))
    if (chi <= 0).any() or abs(chi.sum() - 1.0) > ROW_SUM_TOL:
        found.append((InitialNotPositiveProbability,
                      f"initial must be a positive probability vector (sum={chi.sum()!r}, min={chi.min()!r})"))

    if found:
        violations = [(cls.__name__, msg) for cls, msg in found]
        message = "; ".join(msg for _, msg in violations)
        raise found[0][0](message, violations)

    return MarkovSystem(_frozen(P), _frozen(np.where(P > 0, C, 0.0)), _frozen(chi), r)


def load_config(source):
    """Read a system definition from a JSON file path, JSON string or dict.

    Returns ``(system, separation_t)``; ``separation_t`` is ``None`` when the
    document does not supply one.
    """
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, Path) or not str(source).lstrip().startswith("{"):
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.loads(source)
    missing = [k for k in ("order_r", "transition", "ratios", "initial") if k not in doc]
    if missing:
        raise ValidationError(f"config is missing keys: {', '.join(missing)}",
                              [("Shape", f"missing {k}") for k in missing])
    system = validate_system(doc["transition"], doc["ratios"], doc["initial"], doc["order_r"])
    t = doc.get("separation_t")
    return system, (None if t is None else float(t))


def system_to_config(system: MarkovSystem, separation_t=None) -> dict:
    doc = {
        "order_r": system.order_r,
        "transition": system.transition.tolist(),
        "ratios": system.ratios.tolist(),
        "initial": system.initial.tolist(),
    }
    if separation_t is not None:
        doc["separation_t"] = separation_t
    return doc


# --------------------------------------------------------------------------
# words

@dataclass(frozen=True)
class WordWeights:
    log_mass: float
    log_ratio: float
    log_measure: float
    order_r: float

    @property
    def mass_product(self) -> float:
        return math.exp(self.log_mass)

    @property
    def ratio_product(self) -> float:
        return math.exp(self.log_ratio)

    @property
    def measure(self) -> float:
        return math.exp(self.log_measure)

    @property
    def log_weight(self) -> float:
        """``log(p_w * c_w**r)``."""
        return self.log_mass + self.order_r * self.log_ratio


def is_admissible(system: MarkovSystem, word) -> bool:
    if any(not 0 <= v < system.n for v in word):
        return False
    return all(system.support[a, b] for a, b in zip(word, word[1:]))


def word_weights(system: MarkovSystem, word) -> WordWeights:
    word = tuple(int(v) for v in word)
    if not is_admissible(system, word):
        raise InadmissibleWord(f"word {format_word(word)} is not admissible")
    if not word:
        return WordWeights(0.0, 0.0, 0.0, system.order_r)
    lm = math.fsum(system.log_mass[a, b] for a, b in zip(word, word[1:]))
    lc = math.fsum(system.log_ratio[a, b] for a, b in zip(word, word[1:]))
    return WordWeights(lm, lc, math.log(system.initial[word[0]]) + lm, system.order_r)


def word_concat(system: MarkovSystem, a, b) -> tuple:
    """Concatenate two admissible words; the junction must be an edge."""
    a, b = tuple(a), tuple(b)
    if a and b and not system.support[a[-1], b[0]]:
        raise InadmissibleJunction(
            f"cannot join {format_word(a)} and {format_word(b)}: p[{a[-1] + 1},{b[0] + 1}] = 0")
    return a + b


def format_word(word) -> str:
    return "-".join(str(v + 1) for v in word) if word else ""


def parse_word(text: str) -> tuple:
    text = text.strip()
    return tuple(int(v) - 1 for v in text.split("-")) if text else ()


# --------------------------------------------------------------------------
# antichains

@dataclass(frozen=True, eq=False)
class Antichain:
    """A finite set of admissible words, sorted lexicographically.

    ``complete`` is False when construction stopped at the cardinality cap;
    such a set is not maximal and most diagnostics refuse it.
    """

    words: tuple
    log_mass: np.ndarray
    log_ratio: np.ndarray
    log_measure: np.ndarray
    order_r: float
    eta: float
    level_j: int | None = None
    complete: bool = True
    roots: tuple = ()
    within: tuple | None = None

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    @property
    def cardinality(self) -> int:
        return len(self.words)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([len(w) for w in self.words], dtype=int)

    @property
    def min_len(self) -> int:
        return int(self.lengths.min())

    @property
    def max_len(self) -> int:
        return int(self.lengths.max())

    @property
    def log_weight(self) -> np.ndarray:
        return self.log_mass + self.order_r * self.log_ratio

    @property
    def mass_product(self) -> np.ndarray:
        return np.exp(self.log_mass)

    @property
    def ratio_product(self) -> np.ndarray:
        return np.exp(self.log_ratio)

    @property
    def measure(self) -> np.ndarray:
        return np.exp(self.log_measure)

    def weights_of(self, index: int) -> WordWeights:
        return WordWeights(float(self.log_mass[index]), float(self.log_ratio[index]),
                           float(self.log_measure[index]), self.order_r)


def _edge_tables(system: MarkovSystem, within):
    allowed = np.ones(system.n, dtype=bool)
    if within is not None:
        allowed[:] = False
        allowed[list(within)] = True
    succ = [[j for j in system.successors[i] if allowed[j]] for i in range(system.n)]
    deg = np.array([len(s) for s in succ], dtype=np.int64)
    start = np.concatenate([[0], np.cumsum(deg)[:-1]]).astype(np.int64)
    flat = np.array([j for s in succ for j in s], dtype=np.int64)
    return deg, start, flat


def _expand(words, deg, start, flat):
    """All one-letter admissible extensions of ``words`` (2-D int array)."""
    last = words[:, -1]
    counts = deg[last]
    parent = np.repeat(np.arange(len(words)), counts)
    # position of each child inside its parent's successor list
    first_child = np.concatenate([[0], np.cumsum(counts)[:-1]])
    rank = np.arange(counts.sum()) - np.repeat(first_child, counts)
    child = flat[start[last[parent]] + rank]
    return parent, child


def _sorted_antichain(system, blocks, level_j, complete, roots, within):
    if blocks:
        width = max(b.shape[1] for b in blocks)
        padded = np.full((sum(len(b) for b in blocks), width), -1, dtype=np.int64)
        row = 0
        for b in blocks:
            padded[row:row + len(b), :b.shape[1]] = b
            row += len(b)
        order = np.lexsort(padded.T[::-1])
        padded = padded[order]
        words = tuple(tuple(v for v in w if v >= 0) for w in padded.tolist())
        a, b = padded[:, :-1], padded[:, 1:]
        live = b >= 0
        aa, bb = np.where(live, a, 0), np.where(live, b, 0)
        lm = np.where(live, system.log_mass[aa, bb], 0.0).sum(axis=1)
        lc = np.where(live, system.log_ratio[aa, bb], 0.0).sum(axis=1)
        lmu = np.log(system.initial[padded[:, 0]]) + lm
    else:
        words = ()
        lm = lc = lmu = np.zeros(0)
    return Antichain(words, lm, lc, lmu, system.order_r, system.eta, level_j, complete,
                     tuple(roots), None if within is None else tuple(sorted(within)))


def antichain_from_words(system: MarkovSystem, words, *, level_j=None, complete=True,
                         roots=None, within=None, presorted=False) -> Antichain:
    """Wrap an explicit collection of words, computing their weights."""
    words = [tuple(int(v) for v in w) for w in words]
    if not presorted:
        words.sort()
    lm = np.empty(len(words))
    lc = np.empty(len(words))
    lmu = np.empty(len(words))
    for k, w in enumerate(words):
        ww = word_weights(system, w)
        lm[k], lc[k], lmu[k] = ww.log_mass, ww.log_ratio, ww.log_measure
    if roots is None:
        roots = tuple(sorted({w[0] for w in words}))
    return Antichain(tuple(words), lm, lc, lmu, system.order_r, system.eta, level_j,
                     complete, tuple(roots), None if within is None else tuple(sorted(within)))


def _roots(system, start, within):
    if start is None:
        roots = range(system.n) if within is None else sorted(within)
    elif np.ndim(start) == 0:
        roots = [int(start)]
    else:
        roots = sorted(int(v) for v in start)
    return tuple(roots)


def build_lambda(system: MarkovSystem, j: int, cap: int = DEFAULT_CAP, *, start=None,
                 within=None, allow_partial: bool = False) -> Antichain:
    """Words whose weight first drops below ``eta**j``.

    A word ``w`` belongs to the result when
    ``p(w-) c(w-)**r >= eta**j > p(w) c(w)**r``, ``w-`` being ``w`` without its
    last letter.  ``start`` restricts the first letter, ``within`` restricts
    all letters to a vertex subset (giving antichains of ``H*`` or ``H*(i)``).

    Raises :class:`CapExceeded` once more than ``cap`` words are certain; with
    ``allow_partial=True`` the words found so far are returned instead, with
    ``complete=False``.
    """
    if int(j) != j or j < 1:
        raise ValueError(f"level j must be an integer >= 1, got {j!r}")
    if cap <= 0:
        raise ValueError("cap must be positive")
    j = int(j)
    threshold = j * system.log_eta
    slack = TIE_RTOL * max(1.0, abs(threshold))
    roots = _roots(system, start, within)
    deg, first, flat = _edge_tables(system, within)
    if within is not None and (deg[list(within)] == 0).any():
        raise ValueError("every vertex of `within` needs a successor inside it")

    frontier = np.array(roots, dtype=np.int64)[:, None]
    f_lw = np.zeros(len(roots))
    emitted = []
    total = 0
    complete = True
    while len(frontier):
        parent, child = _expand(frontier, deg, first, flat)
        words = np.hstack([frontier[parent], child[:, None]])
        lw = f_lw[parent] + system.log_weights[frontier[parent, -1], child]
        below = lw < threshold - slack
        n_below = int(below.sum())
        pending = len(words) - n_below
        if total + n_below + pending > cap:
            if not allow_partial:
                raise CapExceeded(
                    f"Lambda_{j} has more than {cap} words (at least {total + n_below + pending})",
                    partial_count=total + n_below)
            emitted.append(words[below][: max(0, cap - total)])
            complete = False
            break
        emitted.append(words[below])
        total += n_below
        frontier, f_lw = words[~below], lw[~below]
    return _sorted_antichain(system, emitted, j, complete, roots, within)


def lambda_log_weights(system: MarkovSystem, j: int, cap: int = SUM_CAP, *,
                       start=None, within=None) -> np.ndarray:
    """Log-weights ``log(p_w c_w**r)`` of the words of ``Lambda_j``, words not kept.

    Same membership rule as :func:`build_lambda`, but the frontier only holds
    the last letter and the running log-weight, so far larger levels fit in
    memory.  The order of the result is deterministic but not lexicographic;
    use :func:`math.fsum` for order-independent sums.
    """
    if int(j) != j or j < 1:
        raise ValueError(f"level j must be an integer >= 1, got {j!r}")
    if cap <= 0:
        raise ValueError("cap must be positive")
    threshold = int(j) * system.log_eta
    slack = TIE_RTOL * max(1.0, abs(threshold))
    roots = _roots(system, start, within)
    deg, first, flat = _edge_tables(system, within)
    last = np.array(roots, dtype=np.int64)
    f_lw = np.zeros(len(roots))
    emitted = []
    total = 0
    while len(last):
        parent, child = _expand(last[:, None], deg, first, flat)
        lw = f_lw[parent] + system.log_weights[last[parent], child]
        below = lw < threshold - slack
        if total + len(lw) > cap:
            raise CapExceeded(f"Lambda_{int(j)} has more than {cap} words (at least {total + len(lw)})",
                              partial_count=total + int(below.sum()))
        total += int(below.sum())
        emitted.append(lw[below])
        last, f_lw = child[~below], lw[~below]
    return np.concatenate(emitted) if emitted else np.zeros(0)


def omega(system: MarkovSystem, k: int, *, start=None, within=None, cap: int = DEFAULT_CAP) -> Antichain:
    """All admissible words of length ``k`` (a finite maximal antichain)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    roots = _roots(system, start, within)
    deg, first, flat = _edge_tables(system, within)
    words = np.array(roots, dtype=np.int64)[:, None]
    for _ in range(k - 1):
        parent, child = _expand(words, deg, first, flat)
        if len(child) > cap:
            raise CapExceeded(f"Omega_{k} has more than {cap} words", partial_count=len(words))
        words = np.hstack([words[parent], child[:, None]])
    return _sorted_antichain(system, [words], None, True, roots, within)


def check_antichain(system: MarkovSystem, chain: Antichain):
    """Return ``(prefix_free, maximal)`` by exhaustive descent.

    Maximality is relative to the paths the chain was built over: those
    starting in ``chain.roots`` and, when ``chain.within`` is set, staying
    inside that vertex set.
    """
    members = set(chain.words)
    prefix_free = all(w[:h] not in members for w in chain.words for h in range(len(w)))
    if not members:
        return prefix_free, False
    depth = max(len(w) for w in members)
    allowed = set(range(system.n)) if chain.within is None else set(chain.within)
    stack = [(v,) for v in chain.roots]
    while stack:
        w = stack.pop()
        if w in members:
            continue
        if len(w) > depth:
            return prefix_free, False
        stack.extend(w + (v,) for v in system.successors[w[-1]] if v in allowed)
    return prefix_free, True


def antichain_refine_bound(system: MarkovSystem, j: int, cap: int = DEFAULT_CAP):
    """Growth factor between consecutive levels and its a-priori bound.

    Returns ``(phi_{j+1} / phi_j, N**N1, N1)`` where ``N1`` is the least
    ``h`` with ``(p_max * c_max**r)**h < eta``.
    """
    phi_j = build_lambda(system, j, cap).cardinality
    phi_next = build_lambda(system, j + 1, cap).cardinality
    if phi_next < phi_j:
        raise AssertionError(f"level cardinality decreased: phi_{j}={phi_j} > phi_{j + 1}={phi_next}")
    log_top = math.log(system.p_max) + system.order_r * math.log(system.c_max)
    n1 = math.floor(system.log_eta / log_top) + 1
    return phi_next / phi_j, system.n ** n1, n1


def write_antichain_csv(chain: Antichain, fh) -> None:
    """Rows ``word;length;p_sigma;c_sigma;measure``."""
    writer = csv.writer(fh, delimiter=";", lineterminator="\n")
    writer.writerow(["word", "length", "p_sigma", "c_sigma", "measure"])
    for k, w in enumerate(chain.words):
        writer.writerow([format_word(w), len(w), repr(float(math.exp(chain.log_mass[k]))),
                         repr(float(math.exp(chain.log_ratio[k]))),
                         repr(float(math.exp(chain.log_measure[k])))])
