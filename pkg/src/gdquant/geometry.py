"""One-dimensional interval realization of a ratio-specified fractal.

Root cylinders are the unit intervals ``[2i, 2i+1]`` (0-based ``i``).  Inside
a cylinder whose word ends in vertex ``v`` the children ``v -> u`` are laid
out left to right in ascending ``u``, each scaled by ``c[v, u]``, separated by
equal gaps.  The gap fraction for row ``v`` is

    g_v = (1 - sum_u c[v, u]) / (m_v - 1)

where ``m_v`` is the fan-out, so children fill the parent exactly from end to
end.  Separation with constant ``t`` holds whenever ``g_v >= t * max_u c[v, u]``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import MarkovSystem, format_word
from .errors import SeparationInfeasible


def max_separation(system: MarkovSystem) -> tuple:
    """Largest feasible separation constant and the row that limits it."""
    best, row = math.inf, -1
    for i in range(system.n):
        cs = system.ratios[i, system.support[i]]
        t_i = (1.0 - cs.sum()) / ((len(cs) - 1) * cs.max())
        if t_i < best:
            best, row = float(t_i), i
    return best, row


@dataclass(frozen=True, eq=False)
class CylinderGeometry:
    system: MarkovSystem
    separation_t: float
    gaps: np.ndarray        # g_v, fraction of the parent length
    offsets: np.ndarray     # offsets[v, u]: left end of child u inside a unit parent ending in v

    def root_left(self, v: int) -> float:
        return 2.0 * v

    def cylinder(self, word) -> tuple:
        """``(left, length)`` of the cylinder of an admissible word.

        The length is a plain product of ratios, so it keeps full relative
        precision at any depth; ``right - left`` would not once the cylinder
        is far smaller than its position.
        """
        word = tuple(word)
        if not word:
            raise ValueError("the empty word has no cylinder")
        left = self.root_left(word[0])
        length = 1.0
        for a, b in zip(word, word[1:]):
            if not self.system.support[a, b]:
                raise ValueError(f"word {format_word(word)} is not admissible")
            left += length * self.offsets[a, b]
            length *= self.system.ratios[a, b]
        return left, length

    def length(self, word) -> float:
        return self.cylinder(word)[1]

    def interval(self, word) -> tuple:
        """``(left, right)`` of the cylinder of an admissible word."""
        left, length = self.cylinder(word)
        return left, left + length

    def intervals(self, words) -> np.ndarray:
        """Array of ``(left, right)`` rows, one per word (vectorized over words)."""
        words = list(words)
        if not words:
            return np.zeros((0, 2))
        width = max(len(w) for w in words)
        table = np.full((len(words), width), -1, dtype=np.int64)
        for k, w in enumerate(words):
            table[k, :len(w)] = w
        left = 2.0 * table[:, 0]
        length = np.ones(len(words))
        for h in range(width - 1):
            a, b = table[:, h], table[:, h + 1]
            live = b >= 0
            aa, bb = a[live], b[live]
            if not self.system.support[aa, bb].all():
                raise ValueError("inadmissible word in input")
            left[live] += length[live] * self.offsets[aa, bb]
            length[live] *= self.system.ratios[aa, bb]
        return np.column_stack([left, left + length])

    def children(self, word) -> list:
        word = tuple(word)
        left, length = self.cylinder(word)
        v = word[-1]
        out = []
        for u in self.system.successors[v]:
            a = left + length * self.offsets[v, u]
            out.append((word + (u,), (a, a + length * self.system.ratios[v, u])))
        return out


def realize(system: MarkovSystem, t: float | None = None) -> CylinderGeometry:
    """Build the interval placement; ``t`` defaults to 0.9 of the feasible maximum."""
    t_max, row = max_separation(system)
    if t_max <= 0:
        raise SeparationInfeasible(
            f"row {row + 1}: ratios sum to at least 1, no separation is possible", row, max(t_max, 0.0))
    if t is None:
        t = min(0.9 * t_max, 0.999)
    if not 0 < t < 1:
        raise ValueError(f"separation constant must lie in (0, 1), got {t}")
    if t > t_max:
        raise SeparationInfeasible(
            f"separation t={t} infeasible: row {row + 1} allows at most t={t_max:.6g}", row, t_max)
    n = system.n
    gaps = np.zeros(n)
    offsets = np.full((n, n), np.nan)
    for v in range(n):
        succ = system.successors[v]
        cs = system.ratios[v, list(succ)]
        g = (1.0 - cs.sum()) / (len(succ) - 1)
        gaps[v] = g
        pos = 0.0
        for u, c in zip(succ, cs):
            offsets[v, u] = pos
            pos += c + g
    gaps.setflags(write=False)
    offsets.setflags(write=False)
    return CylinderGeometry(system, float(t), gaps, offsets)


@dataclass(frozen=True)
class SamplePoint:
    position: float
    word: tuple
    resolution: float


def sample_measure(geom: CylinderGeometry, count: int, resolution: float, seed=None) -> list:
    """Draw ``count`` points of the Markov-type measure.

    Each point follows one path: the first vertex from the initial vector,
    then letters from the rows of the transition matrix, stopping as soon as
    the cylinder diameter is at most ``resolution``.  The midpoint of that
    cylinder is returned; it lies within ``resolution`` of the true point.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0 < resolution <= 1:
        raise ValueError("resolution must lie in (0, 1]")
    sys_ = geom.system
    rng = np.random.default_rng(seed)
    cum_p = np.cumsum(sys_.transition, axis=1)
    for i in range(sys_.n):
        cum_p[i, np.flatnonzero(sys_.support[i])[-1]:] = 1.0
    cum_chi = np.cumsum(sys_.initial)
    cum_chi[-1] = 1.0

    first = np.searchsorted(cum_chi, rng.random(count), side="right")
    letters = [first]
    left = 2.0 * first
    length = np.ones(count)
    log_c = np.zeros(count)
    cur = first.copy()
    stop = math.log(resolution) + 1e-12 * max(1.0, abs(math.log(resolution)))
    active = log_c > stop
    while active.any():
        idx = np.flatnonzero(active)
        u = rng.random(len(idx))
        nxt = (cum_p[cur[idx]] <= u[:, None]).sum(axis=1)
        step = np.full(count, -1)
        step[idx] = nxt
        left[idx] += length[idx] * geom.offsets[cur[idx], nxt]
        length[idx] *= sys_.ratios[cur[idx], nxt]
        log_c[idx] += sys_.log_ratio[cur[idx], nxt]
        cur[idx] = nxt
        letters.append(step)
        active = log_c > stop
    table = np.stack(letters, axis=1).tolist()
    mid = left + 0.5 * length
    return [SamplePoint(float(mid[k]), tuple(v for v in table[k] if v >= 0), float(length[k]))
            for k in range(count)]


def write_samples_csv(points, fh) -> None:
    """Rows ``position;word;weight`` with equal weights ``1/count``."""
    writer = csv.writer(fh, delimiter=";", lineterminator="\n")
    writer.writerow(["position", "word", "weight"])
    w = repr(1.0 / len(points)) if points else "0"
    for p in points:
        writer.writerow([repr(p.position), format_word(p.word), w])


def write_geometry_csv(geom: CylinderGeometry, words, fh) -> None:
    """Rows ``word;left;right`` for plotting an antichain's cylinders."""
    writer = csv.writer(fh, delimiter=";", lineterminator="\n")
    writer.writerow(["word", "left", "right"])
    for w in words:
        a, b = geom.interval(w)
        writer.writerow([format_word(w), repr(a), repr(b)])
