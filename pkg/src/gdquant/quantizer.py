"""Empirical order-r quantization of discretized measures on the line.

In one dimension every nearest-neighbour cell is an interval, so after
sorting the atoms the assignment step is a ``searchsorted`` against the
midpoints between consecutive codes and each cell is a contiguous slice.
"""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import DEFAULT_CAP, Antichain, build_lambda
from .errors import CapExceeded, IncompleteAntichain, InsufficientLevels, InvalidN, ResolutionTooCoarse

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms ``positions`` (sorted ascending) with positive ``weights`` summing to 1."""

    positions: np.ndarray
    weights: np.ndarray
    provenance: str = ""
    resolution: float = 0.0

    def __post_init__(self):
        x, w = self.positions, self.weights
        if x.ndim != 1 or x.shape != w.shape or len(x) == 0:
            raise ValueError("positions and weights must be equal-length non-empty 1-D arrays")
        if (w <= 0).any():
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        if (np.diff(x) < 0).any():
            raise ValueError("positions must be sorted; use DiscreteMeasure.from_atoms")

    @classmethod
    def from_atoms(cls, positions, weights, provenance="", resolution=0.0):
        x = np.asarray(positions, dtype=float)
        w = np.asarray(weights, dtype=float)
        order = np.argsort(x, kind="stable")
        return cls(x[order], w[order], provenance, float(resolution))

    def __len__(self):
        return len(self.positions)

    def translated(self, delta):
        return DiscreteMeasure(self.positions + delta, self.weights, self.provenance, self.resolution)

    def scaled(self, factor):
        if factor <= 0:
            raise ValueError("factor must be positive")
        return DiscreteMeasure(self.positions * factor, self.weights, self.provenance,
                               self.resolution * factor)


def discretize(system, chain: Antichain, geom) -> DiscreteMeasure:
    """One atom per word at the midpoint of its cylinder, weighted by its measure."""
    if not chain.complete:
        raise IncompleteAntichain("cannot discretize a capped antichain")
    iv = geom.intervals(chain.words)
    level = "omega" if chain.level_j is None else f"lambda_{chain.level_j}"
    return DiscreteMeasure.from_atoms(iv.mean(axis=1), chain.measure,
                                      provenance=f"{level}:{chain.cardinality}",
                                      resolution=float(chain.ratio_product.max()))


@dataclass(frozen=True, eq=False)
class QuantizationResult:
    n: int
    codebook: np.ndarray
    distortion: float       # sum_k w_k * d(x_k, codebook)**r
    r: float
    iterations: int
    converged: bool
    history: tuple = ()

    @property
    def error(self) -> float:
        """``e_{n,r}``, the r-th root of the distortion."""
        return self.distortion ** (1.0 / self.r)


def _assign(x, codes):
    return np.searchsorted(0.5 * (codes[1:] + codes[:-1]), x, side="left")


def distortion(measure: DiscreteMeasure, codebook, r: float) -> float:
    codes = np.sort(np.asarray(codebook, dtype=float))
    x, w = measure.positions, measure.weights
    d = np.abs(x - codes[_assign(x, codes)])
    return float(np.dot(w, d ** r))


def _cell_bounds(idx, n):
    cells = np.arange(n)
    return np.searchsorted(idx, cells, side="left"), np.searchsorted(idx, cells, side="right")


def _cell_objective(x, w, starts, ends, centre, r):
    # sum_k w_k |x_k - centre[cell]|**r for non-empty cells given by (starts, ends)
    # cells are contiguous and cover x[starts[0]:ends[-1]]
    cell = np.repeat(np.arange(len(starts)), ends - starts)
    atoms = slice(starts[0], ends[-1])
    vals = w[atoms] * np.abs(x[atoms] - centre[cell]) ** r
    return np.bincount(cell, weights=vals, minlength=len(starts))


def _golden_centres(x, w, starts, ends, r, tol=1e-12):
    a = x[starts].astype(float)
    b = x[ends - 1].astype(float)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = _cell_objective(x, w, starts, ends, c, r)
    fd = _cell_objective(x, w, starts, ends, d, r)
    scale = 1.0 + np.maximum(np.abs(a), np.abs(b))
    while ((b - a) > tol * scale).any():
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = np.where(left, b - GOLDEN * (b - a), d)
        d_new = np.where(left, c, a + GOLDEN * (b - a))
        c, d = c_new, d_new
        # only one new evaluation per cell is needed, but evaluating both keeps it vectorized
        fc = _cell_objective(x, w, starts, ends, c, r)
        fd = _cell_objective(x, w, starts, ends, d, r)
    return 0.5 * (a + b)


def _centroids(x, w, starts, ends, r):
    """Minimizer of ``sum w |x - a|**r`` over each cell (cells non-empty)."""
    cw = np.concatenate([[0.0], np.cumsum(w)])
    if r == 2:
        cwx = np.concatenate([[0.0], np.cumsum(w * x)])
        return (cwx[ends] - cwx[starts]) / (cw[ends] - cw[starts])
    if r == 1:
        half = cw[starts] + 0.5 * (cw[ends] - cw[starts])
        k = np.searchsorted(cw[1:], half, side="left")
        return x[np.clip(k, starts, ends - 1)]
    if r > 1:
        return _golden_centres(x, w, starts, ends, r)
    # r < 1: the objective is concave between atoms, so an atom is optimal
    out = np.empty(len(starts))
    for q, (s, e) in enumerate(zip(starts, ends)):
        xs, ws = x[s:e], w[s:e]
        cost = (ws[None, :] * np.abs(xs[:, None] - xs[None, :]) ** r).sum(axis=1)
        out[q] = xs[np.argmin(cost)]
    return out


def _repair_empty(x, w, codes, r):
    """Move codes whose cell is empty onto the atom contributing most distortion."""
    n = len(codes)
    for _ in range(n):
        codes = np.sort(codes)
        idx = _assign(x, codes)
        starts, ends = _cell_bounds(idx, n)
        empty = np.flatnonzero(starts == ends)
        if len(empty) == 0:
            return codes, idx, starts, ends
        contrib = w * np.abs(x - codes[idx]) ** r
        contrib[np.isin(x, codes)] = -1.0
        codes[empty[0]] = x[np.argmax(contrib)]
    raise InvalidN("could not give every code a non-empty cell")


def _init_quantile(x, w, n):
    cw = np.cumsum(w)
    targets = (np.arange(n) + 0.5) / n * cw[-1]
    return x[np.clip(np.searchsorted(cw, targets), 0, len(x) - 1)].copy()


def _init_random(x, w, n, r, rng):
    """D**r weighted seeding (k-means++ style) for sorted 1-D atoms.

    A new code only changes distances between the midpoints to its sorted
    neighbours, and draws use block sums, so each step costs about
    ``sqrt(len(x))`` instead of ``len(x)``.
    """
    size = len(x)
    block = max(1, math.isqrt(size))
    heads = np.arange(0, size, block)
    cw = np.cumsum(w)
    first = min(int(np.searchsorted(cw, rng.random() * cw[-1], side="right")), size - 1)
    codes = [float(x[first])]
    dist = np.abs(x - x[first]) ** r
    p = w * dist
    sums = np.add.reduceat(p, heads)
    for _ in range(1, n):
        total = sums.sum()
        if total > 0:
            u = rng.random() * total
            cs = np.cumsum(sums)
            b = min(int(np.searchsorted(cs, u, side="right")), len(heads) - 1)
            lo = heads[b]
            seg = np.cumsum(p[lo:lo + block])
            pick = lo + min(int(np.searchsorted(seg, u - (cs[b] - sums[b]), side="right")), len(seg) - 1)
        else:
            pick = int(rng.integers(size))
        c = float(x[pick])
        k = bisect.bisect_left(codes, c)
        left = -math.inf if k == 0 else 0.5 * (codes[k - 1] + c)
        right = math.inf if k == len(codes) else 0.5 * (c + codes[k])
        codes.insert(k, c)
        a = int(np.searchsorted(x, left, side="left"))
        z = int(np.searchsorted(x, right, side="right"))
        if z > a:
            dist[a:z] = np.minimum(dist[a:z], np.abs(x[a:z] - c) ** r)
            p[a:z] = w[a:z] * dist[a:z]
            b0, b1 = a // block, (z - 1) // block
            sums[b0:b1 + 1] = np.add.reduceat(p[b0 * block:min(size, (b1 + 1) * block)],
                                              heads[b0:b1 + 1] - b0 * block)
    return np.array(codes)


def _lloyd_run(x, w, codes, r, tol, max_iter):
    codes, idx, starts, ends = _repair_empty(x, w, np.asarray(codes, dtype=float), r)
    cur = float(np.dot(w, np.abs(x - codes[idx]) ** r))
    history = [cur]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = np.sort(_centroids(x, w, starts, ends, r))
        new, idx_new, s_new, e_new = _repair_empty(x, w, new, r)
        val = float(np.dot(w, np.abs(x - new[idx_new]) ** r))
        if val > cur:
            # inexact centroid made things worse; keep the previous codebook
            converged = True
            break
        gain = cur - val
        codes, idx, starts, ends, cur = new, idx_new, s_new, e_new, val
        history.append(cur)
        if gain <= tol * cur:
            converged = True
            break
    return codes, cur, it, converged, tuple(history)


def lloyd(measure: DiscreteMeasure, n: int, r: float = 2.0, init="auto", tol=1e-12,
          max_iter=1000, restarts=8, seed=0) -> QuantizationResult:
    """Best-of-``restarts`` Lloyd alternation for order-``r`` distortion.

    ``init`` is ``"auto"`` (first run from weighted quantiles, the rest from
    D**r-weighted random seeding), ``"quantile"``, ``"random"`` or an explicit
    starting codebook.  Empty cells are repaired by moving the idle code onto
    the atom with the largest distortion contribution.
    """
    x, w = measure.positions, measure.weights
    distinct = len(np.unique(x))
    if int(n) != n or n < 1 or n > distinct:
        raise InvalidN(f"n={n} must be an integer in [1, {distinct}] (number of distinct atoms)")
    n = int(n)
    if r <= 0:
        raise ValueError("r must be positive")
    if n == distinct:
        codes = np.unique(x)
        return QuantizationResult(n, codes, 0.0, r, 0, True, (0.0,))

    starts = []
    if not isinstance(init, str):
        starts.append(np.asarray(init, dtype=float))
        if len(starts[0]) != n:
            raise InvalidN("explicit init must have n codes")
    else:
        seqs = np.random.SeedSequence(seed).spawn(max(1, restarts))
        for k, ss in enumerate(seqs):
            rng = np.random.default_rng(ss)
            if init == "quantile" or (init == "auto" and k == 0):
                starts.append(_init_quantile(x, w, n))
                if init == "quantile":
                    break
            elif init in ("random", "auto"):
                starts.append(_init_random(x, w, n, r, rng))
            else:
                raise ValueError(f"unknown init policy {init!r}")

    best = None
    for codes0 in starts:
        run = _lloyd_run(x, w, codes0, r, tol, max_iter)
        if best is None or run[1] < best[1]:
            best = run
    codes, dist, iters, conv, hist = best
    return QuantizationResult(n, codes, dist, r, iters, conv, hist)


# --------------------------------------------------------------------------
# dimension fit

@dataclass(frozen=True, eq=False)
class DimensionFit:
    ns: np.ndarray
    errors: np.ndarray          # e_{n,r}
    distortions: np.ndarray     # e_{n,r}**r
    levels: tuple
    resolutions: np.ndarray
    slope: float
    intercept: float
    ci_halfwidth: float
    r: float
    s_probe: float | None = None
    coefficients: np.ndarray | None = None   # n**(r/s) * e**r at s_probe
    results: tuple = field(default=(), repr=False)

    def agreement(self, s_theory: float) -> float:
        return abs(self.slope - s_theory) / s_theory

    def to_json(self, s_theory: float | None = None) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "ci": self.ci_halfwidth,
            "s_r_theory": s_theory,
            "agree_within": None if s_theory is None else self.agreement(s_theory),
            "s_probe": self.s_probe,
            "r": self.r,
        }


def _fit_slope(log_n, neg_log_e):
    if len(log_n) < 3:
        res = stats.linregress(neg_log_e, log_n)
        return res.slope, res.intercept, math.nan
    res = stats.linregress(neg_log_e, log_n)
    half = stats.t.ppf(0.975, len(log_n) - 2) * res.stderr
    return res.slope, res.intercept, float(half)


def dimension_fit(system, geom, n_schedule, *, s_probe=None, atoms_per_code=50, cap=DEFAULT_CAP,
                  restarts=4, seed=0, tol=1e-10, max_iter=2000, coarse_factor=2.0,
                  max_level=None) -> DimensionFit:
    """Quantize discretizations of the measure for each codebook size and fit
    ``log n`` against ``-log e_{n,r}``.

    For each ``n`` the discretization is the smallest level whose antichain
    has at least ``atoms_per_code * n`` words.  A result whose distortion is
    within ``coarse_factor`` of ``resolution**r`` raises
    :class:`ResolutionTooCoarse`.  With ``max_level`` set, levels stop there
    and a codebook larger than that level's atom count raises :class:`InvalidN`.
    """
    ns = sorted(int(n) for n in n_schedule)
    if len(ns) < 2:
        raise InsufficientLevels("need at least two codebook sizes")
    r = system.order_r
    chains = {}
    results, levels, res_list = [], [], []
    j = 1
    for k, n in enumerate(ns):
        while True:
            if j not in chains:
                chains[j] = build_lambda(system, j, cap)
            if chains[j].cardinality >= atoms_per_code * n or j == max_level:
                break
            j += 1
        chain = chains[j]
        measure = discretize(system, chain, geom)
        q = lloyd(measure, n, r, restarts=restarts, seed=seed + k, tol=tol, max_iter=max_iter)
        if q.distortion <= coarse_factor * measure.resolution ** r:
            raise ResolutionTooCoarse(
                f"n={n}: distortion {q.distortion:.3e} is within {coarse_factor}x of "
                f"resolution**r = {measure.resolution ** r:.3e}")
        results.append(q)
        levels.append(j)
        res_list.append(measure.resolution)
    dist = np.array([q.distortion for q in results])
    err = dist ** (1.0 / r)
    ns_arr = np.array(ns, dtype=float)
    slope, intercept, half = _fit_slope(np.log(ns_arr), -np.log(err))
    coeff = None if s_probe is None else ns_arr ** (r / s_probe) * dist
    return DimensionFit(ns_arr, err, dist, tuple(levels), np.array(res_list), float(slope),
                        float(intercept), half, r, s_probe, coeff, tuple(results))


def write_fit_csv(fit: DimensionFit, fh) -> None:
    """Rows ``n;distortion;e_n_r;coeff_at_s`` (empty coefficient without ``s_probe``)."""
    writer = csv.writer(fh, delimiter=";", lineterminator="\n")
    writer.writerow(["n", "distortion", "e_n_r", "coeff_at_s"])
    for k, n in enumerate(fit.ns):
        coeff = "" if fit.coefficients is None else repr(float(fit.coefficients[k]))
        writer.writerow([int(n), repr(float(fit.distortions[k])), repr(float(fit.errors[k])), coeff])
