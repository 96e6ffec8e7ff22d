"""Spectral radius of the weighted transition matrix and the dimension root.

For an exponent ``x`` the matrix ``A(x)`` has entries ``(p_ij c_ij**r)**x`` on
the edges of the graph and zeros elsewhere.  The dimension matrix used for
quantization is ``A(s / (s + r))``; its spectral radius ``Psi(s)`` is
continuous and strictly decreasing, and the quantization dimension is the
unique ``s_r`` with ``Psi(s_r) = 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergence, SolverError, TrivialComponent
from .graph import ComparabilityVerdict, SccDecomposition, comparability, scc_decompose, \
    strongly_connected_components

POWER_SHIFT = 1.0
POWER_MAX_ITER = 100_000
TIE_TOL = 1e-7
FACTOR_TOL = 1e-8


class Classification(str, enum.Enum):
    FINITE_UPPER_POSITIVE_LOWER = "FiniteUpperAndPositiveLower"
    LOWER_COEFFICIENT_INFINITE = "LowerCoefficientInfinite"


def build_matrix(system, x: float, vertices=None) -> np.ndarray:
    """``(p_ij c_ij**r)**x`` on edges, 0 elsewhere; ``x = 0`` gives the
    adjacency matrix.  ``vertices`` selects a principal submatrix."""
    if x < 0:
        raise ValueError("exponent must be non-negative")
    m = np.where(system.support, np.exp(x * np.where(system.support, system.log_weights, 0.0)), 0.0)
    if vertices is not None:
        idx = list(vertices)
        m = m[np.ix_(idx, idx)]
    return m


def dimension_matrix(system, s: float, vertices=None) -> np.ndarray:
    """``A(s / (s + r))``, the matrix whose radius is ``Psi(s)``."""
    return build_matrix(system, s / (s + system.order_r), vertices)


def power_iteration(m, tol=1e-13, max_iter=POWER_MAX_ITER, shift=POWER_SHIFT, x0=None):
    """Perron root and right eigenvector of an irreducible non-negative matrix.

    Iterates on ``m + shift*I`` (primitive, so periodic ``m`` converges too)
    and stops when the Collatz-Wielandt bracket ``min(Bx/x) <= rho(B) <=
    max(Bx/x)`` is narrower than ``tol`` relative.  Returns ``(rho, x, iters)``
    with ``x`` positive and summing to one.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    b = m + shift * np.eye(n)
    x = np.full(n, 1.0 / n) if x0 is None else np.asarray(x0, dtype=float) / np.sum(x0)
    for it in range(1, max_iter + 1):
        y = b @ x
        ratio = y / x
        lo, hi = ratio.min(), ratio.max()
        x = y / y.sum()
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi) - shift, x, it
    raise NonConvergence(f"power iteration did not reach tol={tol} in {max_iter} iterations "
                         f"(bracket width {hi - lo:.3e})")


def _direct_radius(m, tol, max_iter, shift):
    # whole-matrix iteration; converges geometrically unless two blocks share
    # the top radius in a chain (Jordan block)
    n = m.shape[0]
    b = m + shift * np.eye(n)
    x = np.full(n, 1.0 / n)
    lam = 0.0
    for _ in range(max_iter):
        y = b @ x
        lam_new = y.sum()
        x_new = y / lam_new
        if np.abs(x_new - x).max() <= tol and abs(lam_new - lam) <= tol * lam_new:
            return lam_new - shift
        x, lam = x_new, lam_new
    raise NonConvergence(f"direct power iteration did not reach tol={tol} in {max_iter} iterations")


def spectral_radius(m, tol=1e-13, *, method="blocks", max_iter=POWER_MAX_ITER) -> float:
    """Spectral radius of a non-negative square matrix.

    ``method="blocks"`` permutes to SCC block-triangular form and takes the
    largest Perron root among the irreducible diagonal blocks; it is robust to
    equal-radius blocks chained together.  ``method="direct"`` runs shifted
    power iteration on the whole matrix and may raise :class:`NonConvergence`
    on such Jordan-type configurations.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if (m < 0).any():
        raise ValueError("matrix must be non-negative")
    if method == "direct":
        return _direct_radius(m, tol, max_iter, POWER_SHIFT)
    if method != "blocks":
        raise ValueError(f"unknown method {method!r}")
    best = 0.0
    for comp in strongly_connected_components(m > 0):
        if len(comp) == 1:
            best = max(best, float(m[comp[0], comp[0]]))
        else:
            rho, _, _ = power_iteration(m[np.ix_(comp, comp)], tol, max_iter)
            best = max(best, rho)
    return best


def perron_vectors(m, tol=1e-13):
    """``(rho, right, left)`` for an irreducible matrix, vectors summing to 1."""
    rho, right, _ = power_iteration(m, tol)
    _, left, _ = power_iteration(np.asarray(m).T, tol)
    return rho, right, left


class _Psi:
    """``Psi`` restricted to a vertex set, evaluated blockwise with warm starts."""

    def __init__(self, system, vertices, tol):
        self.system = system
        self.vertices = list(range(system.n)) if vertices is None else sorted(vertices)
        self.tol = tol
        sub = system.support[np.ix_(self.vertices, self.vertices)]
        self.blocks = [b for b in strongly_connected_components(sub)
                       if len(b) > 1 or sub[b[0], b[0]]]
        lw = np.where(system.support, system.log_weights, 0.0)[np.ix_(self.vertices, self.vertices)]
        self.block_logw = [lw[np.ix_(b, b)] for b in self.blocks]
        self.block_mask = [sub[np.ix_(b, b)] for b in self.blocks]
        self.guess = [None] * len(self.blocks)

    def block_radii(self, s):
        x = s / (s + self.system.order_r)
        out = []
        for k, (lw, mask) in enumerate(zip(self.block_logw, self.block_mask)):
            m = np.where(mask, np.exp(x * lw), 0.0)
            if m.shape[0] == 1:
                out.append(float(m[0, 0]))
                continue
            rho, vec, _ = power_iteration(m, self.tol, x0=self.guess[k])
            self.guess[k] = vec
            out.append(rho)
        return out

    def __call__(self, s):
        radii = self.block_radii(s)
        return max(radii) if radii else 0.0


def solve_sr(system, vertices=None, tol=1e-12, *, power_tol=1e-14) -> float:
    """Unique ``s > 0`` with ``Psi(s) = 1`` on the given vertex set (default: all).

    Bisection on ``[0, r]``, doubling the upper end until ``Psi < 1``; stops
    when the bracket is narrower than ``tol * (1 + s)``.  A vertex set whose
    adjacency radius is exactly 1 (a plain cycle or a single self-loop) has
    ``Psi(0) = 1`` and returns ``0.0``.  A single vertex without a loop raises
    :class:`TrivialComponent`.
    """
    psi = _Psi(system, vertices, power_tol)
    if not psi.blocks:
        raise TrivialComponent(f"vertex set {_label(psi.vertices)} carries no cycle; no root exists")
    at_zero = psi(0.0)
    if at_zero <= 1.0 + 1e-12:
        return 0.0
    if vertices is None and at_zero < 2.0 - 1e-9:
        raise SolverError(f"Psi(0) = {at_zero} < 2 contradicts fan-out >= 2")
    lo, hi = 0.0, float(system.order_r)
    for _ in range(200):
        if psi(hi) < 1.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise SolverError("could not bracket the root of Psi(s) = 1")
    while hi - lo > tol * (1.0 + lo):
        mid = 0.5 * (lo + hi)
        if psi(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def psi(system, s, vertices=None, tol=1e-14) -> float:
    """``Psi(s)``: spectral radius of ``A(s/(s+r))`` on the vertex set."""
    return _Psi(system, vertices, tol)(s)


def _label(vertices):
    return "{" + ",".join(str(v + 1) for v in vertices) + "}"


def self_similar_kr(probabilities, ratios, r, tol=1e-12) -> float:
    """Root ``k`` of ``sum (q_i s_i**r)**(k/(k+r)) = 1`` for a self-similar measure."""
    q = np.asarray(probabilities, dtype=float)
    c = np.asarray(ratios, dtype=float)
    if q.shape != c.shape or (q <= 0).any() or abs(q.sum() - 1) > 1e-12:
        raise ValueError("probabilities must be a positive probability vector matching ratios")
    if ((c <= 0) | (c >= 1)).any():
        raise ValueError("ratios must lie in (0, 1)")
    logw = np.log(q) + r * np.log(c)

    def f(k):
        return math.fsum(np.exp(k / (k + r) * logw)) - 1.0

    lo, hi = 0.0, float(r)
    while f(hi) >= 0:
        lo, hi = hi, 2 * hi
    while hi - lo > tol * (1 + lo):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def factor_determinants(system, dec: SccDecomposition, s: float):
    """``det(I - A_G)`` and the product of ``det(I - A_H)`` over components.

    Trivial components contribute ``det(1 - 0) = 1``.
    """
    full = dimension_matrix(system, s)
    det_full = float(np.linalg.det(np.eye(system.n) - full))
    prod = 1.0
    for comp in dec.components:
        block = full[np.ix_(comp, comp)]
        prod *= float(np.linalg.det(np.eye(len(comp)) - block))
    return det_full, prod


@dataclass(frozen=True, eq=False)
class SpectralReport:
    s_r: float
    per_component: tuple
    class_m: tuple
    verdict: ComparabilityVerdict
    classification: Classification
    perron_right: dict
    perron_left: dict
    component_deltas: dict
    delta_bounds: tuple | None
    uniform_bounds: tuple
    factor_gap: float
    tie_tol: float = TIE_TOL
    order_r: float = field(default=1.0)

    @property
    def dimension(self) -> float:
        return self.s_r

    @property
    def exponent(self) -> float:
        """``s_r / (s_r + r)``, the exponent used in normalized antichain sums."""
        return self.s_r / (self.s_r + self.order_r)

    def to_json(self, dec: SccDecomposition) -> dict:
        comps = []
        for k, comp in enumerate(dec.components):
            comps.append({
                "vertices": [v + 1 for v in comp],
                "trivial": bool(dec.trivial[k]),
                "s_r_h": self.per_component[k],
                "in_M": k in self.class_m,
            })
        witness_pairs = []
        for (a, b), rel in sorted(self.verdict.pairwise.items()):
            w = self.verdict.witness_paths.get((a, b))
            witness_pairs.append({"a": a + 1, "b": b + 1, "relation": rel,
                                  "witness": None if w is None else [v + 1 for v in w]})
        return {
            "s_r": self.s_r,
            "dimension": self.dimension,
            "order_r": self.order_r,
            "components": comps,
            "classification": self.classification.value,
            "delta_bounds": None if self.delta_bounds is None else list(self.delta_bounds),
            "component_delta_bounds": {str(k + 1): list(v) for k, v in sorted(self.component_deltas.items())},
            "uniform_bounds": list(self.uniform_bounds),
            "factor_gap": self.factor_gap,
            "witness_pairs": witness_pairs,
        }


def classify(system, dec: SccDecomposition | None = None, tol=1e-12, tie_tol=TIE_TOL) -> SpectralReport:
    """Dimension root, per-component roots, the maximal class and its verdict.

    The maximal class collects the components whose root is within
    ``tie_tol`` (relative) of the global one.  If any two of them are
    comparable the lower quantization coefficient is infinite; otherwise both
    coefficients are positive and finite.
    """
    if dec is None:
        dec = scc_decompose(system)
    r = system.order_r
    per = []
    for k, comp in enumerate(dec.components):
        per.append(None if dec.trivial[k] else solve_sr(system, comp, tol))
    s_r = solve_sr(system, None, tol)
    s_max = max(v for v in per if v is not None)
    gap = abs(s_r - s_max)
    if gap >= FACTOR_TOL:
        raise SolverError(f"global root {s_r} differs from the largest component root {s_max} by {gap:.3e}")
    class_m = tuple(k for k, v in enumerate(per) if v is not None and s_r - v <= tie_tol * s_r)
    verdict = comparability(dec, class_m)
    classification = (Classification.FINITE_UPPER_POSITIVE_LOWER if verdict.all_incomparable
                      else Classification.LOWER_COEFFICIENT_INFINITE)

    right, left, deltas = {}, {}, {}
    m1, m2 = math.inf, 0.0
    for k in dec.nontrivial:
        comp = dec.components[k]
        if len(comp) == 1:
            xi = np.ones(1)
            w = np.ones(1)
        else:
            _, xi, w = perron_vectors(dimension_matrix(system, per[k], comp))
        m1 = min(m1, float(xi.min() / xi.max()))
        m2 = max(m2, float(1.0 / xi.min()))
        if k in class_m:
            right[k], left[k] = xi, w
            deltas[k] = (float(1.0 / xi.max()), float(1.0 / xi.min()))
    delta_bounds = deltas[0] if dec.is_irreducible else None
    return SpectralReport(s_r, tuple(per), class_m, verdict, classification, right, left, deltas,
                          delta_bounds, (m1, m2), gap, tie_tol, r)
