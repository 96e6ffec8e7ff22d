"""Sums over antichains that control the quantization error.

For a finite maximal antichain ``L`` the *proxy* ``sum p_w c_w**r`` tracks the
r-th power quantization error with ``card(L)`` points, and the *normalized
sum* ``sum (p_w c_w**r)**(s/(s+r))`` at ``s = s_r`` stays bounded exactly when
the upper quantization coefficient is finite.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_CAP, SUM_CAP, Antichain, build_lambda, lambda_log_weights
from .errors import CapExceeded, IncompleteAntichain, InsufficientLevels
from .spectral import Classification, dimension_matrix

BOUNDED = "bounded"
INCREASING = "increasing"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class AntichainDiagnostics:
    level_j: int | None
    cardinality: int
    proxy: float
    normalized_sum: float
    exponent_s: float
    min_len: int
    max_len: int


def normalized_sum(chain: Antichain, s: float) -> float:
    """``sum (p_w c_w**r)**(s/(s+r))``, compensated summation in word order."""
    x = s / (s + chain.order_r)
    return math.fsum(np.exp(x * chain.log_weight))


def diagnostics(system, chain: Antichain, exponent_s: float) -> AntichainDiagnostics:
    if not chain.complete:
        raise IncompleteAntichain("diagnostics need a complete (uncapped) antichain")
    return AntichainDiagnostics(
        level_j=chain.level_j,
        cardinality=chain.cardinality,
        proxy=math.fsum(np.exp(chain.log_weight)),
        normalized_sum=normalized_sum(chain, exponent_s),
        exponent_s=float(exponent_s),
        min_len=chain.min_len,
        max_len=chain.max_len,
    )


@dataclass(frozen=True)
class ProxyEstimate:
    slope: float
    intercept: float
    residual: float
    levels: tuple
    cardinalities: tuple
    proxies: tuple


def proxy_dimension_estimate(system, j_range, cap=DEFAULT_CAP) -> ProxyEstimate:
    """Least-squares slope of ``log phi_j`` against ``-log(proxy_j**(1/r))``."""
    levels = list(j_range)
    if len(levels) < 4:
        raise InsufficientLevels(f"need at least 4 levels, got {len(levels)}")
    phis, proxies = [], []
    for j in levels:
        d = diagnostics(system, build_lambda(system, j, cap), 1.0)
        phis.append(d.cardinality)
        proxies.append(d.proxy)
    y = np.log(phis)
    xs = -np.log(proxies) / system.order_r
    slope, intercept = np.polyfit(xs, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * xs + intercept)) ** 2)))
    return ProxyEstimate(float(slope), float(intercept), resid, tuple(levels), tuple(phis), tuple(proxies))


@dataclass(frozen=True)
class GrowthSeries:
    ks: tuple
    values: tuple      # Q_k
    slope: float
    mid_mean: float
    last_mean: float
    verdict: str

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.values) > 0))


def trend_verdict(values, ks=None, flat_rtol=0.05):
    """``(verdict, slope, mid_mean, last_mean)`` for a finite series.

    The series is cut into four contiguous quarters.  It is *bounded* when the
    last quarter's mean is within ``flat_rtol`` of the mean of the two middle
    quarters, *increasing* when it is strictly monotone with positive fitted
    slope and not flat, and inconclusive otherwise.
    """
    q = np.asarray(values, dtype=float)
    ks = np.arange(len(q)) if ks is None else np.asarray(ks, dtype=float)
    parts = np.array_split(q, 4)
    mid = float(np.mean(np.concatenate(parts[1:3])))
    last = float(np.mean(parts[3]))
    slope = float(np.polyfit(ks, q, 1)[0])
    if abs(last - mid) <= flat_rtol * mid:
        verdict = BOUNDED
    elif np.all(np.diff(q) > 0) and slope > 0:
        verdict = INCREASING
    else:
        verdict = INCONCLUSIVE
    return verdict, slope, mid, last


def level_normalized_sum(system, k, s, cap=SUM_CAP) -> float:
    """Normalized sum over ``Lambda_k`` computed without materializing words."""
    x = s / (s + system.order_r)
    return math.fsum(np.exp(x * lambda_log_weights(system, k, cap)))


def growth_series(system, report, k_range, cap=SUM_CAP) -> GrowthSeries:
    """``Q_k``: normalized sums at the dimension root over the levels ``k``.

    ``fsum`` is correctly rounded, so each ``Q_k`` is independent of the
    order in which words are visited.
    """
    ks = list(k_range)
    if len(ks) < 4:
        raise InsufficientLevels(f"need at least 4 levels, got {len(ks)}")
    values = tuple(level_normalized_sum(system, k, report.s_r, cap) for k in ks)
    verdict, slope, mid, last = trend_verdict(values, ks)
    return GrowthSeries(tuple(ks), values, slope, mid, last, verdict)


def verdict_matches(series: GrowthSeries, classification: Classification) -> bool:
    if classification is Classification.FINITE_UPPER_POSITIVE_LOWER:
        return series.verdict == BOUNDED
    return series.verdict == INCREASING


@dataclass(frozen=True)
class DecayReport:
    f_vertices: tuple
    ns: tuple
    sums: tuple
    rate: float
    passed: bool

    @property
    def trivial(self) -> bool:
        return not self.f_vertices


def f_vertices(dec, report) -> tuple:
    in_m = {v for k in report.class_m for v in dec.components[k]}
    return tuple(v for v in range(len(dec.component_of)) if v not in in_m)


def f_decay_check(system, dec, report, n_range) -> DecayReport:
    """Geometric decay of normalized sums over words living entirely outside
    the maximal class.

    ``sum over F-words of length n = || A_F**(n-1) u ||_1`` with ``A_F`` the
    dimension matrix at ``s_r`` restricted to ``F``.  The rate is
    ``exp(slope)`` of a log-linear fit; it is 0 when the sums vanish.
    """
    fv = f_vertices(dec, report)
    ns = tuple(int(n) for n in n_range)
    if not fv:
        return DecayReport((), ns, (), 0.0, True)
    a = dimension_matrix(system, report.s_r, fv)
    u = np.ones(len(fv))
    sums = []
    for n in ns:
        sums.append(float(np.linalg.matrix_power(a, n - 1).dot(u).sum()))
    positive = [(n, s) for n, s in zip(ns, sums) if s > 0]
    if len(positive) < len(ns) or len(positive) < 2:
        rate = 0.0 if len(positive) < len(ns) else math.nan
    else:
        slope = np.polyfit([n for n, _ in positive], np.log([s for _, s in positive]), 1)[0]
        rate = float(math.exp(slope))
    return DecayReport(fv, ns, tuple(sums), rate, bool(rate < 1))


def write_diagnostics_csv(rows, fh) -> None:
    """Rows ``j;phi;l1;l2;proxy;normalized_sum;Q_k``.

    ``rows`` holds ``(AntichainDiagnostics, q_k)`` pairs.
    """
    writer = csv.writer(fh, delimiter=";", lineterminator="\n")
    writer.writerow(["j", "phi", "l1", "l2", "proxy", "normalized_sum", "Q_k"])
    for d, q in rows:
        writer.writerow([d.level_j, d.cardinality, d.min_len, d.max_len, repr(d.proxy),
                         repr(d.normalized_sum), repr(q)])
