import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_system
from gdquant.core import build_lambda, omega
from gdquant.errors import IncompleteAntichain, InsufficientLevels
from gdquant.fixtures import example1_system, example2_system, homogeneous_system
from gdquant.graph import scc_decompose
from gdquant.measure import (
    BOUNDED,
    INCONCLUSIVE,
    INCREASING,
    diagnostics,
    f_decay_check,
    f_vertices,
    growth_series,
    level_normalized_sum,
    normalized_sum,
    proxy_dimension_estimate,
    trend_verdict,
    verdict_matches,
    write_diagnostics_csv,
)
from gdquant.spectral import classify

LOG2_LOG3 = math.log(2) / math.log(3)


def test_homogeneous_sums_are_exactly_two():
    s = homogeneous_system()
    sr = classify(s).s_r
    for j in range(1, 6):
        assert normalized_sum(build_lambda(s, j), sr) == pytest.approx(2.0, abs=1e-10)
    for k in range(1, 9):
        assert normalized_sum(omega(s, k), sr) == pytest.approx(2.0, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_sums_lie_between_perron_bounds(seed):
    s = random_system(np.random.default_rng(seed), n=3, irreducible=True, ratio_range=(0.2, 0.6))
    rep = classify(s)
    lo, hi = rep.delta_bounds
    for j in (1, 2, 3):
        v = normalized_sum(build_lambda(s, j, cap=200_000), rep.s_r)
        assert lo - 1e-9 <= v <= hi + 1e-9
    for k in (1, 2, 5):
        v = normalized_sum(omega(s, k), rep.s_r)
        assert lo - 1e-9 <= v <= hi + 1e-9


def test_diagnostics_fields():
    s = example2_system()
    d = diagnostics(s, build_lambda(s, 3), 1 / 3)
    assert (d.cardinality, d.min_len, d.max_len) == (128, 5, 5)
    assert d.proxy == pytest.approx(128 * 2.0 ** -16)
    assert d.normalized_sum == pytest.approx(128 * 2.0 ** -4)


def test_diagnostics_rejects_partial_chains():
    s = homogeneous_system()
    part = build_lambda(s, 4, cap=5, allow_partial=True)
    with pytest.raises(IncompleteAntichain):
        diagnostics(s, part, 0.5)


def test_proxy_estimate_homogeneous():
    est = proxy_dimension_estimate(homogeneous_system(), range(1, 7))
    assert est.slope == pytest.approx(LOG2_LOG3, abs=1e-10)
    assert est.residual < 1e-10
    with pytest.raises(InsufficientLevels):
        proxy_dimension_estimate(homogeneous_system(), range(1, 3))


@pytest.mark.parametrize("values, expected", [
    ([3.0] * 9, BOUNDED),
    ([1, 2, 3, 4, 5, 6, 7, 8, 9], INCREASING),
    ([1, 3, 2, 4, 3, 6, 4, 8, 5], INCONCLUSIVE),
    ([5.0, 4.0, 3.6, 3.3, 3.1, 3.05, 3.02, 3.01, 3.0], BOUNDED),
])
def test_trend_verdict(values, expected):
    assert trend_verdict(values)[0] == expected


def test_example2_growth_is_increasing():
    s = example2_system()
    rep = classify(s)
    g = growth_series(s, rep, range(2, 11))
    assert g.values == pytest.approx([7, 8, 10, 11, 12, 13, 15, 16, 17], rel=1e-10)
    assert g.strictly_increasing and g.verdict == INCREASING
    assert verdict_matches(g, rep.classification)


def test_example1_growth_is_bounded():
    s = example1_system(0)
    rep = classify(s)
    g = growth_series(s, rep, range(2, 11))
    assert g.verdict == BOUNDED
    assert verdict_matches(g, rep.classification)
    # block diagonal: words from each block form a maximal antichain of that block
    lo = sum(d[0] for d in rep.component_deltas.values())
    hi = sum(d[1] for d in rep.component_deltas.values())
    assert all(lo - 1e-9 <= v <= hi + 1e-9 for v in g.values)


def test_level_sum_matches_materialized_chain():
    s = example1_system(0)
    sr = classify(s).s_r
    for k in (1, 3):
        assert level_normalized_sum(s, k, sr) == pytest.approx(normalized_sum(build_lambda(s, k), sr),
                                                               rel=1e-12)


def test_growth_needs_four_levels():
    s = homogeneous_system()
    with pytest.raises(InsufficientLevels):
        growth_series(s, classify(s), range(2, 5))


def test_decay_outside_the_maximal_class():
    s = example1_system(0, second_scale=0.5)
    dec = scc_decompose(s)
    rep = classify(s, dec)
    assert f_vertices(dec, rep) == (2, 3, 4)
    dr = f_decay_check(s, dec, rep, range(1, 12))
    assert dr.passed and 0 < dr.rate < 1
    # the matrix-power sums equal explicit sums over F-words
    for n in (1, 2, 4):
        words = omega(s, n, within=(2, 3, 4))
        assert dr.sums[n - 1] == pytest.approx(normalized_sum(words, rep.s_r), rel=1e-12)


def test_decay_trivial_when_everything_is_maximal():
    s = example2_system()
    dec = scc_decompose(s)
    dr = f_decay_check(s, dec, classify(s, dec), range(1, 5))
    assert dr.trivial and dr.passed


def test_diagnostics_csv():
    s = homogeneous_system()
    d = diagnostics(s, build_lambda(s, 1), LOG2_LOG3)
    buf = io.StringIO()
    write_diagnostics_csv([(d, 2.0)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "j;phi;l1;l2;proxy;normalized_sum;Q_k"
    assert lines[1].startswith("1;8;3;3;")
