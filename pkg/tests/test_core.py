import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_system
from gdquant.core import (
    antichain_from_words,
    antichain_refine_bound,
    build_lambda,
    check_antichain,
    format_word,
    is_admissible,
    lambda_log_weights,
    load_config,
    omega,
    parse_word,
    system_to_config,
    validate_system,
    word_concat,
    word_weights,
    write_antichain_csv,
)
from gdquant.errors import (
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
from gdquant.fixtures import example2_system, homogeneous_system
from oracles import brute_lambda, brute_words

GOOD_P = [[0.5, 0.5], [0.5, 0.5]]
GOOD_C = [[0.3, 0.3], [0.3, 0.3]]


# ---------------------------------------------------------------- validation

def test_valid_system_is_frozen():
    s = validate_system(GOOD_P, GOOD_C, [0.5, 0.5], 1)
    assert s.n == 2 and s.order_r == 1.0
    with pytest.raises(ValueError):
        s.transition[0, 0] = 0.1


@pytest.mark.parametrize("P, C, chi, exc", [
    ([[0.5, 0.6], [0.5, 0.5]], GOOD_C, [0.5, 0.5], RowNotStochastic),
    ([[1.0, 0.0], [0.5, 0.5]], [[0.3, 0.0], [0.3, 0.3]], [0.5, 0.5], FanOutBelowTwo),
    (GOOD_P, [[0.3, 0.0], [0.3, 0.3]], [0.5, 0.5], RatioSupportMismatch),
    (GOOD_P, [[0.3, 1.0], [0.3, 0.3]], [0.5, 0.5], RatioOutOfRange),
    (GOOD_P, GOOD_C, [1.0, 0.0], InitialNotPositiveProbability),
    (GOOD_P, GOOD_C, [0.4, 0.4], InitialNotPositiveProbability),
])
def test_each_violation_kind(P, C, chi, exc):
    with pytest.raises(exc):
        validate_system(P, C, chi, 1)


def test_all_violations_are_reported():
    P = [[1.0, 0.0], [0.5, 0.6]]
    C = [[0.3, 0.2], [0.3, 1.5]]
    with pytest.raises(ValidationError) as info:
        validate_system(P, C, [1.0, 0.0], 1)
    kinds = set(info.value.kinds)
    assert {"RowNotStochastic", "FanOutBelowTwo", "RatioSupportMismatch", "RatioOutOfRange",
            "InitialNotPositiveProbability"} <= kinds


def test_row_sum_tolerance():
    validate_system([[0.5, 0.5 + 5e-13], [0.5, 0.5]], GOOD_C, [0.5, 0.5], 1)
    with pytest.raises(RowNotStochastic):
        validate_system([[0.5, 0.5 + 1e-9], [0.5, 0.5]], GOOD_C, [0.5, 0.5], 1)


@pytest.mark.parametrize("r", [0, -1, float("nan"), "x"])
def test_bad_order(r):
    with pytest.raises(ValidationError):
        validate_system(GOOD_P, GOOD_C, [0.5, 0.5], r)


def test_shape_errors():
    with pytest.raises(ValidationError):
        validate_system([[1.0]], [[0.5]], [1.0], 1)
    with pytest.raises(ValidationError):
        validate_system(GOOD_P, [[0.3, 0.3]], [0.5, 0.5], 1)


def test_load_config_variants(tmp_path):
    s = example2_system()
    doc = system_to_config(s, separation_t=0.5)
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(doc))
    for source in (doc, json.dumps(doc), path, str(path)):
        loaded, t = load_config(source)
        assert t == 0.5
        np.testing.assert_array_equal(loaded.transition, s.transition)
        np.testing.assert_array_equal(loaded.ratios, s.ratios)
    loaded, t = load_config(system_to_config(s))
    assert t is None


def test_load_config_missing_keys():
    with pytest.raises(ValidationError, match="missing"):
        load_config({"order_r": 1})


# ---------------------------------------------------------------- words

def test_word_weights_example2():
    s = example2_system()
    ww = word_weights(s, (0, 1, 2, 3))
    assert ww.mass_product == pytest.approx(0.25 * 0.5 * 0.5, rel=1e-14)
    assert ww.ratio_product == pytest.approx(0.25 * 0.125 * 0.125, rel=1e-14)
    assert ww.measure == pytest.approx(0.25 * 0.0625, rel=1e-14)
    assert word_weights(s, (2,)).log_weight == 0.0


def test_inadmissible_word():
    s = example2_system()
    assert not is_admissible(s, (2, 0))
    assert not is_admissible(s, (0, 7))
    with pytest.raises(InadmissibleWord):
        word_weights(s, (2, 0))


def test_word_concat():
    s = example2_system()
    assert word_concat(s, (0, 1), (2, 3)) == (0, 1, 2, 3)
    with pytest.raises(InadmissibleJunction):
        word_concat(s, (2,), (1,))


def test_word_text_roundtrip():
    assert format_word((0, 2, 3)) == "1-3-4"
    assert parse_word("1-3-4") == (0, 2, 3)
    assert parse_word(format_word(())) == ()


# ---------------------------------------------------------------- antichains

def test_homogeneous_level_one_is_all_words_of_length_three():
    s = homogeneous_system()
    chain = build_lambda(s, 1)
    assert chain.cardinality == 8
    assert list(chain.words) == brute_words(s.support, 3)
    # p*c == eta exactly: length-2 words sit on the threshold and are not members
    assert set(chain.lengths) == {3}


def test_example2_level_three():
    s = example2_system()
    chain = build_lambda(s, 3)
    assert chain.cardinality == 128
    assert set(chain.lengths) == {5}
    eta = s.eta
    assert eta == pytest.approx(1 / 32, rel=1e-15)
    w = np.exp(chain.log_weight)
    assert (w > eta ** 4).all() and (w <= eta ** 3).all()
    assert check_antichain(s, chain) == (True, True)


@pytest.mark.parametrize("seed", range(12))
def test_build_lambda_matches_exact_enumeration(seed):
    rng = np.random.default_rng(seed)
    s = random_system(rng, n=int(rng.integers(2, 5)), r=float(rng.choice([1.0, 2.0])),
                      ratio_range=(0.2, 0.7))
    for j in (1, 2):
        words, eta = brute_lambda(s.transition, s.ratios, s.order_r, j)
        chain = build_lambda(s, j)
        assert list(chain.words) == words
        assert s.eta == pytest.approx(float(eta), rel=1e-14)


def test_start_and_within_restrictions():
    s = example2_system()
    chain = build_lambda(s, 2, start=2)
    words, _ = brute_lambda(s.transition, s.ratios, 1, 2, roots=[2])
    assert list(chain.words) == words
    inner = build_lambda(s, 2, within=[2, 3])
    assert all(set(w) <= {2, 3} for w in inner.words)
    assert check_antichain(s, inner) == (True, True)
    triangle = validate_system(0.5 * (1 - np.eye(3)), 0.3 * (1 - np.eye(3)), [1 / 3] * 3, 1)
    with pytest.raises(ValueError):
        build_lambda(triangle, 2, within=[0])


def test_level_must_be_positive():
    with pytest.raises(ValueError):
        build_lambda(homogeneous_system(), 0)
    with pytest.raises(ValueError):
        build_lambda(homogeneous_system(), 1.5)


def test_cap_exceeded_and_partial():
    s = homogeneous_system()
    with pytest.raises(CapExceeded) as info:
        build_lambda(s, 3, cap=10)
    assert info.value.partial_count <= 10
    part = build_lambda(s, 3, cap=10, allow_partial=True)
    assert not part.complete and part.cardinality <= 10


def test_words_free_weights_match():
    s = example2_system()
    for j in (1, 2, 3, 4):
        chain = build_lambda(s, j)
        lw = lambda_log_weights(s, j)
        np.testing.assert_allclose(np.sort(lw), np.sort(chain.log_weight), rtol=1e-13)
        assert math.fsum(np.exp(lw)) == pytest.approx(math.fsum(np.exp(chain.log_weight)), rel=1e-13)
    with pytest.raises(CapExceeded):
        lambda_log_weights(s, 4, cap=100)


def test_omega_matches_enumeration():
    s = example2_system()
    for k in (1, 2, 4):
        chain = omega(s, k)
        assert list(chain.words) == brute_words(s.support, k)
        assert check_antichain(s, chain) == (True, True)
    with pytest.raises(CapExceeded):
        omega(s, 12, cap=1000)


def test_check_antichain_detects_problems():
    s = homogeneous_system()
    not_free = antichain_from_words(s, [(0,), (0, 1), (1,)])
    assert check_antichain(s, not_free)[0] is False
    gap = antichain_from_words(s, [(0, 0), (1,)], roots=(0, 1))
    assert check_antichain(s, gap) == (True, False)


def test_refine_bound():
    for s in (homogeneous_system(), example2_system()):
        for j in (1, 2, 3):
            ratio, bound, n1 = antichain_refine_bound(s, j)
            assert 1 <= ratio <= bound
            assert n1 >= 1


def test_antichain_csv():
    s = homogeneous_system()
    buf = io.StringIO()
    write_antichain_csv(build_lambda(s, 1), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "word;length;p_sigma;c_sigma;measure"
    assert len(lines) == 9
    word, length, p, c, mu = lines[1].split(";")
    assert word == "1-1-1" and length == "3"
    assert float(p) == pytest.approx(0.25) and float(c) == pytest.approx(1 / 9)
    assert float(mu) == pytest.approx(1 / 8)


# ---------------------------------------------------------------- properties

@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), j=st.integers(1, 3))
def test_lambda_is_a_maximal_antichain_in_its_window(seed, j):
    s = random_system(np.random.default_rng(seed), n=int(seed % 3) + 2, ratio_range=(0.2, 0.7))
    chain = build_lambda(s, j, cap=200_000)
    assert check_antichain(s, chain) == (True, True)
    lw = chain.log_weight
    thr = j * s.log_eta
    assert (lw < thr + 1e-9).all()
    assert (lw >= thr + s.log_eta - 1e-9).all()
    # parents are at or above the threshold
    for w in chain.words[:50]:
        if len(w) > 1:
            assert word_weights(s, w[:-1]).log_weight >= thr - 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_level_cardinality_is_monotone(seed):
    s = random_system(np.random.default_rng(seed), n=3, ratio_range=(0.3, 0.7))
    phis = [build_lambda(s, j).cardinality for j in (1, 2, 3)]
    assert phis == sorted(phis)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_level_measures_sum_to_one(seed):
    s = random_system(np.random.default_rng(seed), n=3, ratio_range=(0.3, 0.7))
    chain = build_lambda(s, 2)
    assert math.fsum(chain.measure) == pytest.approx(1.0, abs=1e-12)
