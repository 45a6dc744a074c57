"""Public angle set: construction, sampling, and the balance condition."""

import math

import numpy as np
import pytest

from qstsim import (
    AngleScheme,
    angle_vector_sum,
    balance_check,
    custom_scheme,
    make_scheme,
    sample_index,
)

TWO_PI = 2.0 * math.pi


def test_make_scheme_three():
    s = make_scheme(3)
    assert s.n == 3
    assert s.angles == pytest.approx((0.0, TWO_PI / 3, 2 * TWO_PI / 3))
    assert s.probs == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    assert s.is_secure


def test_make_scheme_two_flagged_insecure():
    s = make_scheme(2)
    assert s.angles == pytest.approx((0.0, math.pi))
    assert not s.is_secure


def test_make_scheme_rejects_small_n():
    with pytest.raises(ValueError):
        make_scheme(1)
    with pytest.raises(ValueError):
        make_scheme(0)


def test_scheme_probability_validation():
    with pytest.raises(ValueError):
        AngleScheme(2, (0.0, 1.0), (0.6, 0.6), is_secure=False)
    with pytest.raises(ValueError):
        AngleScheme(2, (0.0, 1.0), (-0.5, 1.5), is_secure=False)
    with pytest.raises(ValueError):
        AngleScheme(2, (0.0,), (1.0,), is_secure=False)


def test_custom_scheme_allows_single_angle():
    s = custom_scheme([0.0])
    assert s.n == 1
    assert not s.is_secure


def test_sample_index_uniform_frequencies():
    s = make_scheme(3)
    rng = np.random.default_rng(42)
    trials = 300_000
    counts = np.bincount([sample_index(s, rng) for _ in range(trials)], minlength=3)
    assert np.all(np.abs(counts / trials - 1 / 3) < 0.01)


def test_sample_index_range_n2():
    s = make_scheme(2)
    rng = np.random.default_rng(1)
    assert {sample_index(s, rng) for _ in range(500)} == {0, 1}


def test_sample_index_replay_deterministic():
    s = make_scheme(5)
    rng1, rng2 = np.random.default_rng(123), np.random.default_rng(123)
    assert [sample_index(s, rng1) for _ in range(200)] == [
        sample_index(s, rng2) for _ in range(200)
    ]


def test_sample_index_skewed_frequencies():
    s = custom_scheme([0.0, 1.0], probs=[0.8, 0.2])
    rng = np.random.default_rng(5)
    trials = 100_000
    ones = sum(sample_index(s, rng) for _ in range(trials))
    assert abs(ones / trials - 0.2) < 0.01


def test_balance_zero_for_prescribed_scheme():
    s = make_scheme(3)
    for alpha in np.linspace(0.0, TWO_PI, 100, endpoint=False):
        assert abs(balance_check(s, alpha)) < 1e-12


def test_balance_n2_at_zero():
    # cos(0) + cos(-pi) = 0
    assert balance_check(make_scheme(2), 0.0) == pytest.approx(0.0, abs=1e-15)


def test_balance_skewed_residual():
    # hand evaluation: (cos 0 + cos(pi/3)) / 2 = 0.75
    s = custom_scheme([0.0, math.pi / 3])
    assert balance_check(s, 0.0) == pytest.approx(0.75, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 13))
def test_vector_sum_vanishes(n):
    z, x = angle_vector_sum(make_scheme(n))
    assert abs(z) < 1e-12 and abs(x) < 1e-12


def test_vector_sum_nonzero_when_skewed():
    z, x = angle_vector_sum(custom_scheme([0.0, math.pi / 3]))
    assert abs(z) > 0.1


def test_balance_equals_dot_product_form():
    s = make_scheme(4)
    skew = custom_scheme([0.2, 1.3, 2.9], probs=[0.5, 0.3, 0.2])
    rng = np.random.default_rng(9)
    for scheme in (s, skew):
        z, x = angle_vector_sum(scheme)
        for alpha in rng.uniform(0.0, TWO_PI, size=25):
            dot = z * math.cos(alpha) + x * math.sin(alpha)
            assert balance_check(scheme, alpha) == pytest.approx(dot, abs=1e-12)
