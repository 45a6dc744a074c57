"""Single-qubit model: rotation algebra, measurement statistics, collapse."""

import math

import numpy as np
import pytest

from qstsim import (
    ONE,
    ZERO,
    QubitState,
    angles_close,
    measure,
    prob_zero,
    rotate,
    rotate_adjoint,
)

TWO_PI = 2.0 * math.pi


def test_rotate_identity():
    assert rotate(QubitState(0.0), 0.0).theta == 0.0


def test_rotate_definition():
    assert rotate(QubitState(0.0), math.pi / 2).theta == pytest.approx(math.pi / 2)


def test_rotation_composition():
    # successive rotations add their angles
    composed = rotate(rotate(QubitState(0.0), 1.1), 2.3)
    assert composed.theta == pytest.approx(3.4, abs=1e-12)


@pytest.mark.parametrize("start", [0.0, 1.0, 3.0, 5.5])
@pytest.mark.parametrize("a,b", [(0.3, 0.4), (2.0, 5.0), (-1.2, 0.7), (6.0, 6.0)])
def test_composition_mod_two_pi(start, a, b):
    s = QubitState(start)
    assert angles_close(rotate(rotate(s, a), b).theta, (start + a + b) % TWO_PI, 1e-12)


@pytest.mark.parametrize("start", [0.0, 0.5, 2.0, 4.4, 6.2])
@pytest.mark.parametrize("angle", [0.0, 0.1, 1.7, math.pi, 5.9, 11.0])
def test_rotate_adjoint_inverts(start, angle):
    s = QubitState(start)
    assert angles_close(rotate_adjoint(rotate(s, angle), angle).theta, s.theta, 1e-12)


def test_rotate_adjoint_zero():
    assert rotate_adjoint(QubitState(math.pi), 0.0).theta == math.pi


def test_rotate_adjoint_decode_step():
    # undoing a known preparation rotation returns exactly to the pole
    assert rotate_adjoint(QubitState(2 * math.pi / 3), 2 * math.pi / 3).theta == 0.0


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_non_finite_angles_rejected(bad):
    with pytest.raises(ValueError):
        rotate(ZERO, bad)
    with pytest.raises(ValueError):
        rotate_adjoint(ZERO, bad)
    with pytest.raises(ValueError):
        QubitState(bad)


def test_theta_normalized_to_principal_range():
    for t in [-0.1, 7.0, -123.4, 1e-20, -1e-20, TWO_PI]:
        s = QubitState(t)
        assert 0.0 <= s.theta < TWO_PI


def test_prob_zero_poles_exact():
    assert prob_zero(ZERO) == 1.0
    assert prob_zero(ONE) == 0.0
    assert prob_zero(QubitState(math.pi / 2)) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("theta", np.linspace(0.0, TWO_PI, 17, endpoint=False))
def test_orthogonal_pair_probabilities(theta):
    assert prob_zero(QubitState(theta)) + prob_zero(QubitState(theta + math.pi)) == (
        pytest.approx(1.0, abs=1e-12)
    )


def test_measure_deterministic_at_poles():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        assert measure(ZERO, rng).bit == 0
        assert measure(ONE, rng).bit == 1


def test_measure_collapse_states():
    rng = np.random.default_rng(3)
    out = measure(QubitState(1.3), rng)
    assert out.collapsed in (ZERO, ONE)
    assert out.collapsed.theta == (0.0 if out.bit == 0 else math.pi)


def test_collapse_idempotent():
    rng = np.random.default_rng(4)
    for theta in [0.4, 2.0, 4.0]:
        first = measure(QubitState(theta), rng)
        for _ in range(50):
            again = measure(first.collapsed, rng)
            assert again.bit == first.bit
            assert again.collapsed == first.collapsed


def test_measure_frequency_matches_prob_zero_oracle():
    # oracle: prob_zero(2*pi/3) = cos^2(pi/3) = 1/4, computed by hand
    rng = np.random.default_rng(20260809)
    trials = 100_000
    state = QubitState(2 * math.pi / 3)
    zeros = sum(measure(state, rng).bit == 0 for _ in range(trials))
    assert abs(zeros / trials - 0.25) < 0.01


@pytest.mark.parametrize("theta", np.linspace(0.0, TWO_PI, 12, endpoint=False))
def test_measurement_statistics_within_band(theta):
    rng = np.random.default_rng(int(theta * 1000) + 17)
    trials = 100_000
    state = QubitState(theta)
    p = prob_zero(state)
    zeros = sum(measure(state, rng).bit == 0 for _ in range(trials))
    band = 4.0 * math.sqrt(p * (1.0 - p) / trials)
    assert abs(zeros / trials - p) <= max(band, 1e-12)


def test_measure_consumes_exactly_one_draw():
    a = np.random.default_rng(99)
    b = np.random.default_rng(99)
    measure(QubitState(1.0), a)
    b.random()
    assert a.random() == b.random()


def test_angles_close_wraps():
    assert angles_close(0.0, TWO_PI - 1e-12)
    assert angles_close(1e-13, -1e-13)
    assert not angles_close(0.0, 0.1)
