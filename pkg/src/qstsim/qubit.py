"""Single-qubit model restricted to the Bloch xz-plane.

Every state handled by the simulator is of the form
cos(theta/2)|0> + sin(theta/2)|1>, so one angle is a complete
description (global phase is dropped; it never affects a measurement
statistic computed here). Rotations about the y-axis add angles,
measurement is a Bernoulli draw on prob_zero, and collapse lands on
theta = 0 or theta = pi exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Absolute tolerance for angle comparisons after mod-2pi reduction.
# A qubit undergoes at most a handful of rotations per protocol run,
# so accumulated error stays far below this.
ANGLE_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class QubitState:
    """A pure xz-plane state, stored as an angle in [0, 2*pi)."""

    theta: float

    def __post_init__(self) -> None:
        t = self.theta
        if not math.isfinite(t):
            raise ValueError(f"qubit angle must be finite, got {t!r}")
        t = t % TWO_PI
        if t >= TWO_PI:  # float mod can round up to the divisor
            t = 0.0
        object.__setattr__(self, "theta", t)


@dataclass(frozen=True, slots=True)
class MeasurementOutcome:
    """Observed bit plus the state the qubit collapsed to."""

    bit: int
    collapsed: QubitState


ZERO = QubitState(0.0)
ONE = QubitState(math.pi)


def rotate(state: QubitState, angle: float) -> QubitState:
    """Rotate about the y-axis: theta -> (theta + angle) mod 2*pi."""
    if not math.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle!r}")
    return QubitState(state.theta + angle)


def rotate_adjoint(state: QubitState, angle: float) -> QubitState:
    """Inverse rotation; identical to rotate(state, -angle)."""
    if not math.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle!r}")
    return QubitState(state.theta - angle)


def prob_zero(state: QubitState) -> float:
    """Probability of reading 0 in the computational basis.

    Computed as (1 + cos(theta)) / 2, which equals cos^2(theta/2) but
    is exact at the poles: prob_zero(ZERO) == 1.0 and
    prob_zero(ONE) == 0.0 with no rounding residue.
    """
    return 0.5 * (1.0 + math.cos(state.theta))


def measure(state: QubitState, rng: np.random.Generator) -> MeasurementOutcome:
    """Projective computational-basis measurement.

    Consumes exactly one uniform draw from ``rng``. The outcome bit is 0
    with probability prob_zero(state); the qubit collapses to ZERO or
    ONE accordingly.
    """
    if rng.random() < prob_zero(state):
        return MeasurementOutcome(0, ZERO)
    return MeasurementOutcome(1, ONE)


def angles_close(a: float, b: float, tol: float = ANGLE_TOL) -> bool:
    """Compare two angles modulo 2*pi (shortest circular distance)."""
    d = (a - b) % TWO_PI
    return d <= tol or TWO_PI - d <= tol
