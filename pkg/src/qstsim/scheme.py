"""The public angle set both parties agree on.

A scheme of size n consists of the angles 2*k*pi/n with uniform
selection probabilities 1/n. That prescription is what makes an
intercepted qubit look like a fair coin to an eavesdropper no matter
how she rotates it first (``balance_check`` returns the residual of
that balance condition). n = 2 is constructible because the simulator
needs it to demonstrate the orthogonal-states break, but it is flagged
insecure; production use wants n = 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * math.pi

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class AngleScheme:
    n: int
    angles: tuple[float, ...]
    probs: tuple[float, ...]
    is_secure: bool

    def __post_init__(self) -> None:
        if self.n < 1 or len(self.angles) != self.n or len(self.probs) != self.n:
            raise ValueError("scheme angle/probability lists must match n >= 1")
        if any(p < 0.0 for p in self.probs):
            raise ValueError("selection probabilities must be non-negative")
        if abs(math.fsum(self.probs) - 1.0) > PROB_SUM_TOL:
            raise ValueError("selection probabilities must sum to 1")

    @cached_property
    def uniform(self) -> bool:
        return all(abs(p - 1.0 / self.n) <= PROB_SUM_TOL for p in self.probs)


def make_scheme(n: int) -> AngleScheme:
    """Build the uniform scheme {2*k*pi/n : k = 0..n-1}, p_k = 1/n.

    Requires n >= 2. Schemes with n = 2 are constructible (the two
    angles are orthogonal states, which an eavesdropper distinguishes
    with certainty) but carry is_secure = False; confidentiality needs
    n > 2.
    """
    if n < 2:
        raise ValueError(f"angle scheme needs n >= 2, got {n}")
    angles = tuple(TWO_PI * k / n for k in range(n))
    probs = tuple(1.0 / n for _ in range(n))
    return AngleScheme(n=n, angles=angles, probs=probs, is_secure=n > 2)


def custom_scheme(angles, probs=None) -> AngleScheme:
    """Construct an arbitrary (possibly skewed) scheme.

    Test and analysis helper only: protocol code should always receive
    schemes from make_scheme. Permits any angle list down to a single
    angle, and non-uniform probabilities, so oracles can demonstrate
    what breaks without the uniform prescription. Always flagged
    insecure.
    """
    angles = tuple(float(a) for a in angles)
    if probs is None:
        probs = tuple(1.0 / len(angles) for _ in angles)
    else:
        probs = tuple(float(p) for p in probs)
    return AngleScheme(n=len(angles), angles=angles, probs=probs, is_secure=False)


def sample_index(scheme: AngleScheme, rng: np.random.Generator) -> int:
    """Draw an angle index according to the scheme's probabilities."""
    if scheme.uniform:
        return int(rng.integers(scheme.n))
    u = rng.random()
    acc = 0.0
    for k, p in enumerate(scheme.probs):
        acc += p
        if u < acc:
            return k
    return scheme.n - 1


def balance_check(scheme: AngleScheme, alpha: float) -> float:
    """Residual of the intercept-indistinguishability condition.

    Returns sum_k p_k * cos(theta_k - alpha), which is the difference
    between the probability of an intercepted qubit reading 0 and
    reading 1 after the interceptor rotates by -alpha. Zero for every
    alpha exactly when the scheme hides the prepared angle.
    """
    return math.fsum(
        p * math.cos(t - alpha) for p, t in zip(scheme.probs, scheme.angles)
    )


def angle_vector_sum(scheme: AngleScheme) -> tuple[float, float]:
    """Probability-weighted sum of the xz-plane unit vectors.

    Both components vanish for the uniform 2*k*pi/n prescription; the
    balance residual is the dot product of this vector with the
    interceptor's direction.
    """
    z = math.fsum(p * math.cos(t) for p, t in zip(scheme.probs, scheme.angles))
    x = math.fsum(p * math.sin(t) for p, t in zip(scheme.probs, scheme.angles))
    return (z, x)
