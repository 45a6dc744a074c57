"""Closed-form probability oracles and their Monte Carlo counterparts.

Three independent routes to every number: an analytic formula, an
exhaustive small-instance enumeration that sums measurement-branch
probabilities (no sampling), and seeded Monte Carlo estimates. The
test suite holds all three against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Optional, Sequence

import numpy as np

from .adversary import (
    EveStrategy,
    MeasureAll,
    MeasureRandom,
    Passive,
    ReplaceQubits,
    RotateMeasure,
)
from .qubit import QubitState, measure, prob_zero, rotate, rotate_adjoint
from .scheme import AngleScheme, sample_index


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate with its Bernoulli standard error."""

    value: float
    stderr: float
    trials: int

    @staticmethod
    def bernoulli(successes: int, trials: int) -> "Estimate":
        if trials < 1:
            raise ValueError("an estimate needs at least one trial")
        p = successes / trials
        return Estimate(p, math.sqrt(p * (1.0 - p) / trials), trials)

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "trials": self.trials}


def error_prob_general(scheme: AngleScheme, alpha: float) -> float:
    """Per-check detection probability for a rotate-by-(-alpha)-then-measure
    interceptor, for an arbitrary scheme.

    Sum over k of p_k * [sin^2(t_k/2) cos^2((t_k-a)/2)
                         + cos^2(t_k/2) sin^2((t_k-a)/2)].
    """
    terms = []
    for p, t in zip(scheme.probs, scheme.angles):
        c_half = math.cos(t / 2.0) ** 2
        s_half = 1.0 - c_half
        c_shift = math.cos((t - alpha) / 2.0) ** 2
        s_shift = 1.0 - c_shift
        terms.append(p * (s_half * c_shift + c_half * s_shift))
    return math.fsum(terms)


def error_prob_uniform(n: int, alpha: float) -> float:
    """Closed form of error_prob_general for the uniform scheme, n > 2.

    The k-sum telescopes to 1/2 - cos(alpha)/4 independently of n, with
    minimum 1/4 at alpha = 0. The reduction genuinely needs n > 2: with
    two angles the interceptor's measurement can be invisible.
    """
    if n <= 2:
        raise ValueError("the n-independent closed form requires n > 2")
    return 0.5 - 0.25 * math.cos(alpha)


def undetected_prob(N: int, M: int, L: int, Pe: float) -> float:
    """Probability a random-L-slot inspection leaves the frame verifiable.

    Hypergeometric mixture over how many of the L inspected slots were
    check qubits: sum_k (1-Pe)^k C(N, L-k) C(M, k) / C(M+N, L).
    Binomials are evaluated in exact integer arithmetic. Special cases:
    L = N+M gives (1-Pe)^M, L = 1 gives 1 - M*Pe/(N+M).
    """
    if N < 0 or M < 0:
        raise ValueError("slot counts must be non-negative")
    if not 0 <= L <= N + M:
        raise ValueError(f"inspection count must be in [0, {N + M}], got {L}")
    if not 0.0 <= Pe <= 1.0:
        raise ValueError("per-check detection probability must be in [0, 1]")
    denom = math.comb(M + N, L)
    total = 0.0
    for k in range(L + 1):
        ways = math.comb(N, L - k) * math.comb(M, k)
        if ways:
            total += (1.0 - Pe) ** k * (ways / denom)
    return total


def replace_success_prob(N: int, M: int, L: int) -> float:
    """Probability that L uniformly guessed slots avoid every check qubit.

    C(N, L) / C(M+N, L): the blind-substitution attacker is lucky
    exactly when her guess lands entirely on payload slots.
    """
    if N < 0 or M < 0:
        raise ValueError("slot counts must be non-negative")
    if not 0 <= L <= N:
        raise ValueError(f"replacement count must be in [0, {N}], got {L}")
    return math.comb(N, L) / math.comb(M + N, L)


def eve_bit_bias(
    scheme: AngleScheme, alpha: float, trials: int, rng: np.random.Generator
) -> Estimate:
    """Empirical P(Z=0) for an interceptor on outbound qubits.

    Simulates the outbound leg directly: prepare a qubit at a
    scheme-drawn angle (data fixed at 0), rotate by -alpha, measure.
    For a balanced scheme the estimate sits at 1/2 for every alpha;
    for a skewed or two-angle scheme it does not, which is the leak.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    zeros = 0
    angles = scheme.angles
    if scheme.uniform:
        indices = rng.integers(scheme.n, size=trials)
    else:
        indices = [sample_index(scheme, rng) for _ in range(trials)]
    for k in indices:
        state = rotate(QubitState(angles[k]), -alpha)
        if measure(state, rng).bit == 0:
            zeros += 1
    return Estimate.bernoulli(zeros, trials)


def sample_intercept_pairs(
    scheme: AngleScheme, alpha: float, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized (data bit, intercepted bit) samples for the return leg.

    Each row: Bob's uniform data bit X encoded as a half-turn on a
    scheme-angle qubit, then measured by an interceptor who first
    rotates by -alpha. Batched for entropy estimation at large trial
    counts; the distribution is the same one the per-qubit simulation
    produces.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if scheme.uniform:
        k = rng.integers(scheme.n, size=trials)
    else:
        k = rng.choice(scheme.n, size=trials, p=np.asarray(scheme.probs))
    angles = np.asarray(scheme.angles)[k]
    x = rng.integers(2, size=trials)
    theta = angles + math.pi * x - alpha
    p_zero = 0.5 * (1.0 + np.cos(theta))
    z = (rng.random(trials) >= p_zero).astype(np.int64)
    return np.column_stack([x, z])


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        raise ValueError("empty sample")
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def empirical_conditional_entropy(pairs: Sequence) -> float:
    """Plug-in estimate of H(X|Z) in bits from (x, z) bit pairs."""
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("empty sample")
    arr = arr.reshape(-1, 2)
    joint = np.zeros((2, 2), dtype=np.int64)
    np.add.at(joint, (arr[:, 0], arr[:, 1]), 1)
    return _entropy_bits(joint.ravel()) - _entropy_bits(joint.sum(axis=0))


def empirical_mutual_information(pairs: Sequence) -> float:
    """Plug-in estimate of I(X;Z) in bits from (x, z) bit pairs."""
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        raise ValueError("empty sample")
    joint = np.zeros((2, 2), dtype=np.int64)
    np.add.at(joint, (arr[:, 0], arr[:, 1]), 1)
    return (
        _entropy_bits(joint.sum(axis=1))
        + _entropy_bits(joint.sum(axis=0))
        - _entropy_bits(joint.ravel())
    )


@dataclass
class DetectionCurve:
    """Per-check detection probability vs interceptor angle.

    Carries the analytic column next to the empirical one; a passing
    run has them agree within the Monte Carlo band at every point.
    """

    alphas: tuple[float, ...]
    closed_form: tuple[float, ...]
    empirical: tuple[Estimate, ...]

    def rows(self) -> list[dict]:
        return [
            {"alpha": a, "closed_form": c, **e.to_dict()}
            for a, c, e in zip(self.alphas, self.closed_form, self.empirical)
        ]


def detection_curve(
    scheme: AngleScheme,
    alphas: Sequence[float],
    trials: int,
    rng: np.random.Generator,
) -> DetectionCurve:
    """Estimate the per-check detection probability across an alpha grid.

    Batched simulation of the single-check experiment: prepare a check
    qubit at a scheme angle, let the interceptor rotate by -alpha and
    measure, then apply the verifier's adjoint rotation and measure.
    Detection is a final bit of 1.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    closed = tuple(error_prob_general(scheme, a) for a in alphas)
    estimates = []
    angles = np.asarray(scheme.angles)
    probs = np.asarray(scheme.probs)
    for alpha in alphas:
        if scheme.uniform:
            k = rng.integers(scheme.n, size=trials)
        else:
            k = rng.choice(scheme.n, size=trials, p=probs)
        theta = angles[k]
        p_eve_zero = 0.5 * (1.0 + np.cos(theta - alpha))
        z = rng.random(trials) >= p_eve_zero  # True -> collapsed to ONE
        collapsed = np.where(z, math.pi, 0.0)
        p_bob_zero = 0.5 * (1.0 + np.cos(collapsed - theta))
        detected = rng.random(trials) >= p_bob_zero
        estimates.append(Estimate.bernoulli(int(detected.sum()), trials))
    return DetectionCurve(tuple(alphas), closed, tuple(estimates))


def _check_pass_prob(theta_check: float, alpha: float) -> float:
    """Exact pass probability of one inspected check qubit.

    Sums the interceptor's two measurement branches with prob_zero,
    then the verifier's pass probability on each collapsed state.
    """
    tampered = rotate(QubitState(theta_check), -alpha)
    p0 = prob_zero(tampered)
    total = 0.0
    for branch_prob, collapsed_theta in ((p0, 0.0), (1.0 - p0, math.pi)):
        if branch_prob == 0.0:
            continue
        after = rotate_adjoint(QubitState(collapsed_theta), theta_check)
        total += branch_prob * prob_zero(after)
    return total


def _replacement_pass_prob(theta_check: float, scheme: AngleScheme) -> float:
    """Exact pass probability of a check slot Eve overwrote.

    Branches over her (scheme-uniform) replacement angle; each branch
    is the verifier's pass probability after the adjoint rotation.
    """
    total = 0.0
    for p, t in zip(scheme.probs, scheme.angles):
        total += p * prob_zero(rotate_adjoint(QubitState(t), theta_check))
    return total


def exhaustive_session_oracle(
    N: int,
    M: int,
    scheme: AngleScheme,
    strategy: EveStrategy,
    *,
    max_branches: int = 10_000_000,
) -> dict[str, float]:
    """Exact attack statistics on a small frame, by full enumeration.

    Enumerates every check-position set, every slot set the adversary
    touches, and every angle-index assignment of the affected checks,
    summing branch probabilities computed from prob_zero. Serves as
    ground truth for the closed-form oracles; never samples.

    Supports Passive, MeasureAll, MeasureRandom, RotateMeasure with
    selection=None, and ReplaceQubits with the default angle policy.
    """
    if N < 0 or M < 1:
        raise ValueError("need N >= 0 payload slots and M >= 1 check slots")
    total_slots = N + M

    match strategy:
        case Passive():
            return {"undetected": 1.0, "detected": 0.0}
        case MeasureAll():
            L, alpha, replacing = total_slots, 0.0, False
        case MeasureRandom(count=L):
            alpha, replacing = 0.0, False
        case RotateMeasure(alpha=alpha, selection=None):
            L, replacing = total_slots, False
        case ReplaceQubits(count=L, angle_policy=None):
            alpha, replacing = 0.0, True
        case _:
            raise ValueError(f"enumeration not supported for {strategy!r}")
    if not 0 <= L <= total_slots:
        raise ValueError(f"adversary slot count must be in [0, {total_slots}]")

    n_position_sets = math.comb(total_slots, M)
    n_touch_sets = math.comb(total_slots, L)
    branches = n_position_sets * n_touch_sets * scheme.n ** min(M, L)
    if branches > max_branches:
        raise ValueError(f"enumeration of {branches} branches exceeds the limit")

    if replacing:
        pass_by_k = [_replacement_pass_prob(t, scheme) for t in scheme.angles]
    else:
        pass_by_k = [_check_pass_prob(t, alpha) for t in scheme.angles]

    weight = 1.0 / (n_position_sets * n_touch_sets)
    undetected = 0.0
    no_check_hit = 0.0
    slots = range(total_slots)
    for check_set in combinations(slots, M):
        check_set = set(check_set)
        for touched in combinations(slots, L):
            affected = check_set.intersection(touched)
            if not affected:
                no_check_hit += weight
                undetected += weight
                continue
            acc = 0.0
            for assignment in product(range(scheme.n), repeat=len(affected)):
                p_assignment = 1.0
                p_pass = 1.0
                for k in assignment:
                    p_assignment *= scheme.probs[k]
                    p_pass *= pass_by_k[k]
                acc += p_assignment * p_pass
            undetected += weight * acc

    result = {"undetected": undetected, "detected": 1.0 - undetected}
    if replacing:
        result["no_check_hit"] = no_check_hit
    return result
