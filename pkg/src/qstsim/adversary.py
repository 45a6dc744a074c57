"""Adversary strategies applied at the quantum-channel interposition points.

Each strategy is an immutable configuration object; everything Eve
learns or changes during one protocol session is accumulated in a
session-local EveRecord. Strategies act on frames in flight (before
the matching check disclosure is posted) and may additionally react to
each disclosure once it appears on the classical channel, which is
exactly the information order an in-line eavesdropper experiences.

Leg numbering: leg 1 is the outbound trip (Alice to Bob), leg 2 the
return trip (Bob to Alice).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .channels import CheckDisclosure, QubitFrame
from .qubit import ONE, ZERO, QubitState, measure, prob_zero, rotate
from .scheme import AngleScheme, sample_index

TWO_PI = 2.0 * math.pi


class ConfigurationError(ValueError):
    """Strategy is invalid for the configured session (wrong leg, no replicas, ...)."""


@dataclass(frozen=True)
class Passive:
    """No interaction; the baseline honest channel."""


@dataclass(frozen=True)
class MeasureAll:
    """Measure every slot of the frame on the given leg."""

    leg: int = 1


@dataclass(frozen=True)
class MeasureRandom:
    """Measure a uniformly random subset of `count` distinct slots."""

    count: int
    leg: int = 1

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ConfigurationError("inspection count must be >= 0")


@dataclass(frozen=True)
class RotateMeasure:
    """Rotate selected slots by -alpha, then measure them.

    selection is a tuple of 1-based positions, or None for all slots.
    alpha = 0 reduces to plain measurement.
    """

    alpha: float
    selection: Optional[tuple[int, ...]] = None
    leg: int = 1

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha):
            raise ConfigurationError("rotation angle must be finite")


AnglePolicy = Callable[[AngleScheme, np.random.Generator], float]


@dataclass(frozen=True)
class ReplaceQubits:
    """Swap `count` uniformly chosen slots for Eve-prepared states.

    The replacement angle policy defaults to a uniform draw over the
    public scheme angles; any fixed choice is detected identically by
    the check statistics, so the policy is pluggable but rarely worth
    changing.
    """

    count: int
    leg: int = 1
    angle_policy: Optional[AnglePolicy] = None

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ConfigurationError("replacement count must be >= 0")


@dataclass(frozen=True)
class InterceptResend:
    """Full man-in-the-middle: measure everything on both legs.

    Collapsed qubits are forwarded in place of the originals (sending
    freshly prepared computational-basis qubits would be statistically
    identical). Once the return-leg disclosure reveals which slots
    carried data, the two measurement passes are combined per payload
    slot into Eve's reconstruction of the transmitted bits.
    """


@dataclass(frozen=True)
class ReplicaCapture:
    """Exploit a multi-replica source: keep copies, substitute the return frame.

    Requires a source with replicas_per_emission >= 2. Eve stores one
    spare replica of every outbound slot, throws away the ones exposed
    as check qubits by the leg-1 disclosure, encodes her own bits onto
    the kept data replicas, and swaps them into `count = payload` slots
    of the return frame at guessed positions.
    """

    fake_bits: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class DisruptReturn:
    """Measure and then discard the return frame, forwarding junk qubits."""

    leg: int = 2

    def __post_init__(self) -> None:
        if self.leg != 2:
            raise ConfigurationError("return-trip disruption only applies to leg 2")


EveStrategy = Union[
    Passive,
    MeasureAll,
    MeasureRandom,
    RotateMeasure,
    ReplaceQubits,
    InterceptResend,
    ReplicaCapture,
    DisruptReturn,
]


@dataclass(frozen=True)
class EveKnowledge:
    """What Eve can see at an interposition point.

    transcript is the classical channel at the moment the frame is in
    her hands; the matching disclosure is never in it because frames
    are delivered before their disclosures are posted. leaked carries
    the spare replicas shed by an imperfect source for the in-flight
    frame (one tuple per slot), or None for a perfect source.
    """

    leg: int
    scheme: AngleScheme
    transcript: tuple
    leaked: Optional[tuple[tuple[QubitState, ...], ...]] = None


@dataclass
class EveRecord:
    """Session-local, append-only log of Eve's observations and actions."""

    captured_bits: list[tuple[int, int, int]] = field(default_factory=list)  # (leg, pos, bit)
    replicas_held: list[QubitState] = field(default_factory=list)
    payload_bits: dict[int, list[Optional[int]]] = field(default_factory=dict)
    recovered_data_bits: Optional[list[Optional[int]]] = None
    flags: dict[str, object] = field(default_factory=dict)

    def bits_by_position(self, leg: int) -> dict[int, int]:
        return {pos: bit for lg, pos, bit in self.captured_bits if lg == leg}


def _measure_slots(
    slots: list[QubitState],
    positions: list[int],
    leg: int,
    record: EveRecord,
    rng: np.random.Generator,
) -> None:
    for pos in positions:
        out = measure(slots[pos - 1], rng)
        slots[pos - 1] = out.collapsed
        record.captured_bits.append((leg, pos, out.bit))


def _random_positions(n_slots: int, count: int, rng: np.random.Generator) -> list[int]:
    # distinct slots, sampled without replacement (1-based, ascending)
    return sorted(int(i) + 1 for i in rng.permutation(n_slots)[:count])


def _default_angle_policy(scheme: AngleScheme, rng: np.random.Generator) -> float:
    return scheme.angles[sample_index(scheme, rng)]


def apply_leg_strategy(
    strategy: EveStrategy,
    frame: QubitFrame,
    knowledge: EveKnowledge,
    rng: np.random.Generator,
    record: Optional[EveRecord] = None,
) -> tuple[QubitFrame, EveRecord]:
    """Run one strategy against one in-flight frame.

    Returns the (possibly rewritten) frame and the updated record. A
    strategy scoped to the other leg leaves the frame untouched and
    records nothing.
    """
    if record is None:
        record = EveRecord()
    leg = knowledge.leg
    n_slots = len(frame)
    slots = list(frame.slots)
    acted = False

    match strategy:
        case Passive():
            return frame, record

        case MeasureAll(leg=target):
            if leg == target:
                _measure_slots(slots, list(range(1, n_slots + 1)), leg, record, rng)
                acted = True

        case MeasureRandom(count=count, leg=target):
            if leg == target:
                if count > n_slots:
                    raise ConfigurationError(
                        f"cannot inspect {count} of {n_slots} slots"
                    )
                _measure_slots(slots, _random_positions(n_slots, count, rng), leg, record, rng)
                acted = True

        case RotateMeasure(alpha=alpha, selection=selection, leg=target):
            if leg == target:
                positions = (
                    list(range(1, n_slots + 1)) if selection is None else sorted(selection)
                )
                if any(p < 1 or p > n_slots for p in positions):
                    raise ConfigurationError("rotate-measure selection out of range")
                for pos in positions:
                    slots[pos - 1] = rotate(slots[pos - 1], -alpha)
                _measure_slots(slots, positions, leg, record, rng)
                acted = True

        case ReplaceQubits(count=count, leg=target, angle_policy=policy):
            if leg == target:
                if count > n_slots:
                    raise ConfigurationError(
                        f"cannot replace {count} of {n_slots} slots"
                    )
                policy = policy or _default_angle_policy
                positions = _random_positions(n_slots, count, rng)
                for pos in positions:
                    slots[pos - 1] = QubitState(policy(knowledge.scheme, rng))
                record.flags[f"leg{leg}_replaced_positions"] = tuple(positions)
                acted = True

        case InterceptResend():
            _measure_slots(slots, list(range(1, n_slots + 1)), leg, record, rng)
            acted = True

        case ReplicaCapture(fake_bits=fake_bits):
            if leg == 1:
                if knowledge.leaked is None:
                    raise ConfigurationError(
                        "replica capture requires a source emitting >= 2 replicas"
                    )
                record.flags["slot_replicas"] = tuple(
                    extras[0] for extras in knowledge.leaked
                )
                acted = True
            else:
                acted = _substitute_return_frame(slots, fake_bits, record, rng)

        case DisruptReturn():
            if leg == 2:
                _measure_slots(slots, list(range(1, n_slots + 1)), leg, record, rng)
                for i in range(n_slots):
                    slots[i] = QubitState(rng.random() * TWO_PI)
                acted = True

        case _:
            raise ConfigurationError(f"unknown strategy {strategy!r}")

    if not acted:
        return frame, record
    record.flags[f"leg{leg}_transcript_len"] = len(knowledge.transcript)
    return QubitFrame(tuple(slots)), record


def _substitute_return_frame(
    slots: list[QubitState],
    fake_bits: Optional[tuple[int, ...]],
    record: EveRecord,
    rng: np.random.Generator,
) -> bool:
    """Replace guessed payload slots with Eve's re-encoded replicas."""
    replicas = record.replicas_held
    if not replicas or len(replicas) > len(slots):
        return False
    n_payload = len(replicas)
    if fake_bits is None:
        fake_bits = tuple(int(b) for b in rng.integers(2, size=n_payload))
    if len(fake_bits) != n_payload:
        raise ConfigurationError("fake bit count must match held replicas")
    guess = _random_positions(len(slots), n_payload, rng)
    for replica, bit, pos in zip(replicas, fake_bits, guess):
        slots[pos - 1] = rotate(replica, math.pi * bit)
    record.flags["replacement_guess_positions"] = tuple(guess)
    record.flags["fake_bits"] = tuple(fake_bits)
    return True


def note_disclosure(
    strategy: EveStrategy,
    record: EveRecord,
    disclosure: Optional[CheckDisclosure],
    leg: int,
    frame_len: int,
) -> None:
    """Let Eve digest a posted check disclosure (or its absence).

    Resolves which of her recorded bits sat at payload positions, which
    is only knowable once the check positions are public. A disclosure
    of None means the leg ran without frame authentication, so every
    slot is payload.
    """
    check_positions = set(disclosure.positions) if disclosure is not None else set()
    payload_positions = [
        p for p in range(1, frame_len + 1) if p not in check_positions
    ]
    bits = record.bits_by_position(leg)
    record.payload_bits[leg] = [bits.get(p) for p in payload_positions]
    if disclosure is not None:
        record.flags[f"leg{leg}_check_positions"] = tuple(sorted(check_positions))

    if isinstance(strategy, ReplicaCapture) and leg == 1:
        slot_replicas = record.flags.get("slot_replicas")
        if slot_replicas is not None:
            record.replicas_held = [slot_replicas[p - 1] for p in payload_positions]
    if leg == 2:
        _resolve_data_recovery(strategy, record)


def _resolve_data_recovery(strategy: EveStrategy, record: EveRecord) -> None:
    leg2 = record.payload_bits.get(2)
    if leg2 is None:
        return
    if isinstance(strategy, InterceptResend):
        leg1 = record.payload_bits.get(1)
        if leg1 is None or len(leg1) != len(leg2):
            return
        # data bit = outbound collapse XOR return reading, slot by slot
        record.recovered_data_bits = [
            (a ^ b) if (a is not None and b is not None) else None
            for a, b in zip(leg1, leg2)
        ]
    elif any(b is not None for b in leg2):
        record.recovered_data_bits = list(leg2)


def eve_angle_guess(
    record: EveRecord, scheme: AngleScheme
) -> list[Optional[int]]:
    """Maximum-likelihood angle-index estimate per outbound payload slot.

    Assumes the recorded bits came from plain computational-basis
    measurements (no prior rotation). The posterior over index k given
    an observed bit is p_k * P(bit | theta_k); ties resolve to the
    lowest index. Slots Eve never measured map to None. Used only to
    quantify leakage: with two scheme angles the states are orthogonal
    and the guess is always right, with three or more it cannot beat
    the posterior baseline.
    """
    payload = record.payload_bits.get(1)
    if not payload:
        return []
    likelihood_zero = [
        p * prob_zero(QubitState(t)) for p, t in zip(scheme.probs, scheme.angles)
    ]
    likelihood_one = [
        p * (1.0 - prob_zero(QubitState(t)))
        for p, t in zip(scheme.probs, scheme.angles)
    ]
    guesses: list[Optional[int]] = []
    for bit in payload:
        if bit is None:
            guesses.append(None)
            continue
        table = likelihood_zero if bit == 0 else likelihood_one
        guesses.append(max(range(scheme.n), key=table.__getitem__))
    return guesses
