"""The two transfer protocols, as explicit sender/receiver steps.

Frame authentication: the sender hides M check qubits of known (later
disclosed) angle at secret random positions among the payload; the
receiver undoes each disclosed rotation and must read 0 every time.
Any in-flight measurement or substitution flips a check with
probability at least 1/4 per touched check qubit.

Confidential transfer: Alice sends qubits prepared at secret scheme
angles, Bob encodes one data bit per qubit as a half-turn (never
measuring), and Alice undoes her secret rotation to read the bits
exactly. Both legs travel inside authenticated frames.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .adversary import (
    ConfigurationError,
    EveKnowledge,
    EveRecord,
    EveStrategy,
    Passive,
    ReplicaCapture,
    apply_leg_strategy,
    note_disclosure,
)
from .channels import (
    PERFECT_SOURCE,
    CheckDisclosure,
    ClassicalTranscript,
    MalformedDisclosureError,
    Party,
    QubitFrame,
    QubitSource,
    emit,
    post_classical,
    transmit_quantum,
)
from .qubit import QubitState, measure, rotate, rotate_adjoint
from .scheme import AngleScheme, sample_index


class Verdict(enum.Enum):
    AUTHENTIC = "authentic"
    AUTHENTICATION_ERROR = "authentication_error"


@dataclass(frozen=True)
class Protocol1SenderState:
    """Sender-side bookkeeping for one authenticated frame."""

    payload_count: int
    check_count: int
    check_positions: tuple[int, ...]  # 1-based, parallel to check_indices
    check_indices: tuple[int, ...]
    frame: QubitFrame

    def disclosure(self) -> CheckDisclosure:
        return CheckDisclosure(tuple(zip(self.check_positions, self.check_indices)))

    def payload_positions(self) -> tuple[int, ...]:
        checks = set(self.check_positions)
        total = self.payload_count + self.check_count
        return tuple(p for p in range(1, total + 1) if p not in checks)


@dataclass(frozen=True)
class AuthResult:
    verdict: Verdict
    payload: Optional[tuple[QubitState, ...]]  # present iff authentic


def p1_build_frame(
    payload: Sequence[QubitState],
    scheme: AngleScheme,
    check_count: int,
    rng: np.random.Generator,
) -> Protocol1SenderState:
    """Assemble a frame of len(payload) + check_count slots.

    Check angle indices are drawn from the scheme, check positions are
    a uniform random subset of all slots (partial shuffle), and the
    payload fills the remaining slots in its original order.
    """
    if check_count < 1:
        raise ValueError("frame authentication needs at least one check qubit")
    n_payload = len(payload)
    total = n_payload + check_count
    indices = tuple(sample_index(scheme, rng) for _ in range(check_count))
    positions = tuple(
        int(p) + 1 for p in rng.permutation(total)[:check_count]
    )
    slots: list[Optional[QubitState]] = [None] * total
    for pos, k in zip(positions, indices):
        slots[pos - 1] = QubitState(scheme.angles[k])
    it = iter(payload)
    for i in range(total):
        if slots[i] is None:
            slots[i] = next(it)
    return Protocol1SenderState(
        payload_count=n_payload,
        check_count=check_count,
        check_positions=positions,
        check_indices=indices,
        frame=QubitFrame(tuple(slots)),
    )


def p1_verify(
    frame: QubitFrame,
    disclosure: CheckDisclosure,
    scheme: AngleScheme,
    rng: np.random.Generator,
) -> AuthResult:
    """Check every disclosed slot; extract the payload when all pass.

    For each (position, index) pair, in disclosure order, the receiver
    applies the adjoint of the disclosed rotation and measures. A
    single outcome of 1 marks the frame as having an authentication
    error. All checks are measured regardless, so the rng draw count
    per frame is fixed.
    """
    n_slots = len(frame)
    for pos, k in disclosure.pairs:
        if pos > n_slots:
            raise MalformedDisclosureError(
                f"check position {pos} outside frame of length {n_slots}"
            )
        if k >= scheme.n:
            raise MalformedDisclosureError(
                f"angle index {k} outside scheme of size {scheme.n}"
            )
    all_zero = True
    for pos, k in disclosure.pairs:
        out = measure(rotate_adjoint(frame.slots[pos - 1], scheme.angles[k]), rng)
        if out.bit != 0:
            all_zero = False
    if not all_zero:
        return AuthResult(Verdict.AUTHENTICATION_ERROR, None)
    checks = set(disclosure.positions)
    payload = tuple(
        slot for i, slot in enumerate(frame.slots, start=1) if i not in checks
    )
    return AuthResult(Verdict.AUTHENTIC, payload)


def p2_alice_prepare(
    n_bits: int, scheme: AngleScheme, rng: np.random.Generator
) -> tuple[tuple[int, ...], list[QubitState]]:
    """Draw secret angle indices and prepare one qubit per future data bit.

    The indices stay with Alice; nothing about them is ever posted.
    """
    if n_bits < 1:
        raise ValueError("need at least one data bit")
    secrets = tuple(sample_index(scheme, rng) for _ in range(n_bits))
    qubits = [QubitState(scheme.angles[k]) for k in secrets]
    return secrets, qubits


def p2_bob_encode(
    qubits: Sequence[QubitState], data_bits: Sequence[int]
) -> list[QubitState]:
    """Encode each bit as a rotation by pi*bit; no measurement happens."""
    if len(qubits) != len(data_bits):
        raise ValueError("one qubit per data bit required")
    if any(b not in (0, 1) for b in data_bits):
        raise ValueError("data bits must be 0 or 1")
    return [rotate(q, math.pi * b) for q, b in zip(qubits, data_bits)]


def p2_alice_decode(
    qubits: Sequence[QubitState],
    secret_indices: Sequence[int],
    scheme: AngleScheme,
    rng: np.random.Generator,
) -> list[int]:
    """Undo each secret rotation and measure; exact absent tampering."""
    if len(qubits) != len(secret_indices):
        raise ValueError("one secret index per qubit required")
    return [
        measure(rotate_adjoint(q, scheme.angles[k]), rng).bit
        for q, k in zip(qubits, secret_indices)
    ]


@dataclass
class SessionReport:
    """Everything observable about one round-trip session.

    Includes each party's private bookkeeping (secrets, check
    placements) because the report is a trusted experiment record, not
    a message either party sends.
    """

    payload_count: int
    check_count: int
    data_bits: tuple[int, ...]
    decoded_bits: Optional[tuple[int, ...]]
    leg1_verdict: Optional[Verdict]
    leg2_verdict: Optional[Verdict]
    aborted_at: Optional[str]
    alice_secret_indices: tuple[int, ...]
    leg1_sender: Optional[Protocol1SenderState]
    leg2_sender: Optional[Protocol1SenderState]
    eve: EveRecord
    transcript: ClassicalTranscript

    @property
    def completed(self) -> bool:
        return self.decoded_bits is not None

    @property
    def decode_errors(self) -> Optional[int]:
        if self.decoded_bits is None:
            return None
        return sum(d != x for d, x in zip(self.decoded_bits, self.data_bits))

    @property
    def undetected(self) -> bool:
        return self.aborted_at is None

    def eve_recovered_bits(self) -> Optional[list[Optional[int]]]:
        return self.eve.recovered_data_bits

    def eve_match_count(self) -> tuple[int, int]:
        """(matching bits, bits Eve committed to) for her data reconstruction."""
        recovered = self.eve.recovered_data_bits
        if not recovered:
            return (0, 0)
        committed = [(g, x) for g, x in zip(recovered, self.data_bits) if g is not None]
        return (sum(g == x for g, x in committed), len(committed))


def _leak(
    source: QubitSource, frame: QubitFrame
) -> Optional[tuple[tuple[QubitState, ...], ...]]:
    if source.replicas_per_emission == 1:
        return None
    return tuple(tuple(emit(source, s.theta)[1:]) for s in frame.slots)


def run_protocol2(
    payload_count: int,
    check_count: int,
    scheme: AngleScheme,
    data_bits: Sequence[int],
    eve: EveStrategy,
    rng: np.random.Generator,
    *,
    source: QubitSource = PERFECT_SOURCE,
    use_protocol1_leg1: bool = True,
    use_protocol1_leg2: bool = True,
) -> SessionReport:
    """Run one full round-trip transfer of data_bits from Bob to Alice.

    Choreography: Alice prepares secret-angle qubits, frames them, and
    sends; Eve's strategy touches the frame in flight; the disclosure
    is posted only after delivery; Bob verifies, encodes, and sends
    back the same way; Alice verifies and decodes. A failed
    verification is announced on the classical channel and aborts the
    session before the next protocol step.

    The per-leg use_protocol1 switches exist to reproduce the attack
    analyses that assume no frame authentication; production paths run
    both legs authenticated.
    """
    data_bits = tuple(int(b) for b in data_bits)
    if payload_count < 1:
        raise ValueError("need at least one data bit")
    if len(data_bits) != payload_count:
        raise ValueError("data bit count must equal the payload size")
    if any(b not in (0, 1) for b in data_bits):
        raise ValueError("data bits must be 0 or 1")
    if check_count < 1:
        raise ValueError("frame authentication needs at least one check qubit")
    if isinstance(eve, ReplicaCapture) and source.replicas_per_emission < 2:
        raise ConfigurationError(
            "replica capture requires a source with replicas_per_emission >= 2"
        )

    transcript = ClassicalTranscript()
    record = EveRecord()
    eve_absent = isinstance(eve, Passive)

    def eve_leg(frame: QubitFrame, leg: int) -> QubitFrame:
        if eve_absent:
            return transmit_quantum(frame)
        knowledge = EveKnowledge(
            leg=leg,
            scheme=scheme,
            transcript=transcript.messages(),
            leaked=_leak(source, frame),
        )
        def interposer(f: QubitFrame) -> QubitFrame:
            out, _ = apply_leg_strategy(eve, f, knowledge, rng, record)
            return out
        return transmit_quantum(frame, interposer)

    def eve_reads(disclosure: Optional[CheckDisclosure], leg: int, frame_len: int) -> None:
        if not eve_absent:
            note_disclosure(eve, record, disclosure, leg, frame_len)

    def report(
        decoded: Optional[tuple[int, ...]],
        leg1_verdict: Optional[Verdict],
        leg2_verdict: Optional[Verdict],
        aborted_at: Optional[str],
        secrets: tuple[int, ...],
        leg1_sender: Optional[Protocol1SenderState],
        leg2_sender: Optional[Protocol1SenderState],
    ) -> SessionReport:
        return SessionReport(
            payload_count=payload_count,
            check_count=check_count,
            data_bits=data_bits,
            decoded_bits=decoded,
            leg1_verdict=leg1_verdict,
            leg2_verdict=leg2_verdict,
            aborted_at=aborted_at,
            alice_secret_indices=secrets,
            leg1_sender=leg1_sender,
            leg2_sender=leg2_sender,
            eve=record,
            transcript=transcript,
        )

    # Leg 1: Alice -> Bob
    secrets, qubits_out = p2_alice_prepare(payload_count, scheme, rng)
    leg1_sender: Optional[Protocol1SenderState] = None
    if use_protocol1_leg1:
        leg1_sender = p1_build_frame(qubits_out, scheme, check_count, rng)
        frame1 = leg1_sender.frame
    else:
        frame1 = QubitFrame(tuple(qubits_out))
    received1 = eve_leg(frame1, leg=1)

    leg1_verdict: Optional[Verdict] = None
    if use_protocol1_leg1:
        disclosure1 = leg1_sender.disclosure()
        post_classical(transcript, Party.ALICE, disclosure1)
        eve_reads(disclosure1, 1, len(received1))
        auth1 = p1_verify(received1, disclosure1, scheme, rng)
        leg1_verdict = auth1.verdict
        if auth1.verdict is not Verdict.AUTHENTIC:
            post_classical(transcript, Party.BOB, "authentication error: frame dropped")
            return report(None, leg1_verdict, None, "leg1-authentication",
                          secrets, leg1_sender, None)
        bob_qubits = list(auth1.payload)
    else:
        eve_reads(None, 1, len(received1))
        bob_qubits = list(received1.slots)

    # Leg 2: Bob -> Alice
    encoded = p2_bob_encode(bob_qubits, data_bits)
    leg2_sender: Optional[Protocol1SenderState] = None
    if use_protocol1_leg2:
        leg2_sender = p1_build_frame(encoded, scheme, check_count, rng)
        frame2 = leg2_sender.frame
    else:
        frame2 = QubitFrame(tuple(encoded))
    received2 = eve_leg(frame2, leg=2)

    guess = record.flags.get("replacement_guess_positions")
    if guess is not None and leg2_sender is not None:
        record.flags["replacement_guess_correct"] = (
            set(guess) == set(leg2_sender.payload_positions())
        )
    elif guess is not None:
        record.flags["replacement_guess_correct"] = set(guess) == set(
            range(1, len(received2) + 1)
        )

    leg2_verdict: Optional[Verdict] = None
    if use_protocol1_leg2:
        disclosure2 = leg2_sender.disclosure()
        post_classical(transcript, Party.BOB, disclosure2)
        eve_reads(disclosure2, 2, len(received2))
        auth2 = p1_verify(received2, disclosure2, scheme, rng)
        leg2_verdict = auth2.verdict
        if auth2.verdict is not Verdict.AUTHENTIC:
            post_classical(transcript, Party.ALICE, "authentication error: frame dropped")
            return report(None, leg1_verdict, leg2_verdict, "leg2-authentication",
                          secrets, leg1_sender, leg2_sender)
        alice_qubits = list(auth2.payload)
    else:
        eve_reads(None, 2, len(received2))
        alice_qubits = list(received2.slots)

    decoded = tuple(p2_alice_decode(alice_qubits, secrets, scheme, rng))
    return report(decoded, leg1_verdict, leg2_verdict, None,
                  secrets, leg1_sender, leg2_sender)
