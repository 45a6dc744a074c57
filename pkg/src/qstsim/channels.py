"""Transport layer: quantum frames, the classical channel, qubit sources.

The quantum channel is lossless and noiseless but exposes a single
interposition hook where an adversary may rewrite the frame (length is
enforced). The classical channel is modeled as a trusted append-only
transcript: Alice and Bob can post, everyone (including Eve) can read,
nobody can forge or reorder. The qubit source normally emits one qubit
per request; configuring replicas_per_emission > 1 models a faulty
source that leaks identical copies of every emitted state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

from .qubit import QubitState


class ProtocolViolationError(RuntimeError):
    """A channel contract was broken (e.g. frame length changed in flight)."""


class AuthenticityError(RuntimeError):
    """Attempted write to the classical channel by a non-authenticated party."""


class MalformedDisclosureError(ValueError):
    """Check disclosure with duplicate, out-of-range, or invalid entries."""


class Party(enum.Enum):
    ALICE = "alice"
    BOB = "bob"
    EVE = "eve"


@dataclass(frozen=True)
class QubitFrame:
    """Ordered sequence of qubits as sent on the quantum channel."""

    slots: tuple[QubitState, ...]

    def __len__(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class CheckDisclosure:
    """(position, angle-index) pairs posted after the frame is delivered.

    Positions are 1-based frame locations. Angle indices refer to the
    public scheme; bounds against a concrete frame and scheme are
    checked at verification time.
    """

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        positions = [p for p, _ in self.pairs]
        if any(p < 1 for p in positions):
            raise MalformedDisclosureError("positions are 1-based, got value < 1")
        if len(set(positions)) != len(positions):
            raise MalformedDisclosureError("duplicate check positions")
        if any(k < 0 for _, k in self.pairs):
            raise MalformedDisclosureError("negative angle index")

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)


@dataclass
class ClassicalTranscript:
    """Append-only authenticated message log. Eve reads, never writes."""

    _messages: list[tuple[Party, object]] = field(default_factory=list)

    def messages(self) -> tuple[tuple[Party, object], ...]:
        """Read-only snapshot; this is also Eve's view."""
        return tuple(self._messages)

    def __len__(self) -> int:
        return len(self._messages)


def post_classical(
    transcript: ClassicalTranscript, sender: Party, payload: object
) -> ClassicalTranscript:
    """Append a message. Only Alice and Bob hold authentication keys."""
    if sender not in (Party.ALICE, Party.BOB):
        raise AuthenticityError(f"{sender} cannot post to the authenticated channel")
    transcript._messages.append((sender, payload))
    return transcript


@dataclass(frozen=True)
class QubitSource:
    """Emitter of prepared qubits; r > 1 models the replica imperfection."""

    replicas_per_emission: int = 1

    def __post_init__(self) -> None:
        if self.replicas_per_emission < 1:
            raise ValueError("source must emit at least one qubit per request")


PERFECT_SOURCE = QubitSource(1)


def emit(source: QubitSource, theta: float) -> list[QubitState]:
    """Emit replicas_per_emission independent qubits at the given angle.

    The copies share an angle but are separate states: measuring one
    has no effect on the others (no entanglement in this model).
    """
    return [QubitState(theta) for _ in range(source.replicas_per_emission)]


Interposer = Callable[[QubitFrame], QubitFrame]


def transmit_quantum(
    frame: QubitFrame, interposer: Optional[Interposer] = None
) -> QubitFrame:
    """Send a frame through the quantum channel.

    Without an interposer the frame arrives untouched. An interposer
    (the adversary hook) may return any frame of the same length;
    length changes are a hard protocol violation so that detection
    statistics stay interpretable.
    """
    if interposer is None:
        return frame
    out = interposer(frame)
    if len(out) != len(frame):
        raise ProtocolViolationError(
            f"interposer changed frame length {len(frame)} -> {len(out)}"
        )
    return out
