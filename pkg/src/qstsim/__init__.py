"""Simulator for a round-trip qubit secure-transmission scheme.

Two cooperating layers: frame authentication through randomly placed
check qubits of disclosed angle, and confidential bit transfer through
a round trip of secret-angle qubits that the receiver encodes by
half-turns. Includes the full adversary model and analytic oracles for
every derived probability.
"""

from .adversary import (
    ConfigurationError,
    DisruptReturn,
    EveKnowledge,
    EveRecord,
    EveStrategy,
    InterceptResend,
    MeasureAll,
    MeasureRandom,
    Passive,
    ReplaceQubits,
    ReplicaCapture,
    RotateMeasure,
    apply_leg_strategy,
    eve_angle_guess,
    note_disclosure,
)
from .analysis import (
    DetectionCurve,
    Estimate,
    detection_curve,
    empirical_conditional_entropy,
    empirical_mutual_information,
    error_prob_general,
    error_prob_uniform,
    eve_bit_bias,
    exhaustive_session_oracle,
    replace_success_prob,
    sample_intercept_pairs,
    undetected_prob,
)
from .channels import (
    AuthenticityError,
    CheckDisclosure,
    ClassicalTranscript,
    MalformedDisclosureError,
    Party,
    ProtocolViolationError,
    QubitFrame,
    QubitSource,
    emit,
    post_classical,
    transmit_quantum,
)
from .protocols import (
    AuthResult,
    Protocol1SenderState,
    SessionReport,
    Verdict,
    p1_build_frame,
    p1_verify,
    p2_alice_decode,
    p2_alice_prepare,
    p2_bob_encode,
    run_protocol2,
)
from .qubit import (
    ANGLE_TOL,
    ONE,
    ZERO,
    MeasurementOutcome,
    QubitState,
    angles_close,
    measure,
    prob_zero,
    rotate,
    rotate_adjoint,
)
from .scheme import (
    AngleScheme,
    angle_vector_sum,
    balance_check,
    custom_scheme,
    make_scheme,
    sample_index,
)

__version__ = "0.1.0"
