"""Frame authentication and the round-trip transfer protocol."""

import math

import numpy as np
import pytest
from scipy import stats

from qstsim import (
    CheckDisclosure,
    ConfigurationError,
    InterceptResend,
    MalformedDisclosureError,
    MeasureAll,
    Passive,
    QubitFrame,
    QubitSource,
    QubitState,
    ReplicaCapture,
    Verdict,
    eve_angle_guess,
    make_scheme,
    measure,
    p1_build_frame,
    p1_verify,
    p2_alice_decode,
    p2_alice_prepare,
    p2_bob_encode,
    run_protocol2,
)

S3 = make_scheme(3)


def session_rng(seed, i):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


# ---------------------------------------------------------------------------
# Frame construction


def test_build_frame_empty_payload():
    rng = np.random.default_rng(0)
    state = p1_build_frame([], S3, 2, rng)
    assert len(state.frame) == 2
    for slot in state.frame.slots:
        assert any(abs(slot.theta - a) < 1e-12 for a in S3.angles)


def test_build_frame_shape():
    rng = np.random.default_rng(1)
    payload = [QubitState(0.1), QubitState(0.2), QubitState(0.3)]
    state = p1_build_frame(payload, S3, 2, rng)
    assert len(state.frame) == 5
    assert len(set(state.check_positions)) == 2
    assert all(1 <= p <= 5 for p in state.check_positions)
    # payload occupies the remaining slots in original order
    payload_slots = [state.frame.slots[p - 1] for p in state.payload_positions()]
    assert payload_slots == payload


def test_build_frame_rejects_zero_checks():
    with pytest.raises(ValueError):
        p1_build_frame([QubitState(0.0)], S3, 0, np.random.default_rng(0))


def test_check_position_frequencies_uniform():
    rng = np.random.default_rng(77)
    counts = np.zeros(3)
    builds = 100_000
    payload = [QubitState(0.0), QubitState(0.0)]
    for _ in range(builds):
        state = p1_build_frame(payload, S3, 1, rng)
        counts[state.check_positions[0] - 1] += 1
    assert np.all(np.abs(counts / builds - 1 / 3) < 0.01)


def test_check_position_subsets_uniform_chi_square():
    # N=2, M=2: all C(4,2)=6 position sets should be equally likely
    rng = np.random.default_rng(123)
    payload = [QubitState(0.0), QubitState(0.0)]
    freq = {}
    builds = 12_000
    for _ in range(builds):
        state = p1_build_frame(payload, S3, 2, rng)
        key = tuple(sorted(state.check_positions))
        freq[key] = freq.get(key, 0) + 1
    assert len(freq) == 6
    _, p_value = stats.chisquare(list(freq.values()))
    assert p_value > 1e-3


# ---------------------------------------------------------------------------
# Frame verification


def test_verify_untouched_frame_authentic():
    rng = np.random.default_rng(5)
    payload = [QubitState(t) for t in (0.4, 1.1, 5.0)]
    for _ in range(200):
        state = p1_build_frame(payload, S3, 3, rng)
        result = p1_verify(state.frame, state.disclosure(), S3, rng)
        assert result.verdict is Verdict.AUTHENTIC
        assert list(result.payload) == payload


def test_verify_detects_premeasured_check_at_quarter_rate():
    # a check qubit measured in flight flips the verification with p = 1/4
    rng = np.random.default_rng(6)
    trials = 30_000
    errors = 0
    for _ in range(trials):
        state = p1_build_frame([], S3, 1, rng)
        pos = state.check_positions[0]
        slots = list(state.frame.slots)
        slots[pos - 1] = measure(slots[pos - 1], rng).collapsed
        result = p1_verify(QubitFrame(tuple(slots)), state.disclosure(), S3, rng)
        errors += result.verdict is Verdict.AUTHENTICATION_ERROR
    band = 4 * math.sqrt(0.25 * 0.75 / trials)
    assert abs(errors / trials - 0.25) <= band


def test_verify_rejects_out_of_range_position():
    rng = np.random.default_rng(7)
    state = p1_build_frame([QubitState(0.0)] * 4, S3, 1, rng)
    with pytest.raises(MalformedDisclosureError):
        p1_verify(state.frame, CheckDisclosure(((7, 0),)), S3, rng)


def test_verify_rejects_bad_angle_index():
    rng = np.random.default_rng(8)
    state = p1_build_frame([QubitState(0.0)] * 2, S3, 1, rng)
    with pytest.raises(MalformedDisclosureError):
        p1_verify(state.frame, CheckDisclosure(((1, 9),)), S3, rng)


def test_verify_disclosure_order_does_not_change_statistics():
    # permuting the disclosure changes nothing: untouched frames always pass,
    # and fully collapsed frames are detected at the same rate either way
    rng = np.random.default_rng(9)
    payload = [QubitState(0.7)]
    for _ in range(100):
        state = p1_build_frame(payload, S3, 3, rng)
        forward = state.disclosure()
        backward = CheckDisclosure(tuple(reversed(forward.pairs)))
        assert p1_verify(state.frame, forward, S3, rng).verdict is Verdict.AUTHENTIC
        assert p1_verify(state.frame, backward, S3, rng).verdict is Verdict.AUTHENTIC

    trials = 20_000
    rates = []
    for reverse in (False, True):
        errors = 0
        for _ in range(trials):
            state = p1_build_frame(payload, S3, 2, rng)
            slots = [measure(s, rng).collapsed for s in state.frame.slots]
            pairs = state.disclosure().pairs
            disclosure = CheckDisclosure(tuple(reversed(pairs)) if reverse else pairs)
            result = p1_verify(QubitFrame(tuple(slots)), disclosure, S3, rng)
            errors += result.verdict is Verdict.AUTHENTICATION_ERROR
        rates.append(errors / trials)
    sigma = math.sqrt(2 * 0.4375 * 0.5625 / trials)
    assert abs(rates[0] - rates[1]) <= 4 * sigma


# ---------------------------------------------------------------------------
# Round-trip primitives


def test_prepare_angles_match_secrets():
    rng = np.random.default_rng(10)
    secrets, qubits = p2_alice_prepare(4, S3, rng)
    assert len(secrets) == len(qubits) == 4
    for k, q in zip(secrets, qubits):
        assert q.theta == S3.angles[k]


def test_prepare_rejects_empty():
    with pytest.raises(ValueError):
        p2_alice_prepare(0, S3, np.random.default_rng(0))


def test_encode_zero_is_identity():
    q = QubitState(2 * math.pi / 3)
    assert p2_bob_encode([q], [0]) == [q]


def test_encode_one_is_half_turn():
    (out,) = p2_bob_encode([QubitState(2 * math.pi / 3)], [1])
    assert out.theta == pytest.approx(5 * math.pi / 3)


def test_encode_all_zero_identity():
    qubits = [QubitState(t) for t in (0.0, 1.0, 2.0)]
    assert p2_bob_encode(qubits, [0, 0, 0]) == qubits


def test_encode_validation():
    with pytest.raises(ValueError):
        p2_bob_encode([QubitState(0.0)], [0, 1])
    with pytest.raises(ValueError):
        p2_bob_encode([QubitState(0.0)], [2])


def test_decode_exact_for_every_angle_and_bit():
    rng = np.random.default_rng(11)
    for k in range(3):
        for x in (0, 1):
            for _ in range(200):
                (q,) = p2_bob_encode([QubitState(S3.angles[k])], [x])
                assert p2_alice_decode([q], [k], S3, rng) == [x]


def test_decode_direct_one():
    rng = np.random.default_rng(12)
    assert p2_alice_decode([QubitState(math.pi)], [0], S3, rng) == [1]


def test_decode_length_mismatch():
    with pytest.raises(ValueError):
        p2_alice_decode([QubitState(0.0)], [0, 1], S3, np.random.default_rng(0))


def test_decode_error_rate_quarter_when_return_qubit_measured():
    # an interceptor measuring the return qubit corrupts decoding with p = 1/4
    rng = np.random.default_rng(13)
    trials = 100_000
    errors = 0
    for _ in range(trials):
        k = int(rng.integers(3))
        x = int(rng.integers(2))
        (encoded,) = p2_bob_encode([QubitState(S3.angles[k])], [x])
        tapped = measure(encoded, rng).collapsed
        errors += p2_alice_decode([tapped], [k], S3, rng) != [x]
    assert abs(errors / trials - 0.25) < 0.01


# ---------------------------------------------------------------------------
# Full sessions


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("payload", [1, 5])
def test_session_passive_exact(n, payload):
    scheme = make_scheme(n)
    for i in range(150):
        rng = session_rng(1000 + n, i)
        data = [int(b) for b in rng.integers(2, size=payload)]
        report = run_protocol2(payload, 2, scheme, data, Passive(), rng)
        assert report.leg1_verdict is Verdict.AUTHENTIC
        assert report.leg2_verdict is Verdict.AUTHENTIC
        assert report.decoded_bits == tuple(data)
        assert report.decode_errors == 0


def test_session_transcript_carries_only_disclosures_and_notices():
    rng = session_rng(2, 0)
    report = run_protocol2(4, 2, S3, [1, 0, 1, 1], Passive(), rng)
    kinds = [type(payload) for _, payload in report.transcript.messages()]
    assert kinds == [CheckDisclosure, CheckDisclosure]
    # disclosed positions are check slots, never payload slots
    for sender_state, (_, disclosure) in zip(
        (report.leg1_sender, report.leg2_sender), report.transcript.messages()
    ):
        assert set(disclosure.positions) == set(sender_state.check_positions)
        assert not set(disclosure.positions) & set(sender_state.payload_positions())


def test_session_measure_all_detection_rate():
    trials = 3000
    detected = 0
    for i in range(trials):
        rng = session_rng(3, i)
        report = run_protocol2(2, 20, S3, [0, 1], MeasureAll(leg=1), rng)
        detected += report.leg1_verdict is Verdict.AUTHENTICATION_ERROR
    expected = 1 - 0.75**20
    band = 4 * math.sqrt(expected * (1 - expected) / trials)
    assert abs(detected / trials - expected) <= max(band, 0.002)


def test_session_aborts_before_encoding_on_leg1_failure():
    for i in range(300):
        rng = session_rng(4, i)
        report = run_protocol2(2, 20, S3, [0, 1], MeasureAll(leg=1), rng)
        if report.leg1_verdict is Verdict.AUTHENTICATION_ERROR:
            assert report.aborted_at == "leg1-authentication"
            assert report.decoded_bits is None
            assert report.leg2_verdict is None
            # Bob's notice follows Alice's disclosure
            senders = [s for s, _ in report.transcript.messages()]
            assert senders[-1].value == "bob"
            break
    else:
        pytest.fail("expected at least one detection in 300 sessions")


def test_frame_precedes_disclosure_for_eve():
    # Eve's in-flight view never contains the disclosure of the leg she is
    # touching: leg-1 sees an empty transcript, leg-2 only the leg-1 post.
    for i in range(100):
        rng = session_rng(5, i)
        report = run_protocol2(2, 1, S3, [1, 0], InterceptResend(), rng)
        assert report.eve.flags["leg1_transcript_len"] == 0
        if report.aborted_at is None:
            assert report.eve.flags["leg2_transcript_len"] == 1
            break
    else:
        pytest.fail("no session survived leg 1 with M=1 in 100 attempts")


def test_session_angle_identification_breaks_at_n2():
    scheme = make_scheme(2)
    total = correct = 0
    for i in range(200):
        rng = session_rng(6, i)
        data = [int(b) for b in rng.integers(2, size=4)]
        report = run_protocol2(4, 2, scheme, data, MeasureAll(leg=1), rng)
        guesses = eve_angle_guess(report.eve, scheme)
        for guess, truth in zip(guesses, report.alice_secret_indices):
            if guess is not None:
                total += 1
                correct += guess == truth
    assert total > 0
    assert correct == total


def test_session_toggles_disable_frame_authentication():
    rng = session_rng(7, 0)
    report = run_protocol2(
        3, 2, S3, [1, 1, 0], Passive(), rng,
        use_protocol1_leg1=False, use_protocol1_leg2=False,
    )
    assert report.leg1_verdict is None and report.leg2_verdict is None
    assert len(report.transcript.messages()) == 0
    assert report.decoded_bits == (1, 1, 0)


def test_session_replica_capture_requires_imperfect_source():
    with pytest.raises(ConfigurationError):
        run_protocol2(2, 2, S3, [0, 1], ReplicaCapture(), session_rng(8, 0))


def test_session_input_validation():
    rng = session_rng(9, 0)
    with pytest.raises(ValueError):
        run_protocol2(0, 2, S3, [], Passive(), rng)
    with pytest.raises(ValueError):
        run_protocol2(2, 2, S3, [0], Passive(), rng)
    with pytest.raises(ValueError):
        run_protocol2(1, 0, S3, [1], Passive(), rng)
    with pytest.raises(ValueError):
        run_protocol2(1, 2, S3, [7], Passive(), rng)


def test_session_fresh_check_randomness_per_leg():
    rng = session_rng(10, 0)
    report = run_protocol2(4, 3, S3, [0, 1, 0, 1], Passive(), rng)
    leg1 = (report.leg1_sender.check_positions, report.leg1_sender.check_indices)
    leg2 = (report.leg2_sender.check_positions, report.leg2_sender.check_indices)
    assert leg1 != leg2  # independent draws; equal only by tiny coincidence
