"""Command-line driver: experiment orchestration and report emission.

Three subcommands:

  prop-check   verify the scheme's correctness/confidentiality/detection
               properties against their closed forms
  attack       run sessions under a named adversary strategy and compare
               empirical statistics with the analytic oracles
  session      execute one full round-trip transfer and print the outcome

Every stochastic quantity derives from one 64-bit master seed expanded
into per-purpose, per-index substreams, so identical (config, seed)
pairs reproduce reports byte for byte and trial counts can grow without
disturbing earlier sessions. Exit codes: 0 all bands pass, 1 a
statistical band failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .adversary import (
    ConfigurationError,
    DisruptReturn,
    EveStrategy,
    InterceptResend,
    MeasureAll,
    MeasureRandom,
    Passive,
    ReplaceQubits,
    ReplicaCapture,
    RotateMeasure,
    eve_angle_guess,
)
from .analysis import (
    detection_curve,
    empirical_conditional_entropy,
    error_prob_general,
    error_prob_uniform,
    eve_bit_bias,
    replace_success_prob,
    sample_intercept_pairs,
    undetected_prob,
)
from .channels import QubitSource
from .protocols import SessionReport, Verdict, run_protocol2
from .scheme import AngleScheme, balance_check, make_scheme

# Substream domains: keep each estimator on its own seed lane.
DOM_SESSION = 1
DOM_BIAS = 2
DOM_CURVE = 3
DOM_ENTROPY = 4
DOM_DATA = 5

MAX_SEED = 2**64


class UsageError(Exception):
    """Bad flags or config; maps to exit code 2."""


def substream(seed: int, *key: int) -> np.random.Generator:
    """Counter-split generator: stable per (seed, key), independent across keys."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# Configuration


@dataclass
class ExperimentConfig:
    command: str
    n: int = 3
    payload: int = 8
    checks: tuple[int, ...] = (2,)
    trials: int = 100_000
    seed: int = 1
    strategy: str = "passive"
    alpha_grid: str = "0:6.283185307179586:24"
    replicas: int = 1
    unsafe_test_mode: bool = False
    disable_p1_leg1: bool = False
    disable_p1_leg2: bool = False
    format: str = "json"
    out: Optional[str] = None
    workers: int = 0  # 0 -> available parallelism
    data: Optional[str] = None
    data_hex: Optional[str] = None
    data_file: Optional[str] = None

    def validate(self) -> None:
        if self.n < 2:
            raise UsageError("--n must be >= 2")
        if self.payload < 1:
            raise UsageError("--payload must be >= 1")
        if not self.checks or any(m < 1 for m in self.checks):
            raise UsageError("--checks values must be >= 1")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if not 0 <= self.seed < MAX_SEED:
            raise UsageError("--seed must fit in 64 unsigned bits")
        if self.replicas < 1:
            raise UsageError("--replicas must be >= 1")
        if (self.disable_p1_leg1 or self.disable_p1_leg2) and not self.unsafe_test_mode:
            raise UsageError(
                "disabling frame authentication requires --unsafe-test-mode"
            )
        if self.format not in ("json", "text", "csv"):
            raise UsageError("--format must be json, text, or csv")
        if self.workers < 0:
            raise UsageError("--workers must be >= 0")

    def echo(self) -> dict:
        return {
            "command": self.command,
            "n": self.n,
            "payload": self.payload,
            "checks": list(self.checks),
            "trials": self.trials,
            "seed": self.seed,
            "strategy": self.strategy,
            "alpha_grid": self.alpha_grid,
            "replicas": self.replicas,
            "unsafe_test_mode": self.unsafe_test_mode,
            "disable_p1_leg1": self.disable_p1_leg1,
            "disable_p1_leg2": self.disable_p1_leg2,
        }


def parse_alpha_grid(spec: str) -> tuple[float, ...]:
    try:
        start_s, stop_s, steps_s = spec.split(":")
        start, stop, steps = float(start_s), float(stop_s), int(steps_s)
    except ValueError as exc:
        raise UsageError(f"bad alpha grid {spec!r}, expected start:stop:steps") from exc
    if steps < 1:
        raise UsageError("alpha grid needs at least one step")
    return tuple(float(a) for a in np.linspace(start, stop, steps, endpoint=False))


def parse_int_list(spec: str, what: str) -> tuple[int, ...]:
    """Accept '3', '1,4,9', or '1..20' (inclusive range)."""
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            values = tuple(range(int(lo), int(hi) + 1))
        else:
            values = tuple(int(tok) for tok in spec.split(","))
    except ValueError as exc:
        raise UsageError(f"bad {what} spec {spec!r}") from exc
    if not values:
        raise UsageError(f"empty {what} spec")
    return values


STRATEGY_TAGS = (
    "passive",
    "measure_all",
    "measure_random",
    "rotate_measure",
    "replace",
    "intercept_resend",
    "replica_capture",
    "disrupt_return",
)


def parse_strategy_spec(spec: str) -> tuple[str, dict]:
    """Split 'tag:key=value,key=value' into a tag and raw parameter map."""
    tag, _, rest = spec.partition(":")
    if tag not in STRATEGY_TAGS:
        raise UsageError(f"unknown strategy tag {tag!r}; known: {', '.join(STRATEGY_TAGS)}")
    params: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise UsageError(f"bad strategy parameter {item!r}, expected key=value")
            params[key.strip()] = value.strip()
    return tag, params


def build_strategies(tag: str, params: dict) -> list[EveStrategy]:
    """Materialize one strategy per swept parameter value."""
    def take_int(name: str, default: Optional[int] = None) -> tuple[int, ...]:
        if name in params:
            return parse_int_list(params.pop(name), name)
        if default is None:
            raise UsageError(f"strategy {tag!r} requires parameter {name}")
        return (default,)

    def take_float(name: str, default: Optional[float] = None) -> float:
        if name in params:
            try:
                return float(params.pop(name))
            except ValueError as exc:
                raise UsageError(f"bad float for {name}") from exc
        if default is None:
            raise UsageError(f"strategy {tag!r} requires parameter {name}")
        return default

    try:
        if tag == "passive":
            out = [Passive()]
        elif tag == "measure_all":
            out = [MeasureAll(leg=leg) for leg in take_int("leg", 1)]
        elif tag == "measure_random":
            legs = take_int("leg", 1)
            out = [
                MeasureRandom(count=c, leg=leg)
                for c in take_int("count")
                for leg in legs
            ]
        elif tag == "rotate_measure":
            alpha = take_float("alpha")
            out = [RotateMeasure(alpha=alpha, leg=leg) for leg in take_int("leg", 1)]
        elif tag == "replace":
            legs = take_int("leg", 1)
            out = [
                ReplaceQubits(count=c, leg=leg)
                for c in take_int("count")
                for leg in legs
            ]
        elif tag == "intercept_resend":
            out = [InterceptResend()]
        elif tag == "replica_capture":
            out = [ReplicaCapture()]
        else:
            out = [DisruptReturn()]
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from exc
    if params:
        raise UsageError(f"unknown parameters for {tag!r}: {', '.join(params)}")
    return out


def strategy_label(strategy: EveStrategy) -> str:
    match strategy:
        case Passive():
            return "passive"
        case MeasureAll(leg=leg):
            return f"measure_all:leg={leg}"
        case MeasureRandom(count=c, leg=leg):
            return f"measure_random:count={c},leg={leg}"
        case RotateMeasure(alpha=a, leg=leg):
            return f"rotate_measure:alpha={a},leg={leg}"
        case ReplaceQubits(count=c, leg=leg):
            return f"replace:count={c},leg={leg}"
        case InterceptResend():
            return "intercept_resend"
        case ReplicaCapture():
            return "replica_capture"
        case DisruptReturn():
            return "disrupt_return"
    return repr(strategy)


# ---------------------------------------------------------------------------
# Session batches (worker-pool friendly: everything picklable)


def summarize_session(report: SessionReport, scheme: AngleScheme) -> dict[str, int]:
    """Reduce one session to additive counters."""
    c = {
        "sessions": 1,
        "leg1_error": int(report.leg1_verdict is Verdict.AUTHENTICATION_ERROR),
        "leg2_error": int(report.leg2_verdict is Verdict.AUTHENTICATION_ERROR),
        "undetected": int(report.undetected),
        "completed": int(report.completed),
    }
    if report.decoded_bits is not None:
        c["decode_errors"] = report.decode_errors
        c["decoded_bits"] = len(report.decoded_bits)
    if not report.eve.captured_bits and not report.eve.flags:
        return c
    matched, committed = report.eve_match_count()
    c["eve_match"] = matched
    c["eve_committed"] = committed
    c["eve_recovered_all"] = int(committed == report.payload_count and matched == committed)
    c["eve_recovery_possible"] = int(committed > 0)

    flags = report.eve.flags
    for leg, sender in ((1, report.leg1_sender), (2, report.leg2_sender)):
        replaced = flags.get(f"leg{leg}_replaced_positions")
        if replaced is not None:
            c["replace_sessions"] = 1
            checks = set(sender.check_positions) if sender else set()
            c["replace_no_check_hit"] = int(not checks.intersection(replaced))
    if "replacement_guess_correct" in flags:
        c["replica_sessions"] = 1
        c["replica_guess_correct"] = int(bool(flags["replacement_guess_correct"]))
        if flags["replacement_guess_correct"] and report.decoded_bits is not None:
            c["fake_accepted"] = int(
                tuple(report.decoded_bits) == tuple(flags["fake_bits"])
            )
    if report.eve.payload_bits.get(1):
        guesses = eve_angle_guess(report.eve, scheme)
        pairs = [
            (g, k)
            for g, k in zip(guesses, report.alice_secret_indices)
            if g is not None
        ]
        c["angle_correct"] = sum(g == k for g, k in pairs)
        c["angle_total"] = len(pairs)
    return c


def _merge(into: dict[str, int], part: dict[str, int]) -> None:
    for key, value in part.items():
        into[key] = into.get(key, 0) + value


def _run_chunk(args: tuple) -> dict[str, int]:
    (seed, start, count, n, payload, checks, strategy, replicas, p1_leg1, p1_leg2) = args
    scheme = make_scheme(n)
    source = QubitSource(replicas)
    counters: dict[str, int] = {}
    for i in range(start, start + count):
        rng = substream(seed, DOM_SESSION, i)
        data = [int(b) for b in rng.integers(2, size=payload)]
        report = run_protocol2(
            payload,
            checks,
            scheme,
            data,
            strategy,
            rng,
            source=source,
            use_protocol1_leg1=p1_leg1,
            use_protocol1_leg2=p1_leg2,
        )
        _merge(counters, summarize_session(report, scheme))
    return counters


def run_session_batch(
    config: ExperimentConfig,
    strategy: EveStrategy,
    checks: int,
    trials: int,
    workers: int,
) -> dict[str, int]:
    """Run `trials` sessions; deterministic in (config, seed) for any worker count."""
    common = (
        config.seed,
        config.n,
        config.payload,
        checks,
        strategy,
        config.replicas,
        not config.disable_p1_leg1,
        not config.disable_p1_leg2,
    )
    def chunk_args(start: int, count: int) -> tuple:
        seed, n, payload, m, strat, replicas, leg1, leg2 = common
        return (seed, start, count, n, payload, m, strat, replicas, leg1, leg2)

    if workers <= 1 or trials < 2048:
        return _run_chunk(chunk_args(0, trials))
    chunk = max(256, math.ceil(trials / (workers * 4)))
    starts = list(range(0, trials, chunk))
    counters: dict[str, int] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(
            _run_chunk,
            [chunk_args(s, min(chunk, trials - s)) for s in starts],
        )
        for part in parts:  # ordered by session index
            _merge(counters, part)
    return counters


# ---------------------------------------------------------------------------
# Rows and bands


def band_row(
    metric: str,
    params: dict,
    observed: float,
    expected: float,
    trials: Optional[int],
    z: float = 4.0,
) -> dict:
    """Compare a Bernoulli estimate against a known probability.

    The band is z standard deviations of the estimator at the expected
    value; a degenerate expected value (0 or 1) demands exact equality.
    """
    if trials:
        sigma = math.sqrt(max(expected * (1.0 - expected), 0.0) / trials)
    else:
        sigma = 0.0
    ok = abs(observed - expected) <= z * sigma if sigma > 0 else observed == expected
    return {
        "metric": metric,
        "params": params,
        "observed": observed,
        "expected": expected,
        "trials": trials,
        "tolerance": f"{z}*sigma" if sigma > 0 else "exact",
        "pass": bool(ok),
    }


def tol_row(
    metric: str, params: dict, observed: float, expected: float, tol: float
) -> dict:
    return {
        "metric": metric,
        "params": params,
        "observed": observed,
        "expected": expected,
        "trials": None,
        "tolerance": f"abs<={tol}",
        "pass": bool(abs(observed - expected) <= tol),
    }


def flag_row(metric: str, params: dict, observed: bool, expected: bool) -> dict:
    return {
        "metric": metric,
        "params": params,
        "observed": bool(observed),
        "expected": bool(expected),
        "trials": None,
        "tolerance": "boolean",
        "pass": bool(observed == expected),
    }


@dataclass
class SweepReport:
    command: str
    config: dict
    rows: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row["pass"] for row in self.rows)

    def document(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "rows": self.rows,
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# Subcommands


def cmd_prop_check(config: ExperimentConfig) -> SweepReport:
    """Correctness, confidentiality, and detection checks vs closed forms."""
    scheme = make_scheme(config.n)
    grid = parse_alpha_grid(config.alpha_grid)
    trials = config.trials
    workers = config.workers or os.cpu_count() or 1
    report = SweepReport("prop-check", config.echo())
    rows = report.rows

    # Decode correctness: a clean round trip never miscarries a bit.
    counters = run_session_batch(config, Passive(), config.checks[0], trials, workers)
    rows.append(
        band_row(
            "decode-error-rate",
            {"sessions": trials, "payload": config.payload},
            counters.get("decode_errors", 0) / counters.get("decoded_bits", 1),
            0.0,
            counters.get("decoded_bits", 1),
        )
    )
    rows.append(
        band_row(
            "authentication-false-alarm",
            {"sessions": trials},
            (counters["leg1_error"] + counters["leg2_error"]) / trials,
            0.0,
            trials,
        )
    )

    # Interceptor bit bias: flat 1/2 across the rotation grid.
    for j, alpha in enumerate(grid):
        est = eve_bit_bias(scheme, alpha, trials, substream(config.seed, DOM_BIAS, j))
        rows.append(
            band_row("intercept-bit-bias", {"alpha": alpha}, est.value, 0.5, est.trials)
        )

    # Interceptor conditional entropy on data-carrying qubits.
    for j, alpha in enumerate(grid):
        pairs = sample_intercept_pairs(
            scheme, alpha, max(trials, 100_000), substream(config.seed, DOM_ENTROPY, j)
        )
        h = empirical_conditional_entropy(pairs)
        rows.append(tol_row("conditional-entropy", {"alpha": alpha}, h, 1.0, 0.01))

    # Detection curve vs the analytic per-check probability.
    curve = detection_curve(scheme, grid, trials, substream(config.seed, DOM_CURVE, 0))
    for alpha, closed, est in zip(curve.alphas, curve.closed_form, curve.empirical):
        rows.append(
            band_row("detection-vs-alpha", {"alpha": alpha}, est.value, closed, est.trials)
        )
    if config.n > 2:
        residual = max(
            abs(error_prob_general(scheme, a) - error_prob_uniform(config.n, a))
            for a in grid
        )
        rows.append(tol_row("closed-form-agreement", {"points": len(grid)}, residual, 0.0, 1e-12))
        floor_est = curve.empirical[min(range(len(grid)), key=lambda i: abs(grid[i]))]
        rows.append(
            tol_row("detection-floor", {"alpha": 0.0}, floor_est.value, 0.25, 0.005)
        )
        argmin_closed = min(range(len(grid)), key=curve.closed_form.__getitem__)
        argmin_emp = min(range(len(grid)), key=lambda i: curve.empirical[i].value)
        rows.append(
            flag_row(
                "detection-minimum-at-zero",
                {"closed_argmin": grid[argmin_closed], "empirical_argmin": grid[argmin_emp]},
                grid[argmin_closed] == 0.0 and grid[argmin_emp] == 0.0,
                True,
            )
        )

    # Scheme balance: the angle set hides the prepared index.
    balance_grid = np.linspace(0.0, 2.0 * math.pi, 100, endpoint=False)
    residual = max(abs(balance_check(scheme, a)) for a in balance_grid)
    rows.append(tol_row("balance-residual", {"points": 100}, residual, 0.0, 1e-12))

    rows.append(flag_row("scheme-secure", {"n": config.n}, scheme.is_secure, True))
    if config.n == 2:
        # Demonstrate the break: outbound angles are identified with certainty.
        counters = run_session_batch(
            config, MeasureAll(leg=1), config.checks[0], min(trials, 2000), workers
        )
        accuracy = counters.get("angle_correct", 0) / max(counters.get("angle_total", 0), 1)
        rows.append(
            band_row(
                "angle-identification-accuracy",
                {"n": 2, "qubits": counters.get("angle_total", 0)},
                accuracy,
                1.0,
                counters.get("angle_total", 0),
            )
        )
    return report


def _expected_undetected(
    scheme: AngleScheme, strategy: EveStrategy, payload: int, checks: int
) -> Optional[float]:
    total = payload + checks
    match strategy:
        case Passive():
            return 1.0
        case MeasureAll() | InterceptResend():
            return undetected_prob(payload, checks, total, error_prob_general(scheme, 0.0))
        case MeasureRandom(count=count):
            return undetected_prob(payload, checks, count, error_prob_general(scheme, 0.0))
        case RotateMeasure(alpha=alpha, selection=None):
            return undetected_prob(payload, checks, total, error_prob_general(scheme, alpha))
        case DisruptReturn():
            # a check replaced by a uniformly random angle passes w.p. 1/2
            return 0.5**checks
    return None


def cmd_attack(config: ExperimentConfig) -> SweepReport:
    """Empirical attack statistics vs the closed-form oracles."""
    scheme = make_scheme(config.n)
    tag, params = parse_strategy_spec(config.strategy)
    strategies = build_strategies(tag, params)
    workers = config.workers or os.cpu_count() or 1
    report = SweepReport("attack", config.echo())
    rows = report.rows

    if tag == "replica_capture" and config.replicas < 2:
        raise UsageError("replica_capture needs --replicas >= 2")

    for checks in config.checks:
        for strategy in strategies:
            self_check_strategy_bounds(strategy, config.payload, checks)
            label = strategy_label(strategy)
            params_out = {"strategy": label, "checks": checks, "payload": config.payload}
            counters = run_session_batch(config, strategy, checks, config.trials, workers)
            sessions = counters["sessions"]

            expected = _expected_undetected(scheme, strategy, config.payload, checks)
            if expected is not None and not isinstance(strategy, DisruptReturn):
                rows.append(
                    band_row(
                        "undetected",
                        params_out,
                        counters["undetected"] / sessions,
                        expected,
                        sessions,
                    )
                )
            match strategy:
                case ReplaceQubits(count=count):
                    rows.append(
                        band_row(
                            "replace-no-check-hit",
                            params_out,
                            counters.get("replace_no_check_hit", 0) / sessions,
                            replace_success_prob(config.payload, checks, count),
                            sessions,
                        )
                    )
                case InterceptResend():
                    if not config.disable_p1_leg1:
                        pe = error_prob_general(scheme, 0.0)
                        rows.append(
                            band_row(
                                "leg1-detection",
                                params_out,
                                counters["leg1_error"] / sessions,
                                1.0 - (1.0 - pe) ** checks,
                                sessions,
                            )
                        )
                    possible = counters.get("eve_recovery_possible", 0)
                    if possible:
                        rows.append(
                            band_row(
                                "eve-recovery-accuracy",
                                {**params_out, "recoverable_sessions": possible},
                                counters["eve_match"] / max(counters["eve_committed"], 1),
                                1.0,
                                counters["eve_committed"],
                            )
                        )
                case ReplicaCapture():
                    total = config.payload + checks
                    expected_guess = 1.0 / math.comb(total, config.payload)
                    rows.append(
                        band_row(
                            "replica-guess-success",
                            params_out,
                            counters.get("replica_guess_correct", 0) / sessions,
                            expected_guess,
                            sessions,
                        )
                    )
                    rows.append(
                        band_row(
                            "fake-data-accepted",
                            params_out,
                            counters.get("fake_accepted", 0) / sessions,
                            expected_guess,
                            sessions,
                        )
                    )
                case DisruptReturn():
                    if not config.disable_p1_leg2:
                        rows.append(
                            band_row(
                                "leg2-detection",
                                params_out,
                                counters["leg2_error"] / sessions,
                                1.0 - 0.5**checks,
                                sessions,
                            )
                        )
                    else:
                        rows.append(
                            band_row(
                                "decode-error-rate",
                                params_out,
                                counters.get("decode_errors", 0)
                                / max(counters.get("decoded_bits", 0), 1),
                                0.5,
                                counters.get("decoded_bits", 0),
                            )
                        )
                        committed = counters.get("eve_committed", 0)
                        if committed:
                            rows.append(
                                band_row(
                                    "eve-recovery-accuracy",
                                    params_out,
                                    counters["eve_match"] / committed,
                                    0.5,
                                    committed,
                                )
                            )
                case Passive():
                    rows.append(
                        band_row(
                            "decode-error-rate",
                            params_out,
                            counters.get("decode_errors", 0)
                            / max(counters.get("decoded_bits", 1), 1),
                            0.0,
                            counters.get("decoded_bits", 1),
                        )
                    )
    return report


def self_check_strategy_bounds(strategy: EveStrategy, payload: int, checks: int) -> None:
    total = payload + checks
    match strategy:
        case MeasureRandom(count=count) if count > total:
            raise UsageError(f"cannot inspect {count} of {total} slots")
        case ReplaceQubits(count=count) if count > total:
            raise UsageError(f"cannot replace {count} of {total} slots")


def parse_data_bits(config: ExperimentConfig) -> tuple[int, ...]:
    sources = [
        s for s in (config.data, config.data_hex, config.data_file) if s is not None
    ]
    if len(sources) != 1:
        raise UsageError("provide exactly one of --data, --data-hex, --data-file")
    if config.data is not None:
        text = config.data
    elif config.data_hex is not None:
        hex_text = config.data_hex.strip()
        try:
            raw = bytes.fromhex(hex_text)
        except ValueError as exc:
            raise UsageError(f"bad hex data {config.data_hex!r}") from exc
        text = "".join(f"{byte:08b}" for byte in raw)
    else:
        try:
            with open(config.data_file, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read data file: {exc}") from exc
    bits = tuple(int(ch) for ch in text if ch in "01")
    stray = [ch for ch in text if ch not in "01 \t\n\r"]
    if stray:
        raise UsageError(f"data contains non-bit characters: {stray[:5]}")
    if not bits:
        raise UsageError("no data bits provided")
    return bits


def cmd_session(config: ExperimentConfig) -> SweepReport:
    """One full round-trip transfer, reported in detail."""
    scheme = make_scheme(config.n)
    data_bits = parse_data_bits(config)
    tag, params = parse_strategy_spec(config.strategy)
    strategies = build_strategies(tag, params)
    if len(strategies) != 1:
        raise UsageError("session runs exactly one strategy; no parameter sweeps")
    strategy = strategies[0]
    if isinstance(strategy, ReplicaCapture) and config.replicas < 2:
        raise UsageError("replica_capture needs --replicas >= 2")
    rng = substream(config.seed, DOM_SESSION, 0)
    result = run_protocol2(
        len(data_bits),
        config.checks[0],
        scheme,
        data_bits,
        strategy,
        rng,
        source=QubitSource(config.replicas),
        use_protocol1_leg1=not config.disable_p1_leg1,
        use_protocol1_leg2=not config.disable_p1_leg2,
    )
    report = SweepReport("session", {**config.echo(), "payload": len(data_bits)})
    recovered = result.eve_recovered_bits()
    matched, committed = result.eve_match_count()
    report.rows.append(
        {
            "metric": "session",
            "params": {"strategy": strategy_label(strategy)},
            "data_bits": "".join(map(str, result.data_bits)),
            "decoded_bits": (
                "".join(map(str, result.decoded_bits)) if result.decoded_bits else None
            ),
            "decoded_matches_data": (
                result.decode_errors == 0 if result.completed else None
            ),
            "leg1_verdict": result.leg1_verdict.value if result.leg1_verdict else None,
            "leg2_verdict": result.leg2_verdict.value if result.leg2_verdict else None,
            "aborted_at": result.aborted_at,
            "eve_captured_bit_count": len(result.eve.captured_bits),
            "eve_recovered_bits": (
                "".join("?" if b is None else str(b) for b in recovered)
                if recovered
                else None
            ),
            "eve_match_fraction": (matched / committed) if committed else None,
            "pass": True,
        }
    )
    return report


# ---------------------------------------------------------------------------
# Rendering


def render_json(report: SweepReport) -> str:
    return json.dumps(report.document(), sort_keys=True, indent=2) + "\n"


def render_text(report: SweepReport) -> str:
    lines = [f"{report.command}  config: {json.dumps(report.config, sort_keys=True)}"]
    for row in report.rows:
        status = "PASS" if row["pass"] else "FAIL"
        detail = {
            k: v
            for k, v in row.items()
            if k not in ("metric", "params", "pass")
        }
        lines.append(
            f"  [{status}] {row['metric']:<32} {json.dumps(row['params'], sort_keys=True)}"
            f" -> {json.dumps(detail, sort_keys=True)}"
        )
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def render_csv(report: SweepReport) -> str:
    keys: list[str] = []
    for row in report.rows:
        for key in row:
            if key not in keys:
                keys.append(key)
    lines = [",".join(keys)]
    for row in report.rows:
        cells = []
        for key in keys:
            value = row.get(key, "")
            if isinstance(value, dict):
                value = json.dumps(value, sort_keys=True).replace(",", ";")
            cells.append(str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "text": render_text, "csv": render_csv}


# ---------------------------------------------------------------------------
# Argument parsing and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qstsim",
        description="Round-trip qubit secure-transmission simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file with flat key=value defaults")
        p.add_argument("--n", type=int, help="number of public scheme angles (default 3)")
        p.add_argument("--payload", type=int, help="data qubits per frame (default 8)")
        p.add_argument("--checks", help="check qubits per frame; int, list, or range (default 2)")
        p.add_argument("--trials", type=int, help="sessions/trials per estimate (default 100000)")
        p.add_argument("--seed", type=int, help="64-bit master seed (default 1)")
        p.add_argument("--strategy", help="adversary spec tag[:k=v,...] (default passive)")
        p.add_argument("--alpha-grid", dest="alpha_grid", help="start:stop:steps (stop excluded)")
        p.add_argument("--replicas", type=int, help="qubits emitted per request (default 1)")
        p.add_argument("--unsafe-test-mode", dest="unsafe_test_mode", action="store_true",
                       default=None, help="allow disabling frame authentication")
        p.add_argument("--disable-p1-leg1", dest="disable_p1_leg1", action="store_true",
                       default=None, help="test mode: skip authentication on leg 1")
        p.add_argument("--disable-p1-leg2", dest="disable_p1_leg2", action="store_true",
                       default=None, help="test mode: skip authentication on leg 2")
        p.add_argument("--format", choices=("json", "text", "csv"), help="output format")
        p.add_argument("--out", help="write the report to this path instead of stdout")
        p.add_argument("--workers", type=int, help="worker processes (default: all cores)")

    add_common(sub.add_parser("prop-check", help="verify scheme properties"))
    add_common(sub.add_parser("attack", help="run an adversary scenario"))
    p_session = sub.add_parser("session", help="run one round-trip transfer")
    add_common(p_session)
    p_session.add_argument("--data", help="data bits, e.g. 0100110")
    p_session.add_argument("--data-hex", dest="data_hex", help="data as hex bytes")
    p_session.add_argument("--data-file", dest="data_file", help="file of 0/1 characters")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values: dict = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load config file: {exc}") from exc
        if not isinstance(file_values, dict):
            raise UsageError("config file must hold a flat JSON object")

    config = ExperimentConfig(command=args.command)
    for name in (
        "n", "payload", "trials", "seed", "strategy", "alpha_grid", "replicas",
        "unsafe_test_mode", "disable_p1_leg1", "disable_p1_leg2", "format",
        "out", "workers", "data", "data_hex", "data_file",
    ):
        value = getattr(args, name, None)
        if value is None:
            value = file_values.get(name)
        if value is not None:
            setattr(config, name, value)
    checks = getattr(args, "checks", None)
    if checks is None:
        checks = file_values.get("checks")
    if checks is not None:
        config.checks = parse_int_list(str(checks), "checks")
    config.validate()
    return config


COMMANDS = {
    "prop-check": cmd_prop_check,
    "attack": cmd_attack,
    "session": cmd_session,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        config = config_from_args(args)
        report = COMMANDS[args.command](config)
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rendered = RENDERERS[config.format](report)
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    elapsed = time.perf_counter() - started
    print(f"elapsed: {elapsed:.2f}s", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
