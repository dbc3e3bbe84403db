"""Two-party protocol engine.

One round: the sender launches the carrier with a random bit, the carrier
splits over the two arms, the receiver's random bit sets the arm-b phase
(0 or pi), the arms recombine, and interference steers the carrier to
detector D1 when the bits agree and D2 when they differ.  D2 events are
fixed by the sender flipping her bit, so every detection yields a shared
key bit; no-click and double-click rounds are announced and discarded.

Rounds are statistically independent: round ``i`` draws only from its own
counter-derived random stream (see :mod:`phasekey.devices`), so a multi
worker run produces the identical transcript as a sequential one.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fields, optics
from .adversary import EveKind, EveStrategy, intercept_resend, pns_tap, eve_information
from .config import ExperimentConfig, SourceKind, with_overrides
from .devices import (
    KEPT_OUTCOMES,
    ChannelModel,
    Outcome,
    RoundStreams,
    estimation_rng,
    round_rng,
    sample_clicks,
    sample_outcome,
    sample_phase_noise,
)
from .fields import FieldState, threshold_click_probabilities
from .optics import InterferometerMode, Location, OutcomeDistribution, PureState


@dataclass(frozen=True)
class RoundRecord:
    """Everything one round contributes to the transcript."""

    index: int
    alice_bit: int
    bob_bit: int
    outcome: Outcome
    kept: bool
    alice_key_bit: Optional[int] = None
    bob_key_bit: Optional[int] = None


@dataclass(frozen=True)
class QberEstimate:
    """Error rate measured on a publicly revealed sample of the sifted key."""

    sampled: int
    errors: int
    qber: float
    abort: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "sampled": self.sampled,
            "errors": self.errors,
            "qber": self.qber,
            "abort": self.abort,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class EfficiencyConstants:
    """Sifting efficiencies of the reference schemes and of this protocol."""

    noh: float = 0.125
    sun_wen: float = 0.5
    present: float = 1.0

    def to_dict(self) -> dict:
        return {"noh": self.noh, "sun_wen": self.sun_wen, "present": self.present}


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregate statistics of a full run."""

    config: ExperimentConfig
    counts: dict
    sifting_efficiency: float
    qber: QberEstimate
    final_key_length: int
    adversary: dict
    reference_efficiency: EfficiencyConstants
    seed: int
    wall_clock_seconds: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "counts": dict(self.counts),
            "sifting_efficiency": self.sifting_efficiency,
            "qber": self.qber.to_dict(),
            "final_key_length": self.final_key_length,
            "adversary": dict(self.adversary),
            "reference_efficiency": self.reference_efficiency.to_dict(),
            "seed": self.seed,
            "wall_clock_seconds": self.wall_clock_seconds,
        }


@dataclass(frozen=True)
class ExperimentResult:
    report: ExperimentReport
    records: list


# ---------------------------------------------------------------------------
# Optical pipeline, shared by the Monte Carlo rounds and the exact oracle.
# ---------------------------------------------------------------------------


def prepare_split_state(mode: InterferometerMode, alice_bit: int) -> PureState:
    """Sender-side preparation up to the point the carrier occupies both arms."""
    if mode is InterferometerMode.MICHELSON:
        state = optics.encode_photon(alice_bit)
        state = optics.apply_hwp(state)
        return optics.apply_pbs_forward(state)
    state = optics.mz_encode(alice_bit)
    return optics.mz_splitter(state)


def apply_channel_loss(
    state: PureState, mode: InterferometerMode, channel: ChannelModel
) -> PureState:
    if mode is InterferometerMode.MICHELSON:
        state = optics.apply_arm_loss(state, Location.ARM_A, channel.t_a)
        return optics.apply_arm_loss(state, Location.ARM_B, channel.t_b)
    state = optics.mz_arm_loss(state, optics.MZ_MODE_1, channel.t_a)
    return optics.mz_arm_loss(state, optics.MZ_MODE_2, channel.t_b)


def complete_interferometer(
    state: PureState, mode: InterferometerMode, arm_phase: float
) -> PureState:
    """Receiver phase, recombination, and routing to the detector ports."""
    if mode is InterferometerMode.MICHELSON:
        state = optics.apply_arm_phase(state, Location.ARM_B, arm_phase)
        state = optics.apply_pbs_backward(state)
        state = optics.apply_hwp(state)
        return optics.route_to_detectors(state)
    state = optics.mz_arm_phase(state, arm_phase)
    return optics.mz_splitter(state)


def port_distribution(state: PureState, mode: InterferometerMode) -> OutcomeDistribution:
    if mode is InterferometerMode.MICHELSON:
        return optics.ideal_click_probabilities(state)
    return optics.mz_click_probabilities(state)


def prepare_split_field(mode: InterferometerMode, mu: float, alice_bit: int) -> FieldState:
    if mode is InterferometerMode.MICHELSON:
        field = fields.field_from_source(mu, alice_bit)
        field = fields.field_hwp(field)
        return fields.field_pbs_forward(field)
    field = fields.mz_field_from_source(mu, alice_bit)
    return fields.mz_field_splitter(field)


def apply_field_channel_loss(
    field: FieldState, mode: InterferometerMode, channel: ChannelModel
) -> FieldState:
    if mode is InterferometerMode.MICHELSON:
        field = fields.field_arm_loss(field, Location.ARM_A, channel.t_a)
        return fields.field_arm_loss(field, Location.ARM_B, channel.t_b)
    field = fields.mz_field_arm_loss(field, 0, channel.t_a)
    return fields.mz_field_arm_loss(field, 1, channel.t_b)


def complete_field_interferometer(
    field: FieldState, mode: InterferometerMode, arm_phase: float
) -> FieldState:
    if mode is InterferometerMode.MICHELSON:
        field = fields.field_arm_phase(field, Location.ARM_B, arm_phase)
        field = fields.field_pbs_backward(field)
        field = fields.field_hwp(field)
        return fields.field_route_to_detectors(field)
    field = fields.mz_field_arm_phase(field, arm_phase)
    return fields.mz_field_splitter(field)


def field_port_intensities(field: FieldState, mode: InterferometerMode) -> tuple[float, float]:
    if mode is InterferometerMode.MICHELSON:
        return fields.detector_intensities(field)
    return fields.mz_detector_intensities(field)


# ---------------------------------------------------------------------------
# Monte Carlo rounds.
# ---------------------------------------------------------------------------


def key_bit_from_outcome(alice_bit: int, outcome: Outcome) -> int:
    """Sender-side key bit: keep on D1, flip on D2."""
    if outcome is Outcome.D1:
        return alice_bit
    if outcome is Outcome.D2:
        return 1 - alice_bit
    raise ValueError(f"no key bit for outcome {outcome}")


def _simulate_round(
    config: ExperimentConfig,
    rng: np.random.Generator,
    index: int,
    alice_bit: Optional[int] = None,
    bob_bit: Optional[int] = None,
):
    if alice_bit is None:
        alice_bit = int(rng.integers(0, 2))
    if bob_bit is None:
        bob_bit = int(rng.integers(0, 2))
    channel = config.channel()
    arm_phase = bob_bit * math.pi + sample_phase_noise(channel, rng)
    eve_record = None

    if config.source is SourceKind.SINGLE_PHOTON:
        state = prepare_split_state(config.mode, alice_bit)
        state = apply_channel_loss(state, config.mode, channel)
        if config.eve.kind is EveKind.INTERCEPT_RESEND:
            state, eve_record = intercept_resend(state, rng, config.mode)
        state = complete_interferometer(state, config.mode, arm_phase)
        dist = port_distribution(state, config.mode)
        outcome = sample_outcome(dist, config.detector(), rng)
    else:
        field = prepare_split_field(config.mode, config.mu, alice_bit)
        field = apply_field_channel_loss(field, config.mode, channel)
        if config.eve.kind is EveKind.PNS_TAP:
            field, eve_record = pns_tap(field, config.eve.tap_transmittance, config.mode)
        field = complete_field_interferometer(field, config.mode, arm_phase)
        clicks = threshold_click_probabilities(
            field_port_intensities(field, config.mode), config.eta, config.dark
        )
        outcome = sample_clicks(clicks.q_d1, clicks.q_d2, rng)

    kept = outcome in KEPT_OUTCOMES
    record = RoundRecord(
        index=index,
        alice_bit=alice_bit,
        bob_bit=bob_bit,
        outcome=outcome,
        kept=kept,
        alice_key_bit=key_bit_from_outcome(alice_bit, outcome) if kept else None,
        bob_key_bit=bob_bit if kept else None,
    )
    return record, eve_record


def run_round(
    config: ExperimentConfig,
    alice_bit: int,
    bob_bit: int,
    eve_strategy: Optional[EveStrategy] = None,
    rng: Optional[np.random.Generator] = None,
    index: int = 0,
) -> RoundRecord:
    """Execute one protocol round with fixed bit choices."""
    if eve_strategy is not None:
        config = with_overrides(config, eve=eve_strategy)
    if rng is None:
        rng = round_rng(config.seed, index)
    record, _ = _simulate_round(config, rng, index, alice_bit, bob_bit)
    return record


def _simulate_chunk(args):
    config, start, stop, alice_bits, bob_bits = args
    records = []
    eve_records = []
    streams = RoundStreams(config.seed)
    for i in range(start, stop):
        rng = streams.at(i)
        a = None if alice_bits is None else int(alice_bits[i - start])
        b = None if bob_bits is None else int(bob_bits[i - start])
        record, eve_record = _simulate_round(config, rng, i, a, b)
        records.append(record)
        eve_records.append(eve_record)
    return records, eve_records


def sift(records: list[RoundRecord]) -> tuple[np.ndarray, np.ndarray, float]:
    """Keep detection rounds; no-click and double-click rounds are discarded."""
    alice = [r.alice_key_bit for r in records if r.kept]
    bob = [r.bob_key_bit for r in records if r.kept]
    efficiency = len(alice) / len(records) if records else 0.0
    return np.array(alice, dtype=np.int64), np.array(bob, dtype=np.int64), efficiency


def estimate_qber(
    alice_key: np.ndarray,
    bob_key: np.ndarray,
    sample_fraction: float,
    threshold: float,
    rng: np.random.Generator,
) -> tuple[QberEstimate, np.ndarray]:
    """Compare a random sample of key positions; sampled positions become public.

    Returns the estimate and the sampled indices, which the caller must
    drop from the final key.  The sample size is round(fraction * length),
    at least 1 when the key is non-empty.
    """
    alice_key = np.asarray(alice_key)
    bob_key = np.asarray(bob_key)
    if alice_key.shape != bob_key.shape:
        raise ValueError("key length mismatch")
    if not 0.0 < sample_fraction <= 1.0:
        raise ValueError(f"sample_fraction must be in (0, 1], got {sample_fraction}")
    n = len(alice_key)
    if n == 0:
        estimate = QberEstimate(0, 0, 0.0, False, threshold)
        return estimate, np.array([], dtype=np.int64)
    count = min(n, max(1, int(round(sample_fraction * n))))
    indices = np.sort(rng.choice(n, size=count, replace=False))
    errors = int(np.sum(alice_key[indices] != bob_key[indices]))
    qber = errors / count
    estimate = QberEstimate(count, errors, qber, qber > threshold, threshold)
    return estimate, indices


def run_experiment(
    config: ExperimentConfig,
    workers: int = 1,
    alice_bits: Optional[np.ndarray] = None,
    bob_bits: Optional[np.ndarray] = None,
) -> ExperimentResult:
    """Run all rounds, sift, estimate the error rate, and aggregate a report.

    Both parties draw uniform random bits unless fixed sequences are
    injected (test hook).  ``workers`` only changes the execution layout;
    the transcript is identical for any worker count.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    t_start = time.perf_counter()
    n = config.rounds
    for name, bits in (("alice_bits", alice_bits), ("bob_bits", bob_bits)):
        if bits is not None and len(bits) != n:
            raise ValueError(f"{name} must have length {n}")

    chunks = []
    if workers == 1:
        chunks.append((config, 0, n, alice_bits, bob_bits))
    else:
        chunk_size = -(-n // workers)
        for start in range(0, n, chunk_size):
            stop = min(start + chunk_size, n)
            a = None if alice_bits is None else alice_bits[start:stop]
            b = None if bob_bits is None else bob_bits[start:stop]
            chunks.append((config, start, stop, a, b))

    records: list[RoundRecord] = []
    eve_records: list = []
    if workers == 1:
        for chunk in chunks:
            recs, eves = _simulate_chunk(chunk)
            records.extend(recs)
            eve_records.extend(eves)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for recs, eves in pool.map(_simulate_chunk, chunks):
                records.extend(recs)
                eve_records.extend(eves)

    counts = {"d1": 0, "d2": 0, "none": 0, "both": 0}
    for record in records:
        counts[record.outcome.value.lower()] += 1

    alice_key, bob_key, efficiency = sift(records)
    estimate, sampled_indices = estimate_qber(
        alice_key,
        bob_key,
        config.sample_fraction,
        config.qber_threshold,
        estimation_rng(config.seed),
    )
    final_key_length = len(alice_key) - len(sampled_indices)

    adversary = eve_information(
        config.eve,
        eve_records,
        [r.bob_bit for r in records],
        [r.kept for r in records],
    )

    report = ExperimentReport(
        config=config,
        counts=counts,
        sifting_efficiency=efficiency,
        qber=estimate,
        final_key_length=final_key_length,
        adversary=adversary,
        reference_efficiency=EfficiencyConstants(),
        seed=config.seed,
        wall_clock_seconds=time.perf_counter() - t_start,
    )
    return ExperimentResult(report=report, records=records)
