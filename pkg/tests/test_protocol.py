"""Tests for the round pipeline, sifting, error estimation, and the runner."""
import math

import numpy as np
import pytest

from conftest import binomial_tolerance
from phasekey import (
    EveStrategy,
    ExperimentConfig,
    InterferometerMode,
    Outcome,
    estimate_qber,
    key_bit_from_outcome,
    run_experiment,
    run_round,
    sift,
    with_overrides,
)
from phasekey.devices import estimation_rng, round_rng
from phasekey.protocol import RoundRecord


def ideal(rounds=100, **kwargs) -> ExperimentConfig:
    return ExperimentConfig(rounds=rounds, **kwargs)


class TestRunRound:
    def test_equal_bits_click_d1(self):
        record = run_round(ideal(), 0, 0)
        assert record.outcome is Outcome.D1
        assert (record.alice_key_bit, record.bob_key_bit) == (0, 0)

    def test_opposite_bits_click_d2_and_flip(self):
        record = run_round(ideal(), 0, 1)
        assert record.outcome is Outcome.D2
        assert (record.alice_key_bit, record.bob_key_bit) == (1, 1)

    def test_ones_click_d1(self):
        record = run_round(ideal(), 1, 1)
        assert record.outcome is Outcome.D1
        assert (record.alice_key_bit, record.bob_key_bit) == (1, 1)

    def test_all_pairs_deterministic_over_repeats(self):
        for a in (0, 1):
            for b in (0, 1):
                for index in range(50):
                    record = run_round(ideal(), a, b, index=index)
                    expected = Outcome.D1 if a == b else Outcome.D2
                    assert record.outcome is expected
                    assert record.alice_key_bit == record.bob_key_bit

    def test_eve_strategy_argument_overrides_config(self):
        outcomes = set()
        for index in range(200):
            record = run_round(
                ideal(), 0, 0, eve_strategy=EveStrategy.intercept_resend(), index=index
            )
            outcomes.add(record.outcome)
        assert outcomes == {Outcome.D1, Outcome.D2}

    def test_kept_flag_matches_outcome(self):
        record = run_round(ideal(eta=0.0), 0, 0)
        assert record.outcome is Outcome.NONE
        assert not record.kept
        assert record.alice_key_bit is None and record.bob_key_bit is None


class TestKeyBitRule:
    def test_d1_keeps_bit(self):
        assert key_bit_from_outcome(0, Outcome.D1) == 0
        assert key_bit_from_outcome(1, Outcome.D1) == 1

    def test_d2_flips_bit(self):
        assert key_bit_from_outcome(0, Outcome.D2) == 1
        assert key_bit_from_outcome(1, Outcome.D2) == 0

    def test_rejects_unkept_outcomes(self):
        for outcome in (Outcome.NONE, Outcome.BOTH):
            with pytest.raises(ValueError):
                key_bit_from_outcome(0, outcome)


def _record(index, a, b, outcome):
    kept = outcome in (Outcome.D1, Outcome.D2)
    return RoundRecord(
        index=index,
        alice_bit=a,
        bob_bit=b,
        outcome=outcome,
        kept=kept,
        alice_key_bit=key_bit_from_outcome(a, outcome) if kept else None,
        bob_key_bit=b if kept else None,
    )


class TestSift:
    def test_all_d1(self):
        records = [_record(i, i % 2, i % 2, Outcome.D1) for i in range(8)]
        alice, bob, efficiency = sift(records)
        assert efficiency == 1.0
        assert list(alice) == [i % 2 for i in range(8)]
        assert list(alice) == list(bob)

    def test_all_none(self):
        records = [_record(i, 0, 0, Outcome.NONE) for i in range(5)]
        alice, bob, efficiency = sift(records)
        assert efficiency == 0.0
        assert len(alice) == 0 and len(bob) == 0

    def test_mixed_counts(self):
        records = [
            _record(0, 0, 0, Outcome.D1),
            _record(1, 0, 1, Outcome.D2),
            _record(2, 1, 1, Outcome.NONE),
            _record(3, 1, 0, Outcome.D2),
        ]
        alice, bob, efficiency = sift(records)
        assert efficiency == 0.75
        assert len(alice) == 3

    def test_both_clicks_are_discarded(self):
        records = [_record(0, 0, 0, Outcome.BOTH), _record(1, 0, 0, Outcome.D1)]
        _, _, efficiency = sift(records)
        assert efficiency == 0.5


class TestEstimateQber:
    def test_identical_keys(self):
        key = np.array([0, 1, 1, 0, 1] * 10)
        estimate, indices = estimate_qber(key, key.copy(), 0.3, 0.11, estimation_rng(0))
        assert estimate.qber == 0.0
        assert not estimate.abort
        assert estimate.sampled == len(indices) == 15

    def test_complementary_keys_full_sample(self):
        alice = np.zeros(40, dtype=int)
        bob = np.ones(40, dtype=int)
        estimate, indices = estimate_qber(alice, bob, 1.0, 0.11, estimation_rng(0))
        assert estimate.qber == 1.0
        assert estimate.abort
        assert estimate.sampled == 40

    def test_half_differing_keys(self):
        alice = np.array([0, 1] * 20)
        bob = np.zeros(40, dtype=int)
        estimate, _ = estimate_qber(alice, bob, 1.0, 0.11, estimation_rng(0))
        assert estimate.qber == 0.5

    def test_sampling_is_without_replacement(self):
        key = np.zeros(100, dtype=int)
        _, indices = estimate_qber(key, key, 0.5, 0.11, estimation_rng(3))
        assert len(set(indices.tolist())) == len(indices) == 50

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            estimate_qber(np.zeros(3), np.zeros(4), 0.5, 0.11, estimation_rng(0))

    def test_empty_keys(self):
        estimate, indices = estimate_qber(
            np.array([], dtype=int), np.array([], dtype=int), 0.5, 0.11, estimation_rng(0)
        )
        assert estimate.sampled == 0 and estimate.qber == 0.0 and not estimate.abort
        assert len(indices) == 0


class TestRunExperiment:
    def test_ideal_run_is_perfect(self):
        result = run_experiment(ideal(rounds=2000))
        report = result.report
        assert report.sifting_efficiency == 1.0
        assert report.qber.qber == 0.0
        assert not report.qber.abort
        assert report.counts["none"] == 0 and report.counts["both"] == 0
        assert report.counts["d1"] + report.counts["d2"] == 2000
        assert report.final_key_length == 2000 - report.qber.sampled

    def test_noiseless_keys_agree_everywhere(self):
        result = run_experiment(ideal(rounds=3000))
        for record in result.records:
            assert record.kept
            assert record.alice_key_bit == record.bob_key_bit

    def test_counts_sum_to_rounds(self):
        result = run_experiment(ideal(rounds=1500, eta=0.5, dark=0.02))
        assert sum(result.report.counts.values()) == 1500

    def test_efficiency_tracks_detector_efficiency(self):
        n = 10_000
        result = run_experiment(ideal(rounds=n, eta=0.5))
        assert result.report.sifting_efficiency == pytest.approx(
            0.5, abs=binomial_tolerance(0.5, n)
        )

    def test_reproducible_records(self):
        a = run_experiment(ideal(rounds=500, eta=0.7, seed=99))
        b = run_experiment(ideal(rounds=500, eta=0.7, seed=99))
        assert a.records == b.records

    def test_transcript_independent_of_worker_count(self):
        config = ideal(rounds=400, eta=0.8, dark=0.01, seed=5)
        seq = run_experiment(config, workers=1)
        par = run_experiment(config, workers=3)
        assert seq.records == par.records
        assert seq.report.counts == par.report.counts
        assert seq.report.qber == par.report.qber

    def test_fixed_bit_injection(self):
        n = 16
        alice_bits = np.array([0, 1] * (n // 2))
        bob_bits = np.zeros(n, dtype=int)
        result = run_experiment(ideal(rounds=n), alice_bits=alice_bits, bob_bits=bob_bits)
        for record, a in zip(result.records, alice_bits):
            assert record.alice_bit == a
            assert record.bob_bit == 0
            assert record.outcome is (Outcome.D1 if a == 0 else Outcome.D2)

    def test_sampled_positions_removed_from_final_key(self):
        result = run_experiment(ideal(rounds=1000, sample_fraction=0.25))
        assert result.report.final_key_length == 750

    def test_phase_noise_error_rate_law(self):
        sigma = 0.5
        n = 40_000
        expected = (1.0 - math.exp(-(sigma**2) / 2.0)) / 2.0
        result = run_experiment(
            ideal(rounds=n, phase_noise_sigma=sigma, sample_fraction=1.0)
        )
        assert result.report.qber.qber == pytest.approx(
            expected, abs=binomial_tolerance(expected, n)
        )

    def test_mach_zehnder_ideal_run(self):
        result = run_experiment(ideal(rounds=1000, mode=InterferometerMode.MACH_ZEHNDER))
        assert result.report.sifting_efficiency == 1.0
        assert result.report.qber.qber == 0.0

    def test_intercept_resend_converges_to_half_qber(self):
        n = 30_000
        config = ideal(
            rounds=n, eve=EveStrategy.intercept_resend(), sample_fraction=1.0
        )
        result = run_experiment(config)
        assert result.report.qber.qber == pytest.approx(
            0.5, abs=binomial_tolerance(0.5, n)
        )
        assert result.report.qber.abort

    def test_wall_clock_present_and_positive(self):
        result = run_experiment(ideal(rounds=50))
        assert result.report.wall_clock_seconds > 0.0
