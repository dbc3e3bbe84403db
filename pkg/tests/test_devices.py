"""Tests for detector sampling, phase noise, and the RNG stream contract."""
import numpy as np
import pytest

from conftest import binomial_tolerance
from phasekey.devices import (
    ChannelModel,
    DetectorModel,
    Outcome,
    RoundStreams,
    estimation_rng,
    round_rng,
    sample_outcome,
    sample_phase_noise,
)
from phasekey.optics import OutcomeDistribution

D1_CERTAIN = OutcomeDistribution(1.0, 0.0, 0.0, 0.0)
D2_CERTAIN = OutcomeDistribution(0.0, 1.0, 0.0, 0.0)


class TestModels:
    def test_detector_ranges(self):
        DetectorModel(eta=0.0, dark=0.0)
        DetectorModel(eta=1.0, dark=0.999)
        with pytest.raises(ValueError):
            DetectorModel(eta=1.2)
        with pytest.raises(ValueError):
            DetectorModel(dark=1.0)

    def test_channel_ranges(self):
        ChannelModel(t_a=0.0, t_b=1.0, phase_noise_sigma=0.0)
        with pytest.raises(ValueError):
            ChannelModel(t_b=-0.1)
        with pytest.raises(ValueError):
            ChannelModel(phase_noise_sigma=-1.0)


class TestSampleOutcome:
    def test_deterministic_d1(self):
        det = DetectorModel(eta=1.0, dark=0.0)
        rng = round_rng(0, 0)
        for _ in range(200):
            assert sample_outcome(D1_CERTAIN, det, rng) is Outcome.D1

    def test_deterministic_d2(self):
        det = DetectorModel(eta=1.0, dark=0.0)
        rng = round_rng(0, 1)
        for _ in range(200):
            assert sample_outcome(D2_CERTAIN, det, rng) is Outcome.D2

    def test_blind_detector_never_clicks(self):
        det = DetectorModel(eta=0.0, dark=0.0)
        rng = round_rng(0, 2)
        for _ in range(200):
            assert sample_outcome(D1_CERTAIN, det, rng) is Outcome.NONE

    def test_dark_count_coincidence_rate(self):
        # A real D1 click plus an independent dark count on D2 shows up as
        # a double click with probability equal to the dark rate.
        det = DetectorModel(eta=1.0, dark=0.01)
        rng = round_rng(7, 0)
        n = 100_000
        both = sum(
            sample_outcome(D1_CERTAIN, det, rng) is Outcome.BOTH for _ in range(n)
        )
        assert both / n == pytest.approx(0.01, abs=binomial_tolerance(0.01, n))


class TestPhaseNoise:
    def test_silent_channel(self):
        rng = round_rng(0, 0)
        assert sample_phase_noise(ChannelModel(), rng) == 0.0

    def test_static_offset_only(self):
        rng = round_rng(0, 0)
        channel = ChannelModel(static_phase=0.3)
        assert sample_phase_noise(channel, rng) == 0.3

    def test_gaussian_moments(self):
        channel = ChannelModel(static_phase=0.1, phase_noise_sigma=0.5)
        rng = round_rng(11, 0)
        n = 100_000
        draws = np.array([sample_phase_noise(channel, rng) for _ in range(n)])
        assert draws.mean() == pytest.approx(0.1, abs=5 * 0.5 / np.sqrt(n))
        # 5-sigma band for the sample standard deviation of a Gaussian
        assert draws.std() == pytest.approx(0.5, abs=5 * 0.5 / np.sqrt(2 * n))


class TestStreamDerivation:
    def test_round_streams_match_fresh_generators(self):
        streams = RoundStreams(987654321)
        for index in (0, 1, 17, 54_321, 2**40):
            fresh = round_rng(987654321, index)
            reseated = streams.at(index)
            assert [fresh.random() for _ in range(12)] == [
                reseated.random() for _ in range(12)
            ]

    def test_rounds_have_disjoint_streams(self):
        a = [round_rng(3, 0).random() for _ in range(4)]
        b = [round_rng(3, 1).random() for _ in range(4)]
        assert a != b

    def test_seed_changes_stream(self):
        assert round_rng(0, 0).random() != round_rng(1, 0).random()

    def test_estimation_stream_distinct_from_rounds(self):
        est = estimation_rng(5)
        rnd = round_rng(5, 0)
        assert est.random() != rnd.random()

    def test_seed_range_validated(self):
        with pytest.raises(ValueError):
            round_rng(-1, 0)
        with pytest.raises(ValueError):
            round_rng(2**64, 0)
        with pytest.raises(ValueError):
            round_rng(0, -1)
