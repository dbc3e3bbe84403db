"""Tests for the coherent-pulse model and threshold detection."""
import math

import numpy as np
import pytest

from phasekey import fields
from phasekey.fields import (
    ClickProbabilities,
    FieldState,
    field_arm_loss,
    field_arm_phase,
    field_from_source,
    field_hwp,
    field_pbs_backward,
    field_pbs_forward,
    field_route_to_detectors,
    detector_intensities,
    threshold_click_probabilities,
    threshold_click_probability,
)
from phasekey.optics import Location, Polarization
from phasekey.adversary import pns_tap
from phasekey.optics import InterferometerMode

ATOL = 1e-12


def propagate_ideal(mu: float, alice_bit: int, bob_phase: float, tap: float = 1.0):
    field = field_from_source(mu, alice_bit)
    field = field_pbs_forward(field_hwp(field))
    if tap < 1.0:
        field, _ = pns_tap(field, tap, InterferometerMode.MICHELSON)
    field = field_arm_phase(field, Location.ARM_B, bob_phase)
    field = field_route_to_detectors(field_hwp(field_pbs_backward(field)))
    return field


class TestSource:
    def test_mu_four_gives_amplitude_two(self):
        field = field_from_source(4.0, 0)
        idx = fields.field_index(Location.COMMON, Polarization.H)
        assert field.alpha[idx] == pytest.approx(2.0, abs=ATOL)

    def test_zero_mu_is_dark(self):
        assert field_from_source(0.0, 1).total_intensity() == 0.0

    def test_intensity_equals_mu(self):
        for mu in (0.01, 1.0, 4.0, 17.3):
            assert field_from_source(mu, 0).total_intensity() == pytest.approx(
                mu, abs=ATOL
            )

    def test_negative_mu_rejected(self):
        with pytest.raises(ValueError):
            field_from_source(-1.0, 0)


class TestPropagation:
    def test_matched_bits_all_intensity_at_d1(self):
        # Mirrors the single-photon determinism: equal bits send the whole
        # pulse to detector 1.
        for a_bit in (0, 1):
            field = propagate_ideal(4.0, a_bit, a_bit * math.pi)
            i1, i2 = detector_intensities(field)
            assert i1 == pytest.approx(4.0, abs=ATOL)
            assert i2 == pytest.approx(0.0, abs=ATOL)

    def test_phase_pi_swaps_ports(self):
        field = propagate_ideal(4.0, 0, math.pi)
        i1, i2 = detector_intensities(field)
        assert i1 == pytest.approx(0.0, abs=ATOL)
        assert i2 == pytest.approx(4.0, abs=ATOL)

    def test_tap_scales_arm_amplitude(self):
        mu, tap = 4.0, 0.49
        field = field_pbs_forward(field_hwp(field_from_source(mu, 0)))
        tapped, eve = pns_tap(field, tap, InterferometerMode.MICHELSON)
        idx = fields.field_index(Location.ARM_B, Polarization.H)
        assert tapped.alpha[idx] == pytest.approx(
            math.sqrt(tap) * math.sqrt(mu / 2), abs=ATOL
        )
        assert eve == pytest.approx((1 - tap) * mu / 2, abs=ATOL)

    def test_intensity_conserved_through_lossless_elements(self):
        field = field_from_source(3.7, 1)
        for transform in (field_hwp, field_pbs_forward):
            field = transform(field)
        field = field_arm_phase(field, Location.ARM_B, 0.3)
        assert field.total_intensity() == pytest.approx(3.7, abs=ATOL)

    def test_arm_weighted_transmittance_accounting(self):
        mu, t_a, t_b, tap = 4.0, 0.9, 0.8, 0.7
        field = field_pbs_forward(field_hwp(field_from_source(mu, 0)))
        field = field_arm_loss(field, Location.ARM_A, t_a)
        field = field_arm_loss(field, Location.ARM_B, t_b)
        field, _ = pns_tap(field, tap, InterferometerMode.MICHELSON)
        expected = mu * (t_a / 2 + t_b * tap / 2)
        assert field.total_intensity() == pytest.approx(expected, abs=ATOL)


class TestThresholdDetection:
    def test_dark_field_never_clicks_without_darks(self):
        assert threshold_click_probability(0.0, eta=1.0, dark=0.0) == 0.0

    def test_log_two_intensity_clicks_half(self):
        assert threshold_click_probability(math.log(2), eta=1.0, dark=0.0) == (
            pytest.approx(0.5, abs=ATOL)
        )

    def test_pns_residual_click_probability_symbolic(self):
        # Symbolic recomputation of the dark-port click rate with a tap of
        # transmittance T on arm b: residual amplitude (sqrt(mu)/2)(1-sqrt(T)).
        import sympy

        mu_s, t_s = sympy.Rational(4), sympy.Rational(81, 100)
        residual_intensity = mu_s * (1 - sympy.sqrt(t_s)) ** 2 / 4
        expected = float(1 - sympy.exp(-residual_intensity))

        field = propagate_ideal(4.0, 0, 0.0, tap=0.81)
        _, i2 = detector_intensities(field)
        got = threshold_click_probability(i2, eta=1.0, dark=0.0)
        assert got == pytest.approx(expected, abs=ATOL)
        assert got == pytest.approx(1 - math.exp(-0.01), abs=ATOL)

    def test_balanced_pulse_has_no_double_clicks(self):
        field = propagate_ideal(4.0, 0, 0.0, tap=1.0)
        clicks = threshold_click_probabilities(
            detector_intensities(field), eta=1.0, dark=0.0
        )
        dist = clicks.outcome_distribution()
        assert dist.p_both == pytest.approx(0.0, abs=ATOL)
        assert dist.p_d2 == pytest.approx(0.0, abs=ATOL)

    def test_dark_port_click_grows_as_tap_deepens(self):
        rates = []
        for tap in (0.9, 0.7, 0.5, 0.3):
            field = propagate_ideal(4.0, 0, 0.0, tap=tap)
            clicks = threshold_click_probabilities(
                detector_intensities(field), eta=1.0, dark=0.0
            )
            rates.append(clicks.q_d2)
        assert all(r > 0 for r in rates)
        assert all(b > a for a, b in zip(rates, rates[1:]))

    def test_outcome_distribution_sums_to_one(self):
        dist = ClickProbabilities(0.3, 0.8).outcome_distribution()
        assert dist.total() == pytest.approx(1.0, abs=ATOL)

    def test_parameter_ranges(self):
        with pytest.raises(ValueError):
            threshold_click_probability(1.0, eta=1.5, dark=0.0)
        with pytest.raises(ValueError):
            threshold_click_probability(1.0, eta=1.0, dark=1.0)


class TestMachZehnderFields:
    def test_routing_matches_polarization_geometry(self):
        for a_bit in (0, 1):
            for b_bit in (0, 1):
                field = fields.mz_field_splitter(fields.mz_field_from_source(4.0, a_bit))
                field = fields.mz_field_arm_phase(field, b_bit * math.pi)
                field = fields.mz_field_splitter(field)
                i1, i2 = fields.mz_detector_intensities(field)
                if a_bit == b_bit:
                    assert i1 == pytest.approx(4.0, abs=ATOL)
                else:
                    assert i2 == pytest.approx(4.0, abs=ATOL)

    def test_arm_intensity_is_bit_independent(self):
        for mu in (0.5, 4.0):
            values = []
            for a_bit in (0, 1):
                field = fields.mz_field_splitter(fields.mz_field_from_source(mu, a_bit))
                values.append(float(abs(field.alpha[1]) ** 2))
            assert values[0] == pytest.approx(values[1], abs=ATOL)
