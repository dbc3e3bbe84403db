"""Exact outcome tables and security metrics.

The exact oracle never samples: it enumerates every stochastic branch of a
round (intercept collapse outcomes, detection and dark-count patterns) as
a weighted ensemble, propagates each branch through the same optical
pipeline the Monte Carlo engine uses, and sums probabilities.  Gaussian
arm-b phase noise is averaged analytically for the single-photon model
(port probabilities are degree-1 trigonometric polynomials of the phase)
and by Gauss-Hermite quadrature for the coherent model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adversary import EveKind, EveStrategy, intercept_resend_branches, pns_tap
from .config import ConfigError, ExperimentConfig, SourceKind, with_overrides
from .devices import DetectorModel
from .optics import (
    OutcomeDistribution,
    build_joint_state,
    reduced_density_path_b,
    trace_overlap,
)
from .fields import threshold_click_probabilities
from .protocol import (
    EfficiencyConstants,
    ExperimentReport,
    apply_channel_loss,
    apply_field_channel_loss,
    complete_field_interferometer,
    complete_interferometer,
    field_port_intensities,
    port_distribution,
    prepare_split_field,
    prepare_split_state,
)

BIT_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))

_QUADRATURE_NODES = 80


@dataclass(frozen=True)
class ExactTable:
    """Exact outcome distribution per (sender bit, receiver bit) pair."""

    rows: dict
    config: ExperimentConfig
    eve_intensity: Optional[dict] = None

    def row(self, alice_bit: int, bob_bit: int) -> OutcomeDistribution:
        return self.rows[(alice_bit, bob_bit)]

    def to_dict(self) -> dict:
        serialized = {
            f"{a}{b}": self.rows[(a, b)].as_dict() for a, b in BIT_PAIRS
        }
        eve = None
        if self.eve_intensity is not None:
            eve = {f"{a}{b}": self.eve_intensity[(a, b)] for a, b in BIT_PAIRS}
        return {
            "config": self.config.to_dict(),
            "rows": serialized,
            "eve_intensity": eve,
        }


def _detector_outcome_probabilities(
    port_probs: np.ndarray, det: DetectorModel
) -> OutcomeDistribution:
    """Fold efficiency and independent dark counts into a port distribution.

    Mirrors the sampling semantics of :func:`phasekey.devices.sample_outcome`
    exactly: a real click survives with probability eta, then each detector
    may add a dark count.
    """
    p1, p2 = float(port_probs[0]), float(port_probs[1])
    r1 = p1 * det.eta
    r2 = p2 * det.eta
    r0 = 1.0 - r1 - r2
    d = det.dark
    return OutcomeDistribution(
        p_d1=r1 * (1.0 - d) + r0 * d * (1.0 - d),
        p_d2=r2 * (1.0 - d) + r0 * d * (1.0 - d),
        p_none=r0 * (1.0 - d) ** 2,
        p_both=(r1 + r2) * d + r0 * d * d,
    )


def _single_photon_port_probs(
    config: ExperimentConfig, eve: EveStrategy, alice_bit: int, arm_phase: float
) -> np.ndarray:
    """Port probabilities (D1, D2, none) at one fixed arm-b phase."""
    state = prepare_split_state(config.mode, alice_bit)
    state = apply_channel_loss(state, config.mode, config.channel())
    if eve.kind is EveKind.INTERCEPT_RESEND:
        branches = [
            (weight, branch_state)
            for weight, branch_state, _ in intercept_resend_branches(state, config.mode)
        ]
    else:
        branches = [(1.0, state)]
    acc = np.zeros(3)
    for weight, branch_state in branches:
        final = complete_interferometer(branch_state, config.mode, arm_phase)
        dist = port_distribution(final, config.mode)
        acc += weight * np.array([dist.p_d1, dist.p_d2, dist.p_none])
    return acc


def _gaussian_phase_average(evaluate, mean_phase: float, sigma: float) -> np.ndarray:
    """Average a degree-1 trigonometric polynomial of the phase over a Gaussian.

    ``evaluate(theta)`` must return a vector of the form
    c0 + c_cos*cos(theta) + c_sin*sin(theta); three evaluations pin the
    coefficients, and E[cos], E[sin] under N(mean, sigma^2) damp the
    oscillating part by exp(-sigma^2/2).
    """
    p_zero = evaluate(0.0)
    p_half = evaluate(math.pi / 2)
    p_pi = evaluate(math.pi)
    c0 = 0.5 * (p_zero + p_pi)
    c_cos = 0.5 * (p_zero - p_pi)
    c_sin = p_half - c0
    damp = math.exp(-0.5 * sigma * sigma)
    return c0 + damp * (c_cos * math.cos(mean_phase) + c_sin * math.sin(mean_phase))


def exact_distribution(
    config: ExperimentConfig, eve: Optional[EveStrategy] = None
) -> ExactTable:
    """Exact outcome table for the single-photon model."""
    if config.source is not SourceKind.SINGLE_PHOTON:
        raise ConfigError(
            "exact_distribution handles the single_photon source; "
            "use exact_field_distribution for coherent configs"
        )
    if eve is not None:
        config = with_overrides(config, eve=eve)
    eve = config.eve
    det = config.detector()
    channel = config.channel()

    rows = {}
    for a_bit, b_bit in BIT_PAIRS:
        mean_phase = b_bit * math.pi + channel.static_phase
        ports = _gaussian_phase_average(
            lambda theta: _single_photon_port_probs(config, eve, a_bit, theta),
            mean_phase,
            channel.phase_noise_sigma,
        )
        rows[(a_bit, b_bit)] = _detector_outcome_probabilities(ports, det)
    return ExactTable(rows=rows, config=config)


def exact_field_distribution(
    config: ExperimentConfig, eve: Optional[EveStrategy] = None
) -> ExactTable:
    """Exact outcome table for the coherent-pulse model.

    Includes the per-row mean photon number an arm-b tap would collect,
    which is identical for all bit pairs (the attack's blindness).
    """
    if config.source is not SourceKind.COHERENT:
        raise ConfigError(
            "exact_field_distribution handles the coherent source; "
            "use exact_distribution for single_photon configs"
        )
    if eve is not None:
        config = with_overrides(config, eve=eve)
    eve = config.eve
    channel = config.channel()
    sigma = channel.phase_noise_sigma

    rows = {}
    eve_intensity = {}
    for a_bit, b_bit in BIT_PAIRS:
        field = prepare_split_field(config.mode, config.mu, a_bit)
        field = apply_field_channel_loss(field, config.mode, channel)
        tapped = 0.0
        if eve.kind is EveKind.PNS_TAP:
            field, tapped = pns_tap(field, eve.tap_transmittance, config.mode)
        eve_intensity[(a_bit, b_bit)] = tapped

        def outcome_at(theta: float) -> np.ndarray:
            final = complete_field_interferometer(field, config.mode, theta)
            clicks = threshold_click_probabilities(
                field_port_intensities(final, config.mode), config.eta, config.dark
            )
            return clicks.outcome_distribution().as_array()

        mean_phase = b_bit * math.pi + channel.static_phase
        if sigma == 0.0:
            probs = outcome_at(mean_phase)
        else:
            nodes, weights = np.polynomial.hermite.hermgauss(_QUADRATURE_NODES)
            probs = np.zeros(4)
            for x, w in zip(nodes, weights):
                probs += w * outcome_at(mean_phase + math.sqrt(2.0) * sigma * x)
            probs /= math.sqrt(math.pi)
        rows[(a_bit, b_bit)] = OutcomeDistribution(*map(float, probs))

    table_eve = eve_intensity if eve.kind is EveKind.PNS_TAP else None
    return ExactTable(rows=rows, config=config, eve_intensity=table_eve)


def exact_table(config: ExperimentConfig) -> ExactTable:
    """Dispatch to the exact oracle matching the configured source."""
    if config.source is SourceKind.COHERENT:
        return exact_field_distribution(config)
    return exact_distribution(config)


def security_metrics() -> dict:
    """Distinguishability of the arm-b states available to an eavesdropper.

    Builds the two-arm carrier states for bit 0 and bit 1, reduces each
    over the sender-side arm, and reports the overlap of the photon
    occupied blocks of the reduced matrices (the vacuum block is common to
    both states and carries no bit information, so it is excluded from the
    overlap).  A positive overlap means the arm-b states cannot be
    distinguished without disturbance; the two full carrier states are
    globally orthogonal.
    """
    psi_0 = build_joint_state(0)
    psi_1 = build_joint_state(1)
    rho_0 = reduced_density_path_b(psi_0)
    rho_1 = reduced_density_path_b(psi_1)

    block_0 = rho_0.entries[1:, 1:]
    block_1 = rho_1.entries[1:, 1:]
    overlap = float(np.real(np.trace(block_0 @ block_1)))

    inner = complex(np.vdot(psi_0.amplitudes, psi_1.amplitudes))
    global_overlap = float(abs(inner) ** 2)

    return {
        "trace_overlap": overlap,
        "global_overlap": global_overlap,
        "nonorthogonal": overlap > 0.0,
    }


def full_reduced_overlap() -> float:
    """Hilbert-Schmidt overlap of the complete 3x3 reduced arm-b states."""
    rho_0 = reduced_density_path_b(build_joint_state(0))
    rho_1 = reduced_density_path_b(build_joint_state(1))
    return trace_overlap(rho_0, rho_1)


def efficiency_comparison(report) -> dict:
    """Measured sifting efficiency next to the reference constants."""
    if isinstance(report, ExperimentReport):
        measured = report.sifting_efficiency
    else:
        measured = report["sifting_efficiency"]
    constants = EfficiencyConstants()
    return {
        "measured_efficiency": measured,
        "noh": constants.noh,
        "sun_wen": constants.sun_wen,
        "present": constants.present,
    }
