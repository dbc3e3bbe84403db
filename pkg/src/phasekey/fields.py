"""Semiclassical model of multiphoton pulses.

A pulse is a complex classical amplitude per photon mode (no vacuum
element); |alpha|^2 is the mean photon number in that mode.  Every linear
optical element acts on alpha exactly as it acts on single-photon
amplitudes, so the transform code mirrors :mod:`phasekey.optics` with the
vacuum bookkeeping dropped.  Detection is threshold detection: a detector
seeing intensity I clicks with probability 1 - (1-dark) * exp(-eta * I),
and the two detectors click independently.

This is the regime where photon-number splitting matters: tapping one arm
unbalances the recombination and leaks intensity into the nominally dark
detector, producing simultaneous clicks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optics import (
    Location,
    OutcomeDistribution,
    Polarization,
    mode_index,
)

# Field vectors reuse the photon-mode ordering of the pure-state basis,
# shifted down by one because there is no vacuum slot.
N_FIELD_MODES = 10
MZ_N_FIELD_MODES = 2


def field_index(location: Location, polarization: Polarization) -> int:
    return mode_index(location, polarization) - 1


def _loc_field_indices(location: Location) -> tuple[int, int]:
    base = field_index(location, Polarization.H)
    return base, base + 1


@dataclass(frozen=True)
class FieldState:
    """Complex amplitude per mode; units sqrt(photon number)."""

    alpha: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.alpha, dtype=np.complex128).copy()
        object.__setattr__(self, "alpha", a)

    def total_intensity(self) -> float:
        return float(np.sum(np.abs(self.alpha) ** 2))

    def intensity(self, *indices: int) -> float:
        return float(np.sum(np.abs(self.alpha[list(indices)]) ** 2))


def field_from_source(mu: float, bit: int) -> FieldState:
    """Pulse of mean photon number mu, polarized H for bit 0, V for bit 1."""
    if mu < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mu}")
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    alpha = np.zeros(N_FIELD_MODES, dtype=np.complex128)
    pol = Polarization.H if bit == 0 else Polarization.V
    alpha[field_index(Location.COMMON, pol)] = math.sqrt(mu)
    return FieldState(alpha)


def field_hwp(field: FieldState) -> FieldState:
    alpha = field.alpha.copy()
    inv = 1.0 / math.sqrt(2.0)
    for loc in Location:
        ih, iv = _loc_field_indices(loc)
        h, v = alpha[ih], alpha[iv]
        alpha[ih] = (h + v) * inv
        alpha[iv] = (h - v) * inv
    return FieldState(alpha)


def field_pbs_forward(field: FieldState) -> FieldState:
    alpha = field.alpha.copy()
    ch, cv = _loc_field_indices(Location.COMMON)
    ah, av = _loc_field_indices(Location.ARM_A)
    bh, bv = _loc_field_indices(Location.ARM_B)
    alpha[bh] = field.alpha[ch]
    alpha[av] = field.alpha[cv]
    alpha[ch] = alpha[cv] = alpha[ah] = alpha[bv] = 0.0
    return FieldState(alpha)


def field_pbs_backward(field: FieldState) -> FieldState:
    # Mismatched polarizations leave through the unmonitored port and are
    # simply dropped; with no vacuum slot their intensity is gone.
    alpha = field.alpha.copy()
    ch, cv = _loc_field_indices(Location.COMMON)
    ah, av = _loc_field_indices(Location.ARM_A)
    bh, bv = _loc_field_indices(Location.ARM_B)
    alpha[ch] = field.alpha[bh]
    alpha[cv] = field.alpha[av]
    alpha[ah] = alpha[av] = alpha[bh] = alpha[bv] = 0.0
    return FieldState(alpha)


def field_arm_phase(field: FieldState, arm: Location, phase: float) -> FieldState:
    if arm not in (Location.ARM_A, Location.ARM_B):
        raise ValueError(f"phase shifter sits in an arm, got {arm}")
    alpha = field.alpha.copy()
    ih, iv = _loc_field_indices(arm)
    factor = complex(math.cos(phase), math.sin(phase))
    alpha[ih] *= factor
    alpha[iv] *= factor
    return FieldState(alpha)


def field_arm_loss(field: FieldState, arm: Location, transmittance: float) -> FieldState:
    if arm not in (Location.ARM_A, Location.ARM_B):
        raise ValueError(f"loss acts on an arm, got {arm}")
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    alpha = field.alpha.copy()
    ih, iv = _loc_field_indices(arm)
    root_t = math.sqrt(transmittance)
    alpha[ih] *= root_t
    alpha[iv] *= root_t
    return FieldState(alpha)


def field_route_to_detectors(field: FieldState) -> FieldState:
    alpha = field.alpha.copy()
    ch, cv = _loc_field_indices(Location.COMMON)
    d1h, _ = _loc_field_indices(Location.DET_PORT_1)
    _, d2v = _loc_field_indices(Location.DET_PORT_2)
    alpha[d1h] = field.alpha[ch]
    alpha[d2v] = field.alpha[cv]
    alpha[ch] = alpha[cv] = 0.0
    return FieldState(alpha)


def detector_intensities(field: FieldState) -> tuple[float, float]:
    """Mean photon number arriving at each detector port."""
    i1 = field.intensity(*_loc_field_indices(Location.DET_PORT_1))
    i2 = field.intensity(*_loc_field_indices(Location.DET_PORT_2))
    return i1, i2


# --- Mach-Zehnder field variant: 2-mode vector [mode 1, mode 2]. ---


def mz_field_from_source(mu: float, bit: int) -> FieldState:
    if mu < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mu}")
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    alpha = np.zeros(MZ_N_FIELD_MODES, dtype=np.complex128)
    alpha[bit] = math.sqrt(mu)
    return FieldState(alpha)


def mz_field_splitter(field: FieldState) -> FieldState:
    alpha = field.alpha.copy()
    inv = 1.0 / math.sqrt(2.0)
    m1, m2 = alpha[0], alpha[1]
    alpha[0] = (m1 + m2) * inv
    alpha[1] = (m1 - m2) * inv
    return FieldState(alpha)


def mz_field_arm_phase(field: FieldState, phase: float) -> FieldState:
    alpha = field.alpha.copy()
    alpha[1] *= complex(math.cos(phase), math.sin(phase))
    return FieldState(alpha)


def mz_field_arm_loss(field: FieldState, mode: int, transmittance: float) -> FieldState:
    if mode not in (0, 1):
        raise ValueError(f"loss acts on mode 0 or 1, got {mode}")
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    alpha = field.alpha.copy()
    alpha[mode] *= math.sqrt(transmittance)
    return FieldState(alpha)


def mz_detector_intensities(field: FieldState) -> tuple[float, float]:
    return float(abs(field.alpha[0]) ** 2), float(abs(field.alpha[1]) ** 2)


# --- Threshold detection ---


@dataclass(frozen=True)
class ClickProbabilities:
    """Independent per-detector click probabilities."""

    q_d1: float
    q_d2: float

    def outcome_distribution(self) -> OutcomeDistribution:
        q1, q2 = self.q_d1, self.q_d2
        return OutcomeDistribution(
            p_d1=q1 * (1.0 - q2),
            p_d2=q2 * (1.0 - q1),
            p_none=(1.0 - q1) * (1.0 - q2),
            p_both=q1 * q2,
        )


def threshold_click_probability(intensity: float, eta: float, dark: float) -> float:
    """Click probability of one threshold detector seeing the given intensity."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"detector efficiency must be in [0, 1], got {eta}")
    if not 0.0 <= dark < 1.0:
        raise ValueError(f"dark-count probability must be in [0, 1), got {dark}")
    return 1.0 - (1.0 - dark) * math.exp(-eta * intensity)


def threshold_click_probabilities(
    intensities: tuple[float, float], eta: float, dark: float
) -> ClickProbabilities:
    """Per-detector click probabilities for the two detector ports."""
    i1, i2 = intensities
    return ClickProbabilities(
        q_d1=threshold_click_probability(i1, eta, dark),
        q_d2=threshold_click_probability(i2, eta, dark),
    )
