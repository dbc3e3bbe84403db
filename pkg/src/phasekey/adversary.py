"""Eavesdropper strategies.

Every strategy acts on arm b only, the single part of the interferometer
that leaves the sender's site.  Amplitudes on arm a are never read or
written by an attack; they change only through Born-rule conditioning when
an intercept measurement collapses the superposition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import optics
from .fields import FieldState, _loc_field_indices
from .optics import InterferometerMode, Location, Polarization, PureState


class EveKind(Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    PNS_TAP = "pns_tap"


@dataclass(frozen=True)
class EveStrategy:
    """Attack selection plus its parameters."""

    kind: EveKind = EveKind.NONE
    tap_transmittance: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind is EveKind.PNS_TAP:
            t = self.tap_transmittance
            if t is None or not 0.0 <= t <= 1.0:
                raise ValueError(
                    f"pns_tap needs a tap transmittance in [0, 1], got {t!r}"
                )
        elif self.tap_transmittance is not None:
            raise ValueError(f"tap_transmittance only applies to pns_tap")

    @classmethod
    def none(cls) -> "EveStrategy":
        return cls(EveKind.NONE)

    @classmethod
    def intercept_resend(cls) -> "EveStrategy":
        return cls(EveKind.INTERCEPT_RESEND)

    @classmethod
    def pns_tap(cls, transmittance: float) -> "EveStrategy":
        return cls(EveKind.PNS_TAP, tap_transmittance=transmittance)


@dataclass(frozen=True)
class InterceptRecord:
    """What an intercept measurement revealed: presence and polarization."""

    saw_photon: bool
    polarization: Optional[Polarization] = None


def _arm_b_indices(mode: InterferometerMode) -> tuple[int, ...]:
    if mode is InterferometerMode.MICHELSON:
        return (
            optics.mode_index(Location.ARM_B, Polarization.H),
            optics.mode_index(Location.ARM_B, Polarization.V),
        )
    return (optics.MZ_MODE_2,)


def intercept_resend_branches(
    state: PureState, mode: InterferometerMode
) -> list[tuple[float, PureState, InterceptRecord]]:
    """All collapse branches of an intercept measurement on arm b.

    Returns (probability, post-measurement state, record) triples.  When
    the photon is found in arm b its polarization is measured and a fresh
    photon of that polarization is resent into arm b, erasing any
    inter-arm coherence.  Otherwise the state is the renormalized
    projection onto the complement of arm b.
    """
    amps = state.amplitudes
    b_indices = _arm_b_indices(mode)
    branches: list[tuple[float, PureState, InterceptRecord]] = []

    for idx in b_indices:
        p = float(abs(amps[idx]) ** 2)
        if p == 0.0:
            continue
        resent = np.zeros_like(amps)
        resent[idx] = 1.0
        pol = None
        if mode is InterferometerMode.MICHELSON:
            pol = Polarization.H if idx == b_indices[0] else Polarization.V
        branches.append((p, PureState(resent), InterceptRecord(True, pol)))

    p_elsewhere = 1.0 - sum(p for p, _, _ in branches)
    if p_elsewhere > 0.0:
        kept = amps.copy()
        for idx in b_indices:
            kept[idx] = 0.0
        kept /= math.sqrt(p_elsewhere)
        branches.append((p_elsewhere, PureState(kept), InterceptRecord(False)))
    return branches


def intercept_resend(
    state: PureState, rng: np.random.Generator, mode: InterferometerMode
) -> tuple[PureState, InterceptRecord]:
    """Sample one collapse branch of the intercept-resend attack.

    Only the realized branch state is constructed; the branch weights are
    the same Born probabilities :func:`intercept_resend_branches` returns.
    """
    amps = state.amplitudes
    b_indices = _arm_b_indices(mode)
    u = rng.random()
    acc = 0.0
    for idx in b_indices:
        acc += float(abs(amps[idx]) ** 2)
        if u < acc:
            resent = np.zeros_like(amps)
            resent[idx] = 1.0
            pol = None
            if mode is InterferometerMode.MICHELSON:
                pol = Polarization.H if idx == b_indices[0] else Polarization.V
            return PureState(resent), InterceptRecord(True, pol)
    p_elsewhere = 1.0 - acc
    if p_elsewhere <= 0.0:
        # Full amplitude sat in arm b and the draw landed on a rounding sliver.
        idx = b_indices[-1]
        resent = np.zeros_like(amps)
        resent[idx] = 1.0
        pol = Polarization.V if mode is InterferometerMode.MICHELSON else None
        return PureState(resent), InterceptRecord(True, pol)
    kept = amps.copy()
    for idx in b_indices:
        kept[idx] = 0.0
    kept /= math.sqrt(p_elsewhere)
    return PureState(kept), InterceptRecord(False)


def pns_tap(
    field: FieldState, transmittance: float, mode: InterferometerMode
) -> tuple[FieldState, float]:
    """Siphon a fixed fraction of the arm-b pulse intensity.

    Returns the attenuated field and the mean photon number Eve kept.
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"tap transmittance must be in [0, 1], got {transmittance}")
    alpha = field.alpha.copy()
    if mode is InterferometerMode.MICHELSON:
        indices = _loc_field_indices(Location.ARM_B)
    else:
        indices = (1,)
    tapped = 0.0
    root_t = math.sqrt(transmittance)
    for idx in indices:
        tapped += (1.0 - transmittance) * float(abs(alpha[idx]) ** 2)
        alpha[idx] *= root_t
    return FieldState(alpha), tapped


def eve_information(
    strategy: EveStrategy,
    eve_records: list,
    bob_key_bits: list[int],
    kept_flags: list[bool],
) -> dict:
    """Summarize what the attack records determine about the sifted key.

    Eve's guess of each kept key bit is a fixed function of her record for
    that round; the reported advantage is her agreement rate with Bob's
    key bit minus 1/2.  Arm-b presence and polarization are independent of
    the bit values, so the advantage concentrates at zero.
    """
    if strategy.kind is EveKind.NONE:
        return {
            "strategy": strategy.kind.value,
            "guess_advantage": 0.0,
            "guessed_rounds": 0,
            "eve_intensity": None,
        }

    if strategy.kind is EveKind.INTERCEPT_RESEND:
        guesses = [1 if rec.saw_photon else 0 for rec in eve_records]
        intensity_stats = None
    else:
        intensities = np.array([float(rec) for rec in eve_records])
        reference = float(intensities.mean()) if len(intensities) else 0.0
        guesses = [1 if x > reference else 0 for x in intensities]
        intensity_stats = {
            "mean": float(intensities.mean()) if len(intensities) else 0.0,
            "min": float(intensities.min()) if len(intensities) else 0.0,
            "max": float(intensities.max()) if len(intensities) else 0.0,
        }

    agreements = 0
    guessed = 0
    for guess, bob_bit, kept in zip(guesses, bob_key_bits, kept_flags):
        if not kept:
            continue
        guessed += 1
        if guess == bob_bit:
            agreements += 1
    advantage = (agreements / guessed - 0.5) if guessed else 0.0
    return {
        "strategy": strategy.kind.value,
        "guess_advantage": advantage,
        "guessed_rounds": guessed,
        "eve_intensity": intensity_stats,
    }
