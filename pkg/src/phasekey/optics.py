"""Exact linear algebra for single-photon interferometer states.

The key carrier is one photon spread over (location, polarization) modes,
plus an explicit vacuum element that absorbs loss.  All transforms are pure
functions returning new states; lossless maps preserve the squared norm to
1e-12 and the vacuum amplitude is kept real and non-negative.

Mode basis, fixed ordering (vacuum first):

    0        vacuum
    1,  2    COMMON      H, V
    3,  4    ARM_A       H, V
    5,  6    ARM_B       H, V
    7,  8    DET_PORT_1  H, V
    9, 10    DET_PORT_2  H, V

The Mach-Zehnder variant drops polarization and uses the 3-element basis
{vacuum, mode 1, mode 2}; see the ``mz_``-prefixed functions.  Mode 1 is
the arm/port on the sender's side, mode 2 the arm that crosses to the
receiver (the only part an eavesdropper can reach).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

ATOL = 1e-12

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class PipelineError(ValueError):
    """Raised when a transform is applied to a state it cannot accept."""


class Polarization(Enum):
    H = 0  # logic 0
    V = 1  # logic 1


class Location(Enum):
    COMMON = 0
    ARM_A = 1
    ARM_B = 2
    DET_PORT_1 = 3
    DET_PORT_2 = 4


class InterferometerMode(Enum):
    MICHELSON = "michelson"
    MACH_ZEHNDER = "mach_zehnder"


VACUUM = 0
N_AMPLITUDES = 1 + 2 * len(Location)


def mode_index(location: Location, polarization: Polarization) -> int:
    """Index of a photon mode in the amplitude vector."""
    return 1 + 2 * location.value + polarization.value


def _loc_indices(location: Location) -> tuple[int, int]:
    base = 1 + 2 * location.value
    return base, base + 1


_C_H, _C_V = _loc_indices(Location.COMMON)
_A_H, _A_V = _loc_indices(Location.ARM_A)
_B_H, _B_V = _loc_indices(Location.ARM_B)
_D1_H, _D1_V = _loc_indices(Location.DET_PORT_1)
_D2_H, _D2_V = _loc_indices(Location.DET_PORT_2)

# Hadamard-like polarization rotation of the half-wave plate.
_HWP_MATRIX = _INV_SQRT2 * np.array([[1.0, 1.0], [1.0, -1.0]])


# Mach-Zehnder basis: no polarization, two spatial modes.
MZ_VACUUM = 0
MZ_MODE_1 = 1  # sender-side arm; doubles as the D1 output port
MZ_MODE_2 = 2  # receiver-side arm; doubles as the D2 output port
MZ_N_AMPLITUDES = 3


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over {vacuum} + photon modes.

    Length 11 for the Michelson basis, 3 for the Mach-Zehnder basis.
    Index 0 is always the vacuum element.
    """

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128).copy()
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def vacuum_weight(self) -> float:
        return float(abs(self.amplitudes[VACUUM]) ** 2)

    def photon_weight(self, *indices: int) -> float:
        return float(np.sum(np.abs(self.amplitudes[list(indices)]) ** 2))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Exact probabilities of the four per-round click classes."""

    p_d1: float
    p_d2: float
    p_none: float
    p_both: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_d1, self.p_d2, self.p_none, self.p_both])

    def as_dict(self) -> dict[str, float]:
        return {
            "p_d1": self.p_d1,
            "p_d2": self.p_d2,
            "p_none": self.p_none,
            "p_both": self.p_both,
        }

    def total(self) -> float:
        return self.p_d1 + self.p_d2 + self.p_none + self.p_both


def encode_photon(bit: int) -> PureState:
    """Launch a single photon at the input, H for bit 0 and V for bit 1."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    amps = np.zeros(N_AMPLITUDES, dtype=np.complex128)
    pol = Polarization.H if bit == 0 else Polarization.V
    amps[mode_index(Location.COMMON, pol)] = 1.0
    return PureState(amps)


def apply_hwp(state: PureState) -> PureState:
    """Half-wave plate at 22.5 degrees on every location.

    H -> (H+V)/sqrt(2), V -> (H-V)/sqrt(2); an involution.
    """
    amps = state.amplitudes.copy()
    photon = amps[1:].reshape(len(Location), 2)
    amps[1:] = (photon @ _HWP_MATRIX.T).reshape(-1)
    return PureState(amps)


def _require_photon_only_at_common(state: PureState, op: str) -> None:
    tail = state.amplitudes[_A_H:]
    stray = float(np.vdot(tail, tail).real)
    if stray > ATOL:
        raise PipelineError(
            f"{op}: photon amplitude outside COMMON (stray weight {stray:.3e})"
        )


def apply_pbs_forward(state: PureState) -> PureState:
    """Split the input beam: H is sent down arm b, V down arm a."""
    _require_photon_only_at_common(state, "apply_pbs_forward")
    amps = state.amplitudes.copy()
    amps[_B_H] = state.amplitudes[_C_H]
    amps[_A_V] = state.amplitudes[_C_V]
    amps[_C_H] = 0.0
    amps[_C_V] = 0.0
    amps[_A_H] = 0.0
    amps[_B_V] = 0.0
    return PureState(amps)


def apply_pbs_backward(state: PureState) -> PureState:
    """Recombine the arms into the common beam.

    (arm b, H) and (arm a, V) return to the common location.  Mismatched
    polarizations, (arm b, V) and (arm a, H), exit through an unmonitored
    port; their weight is folded into the vacuum element.
    """
    amps = state.amplitudes.copy()
    lost = abs(amps[_B_V]) ** 2 + abs(amps[_A_H]) ** 2
    amps[_C_H] = state.amplitudes[_B_H]
    amps[_C_V] = state.amplitudes[_A_V]
    amps[_A_H] = 0.0
    amps[_A_V] = 0.0
    amps[_B_H] = 0.0
    amps[_B_V] = 0.0
    if lost != 0.0:
        amps[VACUUM] = math.sqrt(abs(amps[VACUUM]) ** 2 + lost)
    return PureState(amps)


def apply_arm_phase(state: PureState, arm: Location, phase: float) -> PureState:
    """Multiply both polarizations of one arm by exp(i*phase)."""
    if arm not in (Location.ARM_A, Location.ARM_B):
        raise ValueError(f"phase shifter sits in an arm, got {arm}")
    amps = state.amplitudes.copy()
    ih, iv = _loc_indices(arm)
    factor = complex(math.cos(phase), math.sin(phase))
    amps[ih] *= factor
    amps[iv] *= factor
    return PureState(amps)


def apply_arm_loss(state: PureState, arm: Location, transmittance: float) -> PureState:
    """Attenuate one arm; the removed weight moves to the vacuum element."""
    if arm not in (Location.ARM_A, Location.ARM_B):
        raise ValueError(f"loss acts on an arm, got {arm}")
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    amps = state.amplitudes.copy()
    ih, iv = _loc_indices(arm)
    removed = (1.0 - transmittance) * (abs(amps[ih]) ** 2 + abs(amps[iv]) ** 2)
    root_t = math.sqrt(transmittance)
    amps[ih] *= root_t
    amps[iv] *= root_t
    if removed != 0.0:
        amps[VACUUM] = math.sqrt(abs(amps[VACUUM]) ** 2 + removed)
    return PureState(amps)


def route_to_detectors(state: PureState) -> PureState:
    """Final polarization split: H goes to detector port 1, V to port 2."""
    _require_photon_only_at_common(state, "route_to_detectors")
    amps = state.amplitudes.copy()
    amps[_D1_H] = state.amplitudes[_C_H]
    amps[_D2_V] = state.amplitudes[_C_V]
    amps[_C_H] = 0.0
    amps[_C_V] = 0.0
    return PureState(amps)


def ideal_click_probabilities(state: PureState) -> OutcomeDistribution:
    """Born-rule readout of a state sitting at the detector ports.

    A single photon cannot produce a double click here; double clicks enter
    only through detector dark counts, handled by the sampling layer.
    """
    amps = state.amplitudes
    p_d1 = float(abs(amps[_D1_H]) ** 2 + abs(amps[_D1_V]) ** 2)
    p_d2 = float(abs(amps[_D2_H]) ** 2 + abs(amps[_D2_V]) ** 2)
    p_none = float(abs(amps[VACUUM]) ** 2)
    return OutcomeDistribution(p_d1=p_d1, p_d2=p_d2, p_none=p_none, p_both=0.0)


# ---------------------------------------------------------------------------
# Two-path joint description used by the security argument.
#
# Joint basis: {vac, H, V}_a x {vac, H, V}_b, index = 3*i_a + i_b.
# ---------------------------------------------------------------------------

JOINT_DIM = 9
_JOINT_VAC, _JOINT_H, _JOINT_V = 0, 1, 2


@dataclass(frozen=True)
class JointPathState:
    """Amplitudes over the 9-dim tensor basis of the two interferometer arms."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128).copy()
        if amps.shape != (JOINT_DIM,):
            raise ValueError(f"joint state needs {JOINT_DIM} amplitudes")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class DensityMatrix:
    """3x3 density matrix of one arm over {vac, H, V}."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=np.complex128).copy()
        if m.shape != (3, 3):
            raise ValueError("density matrix must be 3x3")
        object.__setattr__(self, "entries", m)

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.entries)))


def build_joint_state(bit: int) -> JointPathState:
    """Two-arm state of the photon after the input split.

    Bit 0 gives (|0>_a |H>_b + |V>_a |0>_b)/sqrt(2); bit 1 flips the sign
    of the second component.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    amps = np.zeros(JOINT_DIM, dtype=np.complex128)
    amps[3 * _JOINT_VAC + _JOINT_H] = _INV_SQRT2
    amps[3 * _JOINT_V + _JOINT_VAC] = _INV_SQRT2 if bit == 0 else -_INV_SQRT2
    return JointPathState(amps)


def reduced_density_path_b(joint: JointPathState) -> DensityMatrix:
    """Partial trace over arm a, leaving the 3x3 state of arm b."""
    m = joint.amplitudes.reshape(3, 3)  # rows: arm a, cols: arm b
    rho = np.einsum("ij,ik->jk", m, m.conj())
    return DensityMatrix(rho)


def trace_overlap(r0: DensityMatrix, r1: DensityMatrix) -> float:
    """Hilbert-Schmidt overlap Tr[r0 r1] of two density matrices."""
    return float(np.real(np.trace(r0.entries @ r1.entries)))


# ---------------------------------------------------------------------------
# Mach-Zehnder variant: 3-mode basis {vacuum, mode 1, mode 2}, 50:50
# splitters, no polarization.  The splitter convention is the real
# symmetric one, (m1, m2) -> ((m1+m2), (m1-m2))/sqrt(2), which makes the
# bit-to-detector routing identical to the polarization geometry.
# ---------------------------------------------------------------------------


def mz_encode(bit: int) -> PureState:
    """Launch the photon into input port 1 for bit 0, port 2 for bit 1."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    amps = np.zeros(MZ_N_AMPLITUDES, dtype=np.complex128)
    amps[MZ_MODE_1 if bit == 0 else MZ_MODE_2] = 1.0
    return PureState(amps)


def mz_splitter(state: PureState) -> PureState:
    """50:50 beam splitter mixing the two spatial modes."""
    amps = state.amplitudes.copy()
    m1, m2 = amps[MZ_MODE_1], amps[MZ_MODE_2]
    amps[MZ_MODE_1] = (m1 + m2) * _INV_SQRT2
    amps[MZ_MODE_2] = (m1 - m2) * _INV_SQRT2
    return PureState(amps)


def mz_arm_phase(state: PureState, phase: float) -> PureState:
    """Phase on mode 2, the receiver-side arm."""
    amps = state.amplitudes.copy()
    amps[MZ_MODE_2] *= complex(math.cos(phase), math.sin(phase))
    return PureState(amps)


def mz_arm_loss(state: PureState, mode: int, transmittance: float) -> PureState:
    """Attenuate one spatial mode, folding the loss into the vacuum element."""
    if mode not in (MZ_MODE_1, MZ_MODE_2):
        raise ValueError(f"loss acts on mode 1 or 2, got {mode}")
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"transmittance must be in [0, 1], got {transmittance}")
    amps = state.amplitudes.copy()
    removed = (1.0 - transmittance) * abs(amps[mode]) ** 2
    amps[mode] *= math.sqrt(transmittance)
    if removed != 0.0:
        amps[MZ_VACUUM] = math.sqrt(abs(amps[MZ_VACUUM]) ** 2 + removed)
    return PureState(amps)


def mz_click_probabilities(state: PureState) -> OutcomeDistribution:
    """Born-rule readout after the output splitter: mode 1 -> D1, mode 2 -> D2."""
    p_d1 = float(abs(state.amplitudes[MZ_MODE_1]) ** 2)
    p_d2 = float(abs(state.amplitudes[MZ_MODE_2]) ** 2)
    p_none = float(abs(state.amplitudes[MZ_VACUUM]) ** 2)
    return OutcomeDistribution(p_d1=p_d1, p_d2=p_d2, p_none=p_none, p_both=0.0)
