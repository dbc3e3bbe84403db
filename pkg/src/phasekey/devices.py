"""Stochastic device and channel models.

Random-number contract
----------------------
All randomness derives from one 64-bit master seed through the Philox
counter-based generator:

* round ``i`` draws from ``Philox(key=seed, counter=i * 2**64)``,
* the post-run QBER sampling stage draws from
  ``Philox(key=seed, counter=2**192)``.

Each round owns a disjoint counter block, so a transcript depends only on
(seed, config) and never on how rounds are partitioned across workers.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .optics import OutcomeDistribution

_ROUND_BLOCK = 2**64
_ESTIMATION_COUNTER = 2**192
MAX_SEED = 2**64 - 1


class Outcome(Enum):
    D1 = "D1"
    D2 = "D2"
    NONE = "None"
    BOTH = "Both"


KEPT_OUTCOMES = (Outcome.D1, Outcome.D2)


@dataclass(frozen=True)
class DetectorModel:
    """Threshold detector pair: efficiency and per-gate dark-count probability."""

    eta: float = 1.0
    dark: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")
        if not 0.0 <= self.dark < 1.0:
            raise ValueError(f"dark must be in [0, 1), got {self.dark}")


@dataclass(frozen=True)
class ChannelModel:
    """Interferometer imperfections: arm transmittances and arm-b phase errors."""

    t_a: float = 1.0
    t_b: float = 1.0
    phase_noise_sigma: float = 0.0
    static_phase: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.t_a <= 1.0:
            raise ValueError(f"t_a must be in [0, 1], got {self.t_a}")
        if not 0.0 <= self.t_b <= 1.0:
            raise ValueError(f"t_b must be in [0, 1], got {self.t_b}")
        if self.phase_noise_sigma < 0.0:
            raise ValueError(
                f"phase_noise_sigma must be >= 0, got {self.phase_noise_sigma}"
            )


def _validate_seed(seed: int) -> None:
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")


def round_rng(seed: int, round_index: int) -> np.random.Generator:
    """Generator owning the counter block of one protocol round."""
    _validate_seed(seed)
    if round_index < 0:
        raise ValueError(f"round_index must be >= 0, got {round_index}")
    bitgen = np.random.Philox(key=seed, counter=round_index * _ROUND_BLOCK)
    return np.random.Generator(bitgen)


class RoundStreams:
    """Fast per-round stream access for tight loops.

    Reseats one Philox generator at round counter blocks instead of paying
    generator construction per round; ``at(i)`` yields draws identical to
    ``round_rng(seed, i)``.
    """

    def __init__(self, seed: int):
        _validate_seed(seed)
        self._bitgen = np.random.Philox(key=seed)
        self._generator = np.random.Generator(self._bitgen)
        self._key = self._bitgen.state["state"]["key"].copy()

    def at(self, round_index: int) -> np.random.Generator:
        if round_index < 0:
            raise ValueError(f"round_index must be >= 0, got {round_index}")
        counter = np.zeros(4, dtype=np.uint64)
        value = round_index * _ROUND_BLOCK
        for word in range(4):
            counter[word] = (value >> (64 * word)) & 0xFFFFFFFFFFFFFFFF
        self._bitgen.state = {
            "bit_generator": "Philox",
            "state": {"counter": counter, "key": self._key},
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return self._generator


def estimation_rng(seed: int) -> np.random.Generator:
    """Generator reserved for sampling the QBER test positions."""
    _validate_seed(seed)
    bitgen = np.random.Philox(key=seed, counter=_ESTIMATION_COUNTER)
    return np.random.Generator(bitgen)


def sample_phase_noise(channel: ChannelModel, rng: np.random.Generator) -> float:
    """Per-round arm-b phase error: static offset plus a Gaussian draw."""
    if channel.phase_noise_sigma == 0.0:
        return channel.static_phase
    return channel.static_phase + rng.normal(0.0, channel.phase_noise_sigma)


def sample_outcome(
    dist: OutcomeDistribution, det: DetectorModel, rng: np.random.Generator
) -> Outcome:
    """Draw one detection event from an exact port distribution.

    The photon's port is drawn first, then detector efficiency decides
    whether the real click survives, then each detector independently
    fires a dark count.  Draw order per round: port, efficiency (only when
    a photon reached a port), dark on D1, dark on D2.
    """
    u = rng.random()
    if u < dist.p_d1:
        port = Outcome.D1
    elif u < dist.p_d1 + dist.p_d2:
        port = Outcome.D2
    else:
        port = Outcome.NONE

    real_click_1 = False
    real_click_2 = False
    if port is not Outcome.NONE:
        if rng.random() < det.eta:
            real_click_1 = port is Outcome.D1
            real_click_2 = port is Outcome.D2

    click_1 = real_click_1 or (rng.random() < det.dark)
    click_2 = real_click_2 or (rng.random() < det.dark)

    if click_1 and click_2:
        return Outcome.BOTH
    if click_1:
        return Outcome.D1
    if click_2:
        return Outcome.D2
    return Outcome.NONE


def sample_clicks(
    q_d1: float, q_d2: float, rng: np.random.Generator
) -> Outcome:
    """Draw one threshold-detection event from independent click probabilities."""
    click_1 = rng.random() < q_d1
    click_2 = rng.random() < q_d2
    if click_1 and click_2:
        return Outcome.BOTH
    if click_1:
        return Outcome.D1
    if click_2:
        return Outcome.D2
    return Outcome.NONE
