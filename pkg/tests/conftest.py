import math

import numpy as np
import pytest

from phasekey import ExperimentConfig


def binomial_tolerance(p: float, n: int, n_sigma: float = 5.0) -> float:
    """Half-width of an n-sigma binomial band around probability p."""
    return n_sigma * math.sqrt(max(p * (1.0 - p), 0.0) / n)


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return amps / np.linalg.norm(amps)


@pytest.fixture
def ideal_config() -> ExperimentConfig:
    return ExperimentConfig(rounds=100)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
