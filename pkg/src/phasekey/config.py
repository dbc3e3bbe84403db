"""Experiment configuration: defaults, file loading, validation.

A config is a single flat JSON document.  Every field has a default that
together describe the ideal setup: Michelson geometry, single-photon
source, lossless arms, perfect detectors, no eavesdropper.  Flag overrides
win over file values; unknown keys are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from .adversary import EveKind, EveStrategy
from .devices import MAX_SEED, ChannelModel, DetectorModel
from .optics import InterferometerMode


class ConfigError(ValueError):
    """Raised for any malformed, out-of-range, or inconsistent configuration."""


class SourceKind(Enum):
    SINGLE_PHOTON = "single_photon"
    COHERENT = "coherent"


CONFIG_KEYS = (
    "mode",
    "source",
    "mu",
    "rounds",
    "t_a",
    "t_b",
    "eta",
    "dark",
    "phase_noise_sigma",
    "static_phase",
    "eve",
    "eve_tap_t",
    "sample_fraction",
    "qber_threshold",
    "seed",
)

DEFAULT_ROUNDS = 10_000
DEFAULT_SAMPLE_FRACTION = 0.1
DEFAULT_QBER_THRESHOLD = 0.11


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameterization of one run."""

    mode: InterferometerMode = InterferometerMode.MICHELSON
    source: SourceKind = SourceKind.SINGLE_PHOTON
    mu: Optional[float] = None
    rounds: int = DEFAULT_ROUNDS
    t_a: float = 1.0
    t_b: float = 1.0
    eta: float = 1.0
    dark: float = 0.0
    phase_noise_sigma: float = 0.0
    static_phase: float = 0.0
    eve: EveStrategy = EveStrategy.none()
    sample_fraction: float = DEFAULT_SAMPLE_FRACTION
    qber_threshold: float = DEFAULT_QBER_THRESHOLD
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ConfigError(f"rounds must be >= 1, got {self.rounds}")
        if not 0.0 < self.sample_fraction <= 1.0:
            raise ConfigError(
                f"sample_fraction must be in (0, 1], got {self.sample_fraction}"
            )
        if not 0.0 <= self.qber_threshold <= 1.0:
            raise ConfigError(
                f"qber_threshold must be in [0, 1], got {self.qber_threshold}"
            )
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        try:
            self.channel()
            self.detector()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

        if self.source is SourceKind.COHERENT:
            if self.mu is None:
                raise ConfigError("coherent source requires mu")
            if self.mu < 0:
                raise ConfigError(f"mu must be >= 0, got {self.mu}")
        elif self.mu is not None:
            raise ConfigError("mu only applies to the coherent source")

        if self.eve.kind is EveKind.PNS_TAP and self.source is not SourceKind.COHERENT:
            raise ConfigError("pns_tap attack requires the coherent source")
        if (
            self.eve.kind is EveKind.INTERCEPT_RESEND
            and self.source is not SourceKind.SINGLE_PHOTON
        ):
            raise ConfigError("intercept_resend attack requires the single_photon source")

    def channel(self) -> ChannelModel:
        return ChannelModel(
            t_a=self.t_a,
            t_b=self.t_b,
            phase_noise_sigma=self.phase_noise_sigma,
            static_phase=self.static_phase,
        )

    def detector(self) -> DetectorModel:
        return DetectorModel(eta=self.eta, dark=self.dark)

    def to_dict(self) -> dict[str, Any]:
        """Flat JSON form, the same keys a config file uses."""
        return {
            "mode": self.mode.value,
            "source": self.source.value,
            "mu": self.mu,
            "rounds": self.rounds,
            "t_a": self.t_a,
            "t_b": self.t_b,
            "eta": self.eta,
            "dark": self.dark,
            "phase_noise_sigma": self.phase_noise_sigma,
            "static_phase": self.static_phase,
            "eve": self.eve.kind.value,
            "eve_tap_t": self.eve.tap_transmittance,
            "sample_fraction": self.sample_fraction,
            "qber_threshold": self.qber_threshold,
            "seed": self.seed,
        }


def _coerce_enum(enum_cls, value, field_name: str):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{field_name} must be one of: {allowed}; got {value!r}")


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    """Build a validated config from flat JSON keys."""
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    fields = dict(data)
    if "mode" in fields:
        fields["mode"] = _coerce_enum(InterferometerMode, fields["mode"], "mode")
    if "source" in fields:
        fields["source"] = _coerce_enum(SourceKind, fields["source"], "source")

    eve_kind = _coerce_enum(EveKind, fields.pop("eve", EveKind.NONE.value), "eve")
    tap = fields.pop("eve_tap_t", None)
    try:
        if eve_kind is EveKind.PNS_TAP:
            eve = EveStrategy(eve_kind, tap_transmittance=tap)
        else:
            if tap is not None:
                raise ConfigError("eve_tap_t only applies when eve is pns_tap")
            eve = EveStrategy(eve_kind)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    for name in ("rounds", "seed"):
        if name in fields and not isinstance(fields[name], int):
            raise ConfigError(f"{name} must be an integer, got {fields[name]!r}")
    for name in (
        "mu", "t_a", "t_b", "eta", "dark",
        "phase_noise_sigma", "static_phase", "sample_fraction", "qber_threshold",
    ):
        if name in fields and fields[name] is not None:
            if isinstance(fields[name], bool) or not isinstance(fields[name], (int, float)):
                raise ConfigError(f"{name} must be a number, got {fields[name]!r}")
            fields[name] = float(fields[name])

    return ExperimentConfig(eve=eve, **fields)


def parse_config(
    path: Optional[str | Path] = None, overrides: Optional[dict[str, Any]] = None
) -> ExperimentConfig:
    """Load a config file (optional) and apply flag overrides on top."""
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in config file {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        data.update(loaded)
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(data)


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    """Functional update helper used by sweeps and tests."""
    return replace(config, **changes)
