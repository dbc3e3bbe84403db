"""phasekey: simulator for an interference-routed quantum key distribution protocol.

The sender encodes bits in photon polarization, the receiver in the phase
of one interferometer arm; interference routes each photon to a detector
determined by whether the bits agree, so every detection produces a
sifted key bit.  The package provides the exact single-photon optics, a
semiclassical multiphoton model, eavesdropper strategies, a Monte Carlo
protocol engine, and a closed-form oracle for all outcome statistics.
"""
from .adversary import EveKind, EveStrategy, eve_information, intercept_resend, pns_tap
from .analysis import (
    ExactTable,
    efficiency_comparison,
    exact_distribution,
    exact_field_distribution,
    exact_table,
    security_metrics,
)
from .config import ConfigError, ExperimentConfig, SourceKind, parse_config, with_overrides
from .devices import ChannelModel, DetectorModel, Outcome, round_rng, sample_outcome
from .fields import FieldState, field_from_source, threshold_click_probabilities
from .optics import (
    DensityMatrix,
    InterferometerMode,
    JointPathState,
    Location,
    OutcomeDistribution,
    Polarization,
    PureState,
    build_joint_state,
    reduced_density_path_b,
    trace_overlap,
)
from .protocol import (
    EfficiencyConstants,
    ExperimentReport,
    ExperimentResult,
    QberEstimate,
    RoundRecord,
    estimate_qber,
    key_bit_from_outcome,
    run_experiment,
    run_round,
    sift,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelModel",
    "ConfigError",
    "DensityMatrix",
    "DetectorModel",
    "EfficiencyConstants",
    "EveKind",
    "EveStrategy",
    "ExactTable",
    "ExperimentConfig",
    "ExperimentReport",
    "ExperimentResult",
    "FieldState",
    "InterferometerMode",
    "JointPathState",
    "Location",
    "Outcome",
    "OutcomeDistribution",
    "Polarization",
    "PureState",
    "QberEstimate",
    "RoundRecord",
    "SourceKind",
    "build_joint_state",
    "efficiency_comparison",
    "estimate_qber",
    "eve_information",
    "exact_distribution",
    "exact_field_distribution",
    "exact_table",
    "field_from_source",
    "intercept_resend",
    "key_bit_from_outcome",
    "parse_config",
    "pns_tap",
    "reduced_density_path_b",
    "round_rng",
    "run_experiment",
    "run_round",
    "sample_outcome",
    "security_metrics",
    "sift",
    "threshold_click_probabilities",
    "trace_overlap",
    "with_overrides",
]
