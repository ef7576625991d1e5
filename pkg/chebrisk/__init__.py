"""Chance-constrained risk bounds from Chebyshev moments and SOS indicator certificates."""

from .bounds import (
    SWEEP_DEGREES,
    SWEEP_REFERENCE,
    Constraint,
    RiskBounds,
    RiskEstimator,
    RiskProblem,
    clamp_probability,
    lower_bound_single,
    mixed_validity_degree,
    sweep_rows,
    upper_bound_multi,
    upper_bound_single,
)
from .config import DEFAULT_SEED, Settings
from .errors import ProblemFileError, StageError
from .montecarlo import SampleConfig, mc_moments, mc_risk, sample, wilson_interval
from .problem import ProblemFile, ProblemValidator

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED",
    "SWEEP_DEGREES",
    "SWEEP_REFERENCE",
    "Constraint",
    "ProblemFile",
    "ProblemFileError",
    "ProblemValidator",
    "RiskBounds",
    "RiskEstimator",
    "RiskProblem",
    "SampleConfig",
    "Settings",
    "StageError",
    "clamp_probability",
    "lower_bound_single",
    "mc_moments",
    "mc_risk",
    "mixed_validity_degree",
    "sample",
    "sweep_rows",
    "upper_bound_multi",
    "upper_bound_single",
    "wilson_interval",
]
