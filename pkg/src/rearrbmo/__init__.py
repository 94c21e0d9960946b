"""Rearrangements, mean oscillation and BMO/VMO seminorms on the line."""

from __future__ import annotations

from .errors import DomainError, StabilizationError, ValidationError
from .examples import (EXAMPLE_NAMES, Example, ExampleId, ExperimentRow, converge_experiment,
                       make_example, rearrange_example)
from .funcspace import (Affine, Clamp, Constant, Cosine, GridSpec, Indicator, Interval, LogPowBump,
                        LogRamp, Node, Series, SeriesSpec, StepFunction, Sum, compile_step,
                        dump_descriptor, evaluate, integrate, load_descriptor, series_build,
                        transform)
from .oscillation import (BasisSpec, double_integral_oscillation, mean_abs_deviation, mean_on,
                          mean_oscillation, median_on, positive_part_oscillation)
from .rearrange import (Dimension, RearrangementResult, decreasing_rearrangement, distribution,
                        essential_inf, is_rearrangeable, rearrange_series, rearrange_truncated,
                        sdr_profile, series_ess_inf)
from .seminorm import (ModulusCurve, SupResult, bmo_distance, bmo_seminorm, jump_gap_bound_check,
                       polya_uniform_check, sdr_transfer_check, vmo_modulus)

__all__ = [
    "DomainError", "StabilizationError", "ValidationError", "EXAMPLE_NAMES",
    "Example", "ExampleId", "ExperimentRow", "converge_experiment", "make_example",
    "rearrange_example", "Affine", "Clamp", "Constant", "Cosine", "GridSpec", "Indicator",
    "Interval", "LogPowBump", "LogRamp", "Node", "Series", "SeriesSpec", "StepFunction", "Sum",
    "compile_step", "dump_descriptor", "evaluate", "integrate", "load_descriptor",
    "series_build", "transform", "BasisSpec", "double_integral_oscillation",
    "mean_abs_deviation", "mean_on", "mean_oscillation", "median_on",
    "positive_part_oscillation", "Dimension", "RearrangementResult", "decreasing_rearrangement",
    "distribution", "essential_inf", "is_rearrangeable", "rearrange_series",
    "rearrange_truncated", "sdr_profile", "series_ess_inf", "ModulusCurve", "SupResult",
    "bmo_distance", "bmo_seminorm", "jump_gap_bound_check", "polya_uniform_check",
    "sdr_transfer_check", "vmo_modulus",
]

__version__ = "0.1.0"
