"""Last-passage percolation in inhomogeneous exponential environments."""

from .closed_forms import (
    classify_m2_limit,
    corner_D,
    corner_m2,
    corner_shape,
    crossing_residual,
    expansion_check,
    parabola_L,
    region_boundary_hyperbola,
    two_phase_constants,
    two_phase_shape,
    uniqueness_probe,
)
from .errors import DomainError, LPPError, MemoryBudgetError, OutputError, SpecError, UnsupportedFieldError
from .estimators import PassagePercolationSimulator, ShapeFunctionEstimator
from .lpp_engine import (
    EnvironmentSpec,
    PassageResult,
    last_passage,
    last_passage_checkpointed,
    scaled_passage,
    weight,
)
from .macro_shape import Polyline, ShapeEval, functional_I, gamma, gamma_homog, optimize_polyline
from .speed_field import (
    Constant,
    CornerPower,
    CornerSqrt,
    ShiftedTwoPhase,
    SpeedField,
    StepGrid,
    discretised_mean,
    evaluate,
    f_eval,
    f_prime,
    order_exponents,
    parse_field,
)

__version__ = "0.1.0"

__all__ = [
    "Constant", "CornerPower", "CornerSqrt", "ShiftedTwoPhase", "SpeedField", "StepGrid",
    "discretised_mean", "evaluate", "f_eval", "f_prime", "order_exponents", "parse_field",
    "EnvironmentSpec", "PassageResult", "last_passage", "last_passage_checkpointed", "scaled_passage", "weight",
    "Polyline", "ShapeEval", "functional_I", "gamma", "gamma_homog", "optimize_polyline",
    "classify_m2_limit", "corner_D", "corner_m2", "corner_shape", "crossing_residual", "expansion_check",
    "parabola_L", "region_boundary_hyperbola", "two_phase_constants", "two_phase_shape", "uniqueness_probe",
    "ShapeFunctionEstimator", "PassagePercolationSimulator",
    "LPPError", "SpecError", "DomainError", "UnsupportedFieldError", "MemoryBudgetError", "OutputError",
]
