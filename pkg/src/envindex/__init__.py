"""Nested model-order selection: elbow detection, information criteria and
the effective number of variables (ENV) index with its confidence measures."""

from .confidence import (
    ConfidenceReport,
    ImportanceProfile,
    UndefinedMeasureError,
    build_report,
    cumulative_importance,
    cumulative_uncertainty,
    importance,
    reliability,
)
from .criteria import PenaltySpec, SelectionResult, area_objective, cost_profile, select
from .curve import (
    CurveValidationError,
    ErrorCurve,
    RawCurve,
    normalize,
    synth_exponential,
    synth_ideal,
    validate_monotone,
)
from .env import EnvResult, compute_env, env_index, env_trace, suggested_k, trapezoid_area
from .modelfit import (
    Dataset,
    FitResult,
    RankedFeatures,
    SingularFitError,
    curve_from_dataset,
    forward_rank,
    ols_fit,
    synth_regression,
)

__version__ = "0.1.0"
