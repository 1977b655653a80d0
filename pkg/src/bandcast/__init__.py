"""Least-squares band-limited approximation and extrapolation of sampled signals."""

__version__ = "0.1.0"

from .signal_model import (
    BandcastError,
    BandlimitedModel,
    DegenerateRegimeWarning,
    EmptyWindow,
    FitConfig,
    FitResult,
    InvalidConfig,
    InvalidSignal,
    Signal,
    TimeWindow,
    is_unique_regime,
    new_window,
)
from .sinc_ops import (
    GramMatrix,
    analyze,
    basis_value,
    design_matrix,
    gram,
    sinc,
    spectrum,
    synthesize,
    synthesize_many,
)
from .solver import NotPositiveDefinite, SolveReport, condition_estimate, regularize, solve_spd
from .approximator import (
    SingularSystem,
    brute_force_fit,
    fit,
    fit_highband,
    forecast,
    objective,
    objective_regularized,
)
from .streaming_filter import FilterOutput, FilterState, NonConsecutiveTime, push, run_offline
