"""Projected stochastic gradient and mirror ascent for monotone DR-submodular maximization."""
from .errors import CapabilityError, ConfigError, DataError, DiagnosticError, InputError
from .geometry import ConstraintSet, MirrorMap, diameter, linear_maximize, project_euclidean, project_kl
from .solvers import (
    StepSchedule,
    Trajectory,
    estimate_sigma,
    frank_wolfe,
    is_stationary,
    run_to_fixed_point,
    sample_index,
    sample_output,
    sga,
    sma,
    stationarity_gap,
    stationary_value_bound,
)
from .discrete import EmpiricalSetObjective, greedy, lift_and_round, pipage_round, pipage_round_many

__version__ = "0.1.0"
