"""Universal adaptive online convex optimization.

Learners that keep small regret on every time interval at once, whatever the
curvature of the losses on that interval (general convex, exp-concave or
strongly convex), without being told which case applies.

    >>> import numpy as np
    >>> from adaptive_oco import DomainSpec, UniversalLearner, LinearLoss, run
    >>> dom = DomainSpec.ball(np.zeros(2), 1.0, gradient_bound=1.0)
    >>> traj = run(UniversalLearner(dom), [LinearLoss(np.array([1.0, 0.0]))] * 8)
    >>> traj.decisions.shape
    (8, 2)
"""

__version__ = "0.1.0"

from .domain import DomainSpec, minimize_quadratic, project, project_generalized
from .evaluation import (
    BoundValues,
    IntervalLosses,
    OgdBaseline,
    Regime,
    RegretReport,
    Violation,
    baseline_ogd,
    bound_values,
    build_report,
    interval_regret,
    offline_comparator,
    strongly_adaptive_regret,
    verify_bounds,
    weakly_adaptive_regret,
)
from .exceptions import ConfigurationError, ContractViolationError, ConvergenceError, InvalidArgumentError
from .experts import AogdExpert, OnsExpert
from .losses import (
    LinearLoss,
    LossObservation,
    QuadraticLoss,
    SquaredErrorLoss,
    surrogate_exp,
    surrogate_exp_grad,
    surrogate_sc,
    surrogate_sc_grad,
    true_loss_eval,
)
from .meta import Trajectory, UniversalLearner, make_learner, read_trajectory_csv, run
from .scenario import ScenarioSpec, SegmentSpec, generate_scenario
from .schedule import (
    IntervalKey,
    intervals_containing,
    intervals_starting_at,
    learning_rate_grid,
    partition_interval,
)
