"""First-order methods and worst-case bounds for convex functions with
quadratic upper growth ``f(x) - f* <= (L/2) d(x, X*)^2``."""

from .algos import (
    RUNNERS,
    RunConfig,
    RunError,
    heavyball_ls_run,
    heavyball_restart_run,
    heavyball_rg_run,
    heavyball_run,
    lyapunov_trace,
    optimality_condition_residual,
    run,
    subgradient_ls_run,
    subgradient_run,
)
from .bounds import BOUND_IDS, BoundReport, BoundSpec, bound_value, verify_trace_against_bound
from .core import (
    ConvexOnly,
    IterateTrace,
    Lipschitz,
    MaxOracle,
    NoProjectionError,
    Oracle,
    OracleError,
    QGPlus,
    RGPlus,
    SmoothOracle,
    distance_to_optset,
    pr_average,
)
from .interp import (
    InterpDataset,
    build_extension,
    check_qgplus_interpolation,
    project_convex_hull,
    random_valid_instance,
)
from .linesearch import LineProblem, exact_line_search, orthogonal_subgradient
from .schedules import GrowthFn, StepSchedule, growth_inverse, schedule_gamma, u_sequence
from .zoo import (
    ResistingOracle,
    cycling_instances,
    huber_oracle,
    lb3d_instance,
    mixed_oracle,
    quadratic_diag_oracle,
    resisting_oracle_query,
    supnorm_oracle,
    supnormsq_oracle,
)

__version__ = "0.1.0"
