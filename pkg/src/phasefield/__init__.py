"""Semi-implicit solver for the 1-D periodic Allen-Cahn equation.

The package couples three time steppers with runtime monitors for the
bounds the semi-implicit scheme guarantees: solutions stay inside the
potential's invariant interval, the discrete L1 norm grows at most like
exp(L*dt) per step, and the discrete energy never increases.
"""

from .diagnostics import (
    ENERGY_DECAY,
    L1_BOUND,
    MAX_PRINCIPLE,
    MonitorVerdict,
    StepRecord,
    discrete_energy,
    evaluate_monitors,
    l1_norm,
    make_record,
)
from .experiment import (
    ConfigError,
    ConvergenceRow,
    RunConfig,
    RunResult,
    SchemeName,
    SweepConfig,
    SweepRow,
    convergence_study,
    run,
    sweep,
)
from .linalg import (
    CyclicTridiagonalSystem,
    SingularSystem,
    solve_cyclic,
    solve_cyclic_variable,
    solve_dense_oracle,
)
from .potential import (
    PotentialKind,
    PotentialSpec,
    RootFindingFailure,
    StabilityBounds,
    ValidationReport,
    double_well,
    eval_F,
    eval_f,
    eval_fprime,
    polynomial,
    stability_bounds,
    validate_hypotheses,
)
from .scheme import (
    FieldState,
    GridSpec,
    InvalidInitialData,
    NewtonDivergence,
    NewtonParams,
    RandomUniform,
    SchemeParams,
    SineWave,
    TanhFront,
    make_initial,
    step_convex_splitting,
    step_explicit,
    step_semi_implicit,
)

__version__ = "0.1.0"
