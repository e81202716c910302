"""Energy-preserving coordinate-increment discrete gradient integrators for
charged-particle motion in static electromagnetic fields."""

from .discrete_gradient import DEFAULT_ETA, DiscreteGradientResult, cidg, cidg_reversed
from .errors import DomainError, IntegrationError, SolverError
from .fields import (
    EXPERIMENT_IDS,
    EXPERIMENTS,
    evaluate_invariants,
    get_experiment,
    make_drift2d,
    make_energy_test,
    make_model,
    make_tokamak,
)
from .harness import (
    ConvergenceRow,
    DriftFit,
    RunSpec,
    TrajectoryRecord,
    convergence_study,
    drift_fit,
    read_csv,
    run,
    time_methods,
    write_csv,
)
from .integrators import (
    METHODS,
    IntegrationResult,
    IntegratorConfig,
    StepOutcome,
    boris_step,
    cidg1_step,
    cidg2_step,
    cidgc_step,
    integrate,
    rk4_step,
    step,
)
from .phase import (
    FieldModel,
    as_phase_point,
    build_skew,
    grad_hamiltonian,
    hamiltonian,
    phase_point,
)

__version__ = "0.1.0"
