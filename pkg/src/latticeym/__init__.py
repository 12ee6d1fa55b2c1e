"""Lattice gauge field samplers and verification suites for SO(N)/SU(N).

Langevin (exponential Euler) and Metropolis samplers of the Wilson-action
Gibbs measure under 't Hooft scaling, with exact Lie-algebra kernels and
statistical checks of the strong-coupling curvature bounds: Hessian and
drift norms, Poincare variance bounds for Wilson loops, susceptibility
sums, covariance decay, coupled-chain contraction, and large-N
factorization trends.
"""

from .groups import (
    GroupSpec,
    LogDomainError,
    bracket_table,
    brownian_increment,
    exp_map,
    geodesic_distance,
    haar_sample,
    log_map,
    orthonormal_basis,
    project_to_algebra,
    reunitarize,
)
from .lattice import (
    EdgeId,
    LatticeSpec,
    LoopWord,
    Plaquette,
    edge_norm,
    enumerate_positive_edges,
    enumerate_positive_plaquettes,
    plaquette_at,
    plaquettes_starting_at,
    rectangle_loop,
    reduce_loop,
)
from .action import (
    CouplingParams,
    action_value,
    derive_constants,
    drift_algebra,
    drift_field,
    haar_configuration,
    hessian_quadratic_form,
    identity_configuration,
    tilde_k,
)

__version__ = "0.1.0"

from .langevin import (
    ContractionResult,
    CoupledState,
    IntegratorParams,
    TrajectoryResult,
    contraction_experiment,
    coupled_step,
    default_step_size,
    run,
    step,
    weighted_distance,
)
from .gibbs import (
    ChainResult,
    MetropolisParams,
    metropolis_sweep,
    sample_chain,
    single_edge_quadrature,
)
from .observables import wilson_loop, wilson_loop_gradient
from .stats import (
    BoundReport,
    DecayReport,
    EstimatorResult,
    ObservableSeries,
    TrendReport,
    covariance_decay,
    estimate,
    factorization_check,
    susceptibility_sums,
    variance_bound_check,
)

__all__ = [
    "GroupSpec",
    "LogDomainError",
    "bracket_table",
    "brownian_increment",
    "exp_map",
    "geodesic_distance",
    "haar_sample",
    "log_map",
    "orthonormal_basis",
    "project_to_algebra",
    "reunitarize",
    "EdgeId",
    "LatticeSpec",
    "LoopWord",
    "Plaquette",
    "edge_norm",
    "enumerate_positive_edges",
    "enumerate_positive_plaquettes",
    "plaquette_at",
    "plaquettes_starting_at",
    "rectangle_loop",
    "reduce_loop",
    "CouplingParams",
    "action_value",
    "derive_constants",
    "drift_algebra",
    "drift_field",
    "haar_configuration",
    "hessian_quadratic_form",
    "identity_configuration",
    "tilde_k",
    "ContractionResult",
    "CoupledState",
    "IntegratorParams",
    "TrajectoryResult",
    "contraction_experiment",
    "coupled_step",
    "default_step_size",
    "run",
    "step",
    "weighted_distance",
    "ChainResult",
    "MetropolisParams",
    "metropolis_sweep",
    "sample_chain",
    "single_edge_quadrature",
    "wilson_loop",
    "wilson_loop_gradient",
    "BoundReport",
    "DecayReport",
    "EstimatorResult",
    "ObservableSeries",
    "TrendReport",
    "covariance_decay",
    "estimate",
    "factorization_check",
    "susceptibility_sums",
    "variance_bound_check",
    "__version__",
]
