"""Critical values of eikonal Hamilton-Jacobi equations on embedded networks.

The pipeline: build a network and a space-time grid, attach per-arc
Hamiltonians, march the semi-Lagrangian scheme, and extract the critical
value from the long-time behavior with one of two bracketing algorithms.
"""

from .cases import (
    REGISTRY,
    BenchmarkCase,
    delta_t_policy,
    traffic_circle_dependent,
    traffic_circle_independent,
    triangle_dependent,
    triangle_independent,
)
from .critical import (
    AlgorithmParams,
    CriticalRunResult,
    algorithm1,
    algorithm2,
    corrector_estimate,
)
from .errors import (
    DisconnectedError,
    EikNetError,
    EmptyFeasibleSetError,
    InadmissiblePairError,
    LoopArcError,
    NonCoerciveError,
    NonFiniteLayerError,
    NonpositiveLengthError,
    OutOfDomainError,
    ParameterConstraintError,
)
from .hamiltonians import (
    CriticalBounds,
    HamiltonianModel,
    QuadraticHamiltonian,
    TruncationParams,
    arc_lower_envelope,
    compute_critical_bounds,
    eval_hamiltonian,
    fit_truncation,
    truncated_lagrangian,
)
from .network import (
    Arc,
    GridFunction,
    Network,
    NodeLocation,
    SpaceTimeGrid,
    Vertex,
    build_grid,
    build_network,
    node_coordinate,
)
from .solver import (
    EvolutionResult,
    Propagator,
    SolverConfig,
    arc_update,
    evolve,
    feasible_range,
    full_step,
    interpolate,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "AlgorithmParams",
    "BenchmarkCase",
    "CriticalBounds",
    "CriticalRunResult",
    "DisconnectedError",
    "EikNetError",
    "EmptyFeasibleSetError",
    "EvolutionResult",
    "GridFunction",
    "HamiltonianModel",
    "InadmissiblePairError",
    "LoopArcError",
    "Network",
    "NodeLocation",
    "NonCoerciveError",
    "NonFiniteLayerError",
    "NonpositiveLengthError",
    "OutOfDomainError",
    "ParameterConstraintError",
    "Propagator",
    "QuadraticHamiltonian",
    "REGISTRY",
    "SolverConfig",
    "SpaceTimeGrid",
    "TruncationParams",
    "Vertex",
    "algorithm1",
    "algorithm2",
    "arc_lower_envelope",
    "arc_update",
    "build_grid",
    "build_network",
    "compute_critical_bounds",
    "corrector_estimate",
    "delta_t_policy",
    "eval_hamiltonian",
    "evolve",
    "feasible_range",
    "fit_truncation",
    "full_step",
    "interpolate",
    "node_coordinate",
    "traffic_circle_dependent",
    "traffic_circle_independent",
    "triangle_dependent",
    "triangle_independent",
    "truncated_lagrangian",
]
