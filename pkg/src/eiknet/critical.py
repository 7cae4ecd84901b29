"""Critical value extraction from the long-time behavior of the scheme.

Both algorithms evolve an initial datum phi over successive windows of length
T and read the critical value off finite differences of the layers:

  * algorithm1 uses (phi - v(kT)) / (kT), whose extrema over the grid bracket
    the critical value with an O(1/k) gap;
  * algorithm2 uses consecutive layers, (v((k-1)T) - v(kT)) / T, which
    typically tightens the bracket in far fewer iterations.

Each raw bracket is clamped against the previous one (upper nonincreasing,
lower nondecreasing) and the lower bound is floored at a0, the largest arc
lower-envelope level, which the critical value can never undercut. The run
stops once upper - lower < 2 * tolerance, or at the iteration cap, and the
estimate is the bracket midpoint.

The evolution is incremental: each outer iteration advances the stored layer
by one window instead of restarting from phi, which is the same discrete
trajectory (the scheme is a composition of identical steps).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .hamiltonians import HamiltonianModel
from .network import GridFunction, Network, SpaceTimeGrid
from .solver import Propagator, SolverConfig


@dataclass(frozen=True)
class AlgorithmParams:
    """Stopping control for a critical value run.

    ``mode`` is "tolerance" (stop when the bracket gap drops below
    2 * tolerance, optionally capped) or "fixed" (run exactly
    ``max_iterations`` windows, ignoring the tolerance).
    """

    tolerance: float | None = None
    max_iterations: int | None = None
    mode: str = "tolerance"
    outer_period: float = 1.0
    initial_datum: GridFunction | None = None

    def __post_init__(self):
        if self.mode not in ("tolerance", "fixed"):
            raise ValueError(f"mode must be 'tolerance' or 'fixed', got {self.mode!r}")
        if self.mode == "tolerance":
            if self.tolerance is None or not self.tolerance > 0:
                raise ValueError("tolerance mode needs a positive tolerance")
        else:
            if self.max_iterations is None or self.max_iterations < 1:
                raise ValueError("fixed mode needs max_iterations >= 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.outer_period > 0:
            raise ValueError("outer_period must be positive")


@dataclass(frozen=True)
class CriticalRunResult:
    estimate: float
    upper_seq: tuple[float, ...]
    lower_seq: tuple[float, ...]
    iterations: int
    stop_reason: str  # "tolerance-met" | "iteration-cap"
    half_gap_seq: tuple[float, ...]
    iter_wall_ms: tuple[float, ...]
    final_layer: GridFunction


def _run(
    model: HamiltonianModel,
    network: Network,
    grid: SpaceTimeGrid,
    config: SolverConfig,
    params: AlgorithmParams,
    layer_diff: bool,
) -> CriticalRunResult:
    T = grid.horizon
    if abs(params.outer_period - T) > 1e-12 * (1.0 + T):
        raise ValueError(
            f"outer_period {params.outer_period} does not match the grid "
            f"horizon {T}; build the grid for one window"
        )
    phi = params.initial_datum
    if phi is None:
        phi = GridFunction.zeros(grid)
    elif phi.values.shape != (grid.num_nodes,):
        raise ValueError("initial datum does not match the grid")

    prop = Propagator(model, network, grid, config)
    steps_per_window = grid.num_time_layers
    a0 = max(config.flux_limiters)

    upper: float | None = None
    lower = a0
    uppers: list[float] = []
    lowers: list[float] = []
    half_gaps: list[float] = []
    walls: list[float] = []

    values = phi.values
    k = 0
    stop_reason = "iteration-cap"
    while True:
        k += 1
        t0 = time.perf_counter()
        advanced = prop.advance(values, steps_per_window)
        if layer_diff:
            diff = (values - advanced) / T
        else:
            diff = (phi.values - advanced) / (k * T)
        raw_max = float(diff.max())
        raw_min = float(diff.min())
        upper = raw_max if upper is None else min(upper, raw_max)
        lower = max(lower, raw_min)
        walls.append((time.perf_counter() - t0) * 1e3)
        uppers.append(upper)
        lowers.append(lower)
        half_gaps.append(0.5 * (upper - lower))
        values = advanced
        if params.mode == "tolerance" and upper - lower < 2.0 * params.tolerance:
            stop_reason = "tolerance-met"
            break
        if params.max_iterations is not None and k >= params.max_iterations:
            stop_reason = "iteration-cap"
            break

    return CriticalRunResult(
        estimate=0.5 * (upper + lower),
        upper_seq=tuple(uppers),
        lower_seq=tuple(lowers),
        iterations=k,
        stop_reason=stop_reason,
        half_gap_seq=tuple(half_gaps),
        iter_wall_ms=tuple(walls),
        final_layer=GridFunction(grid, values),
    )


def algorithm1(
    model: HamiltonianModel,
    network: Network,
    grid: SpaceTimeGrid,
    config: SolverConfig,
    params: AlgorithmParams,
) -> CriticalRunResult:
    """Bracket the critical value through (phi - v(kT)) / (kT)."""
    return _run(model, network, grid, config, params, layer_diff=False)


def algorithm2(
    model: HamiltonianModel,
    network: Network,
    grid: SpaceTimeGrid,
    config: SolverConfig,
    params: AlgorithmParams,
) -> CriticalRunResult:
    """Bracket the critical value through consecutive window differences."""
    return _run(model, network, grid, config, params, layer_diff=True)


def corrector_estimate(
    result: CriticalRunResult, layer: GridFunction, k: int, T: float
) -> GridFunction:
    """Approximate critical solution v(kT) + estimate * kT."""
    return GridFunction(layer.grid, layer.values + result.estimate * k * T)
