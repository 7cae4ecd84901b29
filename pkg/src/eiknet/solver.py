"""Semi-Lagrangian one-step operator and time marching on a network grid.

The update at an arc node s minimizes, over admissible slopes lam,

    I[f](s - dt * lam) + dt * L(s, lam)

with the degree-1 interpolant I and the truncated running cost L, the slope
constrained to [max((s - |gamma|)/dt, -beta0), min(s/dt, beta0)] so the foot
stays on the arc. Vertices take the minimum of the incident arc updates at
the matching endpoint and the flux branch f(x) - c_x * dt.

Head-incident arcs are folded in through the endpoint s = |gamma| of the
forward parametrization, which coincides with the reverse parametrization at
s = 0 by the compatibility identity; tests assert the equivalence.

Models whose arcs are all quadratic run through the compiled kernel; anything
else takes the generic path: the objective is piecewise-convex in lam with
breakpoints where the foot crosses grid nodes, so candidates are enumerated
at all breakpoints, the interval endpoints and uniform fill-ins, then the two
brackets around the winner are sharpened by golden section.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernel import build_workspace, run_steps
from .errors import EmptyFeasibleSetError, NonFiniteLayerError, OutOfDomainError
from .hamiltonians import (
    _INVPHI,
    _INVPHI2,
    HamiltonianModel,
    _check_s,
    compute_critical_bounds,
    truncated_lagrangian,
)
from .network import GridFunction, Network, SpaceTimeGrid


@dataclass(frozen=True)
class SolverConfig:
    """Minimization knobs plus the per-vertex flux limiters c_x."""

    flux_limiters: tuple[float, ...]
    lambda_samples: int = 15
    refine_iterations: int = 48

    def __post_init__(self):
        if self.lambda_samples < 3:
            raise ValueError(
                f"lambda_samples must be at least 3, got {self.lambda_samples}"
            )
        if self.refine_iterations < 0:
            raise ValueError("refine_iterations must be non-negative")
        object.__setattr__(self, "flux_limiters", tuple(self.flux_limiters))

    @classmethod
    def for_model(
        cls,
        model: HamiltonianModel,
        network: Network,
        grid: SpaceTimeGrid | None = None,
        **kwargs,
    ) -> "SolverConfig":
        """Config with the minimal flux limiters computed from the model."""
        bounds = compute_critical_bounds(model, network, grid)
        return cls(flux_limiters=bounds.flux_limiters, **kwargs)


@dataclass(frozen=True)
class EvolutionResult:
    """Snapshots at requested grid times plus the final layer."""

    layers: tuple[tuple[float, GridFunction], ...]
    final: GridFunction


def interpolate(f: np.ndarray, s: float, spacing: float) -> float:
    """Degree-1 interpolation of node values f at arc coordinate s."""
    n_cells = len(f) - 1
    length = n_cells * spacing
    tol = 1e-9 * (1.0 + length)
    if s < -tol or s > length + tol:
        raise OutOfDomainError(f"s={s} outside [0, {length}]")
    s = min(max(s, 0.0), length)
    j = min(int(s / spacing), n_cells - 1)
    theta = s / spacing - j
    return float(f[j] * (1.0 - theta) + f[j + 1] * theta)


def feasible_range(s: float, length: float, dt: float,
                   beta0: float) -> tuple[float, float]:
    """Slope interval keeping the foot s - dt*lam on the arc, capped at beta0."""
    return max((s - length) / dt, -beta0), min(s / dt, beta0)


def _golden_refine(fn, lo: float, hi: float, iterations: int) -> float:
    """Best value found by a fixed number of golden-section shrinks."""
    a, b = lo, hi
    h = b - a
    if h <= 0.0 or iterations == 0:
        return fn(0.5 * (a + b))
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc, fd = fn(c), fn(d)
    for _ in range(iterations):
        if fc <= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = fn(d)
    return min(fc, fd, fn(0.5 * (a + b)))


_STANDALONE_CONFIG = SolverConfig(flux_limiters=())


def arc_update(
    model: HamiltonianModel,
    arc: int,
    direction: str,
    f: np.ndarray,
    s: float,
    dt: float,
    config: SolverConfig | None = None,
) -> float:
    """One-node semi-Lagrangian update along a single arc.

    ``f`` holds the node values sampled in the chosen parametrization (pass
    the reversed array to step the inverse arc). Works for any model; the
    compiled kernel bypasses this for all-quadratic ones.
    """
    if config is None:
        config = _STANDALONE_CONFIG
    length = model.arc_lengths[arc]
    s = _check_s(s, length)
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n_cells = len(f) - 1
    delta = length / n_cells
    beta0 = model.truncation.beta0

    lam_lo, lam_hi = feasible_range(s, length, dt, beta0)
    if lam_hi < lam_lo:
        raise EmptyFeasibleSetError(
            f"empty slope range at s={s} (dt={dt}, beta0={beta0})"
        )

    def objective(lam: float) -> float:
        z = min(max(s - dt * lam, 0.0), length)
        return interpolate(f, z, delta) + dt * truncated_lagrangian(
            model, arc, direction, s, lam
        )

    if lam_hi == lam_lo:
        return objective(lam_lo)

    # Breakpoints of the piecewise objective: slopes whose foot lands on a node.
    z_lo = max(s - dt * lam_hi, 0.0)
    z_hi = min(s - dt * lam_lo, length)
    cands = {lam_lo, lam_hi}
    for j in range(math.ceil(z_lo / delta - 1e-12), math.floor(z_hi / delta + 1e-12) + 1):
        lam = (s - j * delta) / dt
        if lam_lo < lam < lam_hi:
            cands.add(lam)
    for lam in np.linspace(lam_lo, lam_hi, config.lambda_samples):
        cands.add(float(lam))
    cands = sorted(cands)

    vals = [objective(lam) for lam in cands]
    i = int(np.argmin(vals))
    best = vals[i]
    # The objective is convex between consecutive candidates (all breakpoints
    # are candidates), so sharpening the two brackets around the winner nails
    # the minimum.
    if i > 0:
        best = min(best, _golden_refine(objective, cands[i - 1], cands[i],
                                        config.refine_iterations))
    if i < len(cands) - 1:
        best = min(best, _golden_refine(objective, cands[i], cands[i + 1],
                                        config.refine_iterations))
    return best


def _python_step(model: HamiltonianModel, grid: SpaceTimeGrid,
                 config: SolverConfig, values: np.ndarray) -> np.ndarray:
    net = grid.network
    dt = grid.effective_delta_t
    out = np.empty_like(values)
    arc_vals = [values[ids] for ids in grid.arc_node_ids]
    for a in range(net.num_arcs):
        spacing = float(grid.effective_spacing[a])
        ids = grid.arc_node_ids[a]
        for i in range(1, len(ids) - 1):
            out[ids[i]] = arc_update(
                model, a, "forward", arc_vals[a], i * spacing, dt, config
            )
    for v in range(net.num_vertices):
        best = values[v] - config.flux_limiters[v] * dt
        for arc_id, role in net.incidence[v]:
            s_end = 0.0 if role == "tail" else model.arc_lengths[arc_id]
            cand = arc_update(
                model, arc_id, "forward", arc_vals[arc_id], s_end, dt, config
            )
            best = min(best, cand)
        out[v] = best
    return out


class Propagator:
    """One-step operator bound to a model, grid and config.

    Builds its workspace once, so repeated ``advance`` calls (the critical
    value algorithms lean on this) pay no per-call setup.
    """

    def __init__(self, model: HamiltonianModel, network: Network,
                 grid: SpaceTimeGrid, config: SolverConfig):
        if grid.network is not network:
            raise ValueError("grid was built for a different network")
        if len(config.flux_limiters) != network.num_vertices:
            raise ValueError(
                f"{len(config.flux_limiters)} flux limiters for "
                f"{network.num_vertices} vertices"
            )
        if len(model.evaluators) != network.num_arcs:
            raise ValueError("model and network disagree on the arc count")
        self.model = model
        self.grid = grid
        self.config = config
        self.dt = grid.effective_delta_t
        self._ws = (
            build_workspace(model, grid, config.flux_limiters)
            if model.all_quadratic else None
        )

    def advance(self, values: np.ndarray, n_steps: int) -> np.ndarray:
        if n_steps == 0:
            return np.array(values, dtype=np.float64)
        if self._ws is not None:
            return run_steps(self._ws, values, n_steps)
        out = np.array(values, dtype=np.float64)
        for step in range(n_steps):
            out = _python_step(self.model, self.grid, self.config, out)
            if not np.all(np.isfinite(out)):
                raise NonFiniteLayerError(
                    f"non-finite values appeared at time step {step + 1}"
                )
        return out


def full_step(model: HamiltonianModel, network: Network, grid: SpaceTimeGrid,
              config: SolverConfig, f: GridFunction) -> GridFunction:
    """One application of the two-step operator to a whole layer."""
    prop = Propagator(model, network, grid, config)
    return GridFunction(grid, prop.advance(f.values, 1))


def evolve(
    model: HamiltonianModel,
    network: Network,
    grid: SpaceTimeGrid,
    config: SolverConfig,
    phi: GridFunction,
    snapshot_times: tuple[float, ...] = (),
) -> EvolutionResult:
    """March phi through all time layers of the grid.

    Snapshot times are snapped to the nearest grid time m * T / N_T; the
    returned layers carry the snapped times.
    """
    if phi.values.shape != (grid.num_nodes,):
        raise ValueError("initial datum does not match the grid")
    prop = Propagator(model, network, grid, config)
    dt = grid.effective_delta_t
    n = grid.num_time_layers
    marks = []
    for t in snapshot_times:
        m = int(round(t / dt))
        if m < 0 or m > n or abs(m * dt - t) > 0.5 * dt + 1e-9:
            raise ValueError(
                f"snapshot time {t} outside the time grid [0, {grid.horizon}]"
            )
        marks.append(m)
    marks = sorted(set(marks))

    layers = []
    values = phi.values.copy()
    reached = 0
    for m in marks:
        values = prop.advance(values, m - reached)
        reached = m
        layers.append((m * dt, GridFunction(grid, values.copy())))
    values = prop.advance(values, n - reached)
    return EvolutionResult(layers=tuple(layers), final=GridFunction(grid, values))
