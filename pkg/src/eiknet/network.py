"""Embedded networks and their space-time grids.

A network is a finite connected graph embedded in R^N whose edges (arcs) are
parameterized by arc length. Arcs are stored once per orientation class; the
reverse parametrization gamma~(s) = gamma(|gamma| - s) is handled by the
Hamiltonian layer through the compatibility identity, so this module only
tracks endpoint identity and lengths.

The grid builder follows the ceiling rule N_gamma = ceil(|gamma| / dx) with
per-arc effective spacing |gamma| / N_gamma, and checks the admissibility
conditions dx < |gamma|, dt < T and dt <= min_gamma spacing / beta0 on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DisconnectedError,
    InadmissiblePairError,
    LoopArcError,
    NonFiniteLayerError,
    NonpositiveLengthError,
    OutOfDomainError,
)

# Tolerance knocked off a ratio before applying ceil, so that float noise just
# above an integer (1.0/0.1 -> 10.000000000000002) does not add a spurious cell.
_CEIL_GUARD = 1e-12


def _safe_ceil(ratio: float) -> int:
    return max(1, math.ceil(ratio - _CEIL_GUARD))


@dataclass(frozen=True)
class Vertex:
    id: int
    position: tuple[float, ...]


@dataclass(frozen=True)
class Arc:
    """One orientation class: tail = gamma(0), head = gamma(|gamma|)."""

    id: int
    tail: int
    head: int
    length: float


class Network:
    """Immutable embedded network: vertices, one arc per orientation class,
    and per-vertex incidence as (arc id, "tail" | "head") pairs."""

    def __init__(self, vertices: list[Vertex], arcs: list[Arc]):
        if not arcs:
            raise ValueError("a network needs at least one arc")
        for arc in arcs:
            if arc.tail == arc.head:
                raise LoopArcError(f"arc {arc.id} is a loop at vertex {arc.tail}")
            if not arc.length > 0:
                raise NonpositiveLengthError(
                    f"arc {arc.id} has length {arc.length}"
                )
        self.vertices = list(vertices)
        self.arcs = list(arcs)
        incidence: list[list[tuple[int, str]]] = [[] for _ in vertices]
        for arc in arcs:
            incidence[arc.tail].append((arc.id, "tail"))
            incidence[arc.head].append((arc.id, "head"))
        self.incidence = incidence
        self._check_connected()

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    def arc_lengths(self) -> tuple[float, ...]:
        return tuple(a.length for a in self.arcs)

    def _check_connected(self) -> None:
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for arc_id, role in self.incidence[v]:
                arc = self.arcs[arc_id]
                other = arc.head if role == "tail" else arc.tail
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
        if len(seen) != len(self.vertices):
            missing = sorted(set(range(len(self.vertices))) - seen)
            raise DisconnectedError(f"vertices {missing} unreachable from vertex 0")


def build_network(
    vertex_positions: list[tuple[float, ...]],
    arc_specs: list[tuple],
) -> Network:
    """Build a network from vertex coordinates and (tail, head[, length]) specs.

    Length defaults to the Euclidean distance of the endpoints (straight arcs);
    pass an explicit length for curved arcs.
    """
    vertices = [
        Vertex(i, tuple(float(c) for c in pos))
        for i, pos in enumerate(vertex_positions)
    ]
    n = len(vertices)
    arcs = []
    for arc_id, spec in enumerate(arc_specs):
        tail, head = int(spec[0]), int(spec[1])
        if not (0 <= tail < n and 0 <= head < n):
            raise ValueError(f"arc {arc_id} references unknown vertex ids {spec[:2]}")
        if len(spec) > 2 and spec[2] is not None:
            length = float(spec[2])
        else:
            p = np.asarray(vertices[tail].position)
            q = np.asarray(vertices[head].position)
            length = float(np.linalg.norm(q - p))
        arcs.append(Arc(arc_id, tail, head, length))
    return Network(vertices, arcs)


@dataclass(frozen=True)
class NodeLocation:
    """Where a grid node sits: a vertex id or an (arc, s) pair, plus every
    (arc id, s) alias for vertex nodes."""

    vertex: int | None
    arc: int | None
    s: float | None
    aliases: tuple[tuple[int, float], ...]


class SpaceTimeGrid:
    """Discrete grid on a network plus the time layering for one horizon.

    Vertex nodes are shared across incident arcs: global node ids 0..V-1 are
    the vertices, interior arc nodes follow in arc order. ``arc_node_ids[a]``
    maps arc-local node index i (0..N_a) to the global id, with the endpoints
    aliasing the tail and head vertex nodes.
    """

    def __init__(
        self,
        network: Network,
        delta_x: float,
        delta_t: float,
        horizon: float,
        beta0: float,
        enforce_admissible: bool = False,
    ):
        if delta_x <= 0 or delta_t <= 0 or horizon <= 0 or beta0 <= 0:
            raise ValueError("delta_x, delta_t, horizon and beta0 must be positive")
        self.network = network
        self.delta_x = float(delta_x)
        self.delta_t = float(delta_t)
        self.horizon = float(horizon)
        self.beta0 = float(beta0)

        lengths = network.arc_lengths()
        self.nodes_per_arc = np.array(
            [_safe_ceil(L / delta_x) for L in lengths], dtype=np.int64
        )
        self.effective_spacing = np.array(
            [L / n for L, n in zip(lengths, self.nodes_per_arc)]
        )
        self.num_time_layers = _safe_ceil(horizon / delta_t)

        min_spacing = float(self.effective_spacing.min())
        self.admissible = (
            all(delta_x < L for L in lengths)
            and delta_t < horizon
            and delta_t <= min_spacing / beta0 * (1 + 1e-12)
        )
        if enforce_admissible and not self.admissible:
            raise InadmissiblePairError(
                f"dx={delta_x}, dt={delta_t} violates admissibility "
                f"(need dx < min arc length {min(lengths)}, dt < {horizon}, "
                f"dt <= {min_spacing / beta0:.6g})"
            )

        nv = network.num_vertices
        self.arc_node_ids: list[np.ndarray] = []
        next_id = nv
        for arc, n in zip(network.arcs, self.nodes_per_arc):
            ids = np.empty(n + 1, dtype=np.int64)
            ids[0] = arc.tail
            ids[-1] = arc.head
            interior = int(n) - 1
            ids[1:-1] = np.arange(next_id, next_id + interior)
            next_id += interior
            self.arc_node_ids.append(ids)
        self.num_nodes = next_id

    @property
    def effective_delta_t(self) -> float:
        """Step actually marched: horizon / num_time_layers."""
        return self.horizon / self.num_time_layers

    def time_layers(self) -> np.ndarray:
        return np.arange(self.num_time_layers + 1) * self.effective_delta_t

    def node_coordinate(self, node_id: int) -> NodeLocation:
        if not (0 <= node_id < self.num_nodes):
            raise OutOfDomainError(f"node id {node_id} out of range")
        nv = self.network.num_vertices
        if node_id < nv:
            aliases = []
            for arc_id, role in self.network.incidence[node_id]:
                s = 0.0 if role == "tail" else self.network.arcs[arc_id].length
                aliases.append((arc_id, s))
            return NodeLocation(
                vertex=node_id, arc=None, s=None, aliases=tuple(aliases)
            )
        for arc_id, ids in enumerate(self.arc_node_ids):
            interior = ids[1:-1]
            if interior.size and interior[0] <= node_id <= interior[-1]:
                i = int(node_id - interior[0]) + 1
                s = i * float(self.effective_spacing[arc_id])
                return NodeLocation(
                    vertex=None, arc=arc_id, s=s, aliases=((arc_id, s),)
                )
        raise OutOfDomainError(f"node id {node_id} not located")  # pragma: no cover


def build_grid(
    net: Network,
    delta_x: float,
    delta_t: float,
    horizon: float,
    beta0: float,
    enforce_admissible: bool = False,
) -> SpaceTimeGrid:
    """Build the space-time grid; reject inadmissible pairs only when asked."""
    return SpaceTimeGrid(net, delta_x, delta_t, horizon, beta0, enforce_admissible)


def node_coordinate(grid: SpaceTimeGrid, node_id: int) -> NodeLocation:
    return grid.node_coordinate(node_id)


class GridFunction:
    """Real values on the spatial grid, one per global node id."""

    def __init__(self, grid: SpaceTimeGrid, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.num_nodes,):
            raise ValueError(
                f"expected {grid.num_nodes} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteLayerError("grid function contains NaN or inf")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: SpaceTimeGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.num_nodes))

    @classmethod
    def constant(cls, grid: SpaceTimeGrid, value: float) -> "GridFunction":
        return cls(grid, np.full(grid.num_nodes, float(value)))

    def arc_values(self, arc_id: int) -> np.ndarray:
        """Values along one arc in forward node order (copy-free view via fancy
        indexing is not possible; returns a fresh array)."""
        return self.values[self.grid.arc_node_ids[arc_id]]

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())
