"""Compiled time march for models whose arcs are all quadratic in mu.

The per-node running cost reduces to lam2 * lam**2 + lin * lam + const with
coefficients frozen at grid nodes, so the one-step minimization is exact: on
each interpolation cell the objective is a parabola in lam, minimized in
closed form and clamped to the cell's slope range. Everything the march needs
is flattened into plain arrays and the whole layer loop stays inside one
nopython region.

Node updates within a step read only the previous layer, so the per-arc loop
could run in parallel with a barrier between layers; it is kept serial for
deterministic reduction order.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import NonFiniteLayerError


class Workspace(NamedTuple):
    offsets: np.ndarray   # int64[n_arcs], start of each arc's node block
    counts: np.ndarray    # int64[n_arcs], nodes on the arc (cells + 1)
    gids: np.ndarray      # int64[total], flattened local index -> global node
    spacing: np.ndarray   # float64[n_arcs]
    lam2: np.ndarray      # float64[total], quadratic cost coefficients at nodes
    lin: np.ndarray
    const: np.ndarray
    v_ptr: np.ndarray     # int64[nv + 1], incidence ranges
    v_arc: np.ndarray     # int64[...], incident arc ids
    v_lidx: np.ndarray    # int64[...], endpoint local index on that arc
    cx: np.ndarray        # float64[nv], flux limiters
    dt: float
    beta0: float


def build_workspace(model, grid, flux_limiters, dt=None) -> Workspace:
    counts = (np.asarray(grid.nodes_per_arc, dtype=np.int64) + 1)
    offsets = np.zeros(len(counts), dtype=np.int64)
    np.cumsum(counts[:-1], out=offsets[1:])
    gids = np.concatenate(grid.arc_node_ids).astype(np.int64)
    spacing = np.asarray(grid.effective_spacing, dtype=np.float64)

    total = int(counts.sum())
    lam2 = np.empty(total)
    lin = np.empty(total)
    const = np.empty(total)
    for a, ev in enumerate(model.evaluators):
        base = int(offsets[a])
        coeff = 1.0 / (4.0 * ev.curvature)
        for i in range(int(counts[a])):
            s = i * float(spacing[a])
            lam2[base + i] = coeff
            lin[base + i] = -ev.shift(s)
            const[base + i] = -ev.offset(s)

    net = grid.network
    v_arc, v_lidx, ptr = [], [], [0]
    for v in range(net.num_vertices):
        for arc_id, role in net.incidence[v]:
            v_arc.append(arc_id)
            v_lidx.append(0 if role == "tail" else int(counts[arc_id]) - 1)
        ptr.append(len(v_arc))

    return Workspace(
        offsets=offsets,
        counts=counts,
        gids=gids,
        spacing=spacing,
        lam2=lam2,
        lin=lin,
        const=const,
        v_ptr=np.asarray(ptr, dtype=np.int64),
        v_arc=np.asarray(v_arc, dtype=np.int64),
        v_lidx=np.asarray(v_lidx, dtype=np.int64),
        cx=np.asarray(flux_limiters, dtype=np.float64),
        dt=float(grid.effective_delta_t if dt is None else dt),
        beta0=float(grid.beta0),
    )


@njit(cache=True)
def _node_value(f, a, i, offsets, counts, gids, spacing, lam2, lin, const,
                dt, beta0):
    base = offsets[a]
    n_cells = counts[a] - 1
    delta = spacing[a]
    length = n_cells * delta
    s = i * delta
    k = base + i
    q2 = lam2[k]
    q1 = lin[k]
    q0 = const[k]

    lam_lo = (s - length) / dt
    if lam_lo < -beta0:
        lam_lo = -beta0
    lam_hi = s / dt
    if lam_hi > beta0:
        lam_hi = beta0

    z_lo = s - dt * lam_hi
    if z_lo < 0.0:
        z_lo = 0.0
    z_hi = s - dt * lam_lo
    if z_hi > length:
        z_hi = length

    j0 = int(z_lo / delta)
    if j0 < 0:
        j0 = 0
    j1 = int(z_hi / delta)
    if j1 > n_cells - 1:
        j1 = n_cells - 1

    best = np.inf
    for j in range(j0, j1 + 1):
        cell_lo = j * delta
        a_z = cell_lo if cell_lo > z_lo else z_lo
        b_z = cell_lo + delta
        if b_z > z_hi:
            b_z = z_hi
        if b_z < a_z:
            continue
        fj = f[gids[base + j]]
        g = (f[gids[base + j + 1]] - fj) / delta
        lo = (s - b_z) / dt
        hi = (s - a_z) / dt
        lam = (g - q1) / (2.0 * q2)
        if lam < lo:
            lam = lo
        elif lam > hi:
            lam = hi
        z = s - dt * lam
        val = fj + (z - cell_lo) * g + dt * (q2 * lam * lam + q1 * lam + q0)
        if val < best:
            best = val
    return best


@njit(cache=True)
def _sweep(f, out, offsets, counts, gids, spacing, lam2, lin, const,
           v_ptr, v_arc, v_lidx, cx, dt, beta0):
    for a in range(offsets.shape[0]):
        base = offsets[a]
        for i in range(1, counts[a] - 1):
            out[gids[base + i]] = _node_value(
                f, a, i, offsets, counts, gids, spacing, lam2, lin, const,
                dt, beta0,
            )
    for v in range(v_ptr.shape[0] - 1):
        best = f[v] - cx[v] * dt
        for p in range(v_ptr[v], v_ptr[v + 1]):
            cand = _node_value(
                f, v_arc[p], v_lidx[p], offsets, counts, gids, spacing,
                lam2, lin, const, dt, beta0,
            )
            if cand < best:
                best = cand
        out[v] = best


@njit(cache=True)
def _march(f0, n_steps, offsets, counts, gids, spacing, lam2, lin, const,
           v_ptr, v_arc, v_lidx, cx, dt, beta0):
    f = f0.copy()
    out = np.empty_like(f)
    for step in range(n_steps):
        _sweep(f, out, offsets, counts, gids, spacing, lam2, lin, const,
               v_ptr, v_arc, v_lidx, cx, dt, beta0)
        for k in range(out.shape[0]):
            if not np.isfinite(out[k]):
                return out, step
        tmp = f
        f = out
        out = tmp
    return f, -1


def run_steps(ws: Workspace, values: np.ndarray, n_steps: int) -> np.ndarray:
    """Advance a layer by n_steps; raises on the first non-finite layer."""
    result, bad = _march(
        np.ascontiguousarray(values, dtype=np.float64), n_steps,
        ws.offsets, ws.counts, ws.gids, ws.spacing, ws.lam2, ws.lin, ws.const,
        ws.v_ptr, ws.v_arc, ws.v_lidx, ws.cx, ws.dt, ws.beta0,
    )
    if bad >= 0:
        raise NonFiniteLayerError(
            f"non-finite values appeared at time step {bad + 1}"
        )
    return result
