import math

import numpy as np
import pytest

from eiknet import GridFunction, build_grid, build_network
from eiknet.errors import (
    DisconnectedError,
    InadmissiblePairError,
    LoopArcError,
    NonFiniteLayerError,
    NonpositiveLengthError,
    OutOfDomainError,
)


def path_network():
    return build_network(
        [(0.0, 0.0), (1.0, 0.0), (1.5, 0.0)],
        [(0, 1, 1.0), (1, 2, 0.5)],
    )


def test_build_network_basic():
    net = path_network()
    assert net.num_vertices == 3
    assert net.num_arcs == 2
    assert net.arcs[0].tail == 0 and net.arcs[0].head == 1
    assert net.arcs[1].length == 0.5


def test_euclidean_length_default():
    net = build_network([(0.0, 0.0), (3.0, 4.0)], [(0, 1)])
    assert net.arcs[0].length == pytest.approx(5.0)
    # explicit length wins over the embedding distance
    net2 = build_network([(0.0, 0.0), (3.0, 4.0)], [(0, 1, 7.0)])
    assert net2.arcs[0].length == 7.0


def test_incidence_lists():
    net = path_network()
    assert net.incidence[0] == [(0, "tail")]
    assert net.incidence[1] == [(0, "head"), (1, "tail")]
    assert net.incidence[2] == [(1, "head")]


def test_loop_arc_rejected():
    with pytest.raises(LoopArcError):
        build_network([(0.0, 0.0), (1.0, 0.0)], [(0, 0, 1.0), (0, 1, 1.0)])


def test_nonpositive_length_rejected():
    with pytest.raises(NonpositiveLengthError):
        build_network([(0.0, 0.0), (1.0, 0.0)], [(0, 1, 0.0)])
    with pytest.raises(NonpositiveLengthError):
        build_network([(0.0, 0.0), (1.0, 0.0)], [(0, 1, -2.0)])


def test_disconnected_rejected():
    with pytest.raises(DisconnectedError):
        build_network(
            [(0.0, 0.0), (1.0, 0.0), (5.0, 0.0), (6.0, 0.0)],
            [(0, 1, 1.0), (2, 3, 1.0)],
        )


def test_unknown_vertex_rejected():
    with pytest.raises(ValueError):
        build_network([(0.0, 0.0), (1.0, 0.0)], [(0, 2, 1.0)])


def test_grid_ceiling_rule():
    net = path_network()
    # L=1 at dx=0.3 needs 4 cells; L=0.5 needs 2
    grid = build_grid(net, 0.3, 0.01, 1.0, 4.0)
    assert list(grid.nodes_per_arc) == [4, 2]
    assert grid.effective_spacing[0] == pytest.approx(0.25)
    # exact divisors must not gain a spurious cell from float noise
    grid = build_grid(net, 0.1, 0.01, 1.0, 4.0)
    assert list(grid.nodes_per_arc) == [10, 5]
    assert grid.effective_spacing[0] == pytest.approx(0.1)


def test_time_layer_count_and_effective_dt():
    net = path_network()
    grid = build_grid(net, 0.25, 0.03, 1.0, 4.0)
    assert grid.num_time_layers == 34
    assert grid.effective_delta_t == pytest.approx(1.0 / 34.0)
    layers = grid.time_layers()
    assert layers[0] == 0.0
    assert layers[-1] == pytest.approx(1.0)
    assert len(layers) == 35


def test_admissibility_flag():
    net = path_network()
    ok = build_grid(net, 0.25, 0.0625, 1.0, 4.0)
    assert ok.admissible
    # dt above spacing/beta0
    bad = build_grid(net, 0.25, 0.125, 1.0, 4.0)
    assert not bad.admissible
    with pytest.raises(InadmissiblePairError):
        build_grid(net, 0.25, 0.125, 1.0, 4.0, enforce_admissible=True)
    # dx not below the shortest arc
    with pytest.raises(InadmissiblePairError):
        build_grid(net, 0.5, 0.01, 1.0, 4.0, enforce_admissible=True)


def test_node_id_layout():
    net = path_network()
    grid = build_grid(net, 0.25, 0.0625, 1.0, 4.0)
    # vertices own ids 0..2, interiors follow arc by arc
    assert grid.num_nodes == 3 + 3 + 1
    ids0 = list(grid.arc_node_ids[0])
    ids1 = list(grid.arc_node_ids[1])
    assert ids0[0] == 0 and ids0[-1] == 1
    assert ids1[0] == 1 and ids1[-1] == 2
    assert ids0[1:-1] == [3, 4, 5]
    assert ids1[1:-1] == [6]


def test_node_coordinate_roundtrip():
    net = path_network()
    grid = build_grid(net, 0.25, 0.0625, 1.0, 4.0)
    loc = grid.node_coordinate(1)
    assert loc.vertex == 1
    assert set(loc.aliases) == {(0, 1.0), (1, 0.0)}
    loc = grid.node_coordinate(4)
    assert loc.vertex is None
    assert loc.arc == 0
    assert loc.s == pytest.approx(0.5)
    assert loc.aliases == ((0, 0.5),)
    with pytest.raises(OutOfDomainError):
        grid.node_coordinate(grid.num_nodes)


def test_grid_function_validation():
    net = path_network()
    grid = build_grid(net, 0.25, 0.0625, 1.0, 4.0)
    f = GridFunction.zeros(grid)
    assert f.values.shape == (grid.num_nodes,)
    g = GridFunction.constant(grid, 2.5)
    assert np.all(g.values == 2.5)
    with pytest.raises(ValueError):
        GridFunction(grid, np.zeros(2))
    with pytest.raises(NonFiniteLayerError):
        GridFunction(grid, np.full(grid.num_nodes, np.inf))


def test_grid_function_arc_values():
    net = path_network()
    grid = build_grid(net, 0.25, 0.0625, 1.0, 4.0)
    f = GridFunction(grid, np.arange(grid.num_nodes, dtype=float))
    fa = f.arc_values(1)
    assert list(fa) == [1.0, 6.0, 2.0]


def test_triangle_unit_lengths_exact():
    # slanted unit sides computed from coordinates land one ulp short,
    # so the benchmark geometry passes lengths explicitly; check the
    # fallback really has that quirk to keep the reasoning honest
    d = math.sqrt(0.5**2 + (math.sqrt(3.0) / 2.0) ** 2)
    assert d != 1.0
    assert d == pytest.approx(1.0, abs=1e-15)
    from eiknet.cases import _triangle_network

    assert all(a.length == 1.0 for a in _triangle_network().arcs)
