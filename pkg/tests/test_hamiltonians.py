"""Conjugates, truncation fitting, and the lower-envelope bounds."""

import math

import numpy as np
import pytest

from eiknet import build_grid, build_network
from eiknet.cases import (
    traffic_circle_dependent,
    traffic_circle_independent,
    triangle_dependent,
    triangle_independent,
)
from eiknet.errors import NonCoerciveError
from eiknet.hamiltonians import (
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


def path_network():
    return build_network(
        [(0.0, 0.0), (1.0, 0.0), (1.5, 0.0)],
        [(0, 1, 1.0), (1, 2, 0.5)],
    )


def test_quadratic_call_and_conjugate():
    h = QuadraticHamiltonian(0.5, shift=1.0, offset=-2.0)
    assert h(0.3, 2.0) == pytest.approx(0.5 * 9.0 - 2.0)
    # conjugate of c*(mu+a)^2 + b is lam^2/(4c) - a*lam - b
    lam = 1.7
    assert h.conjugate(0.3, lam) == pytest.approx(lam**2 / 2.0 - lam + 2.0)
    assert h.conjugate_argmax(0.3, lam) == pytest.approx(lam - 1.0)


def test_quadratic_callable_coefficients():
    h = QuadraticHamiltonian(1.0, shift=lambda s: 2.0 * s, offset=lambda s: -s)
    assert h(0.5, 1.0) == pytest.approx((1.0 + 1.0) ** 2 - 0.5)
    assert h.conjugate(0.25, 2.0) == pytest.approx(1.0 - 0.5 * 2.0 + 0.25)


def test_quadratic_rejects_nonpositive_curvature():
    with pytest.raises(ValueError):
        QuadraticHamiltonian(0.0)
    with pytest.raises(ValueError):
        QuadraticHamiltonian(-1.0)


def test_truncation_params_validation():
    tr = TruncationParams((-3.0, 3.0), 2.0)
    assert tr.symmetric
    with pytest.raises(ValueError):
        TruncationParams((3.0, -3.0), 2.0)
    with pytest.raises(ValueError):
        TruncationParams((-3.0, 3.0), 0.0)


def test_reverse_direction_is_flipped_forward():
    net = path_network()
    model = HamiltonianModel.for_network(
        "s-dep", net,
        [QuadraticHamiltonian(1.0, shift=lambda s: s),
         QuadraticHamiltonian(0.5, offset=lambda s: 3.0 * s)],
        4.0,
    )
    for arc, s, mu in [(0, 0.2, 1.3), (0, 0.9, -2.0), (1, 0.1, 0.5)]:
        length = net.arcs[arc].length
        fwd = eval_hamiltonian(model, arc, "forward", length - s, -mu)
        rev = eval_hamiltonian(model, arc, "reverse", s, mu)
        assert rev == pytest.approx(fwd, abs=1e-14)


def test_truncated_lagrangian_closed_forms():
    # numerically conjugated evaluators against hand conjugates:
    # mu^2 -> lam^2/4, (mu+a)^2 -> lam^2/4 - a lam, mu^2/2 + b -> lam^2/2 - b
    a, b = 1.5, 0.7
    net = build_network(
        [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
        [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
    )
    model = HamiltonianModel.for_network(
        "closed-forms", net,
        [lambda s, mu: mu * mu,
         lambda s, mu: (mu + a) ** 2,
         lambda s, mu: 0.5 * mu * mu + b],
        5.0,
    )
    assert model.lagrangians == (None, None, None)
    lams = np.linspace(-5.0, 5.0, 81)
    worst = 0.0
    for lam in lams:
        got0 = truncated_lagrangian(model, 0, "forward", 0.4, lam)
        got1 = truncated_lagrangian(model, 1, "forward", 0.4, lam)
        got2 = truncated_lagrangian(model, 2, "forward", 0.4, lam)
        worst = max(
            worst,
            abs(got0 - lam**2 / 4.0),
            abs(got1 - (lam**2 / 4.0 - a * lam)),
            abs(got2 - (lam**2 / 2.0 - b)),
        )
    assert worst <= 1e-8


def test_truncated_lagrangian_infinite_beyond_slope_bound():
    net = path_network()
    model = HamiltonianModel.for_network(
        "m", net, [QuadraticHamiltonian(1.0)] * 2, 3.0)
    assert truncated_lagrangian(model, 0, "forward", 0.5, 3.5) == math.inf
    assert truncated_lagrangian(model, 0, "forward", 0.5, -3.5) == math.inf
    assert np.isfinite(truncated_lagrangian(model, 0, "forward", 0.5, 3.0))


def test_truncated_lagrangian_reversal_identity():
    case = triangle_dependent()
    model = case.model
    for arc in range(3):
        length = case.network.arcs[arc].length
        for s in (0.0, 0.3, 1.0):
            for lam in (-2.0, 0.0, 1.7):
                fwd = truncated_lagrangian(model, arc, "forward", length - s, -lam)
                rev = truncated_lagrangian(model, arc, "reverse", s, lam)
                assert rev == pytest.approx(fwd, rel=1e-12, abs=1e-12)


def test_fit_truncation_benchmark_windows():
    assert triangle_dependent().model.truncation.mu_interval == (-13.0, 13.0)
    assert triangle_independent().model.truncation.mu_interval == (-10.1, 10.1)
    assert traffic_circle_dependent().model.truncation.mu_interval == (-42.0, 42.0)
    assert traffic_circle_independent().model.truncation.mu_interval == (-17.0, 17.0)


def test_fit_truncation_rejects_noncoercive():
    with pytest.raises(NonCoerciveError):
        fit_truncation([lambda s, mu: 2.0 * mu], [1.0], 4.0)


def test_model_rejects_nonconvex_evaluator():
    net = path_network()
    with pytest.raises(ValueError):
        HamiltonianModel.for_network(
            "wavy", net,
            [lambda s, mu: mu * mu + 3.0 * math.sin(mu)] * 2,
            4.0,
        )


def test_arc_lower_envelope_values():
    # offset max over the arc is the envelope level
    net = path_network()
    model = HamiltonianModel.for_network(
        "env", net,
        [QuadraticHamiltonian(1.0, offset=lambda s: 0.3 - 0.2 * s),
         QuadraticHamiltonian(0.7, offset=lambda s: 0.1 * s)],
        4.0,
    )
    assert arc_lower_envelope(model, 0) == pytest.approx(0.3, abs=1e-9)
    assert arc_lower_envelope(model, 1) == pytest.approx(0.05, abs=1e-9)


def test_bounds_triangle_dependent():
    case = triangle_dependent()
    bounds = compute_critical_bounds(case.model, case.network)
    assert isinstance(bounds, CriticalBounds)
    assert bounds.a_gamma == pytest.approx((0.0, 1.0, 1.0), abs=1e-9)
    assert bounds.flux_limiters == pytest.approx((1.0, 1.0, 1.0), abs=1e-9)
    assert bounds.a0 == pytest.approx(1.0, abs=1e-9)


def test_bounds_triangle_independent():
    case = triangle_independent()
    bounds = compute_critical_bounds(case.model, case.network)
    assert bounds.a_gamma == pytest.approx((0.0, 0.0, 0.75), abs=1e-9)
    assert bounds.flux_limiters == pytest.approx((0.75, 0.0, 0.75), abs=1e-9)
    assert bounds.a0 == pytest.approx(0.75, abs=1e-9)


def test_bounds_circle_cases():
    dep = traffic_circle_dependent()
    bounds = compute_critical_bounds(dep.model, dep.network)
    for arc_id, a in enumerate(bounds.a_gamma):
        expected = 0.0 if arc_id in (3, 4, 7, 10) else -5.0
        assert a == pytest.approx(expected, abs=1e-9)
    assert bounds.a0 == pytest.approx(0.0, abs=1e-9)

    indep = traffic_circle_independent()
    bounds = compute_critical_bounds(indep.model, indep.network)
    assert bounds.a0 == pytest.approx(-2.0, abs=1e-9)


def test_bounds_with_grid_nodes_match_gridless():
    case = triangle_independent()
    grid = build_grid(case.network, 0.1, 0.005, 1.0, case.beta0)
    a = compute_critical_bounds(case.model, case.network)
    b = compute_critical_bounds(case.model, case.network, grid)
    assert b.a0 == pytest.approx(a.a0, abs=1e-9)
    assert b.flux_limiters == pytest.approx(a.flux_limiters, abs=1e-9)


def test_for_network_attaches_quadratic_conjugates():
    net = path_network()
    model = HamiltonianModel.for_network(
        "quad", net, [QuadraticHamiltonian(1.0), QuadraticHamiltonian(0.5)], 4.0)
    assert model.all_quadratic
    assert all(l is not None for l in model.lagrangians)
    # attached analytic conjugate agrees with the numeric one
    gen = HamiltonianModel.for_network(
        "gen", net, [lambda s, mu: mu * mu, lambda s, mu: 0.5 * mu * mu], 4.0)
    for lam in (-3.0, -0.4, 0.0, 2.2):
        qa = truncated_lagrangian(model, 0, "forward", 0.5, lam)
        nu = truncated_lagrangian(gen, 0, "forward", 0.5, lam)
        assert qa == pytest.approx(nu, abs=1e-9)
