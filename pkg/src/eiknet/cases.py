"""Benchmark problems: two triangles and two traffic circles.

Each factory wires a network, its arc Hamiltonians and the slope cutoff
beta0 into a ready-to-run case. The triangle families carry a tunable
parameter triple (A, B, C); the critical value equals C exactly when A sits
on the coupling formula, so the factories only claim an exact value on that
locus. The traffic circles have no closed-form critical value and carry
reference values instead, reproduced by running algorithm2 on a fine grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterConstraintError
from .hamiltonians import HamiltonianModel, QuadraticHamiltonian
from .network import Network, _safe_ceil, build_network


@dataclass(frozen=True)
class BenchmarkCase:
    name: str
    network: Network
    model: HamiltonianModel
    beta0: float
    exact_c: float | None
    reference_c: float | None
    reference_note: str | None
    default_policies: tuple[str, ...]

    def __post_init__(self):
        if self.exact_c is not None and self.reference_c is not None:
            raise ParameterConstraintError(
                "a case carries an exact value or a reference value, not both"
            )

    @property
    def target_c(self) -> float | None:
        return self.exact_c if self.exact_c is not None else self.reference_c


_POLICIES = ("beta0_ratio", "half_dx", "dx_56")


def _triangle_network() -> Network:
    # Unit side lengths are exact by construction; the Euclidean fallback
    # would land one ulp short through sqrt(0.25 + 0.75).
    return build_network(
        [(0.0, 0.0), (0.5, math.sqrt(3.0) / 2.0), (1.0, 0.0)],
        [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
    )


def _circle_network() -> Network:
    # Four entry roads meeting a circulating ring; straight chords stand in
    # for the drawn curves, so lengths are the Euclidean distances.
    positions = [
        (-2.0, 0.0), (-1.0, 0.0), (0.0, 2.0), (0.0, 1.0),
        (2.0, 0.0), (1.0, 0.0), (0.0, -2.0), (0.0, -1.0),
    ]
    specs = [
        (0, 1), (0, 2), (0, 6), (1, 3), (1, 7), (2, 3),
        (2, 4), (3, 5), (4, 5), (4, 6), (5, 7), (6, 7),
    ]
    return build_network(positions, specs)


def triangle_dependent(A: float = 2.0 / 3.0, B: float = 0.5, C: float = 1.0,
                       beta0: float = 12.0) -> BenchmarkCase:
    """Triangle with s-dependent Hamiltonians.

    Arcs carry (mu + 2s)^2, mu^2 + 2Bs and (mu + A - 1 + 2s)(mu + 2A) + C.
    The critical value is C exactly when
    A = sqrt(C) - 1 + (2 / (6B)) * (C^{3/2} - (C - 2B)^{3/2}).
    """
    if A < 0 or C < 0 or not B > 0 or C < 2.0 * B:
        raise ParameterConstraintError(
            f"need A, C >= 0, B > 0 and C >= 2B, got A={A}, B={B}, C={C}"
        )
    evaluators = [
        QuadraticHamiltonian(1.0, shift=lambda s: 2.0 * s),
        QuadraticHamiltonian(1.0, offset=lambda s: 2.0 * B * s),
        QuadraticHamiltonian(
            1.0,
            shift=lambda s: 0.5 * (3.0 * A - 1.0 + 2.0 * s),
            offset=lambda s: C - (0.5 * (2.0 * s - 1.0 - A)) ** 2,
        ),
    ]
    net = _triangle_network()
    model = HamiltonianModel.for_network("triangle-dep", net, evaluators, beta0)
    a_star = math.sqrt(C) - 1.0 + (2.0 / (6.0 * B)) * (
        C ** 1.5 - (C - 2.0 * B) ** 1.5
    )
    on_locus = abs(A - a_star) <= 1e-9 * (1.0 + abs(a_star))
    return BenchmarkCase(
        name="triangle-dep",
        network=net,
        model=model,
        beta0=beta0,
        exact_c=C if on_locus else None,
        reference_c=None,
        reference_note=None,
        default_policies=_POLICIES,
    )


def triangle_independent(A: float = 1.0, B: float = 0.0, C: float = 1.0,
                         beta0: float = 9.1) -> BenchmarkCase:
    """Triangle with s-independent Hamiltonians.

    Arcs carry (mu + 1)^2, mu^2 + B and (mu + A)(mu + 2A) + C. The critical
    value is C exactly when A = sqrt(C) - 1 + sqrt(C - B) and that value is
    non-negative.
    """
    if B < 0 or C < B:
        raise ParameterConstraintError(
            f"need C >= B >= 0, got B={B}, C={C}"
        )
    evaluators = [
        QuadraticHamiltonian(1.0, shift=1.0),
        QuadraticHamiltonian(1.0, offset=B),
        QuadraticHamiltonian(1.0, shift=1.5 * A, offset=C - 0.25 * A * A),
    ]
    net = _triangle_network()
    model = HamiltonianModel.for_network("triangle-indep", net, evaluators, beta0)
    a_star = math.sqrt(C) - 1.0 + math.sqrt(C - B)
    on_locus = a_star >= 0 and abs(A - a_star) <= 1e-9 * (1.0 + abs(a_star))
    return BenchmarkCase(
        name="triangle-indep",
        network=net,
        model=model,
        beta0=beta0,
        exact_c=C if on_locus else None,
        reference_c=None,
        reference_note=None,
        default_policies=_POLICIES,
    )


def _circle_case(name: str, middle: QuadraticHamiltonian,
                 beta0: float, reference_c: float,
                 note: str) -> BenchmarkCase:
    long_road = QuadraticHamiltonian(0.5, shift=-1.0, offset=-5.0)
    straight = QuadraticHamiltonian(0.5, offset=-5.0)
    by_group = {
        frozenset({1, 2, 6, 9}): long_road,    # the 2*sqrt(2) approaches
        frozenset({3, 4, 7, 10}): middle,      # the sqrt(2) connectors
        frozenset({0, 5, 8, 11}): straight,    # the unit segments
    }
    evaluators = []
    for arc in range(12):
        for group, ev in by_group.items():
            if arc in group:
                evaluators.append(ev)
                break
    net = _circle_network()
    model = HamiltonianModel.for_network(name, net, evaluators, beta0)
    return BenchmarkCase(
        name=name,
        network=net,
        model=model,
        beta0=beta0,
        exact_c=None,
        reference_c=reference_c,
        reference_note=note,
        default_policies=_POLICIES,
    )


def traffic_circle_dependent() -> BenchmarkCase:
    """Traffic circle with (mu + 4s)^2 / 4 on the connector arcs.

    The formula's s is the normalized position along the arc (the connectors
    are affinely parameterized over [0, 1]); in arc length the shift reads
    4 * s / sqrt(2).
    """
    connector_len = math.sqrt(2.0)
    return _circle_case(
        "circle-dep",
        QuadraticHamiltonian(0.25, shift=lambda s: 4.0 * s / connector_len),
        beta0=9.5,
        reference_c=0.259,
        note="algorithm2 at dx=1.25e-2, epsilon=dx/10, rounded to three "
             "significant figures",
    )


def traffic_circle_independent() -> BenchmarkCase:
    """Traffic circle with (mu + 2)^2 / 2 - 2 on the connector arcs."""
    return _circle_case(
        "circle-indep",
        QuadraticHamiltonian(0.5, shift=2.0, offset=-2.0),
        beta0=7.5,
        reference_c=-1.50,
        note="algorithm2 at dx=1.25e-2, epsilon=dx/10, rounded to three "
             "significant figures",
    )


def delta_t_policy(policy: str, network: Network, dx: float,
                   beta0: float) -> float:
    """Resolve a time step from the named policy.

    beta0_ratio is the admissible choice (min effective spacing) / beta0;
    half_dx and dx_56 deliberately violate the admissibility bound and are
    run with enforcement off.
    """
    if policy == "beta0_ratio":
        spacing = min(L / _safe_ceil(L / dx) for L in network.arc_lengths())
        return spacing / beta0
    if policy == "half_dx":
        return dx / 2.0
    if policy == "dx_56":
        return dx ** (5.0 / 6.0)
    raise ValueError(f"unknown delta-t policy {policy!r}")


REGISTRY = {
    "triangle-dep": triangle_dependent,
    "triangle-indep": triangle_independent,
    "circle-dep": traffic_circle_dependent,
    "circle-indep": traffic_circle_independent,
}
