"""Hamiltonians on network arcs and their truncated Lagrangians.

Each arc carries a Hamiltonian H(s, mu), convex and coercive in mu, given in
the forward parametrization. The reverse parametrization is never stored:
it is derived through the compatibility identity

    H_reverse(s, mu) = H_forward(|gamma| - s, -mu).

The running cost of the scheme is the conjugate of H restricted to a compact
interval I and truncated at slopes beyond ``beta0``:

    L(s, lam) = max_{mu in I} (lam * mu - H(s, mu))   for |lam| <= beta0,
    L(s, lam) = +inf                                  otherwise.

``fit_truncation`` grows a symmetric I until every conjugate maximizer with
|lam| <= beta0 is strictly interior, which makes the truncated conjugate agree
with the unconstrained one on the slopes the scheme can actually use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonCoerciveError, OutOfDomainError
from .network import Network, SpaceTimeGrid

HamiltonianFn = Callable[[float, float], float]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def _golden_max(fn: Callable[[float], float], lo: float, hi: float,
                tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section maximum of a unimodal function on [lo, hi]."""
    a, b = float(lo), float(hi)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, fn(x)
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc, fd = fn(c), fn(d)
    for _ in range(300):
        if h <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _golden_min(fn: Callable[[float], float], lo: float, hi: float,
                tol: float = 1e-10) -> tuple[float, float]:
    x, neg = _golden_max(lambda t: -fn(t), lo, hi, tol)
    return x, -neg


def _check_s(s: float, length: float) -> float:
    tol = 1e-9 * (1.0 + length)
    if s < -tol or s > length + tol:
        raise OutOfDomainError(f"s={s} outside [0, {length}]")
    return min(max(s, 0.0), length)


class QuadraticHamiltonian:
    """H(s, mu) = curvature * (mu + shift(s))**2 + offset(s).

    ``shift`` and ``offset`` may be constants or callables of s. The conjugate
    has the closed form lam**2 / (4 * curvature) - shift(s) * lam - offset(s),
    exact whenever the truncation interval contains the maximizer
    lam / (2 * curvature) - shift(s).
    """

    def __init__(self, curvature: float, shift=0.0, offset=0.0):
        if not curvature > 0:
            raise ValueError(f"curvature must be positive, got {curvature}")
        self.curvature = float(curvature)
        self._shift = shift
        self._offset = offset

    def shift(self, s: float) -> float:
        return self._shift(s) if callable(self._shift) else self._shift

    def offset(self, s: float) -> float:
        return self._offset(s) if callable(self._offset) else self._offset

    def __call__(self, s: float, mu: float) -> float:
        d = mu + self.shift(s)
        return self.curvature * d * d + self.offset(s)

    def conjugate(self, s: float, lam: float) -> float:
        return lam * lam / (4.0 * self.curvature) - self.shift(s) * lam - self.offset(s)

    def conjugate_argmax(self, s: float, lam: float) -> float:
        return lam / (2.0 * self.curvature) - self.shift(s)


@dataclass(frozen=True)
class TruncationParams:
    """Compact conjugation interval plus the slope cutoff of the running cost."""

    mu_interval: tuple[float, float]
    beta0: float

    def __post_init__(self):
        lo, hi = self.mu_interval
        if not lo < hi:
            raise ValueError(f"empty mu interval {self.mu_interval}")
        if not self.beta0 > 0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")

    @property
    def symmetric(self) -> bool:
        lo, hi = self.mu_interval
        return abs(lo + hi) <= 1e-12 * (1.0 + abs(hi))


def fit_truncation(
    evaluators: Sequence[HamiltonianFn],
    arc_lengths: Sequence[float],
    beta0: float,
    samples: int = 33,
    max_half_width: float = 1e9,
) -> TruncationParams:
    """Pick a symmetric interval wide enough for the conjugation to saturate.

    Starting from half-width beta0 + 1, doubles until the maximizer of
    lam * mu - H(s, mu) stays strictly interior for sampled s along each arc
    and lam in [-beta0, beta0]. Raises NonCoerciveError if no finite interval
    works, which is the symptom of a Hamiltonian with sublinear growth.
    """
    if not beta0 > 0:
        raise ValueError(f"beta0 must be positive, got {beta0}")
    half = beta0 + 1.0
    lams = np.linspace(-beta0, beta0, samples)
    while half <= max_half_width:
        margin = 1e-3 * half
        ok = True
        for ev, length in zip(evaluators, arc_lengths):
            for s in np.linspace(0.0, length, samples):
                if isinstance(ev, QuadraticHamiltonian):
                    worst = max(
                        abs(ev.conjugate_argmax(float(s), float(lam)))
                        for lam in (lams[0], lams[-1])
                    )
                    if worst > half - margin:
                        ok = False
                else:
                    for lam in lams:
                        g = lambda mu: lam * mu - ev(float(s), mu)
                        x, _ = _golden_max(g, -half, half)
                        if abs(x) > half - margin:
                            ok = False
                            break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return TruncationParams((-half, half), beta0)
        half *= 2.0
    raise NonCoerciveError(
        f"conjugate maximizers keep escaping up to half-width {max_half_width:g}; "
        "the Hamiltonian does not look superlinear in mu"
    )


class HamiltonianModel:
    """Per-arc Hamiltonians with a shared truncation and optional closed-form
    conjugates.

    ``lagrangians[a]``, when present, is the unconstrained conjugate of
    ``evaluators[a]`` in the forward parametrization; reverse values come from
    the compatibility identity, which is exact because the fitted interval is
    symmetric. Arcs without a closed form fall back to golden-section
    conjugation over the truncation interval.
    """

    def __init__(
        self,
        name: str,
        evaluators: Sequence[HamiltonianFn],
        arc_lengths: Sequence[float],
        truncation: TruncationParams,
        lagrangians: Sequence[Callable[[float, float], float] | None] | None = None,
    ):
        if len(evaluators) != len(arc_lengths):
            raise ValueError(
                f"{len(evaluators)} evaluators for {len(arc_lengths)} arcs"
            )
        if lagrangians is None:
            lagrangians = [None] * len(evaluators)
        elif len(lagrangians) != len(evaluators):
            raise ValueError("one lagrangian slot per arc, use None to skip")
        self.name = name
        self.evaluators = tuple(evaluators)
        self.arc_lengths = tuple(float(L) for L in arc_lengths)
        self.truncation = truncation
        self.lagrangians = tuple(lagrangians)
        self._spot_check_convexity()

    @property
    def num_arcs(self) -> int:
        return len(self.evaluators)

    @property
    def all_quadratic(self) -> bool:
        return all(isinstance(ev, QuadraticHamiltonian) for ev in self.evaluators)

    @classmethod
    def for_network(
        cls,
        name: str,
        network: Network,
        evaluators: Sequence[HamiltonianFn],
        beta0: float,
        truncation: TruncationParams | None = None,
    ) -> "HamiltonianModel":
        """Fit the truncation to the evaluators and attach closed-form
        conjugates wherever the arc Hamiltonian is quadratic."""
        lengths = network.arc_lengths()
        if truncation is None:
            truncation = fit_truncation(evaluators, lengths, beta0)
        lagrangians = [
            ev.conjugate if isinstance(ev, QuadraticHamiltonian) else None
            for ev in evaluators
        ]
        return cls(name, evaluators, lengths, truncation, lagrangians)

    def _spot_check_convexity(self) -> None:
        lo, hi = self.truncation.mu_interval
        mus = np.linspace(lo, hi, 9)
        for arc, (ev, length) in enumerate(zip(self.evaluators, self.arc_lengths)):
            for s in np.linspace(0.0, length, 5):
                vals = [ev(float(s), float(m)) for m in mus]
                scale = 1.0 + max(abs(v) for v in vals)
                for i in range(len(mus) - 2):
                    mid = 0.5 * (vals[i] + vals[i + 2])
                    if vals[i + 1] > mid + 1e-9 * scale:
                        raise ValueError(
                            f"evaluator for arc {arc} is not convex in mu "
                            f"near s={s:g}"
                        )


def eval_hamiltonian(
    model: HamiltonianModel, arc: int, direction: str, s: float, mu: float
) -> float:
    """Evaluate the arc Hamiltonian in either parametrization."""
    length = model.arc_lengths[arc]
    s = _check_s(s, length)
    if direction == "forward":
        return model.evaluators[arc](s, mu)
    if direction == "reverse":
        return model.evaluators[arc](length - s, -mu)
    raise ValueError(f"direction must be 'forward' or 'reverse', got {direction!r}")


def truncated_lagrangian(
    model: HamiltonianModel, arc: int, direction: str, s: float, lam: float
) -> float:
    """Truncated running cost: the conjugate over the fitted interval, +inf
    beyond the slope cutoff."""
    length = model.arc_lengths[arc]
    s = _check_s(s, length)
    if direction not in ("forward", "reverse"):
        raise ValueError(f"direction must be 'forward' or 'reverse', got {direction!r}")
    beta0 = model.truncation.beta0
    if abs(lam) > beta0 * (1.0 + 1e-12):
        return math.inf
    lag = model.lagrangians[arc]
    if lag is not None:
        if direction == "forward":
            return lag(s, lam)
        return lag(length - s, -lam)
    lo, hi = model.truncation.mu_interval
    ev = model.evaluators[arc]
    if direction == "forward":
        g = lambda mu: lam * mu - ev(s, mu)
    else:
        g = lambda mu: lam * mu - ev(length - s, -mu)
    _, val = _golden_max(g, lo, hi)
    return val


@dataclass(frozen=True)
class CriticalBounds:
    """Arc-wise lower envelope maxima, their global maximum, and the minimal
    flux limiter at each vertex."""

    a_gamma: tuple[float, ...]
    a0: float
    flux_limiters: tuple[float, ...]


def _pointwise_min(model: HamiltonianModel, arc: int, s: float,
                   reverse: bool) -> float:
    """min over mu of the (possibly reversed) arc Hamiltonian at fixed s."""
    length = model.arc_lengths[arc]
    ev = model.evaluators[arc]
    s_eval = length - s if reverse else s
    lo, hi = model.truncation.mu_interval
    if isinstance(ev, QuadraticHamiltonian):
        minimizer = -ev.shift(s_eval)
        if reverse:
            minimizer = -minimizer
        if not lo < minimizer < hi:
            raise NonCoerciveError(
                f"minimizer of arc {arc} Hamiltonian falls outside the "
                f"truncation interval at s={s:g}; refit the truncation"
            )
        return ev.offset(s_eval)
    if reverse:
        f = lambda mu: ev(s_eval, -mu)
    else:
        f = lambda mu: ev(s_eval, mu)
    margin = 1e-7 * (hi - lo)
    x, val = _golden_min(f, lo, hi)
    if x - lo < margin or hi - x < margin:
        raise NonCoerciveError(
            f"minimum of arc {arc} Hamiltonian at s={s:g} sits on the "
            "truncation boundary; the interval is too small or H is not coercive"
        )
    return val


def _envelope_max(model: HamiltonianModel, arc: int,
                  grid: SpaceTimeGrid | None, reverse: bool) -> float:
    length = model.arc_lengths[arc]
    ss = np.linspace(0.0, length, 257)
    if grid is not None:
        spacing = float(grid.effective_spacing[arc])
        node_s = np.arange(grid.nodes_per_arc[arc] + 1) * spacing
        ss = np.unique(np.concatenate([ss, node_s]))
    vals = np.array([_pointwise_min(model, arc, float(s), reverse) for s in ss])
    i = int(np.argmax(vals))
    lo = float(ss[max(i - 1, 0)])
    hi = float(ss[min(i + 1, len(ss) - 1)])
    _, refined = _golden_max(
        lambda s: _pointwise_min(model, arc, s, reverse), lo, hi
    )
    return max(float(vals[i]), refined)


def arc_lower_envelope(
    model: HamiltonianModel, arc: int, grid: SpaceTimeGrid | None = None
) -> float:
    """Largest value along the arc of the pointwise minimum of H in mu.

    Sampled on 257 uniform points (plus the grid nodes when a grid is given)
    and sharpened with a golden-section pass around the best sample.
    """
    return _envelope_max(model, arc, grid, reverse=False)


def compute_critical_bounds(
    model: HamiltonianModel, network: Network,
    grid: SpaceTimeGrid | None = None,
) -> CriticalBounds:
    """Envelope maxima per arc, their maximum, and the vertex flux limiters.

    Each arc is processed in both parametrizations as a consistency check;
    the two values agree up to refinement noise whenever the model respects
    the compatibility identity.
    """
    a_vals = []
    for arc in range(model.num_arcs):
        fwd = _envelope_max(model, arc, grid, reverse=False)
        rev = _envelope_max(model, arc, grid, reverse=True)
        if abs(fwd - rev) > 1e-6 * (1.0 + max(abs(fwd), abs(rev))):
            raise ValueError(
                f"forward and reverse lower envelopes disagree on arc {arc}: "
                f"{fwd:.9g} vs {rev:.9g}"
            )
        a_vals.append(max(fwd, rev))
    a0 = max(a_vals)
    flux = tuple(
        max(a_vals[arc_id] for arc_id, _ in network.incidence[v])
        for v in range(network.num_vertices)
    )
    return CriticalBounds(a_gamma=tuple(a_vals), a0=a0, flux_limiters=flux)
