"""Command line front end: sweep benchmark cases and emit CSV tables.

``eiknet run`` executes one algorithm over a list of grid spacings and writes
one results CSV (fixed column order: case, algorithm, dx, dt, epsilon, k,
c_estimate, c_reference, abs_error, stop_reason, wall_ms) plus a
per-iteration trace CSV per spacing for convergence plots. ``eiknet compare``
runs two specs on the same case and reports the iteration reduction per
spacing and its mean.

Cases are either registry names or a path to a network JSON file
({"vertices": [[x, y], ...], "arcs": [{"tail": i, "head": j, "length"?: l}]})
paired with --model and --beta0. Rows of a sweep can run in parallel worker
processes via the EIKNET_THREADS environment variable; results are reduced
in dx order either way, so the CSV content does not depend on the worker
count (wall_ms aside).

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .cases import REGISTRY, BenchmarkCase, delta_t_policy
from .critical import AlgorithmParams, algorithm1, algorithm2
from .errors import EikNetError
from .hamiltonians import HamiltonianModel, QuadraticHamiltonian
from .network import GridFunction, build_grid, build_network
from .solver import SolverConfig, evolve

OUTER_PERIOD = 1.0  # the protocol evolves phi = 0 over unit windows

CSV_COLUMNS = (
    "case", "algorithm", "dx", "dt", "epsilon", "k", "c_estimate",
    "c_reference", "abs_error", "stop_reason", "wall_ms",
)

USER_MODELS = {
    "free": lambda: QuadraticHamiltonian(0.5),
    "free-drift": lambda: QuadraticHamiltonian(0.5, shift=1.0),
}


class ConfigError(EikNetError):
    """Bad flags, unknown case, malformed network file."""


@dataclass(frozen=True)
class RunSpec:
    case: str
    algorithm: int
    dx_list: tuple[float, ...]
    dt_policy: str = "beta0_ratio"
    epsilon_rule: tuple[str, float] = ("fraction_of_dx", 0.1)
    mode: str = "tolerance"
    fixed_k: int | None = None
    max_iterations: int | None = None
    output: str = "results.csv"
    snapshot_times: tuple[float, ...] | None = None
    model: str | None = None
    beta0: float | None = None

    def __post_init__(self):
        if not self.dx_list:
            raise ConfigError("dx_list must not be empty")
        if any(b >= a for a, b in zip(self.dx_list, self.dx_list[1:])):
            raise ConfigError(f"dx_list must be strictly decreasing: {self.dx_list}")
        if self.algorithm not in (1, 2):
            raise ConfigError(f"algorithm must be 1 or 2, got {self.algorithm}")
        if self.mode not in ("tolerance", "fixed"):
            raise ConfigError(f"mode must be 'tolerance' or 'fixed', got {self.mode!r}")
        if self.mode == "fixed" and (self.fixed_k is None or self.fixed_k < 1):
            raise ConfigError("fixed mode needs --fixed-k >= 1")
        kind, value = self.epsilon_rule
        if kind not in ("fraction_of_dx", "absolute") or not value > 0:
            raise ConfigError(f"bad epsilon rule {self.epsilon_rule}")


def _resolve_case(spec: RunSpec) -> BenchmarkCase:
    if spec.case in REGISTRY:
        return REGISTRY[spec.case]()
    path = Path(spec.case)
    if not path.is_file():
        raise ConfigError(
            f"unknown case {spec.case!r}: not a registry name "
            f"({', '.join(sorted(REGISTRY))}) and not a file"
        )
    if spec.model is None or spec.beta0 is None:
        raise ConfigError("network-file cases need --model and --beta0")
    if spec.model not in USER_MODELS:
        raise ConfigError(
            f"unknown model {spec.model!r} (available: "
            f"{', '.join(sorted(USER_MODELS))})"
        )
    try:
        data = json.loads(path.read_text())
        net = build_network(
            [tuple(v) for v in data["vertices"]],
            [(a["tail"], a["head"], a.get("length")) for a in data["arcs"]],
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed network file {path}: {exc}") from exc
    evaluators = [USER_MODELS[spec.model]() for _ in range(net.num_arcs)]
    model = HamiltonianModel.for_network(
        f"{path.stem}:{spec.model}", net, evaluators, spec.beta0
    )
    return BenchmarkCase(
        name=f"{path.stem}:{spec.model}",
        network=net,
        model=model,
        beta0=spec.beta0,
        exact_c=None,
        reference_c=None,
        reference_note=None,
        default_policies=("beta0_ratio", "half_dx", "dx_56"),
    )


def _resolve_epsilon(spec: RunSpec, dx: float) -> float:
    kind, value = spec.epsilon_rule
    return value * dx if kind == "fraction_of_dx" else value


def _fmt(value) -> str:
    return "" if value is None else str(value)


def _row_job(spec: RunSpec, dx: float) -> dict:
    """Run one sweep row; self-contained so it can execute in a worker."""
    t0 = time.perf_counter()
    case = _resolve_case(spec)
    net, model = case.network, case.model
    dt = delta_t_policy(spec.dt_policy, net, dx, case.beta0)
    grid = build_grid(net, dx, dt, OUTER_PERIOD, case.beta0)
    config = SolverConfig.for_model(model, net, grid)
    epsilon = _resolve_epsilon(spec, dx)
    if spec.mode == "fixed":
        params = AlgorithmParams(mode="fixed", max_iterations=spec.fixed_k)
        epsilon_out = None
    else:
        params = AlgorithmParams(
            tolerance=epsilon, max_iterations=spec.max_iterations
        )
        epsilon_out = epsilon
    runner = algorithm1 if spec.algorithm == 1 else algorithm2
    result = runner(model, net, grid, config, params)
    wall_ms = (time.perf_counter() - t0) * 1e3

    c_ref = case.target_c
    row = {
        "case": case.name,
        "algorithm": spec.algorithm,
        "dx": dx,
        "dt": dt,
        "epsilon": epsilon_out,
        "k": result.iterations,
        "c_estimate": result.estimate,
        "c_reference": c_ref,
        "abs_error": None if c_ref is None else abs(result.estimate - c_ref),
        "stop_reason": result.stop_reason,
        "wall_ms": wall_ms,
    }
    trace = []
    for i, (up, low, gap, ms) in enumerate(
        zip(result.upper_seq, result.lower_seq, result.half_gap_seq,
            result.iter_wall_ms),
        start=1,
    ):
        mid = 0.5 * (up + low)
        trace.append({
            "k": i,
            "upper": up,
            "lower": low,
            "midpoint": mid,
            "half_gap": gap,
            "abs_error": None if c_ref is None else abs(mid - c_ref),
            "wall_ms": ms,
        })

    snapshots = []
    if spec.snapshot_times:
        evo = evolve(model, net, grid, config, GridFunction.zeros(grid),
                     tuple(spec.snapshot_times))
        for t, layer in evo.layers:
            for node in range(grid.num_nodes):
                loc = grid.node_coordinate(node)
                snapshots.append({
                    "time": t,
                    "node": node,
                    "vertex": loc.vertex,
                    "arc": loc.arc,
                    "s": loc.s,
                    "value": float(layer.values[node]),
                })
    return {"row": row, "trace": trace, "snapshots": snapshots}


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("EIKNET_THREADS", "1")))
    except ValueError:
        return 1


def _execute_rows(jobs: list[tuple[RunSpec, float]]) -> list[dict]:
    workers = _workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            return list(pool.map(_row_job, *zip(*jobs)))
    return [_row_job(spec, dx) for spec, dx in jobs]


def _write_csv(path: Path, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def run(spec: RunSpec) -> int:
    """Execute a sweep; returns the process exit code."""
    try:
        _resolve_case(spec)  # fail fast on config problems
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = Path(spec.output)
    try:
        results = _execute_rows([(spec, dx) for dx in spec.dx_list])
    except (EikNetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_csv(out, CSV_COLUMNS, [r["row"] for r in results])
    trace_cols = ("k", "upper", "lower", "midpoint", "half_gap", "abs_error",
                  "wall_ms")
    snap_cols = ("time", "node", "vertex", "arc", "s", "value")
    for dx, res in zip(spec.dx_list, results):
        stem = out.with_suffix("")
        _write_csv(Path(f"{stem}-trace-dx{dx:g}.csv"), trace_cols, res["trace"])
        if res["snapshots"]:
            _write_csv(Path(f"{stem}-layers-dx{dx:g}.csv"), snap_cols,
                       res["snapshots"])
    return 0


def compare(spec_a: RunSpec, spec_b: RunSpec, output: str | None = None) -> int:
    """Run two specs on the same case and report iteration reductions."""
    if spec_a.case != spec_b.case or spec_a.dx_list != spec_b.dx_list:
        print("error: compare needs the same case and dx list on both sides",
              file=sys.stderr)
        return 1
    try:
        _resolve_case(spec_a)
        _resolve_case(spec_b)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    jobs = [(spec_a, dx) for dx in spec_a.dx_list]
    jobs += [(spec_b, dx) for dx in spec_b.dx_list]
    try:
        results = _execute_rows(jobs)
    except (EikNetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    n = len(spec_a.dx_list)
    rows = []
    reductions = []
    for dx, res_a, res_b in zip(spec_a.dx_list, results[:n], results[n:]):
        k1 = res_a["row"]["k"]
        k2 = res_b["row"]["k"]
        reduction = 100.0 * (k1 - k2) / k1
        reductions.append(reduction)
        rows.append({"dx": dx, "k_a": k1, "k_b": k2,
                     "reduction_pct": reduction})
    rows.append({"dx": "mean", "k_a": None, "k_b": None,
                 "reduction_pct": sum(reductions) / len(reductions)})
    out = Path(output) if output else Path(spec_a.output)
    _write_csv(out, ("dx", "k_a", "k_b", "reduction_pct"), rows)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", required=True,
                   help="registry name or path to a network JSON file")
    p.add_argument("--model", help="model name for network-file cases")
    p.add_argument("--beta0", type=float,
                   help="slope cutoff for network-file cases")
    p.add_argument("--dx", type=float, nargs="+", required=True,
                   metavar="DX", help="grid spacings, strictly decreasing")
    p.add_argument("--dt-policy", default="beta0_ratio",
                   choices=("beta0_ratio", "half_dx", "dx_56"))
    eps = p.add_mutually_exclusive_group()
    eps.add_argument("--epsilon-fraction", type=float, default=0.1,
                     help="tolerance as a fraction of dx (default 0.1)")
    eps.add_argument("--epsilon", type=float,
                     help="absolute tolerance")
    p.add_argument("--max-iterations", type=int,
                   help="iteration cap in tolerance mode")
    p.add_argument("--output", default="results.csv")


def _epsilon_rule(args) -> tuple[str, float]:
    if args.epsilon is not None:
        return ("absolute", args.epsilon)
    return ("fraction_of_dx", args.epsilon_fraction)


def _build_parser() -> _Parser:
    parser = _Parser(prog="eiknet",
                     description="critical values of eikonal equations on networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="sweep one algorithm over spacings")
    _add_common(p_run)
    p_run.add_argument("--algorithm", type=int, choices=(1, 2), required=True)
    p_run.add_argument("--fixed-k", type=int,
                       help="run exactly this many iterations instead of "
                            "stopping on tolerance")
    p_run.add_argument("--snapshot-times", type=float, nargs="+",
                       help="dump layers at these times of the first window")

    p_cmp = sub.add_parser("compare", help="iteration reduction between two runs")
    _add_common(p_cmp)
    p_cmp.add_argument("--algorithm-a", type=int, choices=(1, 2), default=1)
    p_cmp.add_argument("--algorithm-b", type=int, choices=(1, 2), default=2)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            spec = RunSpec(
                case=args.case,
                algorithm=args.algorithm,
                dx_list=tuple(args.dx),
                dt_policy=args.dt_policy,
                epsilon_rule=_epsilon_rule(args),
                mode="fixed" if args.fixed_k else "tolerance",
                fixed_k=args.fixed_k,
                max_iterations=args.max_iterations,
                output=args.output,
                snapshot_times=tuple(args.snapshot_times)
                if args.snapshot_times else None,
                model=args.model,
                beta0=args.beta0,
            )
            return run(spec)
        spec_a = RunSpec(
            case=args.case,
            algorithm=args.algorithm_a,
            dx_list=tuple(args.dx),
            dt_policy=args.dt_policy,
            epsilon_rule=_epsilon_rule(args),
            max_iterations=args.max_iterations,
            output=args.output,
            model=args.model,
            beta0=args.beta0,
        )
        spec_b = replace(spec_a, algorithm=args.algorithm_b)
        return compare(spec_a, spec_b, args.output)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
