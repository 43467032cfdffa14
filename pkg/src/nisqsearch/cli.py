"""Command-line harness: run, sweep, transpile-report, optimize."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .metrics import (
    CSV_FIELDS,
    BenchmarkReport,
    combine_stages,
    reports_to_csv,
    stage_report,
)
from .optimizer import (
    DepthModel,
    ScheduleBounds,
    classical_baseline,
    optimize_schedule,
    optimize_two_stage,
)
from .search import BENCHMARK_QUBITS, DEFAULT_TARGET, BenchmarkCircuitId, SearchProblem, build_benchmark_circuit
from .simulate import MODES, R_MODES, benchmark_outcomes, compiled_stages, trajectory_shots
from .state import NoiseModel, batches
from .transpiler import CouplingGraph, get_graph, hardware_depth, reference_band, transpile

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    circuits: tuple[BenchmarkCircuitId, ...]
    target: str = DEFAULT_TARGET
    graph: str = "full6"
    eps1: float = 0.0
    eps2: float | None = None
    mode: str = "exact"
    shots: int = 400
    batches: int = 3
    seed: int | None = None
    r_mode: str = "rescale"
    global_noise: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.r_mode not in R_MODES:
            raise ConfigError(f"unknown R-circuit mode {self.r_mode!r}")
        if self.mode != "exact" and self.seed is None:
            raise ConfigError("sampled modes require --seed")
        if self.shots < 1 or self.batches < 1:
            raise ConfigError("shots and batches must be positive")
        if self.mode == "trajectory" and self.r_mode == "honest":
            raise ConfigError("trajectory mode supports --rescale only")
        self.noise  # validates rates

    @property
    def problem(self) -> SearchProblem:
        try:
            return SearchProblem(len(self.target), self.target)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def noise(self) -> NoiseModel:
        try:
            if self.eps2 is None:
                return NoiseModel(self.eps1, global_channel=self.global_noise)
            return NoiseModel(self.eps1, self.eps2, ratio_locked=False, global_channel=self.global_noise)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _graph(name: str) -> CouplingGraph:
    try:
        return get_graph(name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc


def _circuits(names: Sequence[str] | None) -> tuple[BenchmarkCircuitId, ...]:
    if not names:
        return tuple(BenchmarkCircuitId)
    out = []
    for chunk in names:
        for name in chunk.split(","):
            try:
                out.append(BenchmarkCircuitId.parse(name))
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from exc
    return tuple(out)


def run_reports(config: RunConfig, cid: BenchmarkCircuitId, graph: CouplingGraph) -> list[BenchmarkReport]:
    """Stage reports plus, for two-stage ids, the combined report (listed last)."""
    problem, noise = config.problem, config.noise
    stages = benchmark_outcomes(cid, graph, noise, problem, config.r_mode)
    ideal = benchmark_outcomes(cid, graph, NoiseModel(), problem, config.r_mode)
    bench = build_benchmark_circuit(cid, problem)
    depths = [hardware_depth(c, graph) for c in bench.stages]
    rng = np.random.default_rng(config.seed)
    reports = []
    for i, (out, ref) in enumerate(zip(stages, ideal)):
        name = cid.value if len(stages) == 1 else f"{cid.value}[{i + 1}]"
        if config.mode == "exact":
            samples, shots = [out.distribution], None
        elif config.mode == "sampled":
            samples = batches(out.distribution, config.batches, config.shots, int(rng.integers(2**31)))
            shots = config.shots
        else:
            circuit = compiled_stages(cid, graph, problem)[i]
            samples = [trajectory_shots(circuit, noise, config.shots, rng) for _ in range(config.batches)]
            shots = config.shots
        reports.append(stage_report(name, graph.name, noise.eps1, noise.eps2, depths[i], samples,
                                    ref.distribution, out.target, out.scale, shots))
    if len(reports) > 1:
        reports.append(combine_stages(cid.value, reports))
    return reports


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _check_benchmark_target(problem: SearchProblem) -> SearchProblem:
    data = BENCHMARK_QUBITS - 1  # one qubit is the ancilla
    if problem.n != data:
        raise ConfigError(f"benchmark circuits need a {data}-bit target, got {problem.n} bits")
    return problem


def _benchmark_config(args: argparse.Namespace) -> RunConfig:
    config = _config(args)
    _check_benchmark_target(config.problem)
    return config


def cmd_run(args: argparse.Namespace) -> int:
    config = _benchmark_config(args)
    graph = _graph(config.graph)
    reports = [r for cid in config.circuits for r in run_reports(config, cid, graph)]
    if args.format == "json":
        _emit(_json([r.to_dict() for r in reports]), args.out)
    else:
        _emit(reports_to_csv(reports), args.out)
    return EXIT_OK


def parse_grid(text: str | None) -> list[float]:
    """``start:stop:points`` or a comma list; defaults to 41 points over [0, 0.02]."""
    if not text:
        return [float(x) for x in np.linspace(0.0, 0.02, 41)]
    try:
        if ":" in text:
            start, stop, points = text.split(":")
            grid = [float(x) for x in np.linspace(float(start), float(stop), int(points))]
        else:
            grid = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"invalid grid {text!r}") from exc
    if not grid or sorted(grid) != grid or grid[0] < 0 or grid[-1] > 1:
        raise ConfigError("grid must be sorted within [0, 1]")
    return grid


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = parse_grid(args.grid)
    base = _benchmark_config(args)
    if base.eps2 is not None:
        raise ConfigError("sweeps vary eps1 with eps2 locked to 10*eps1")
    graphs = [_graph(g) for g in (args.graphs.split(",") if args.graphs else ("full6", "lagos_t"))]
    rows = []
    for cid in base.circuits:
        baseline = args.classical_baseline
        if baseline is None:
            baseline = classical_baseline(2 ** len(base.target), cid.oracle_calls)
        for eps in grid:
            config = RunConfig(**{**base.__dict__, "eps1": eps})
            for graph in graphs:
                report = run_reports(config, cid, graph)[-1]
                row = report.csv_row()
                row["classical_baseline"] = f"{baseline:.10g}"
                rows.append(row)
    fields = CSV_FIELDS + ("classical_baseline",)
    if args.format == "json":
        _emit(_json(rows), args.out)
    else:
        lines = [",".join(fields)] + [",".join(str(r[f]) for f in fields) for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def transpile_report(cid: BenchmarkCircuitId, graph: CouplingGraph, problem: SearchProblem,
                     swap_mode: str = "cnot") -> dict:
    bench = build_benchmark_circuit(cid, problem)
    stages = []
    for circuit in bench.stages:
        routed = transpile(circuit, graph, swap_mode)
        stages.append({**routed.report(), "depth": hardware_depth(circuit, graph, swap_mode),
                       "t_count": routed.circuit.t_count})
    depth = sum(s["depth"] for s in stages)
    out = {
        "circuit": cid.value, "graph": graph.name, "swap_mode": swap_mode, "depth": depth,
        "swaps": sum(s["swaps"] for s in stages), "cnot_count": sum(s["cnot_count"] for s in stages),
        "t_count": sum(s["t_count"] for s in stages), "stages": stages,
        "reference": None, "band": None, "pass": None,
    }
    band = reference_band(graph.name, cid.value)
    if band is not None:
        ref, lo, hi = band
        out.update(reference=ref, band=[lo, hi], **{"pass": bool(lo <= depth <= hi)})
    return out


def cmd_transpile_report(args: argparse.Namespace) -> int:
    graph = _graph(args.graph)
    circuits = _circuits(args.circuit)
    problem = _check_benchmark_target(RunConfig(circuits, target=args.target).problem)
    if args.swap_mode not in ("cnot", "native"):
        raise ConfigError(f"unknown swap mode {args.swap_mode!r}")
    reports = [transpile_report(cid, graph, problem, args.swap_mode) for cid in circuits]
    _emit(_json(reports if len(reports) > 1 else reports[0]), args.out)
    return EXIT_TOLERANCE if any(r["pass"] is False for r in reports) else EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    problem = RunConfig(tuple(BenchmarkCircuitId), target=args.target).problem
    graph = _graph(args.graph)
    # hardware costs are measured on the five-qubit benchmark family
    if args.abstract or problem.n != 5:
        model = DepthModel.unit(problem.n)
    else:
        model = DepthModel.from_graph(graph, problem)
    try:
        bounds = ScheduleBounds(args.max_blocks, args.max_iterations)
        if args.two_stage:
            result = optimize_two_stage(problem, model, bounds)
        else:
            result = optimize_schedule(problem, model, bounds)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(_json({**result.to_dict(), "depth_model": model.to_dict(), "graph": graph.name}), args.out)
    return EXIT_OK


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        circuits=_circuits(args.circuit), target=args.target, graph=getattr(args, "graph", "full6"),
        eps1=args.eps1, eps2=args.eps2, mode=args.mode, shots=args.shots, batches=args.batches,
        seed=args.seed, r_mode=args.r_mode, global_noise=args.global_noise,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nisqsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, noise: bool = True) -> None:
        p.add_argument("--circuit", action="append", help="benchmark id(s), repeatable or comma-separated")
        p.add_argument("--target", default=DEFAULT_TARGET)
        p.add_argument("--out", help="output path (default stdout)")
        if not noise:
            return
        p.add_argument("--eps1", type=float, default=0.0)
        p.add_argument("--eps2", type=float, default=None,
                       help="expert: two-qubit rate, unlocking the 10x ratio")
        p.add_argument("--global-noise", action="store_true",
                       help="depolarize the whole register after each gate")
        p.add_argument("--mode", choices=MODES, default="exact")
        p.add_argument("--shots", type=int, default=400)
        p.add_argument("--batches", type=int, default=3)
        p.add_argument("--seed", type=int)
        group = p.add_mutually_exclusive_group()
        group.add_argument("--rescale", dest="r_mode", action="store_const", const="rescale")
        group.add_argument("--honest", dest="r_mode", action="store_const", const="honest")
        p.set_defaults(r_mode="rescale")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    run = sub.add_parser("run", help="simulate benchmark circuits and report metrics")
    common(run)
    run.add_argument("--graph", default="full6")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="success versus eps1 on several graphs")
    common(sweep)
    sweep.add_argument("--grid", help="start:stop:points or comma list (default 0:0.02:41)")
    sweep.add_argument("--graphs", help="comma-separated graphs (default full6,lagos_t)")
    sweep.add_argument("--classical-baseline", type=float, default=None,
                       help="override the (q+1)/N classical success probability")
    sweep.set_defaults(func=cmd_sweep)

    rep = sub.add_parser("transpile-report", help="routed depth and gate counts against published depths")
    common(rep, noise=False)
    rep.add_argument("--graph", default="full6")
    rep.add_argument("--swap-mode", default="cnot")
    rep.set_defaults(func=cmd_transpile_report)

    opt = sub.add_parser("optimize", help="minimize expected depth over schedules")
    common(opt, noise=False)
    opt.add_argument("--graph", default="full6")
    opt.add_argument("--max-blocks", type=int, default=1)
    opt.add_argument("--max-iterations", type=int, default=1)
    opt.add_argument("--two-stage", action="store_true")
    opt.add_argument("--abstract", action="store_true", help="unit oracle costs instead of hardware depths")
    opt.set_defaults(func=cmd_optimize)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
