"""Expected-depth minimization over Grover schedules and two-stage splits, and noise thresholds."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .search import (
    BenchmarkCircuitId,
    SearchProblem,
    SearchSchedule,
    TwoStageSpec,
    _prep_circuit,
    schedule_success,
    stage_probabilities,
)
from .simulate import success_probability_exact
from .state import NoiseModel
from .transpiler import CouplingGraph, hardware_depth

EPS1_MAX = 0.1  # the locked two-qubit rate 10*eps1 must stay a probability


@dataclass(frozen=True)
class DepthModel:
    """Additive depth costs: ``prep`` once per circuit, ``iteration[w]`` per G_w application.

    ``prep`` covers state preparation and measurement. An abstract model can be
    given as oracle and diffusion costs via ``from_blocks``.
    """

    n: int
    prep: float
    iteration: Mapping[int, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "iteration", dict(sorted(self.iteration.items())))
        if self.prep < 0:
            raise ValueError("prep depth must be non-negative")
        if set(self.iteration) != set(range(1, self.n + 1)):
            raise ValueError(f"iteration costs needed for every width 1..{self.n}")
        costs = list(self.iteration.values())
        if any(c <= 0 for c in costs):
            raise ValueError("iteration depths must be positive")
        if any(b < a for a, b in zip(costs, costs[1:])):
            raise ValueError("iteration depth must be non-decreasing in the diffusion width")

    @classmethod
    def unit(cls, n: int) -> "DepthModel":
        """Every iteration costs one oracle call; no preparation cost."""
        return cls(n, 0.0, {w: 1.0 for w in range(1, n + 1)})

    @classmethod
    def from_blocks(cls, n: int, oracle: float, diffusion: Mapping[int, float],
                    prep: float = 0.0) -> "DepthModel":
        """d(G_w) = d(O_t) + d(D_w)."""
        if oracle <= 0 or any(d <= 0 for d in diffusion.values()):
            raise ValueError("block depths must be positive")
        return cls(n, prep, {w: oracle + diffusion[w] for w in range(1, n + 1)})

    @classmethod
    def from_graph(cls, graph: CouplingGraph, problem: SearchProblem | None = None) -> "DepthModel":
        """Costs measured with ``hardware_depth`` on the benchmark circuit family.

        The G_w cost is the depth added by one G_w on a circuit that loads the
        leading n - w target bits and measures the searched block.
        """
        problem = problem or SearchProblem.default()
        n = problem.n
        data = tuple(range(n))

        def depth(w: int, reps: int) -> int:
            k = n - w
            search = data[k:]
            circ = _prep_circuit(problem, dict(zip(data[:k], problem.target[:k])), search,
                                 [search] * reps, search)
            return hardware_depth(circ, graph)

        prep = depth(n, 0)
        return cls(n, float(prep), {w: float(depth(w, 1) - prep) for w in range(1, n + 1)})

    def depth(self, schedule: SearchSchedule) -> float:
        """Works for stage-2 schedules on fewer qubits too: their widths are keys of the table."""
        return self.prep + sum(j * self.iteration[w] for w, j in schedule.blocks)

    def to_dict(self) -> dict:
        return {"n": self.n, "prep": self.prep, "iteration": {str(k): v for k, v in self.iteration.items()}}


def render(schedule: SearchSchedule) -> str:
    """G/R/M notation; a purely local schedule reads as a hybrid search, e.g. ``R3G2M2``."""
    if schedule.m < schedule.n and all(w == schedule.m for w, _ in schedule.blocks):
        k = schedule.n - schedule.m
        return f"R{k}" + schedule.notation(schedule.m)
    return schedule.notation()


@dataclass(frozen=True)
class OptimizationResult:
    best: "SearchSchedule | TwoStageSpec"
    probability: float
    depth: float
    expected_depth: float
    candidates: int
    stage_probabilities: tuple[float, ...] = ()
    ranking: tuple[tuple[str, float], ...] = field(default=(), compare=False)

    @property
    def notation(self) -> str:
        if isinstance(self.best, TwoStageSpec):
            return f"{render_stage1(self.best)}|{render(self.best.stage2)}"
        return render(self.best)

    def to_dict(self) -> dict:
        out = {
            "schedule": self.notation, "probability": self.probability, "depth": self.depth,
            "expected_depth": self.expected_depth, "candidates": self.candidates,
        }
        if isinstance(self.best, TwoStageSpec):
            out["stage_probabilities"] = list(self.stage_probabilities)
            out["measure"] = self.best.measure
            out["blocks"] = [list(map(list, self.best.stage1.blocks)), list(map(list, self.best.stage2.blocks))]
        else:
            out["m"] = self.best.m
            out["blocks"] = [list(b) for b in self.best.blocks]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def render_stage1(spec: TwoStageSpec) -> str:
    return spec.stage1.notation(len(spec.measured_qubits))


# -- optimal stopping ------------------------------------------------------------------

def optimal_grover_stop(N: int, depth_model: DepthModel | None = None) -> OptimizationResult:
    """Iteration count j* minimizing (prep + j d(G_n)) / sin^2((2j+1) theta).

    With ``depth_model=None`` unit oracle costs are used, so the objective is the
    expected number of oracle calls.
    """
    n = int(round(math.log2(N)))
    if N < 4 or 2**n != N:
        raise ValueError("N must be a power of two >= 4")
    model = depth_model or DepthModel.unit(n)
    if model.n != n:
        raise ValueError(f"depth model is for n={model.n}, N needs n={n}")
    theta = math.asin(N**-0.5)
    js = np.arange(1, math.ceil(math.pi * math.sqrt(N) / 4) + 1)
    p = np.sin((2 * js + 1) * theta) ** 2
    depth = model.prep + js * model.iteration[n]
    ed = depth / p
    i = int(np.argmin(ed))
    j = int(js[i])
    return OptimizationResult(SearchSchedule.grover(n, j), float(p[i]), float(depth[i]), float(ed[i]), len(js))


# -- schedule enumeration --------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleBounds:
    """``max_blocks`` alternating blocks with at most ``max_iterations`` oracle calls in total."""

    max_blocks: int = 3
    max_iterations: int = 6
    widths: tuple[int, ...] | None = None  # allowed local widths m; default all

    def __post_init__(self) -> None:
        if self.max_blocks < 0 or self.max_iterations < 0:
            raise ValueError("bounds must be non-negative")


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Tuples of ``parts`` positive integers summing to ``total``."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        edges = (0, *cuts, total)
        yield tuple(b - a for a, b in zip(edges, edges[1:]))


def enumerate_schedules(n: int, bounds: ScheduleBounds, keep_block: bool = False) -> Iterator[SearchSchedule]:
    """Every canonical schedule within bounds: adjacent blocks differ in width.

    A schedule of global blocks only is listed once (as m = n) unless
    ``keep_block``, where its local block still matters, e.g. as a measured block.
    """
    widths = bounds.widths or tuple(range(1, n + 1))
    for m in widths:
        if not 1 <= m <= n:
            raise ValueError(f"local width {m} outside [1, {n}]")
        if m == n:
            shapes = [(n,)] if bounds.max_blocks >= 1 else []
        else:
            shapes = [tuple((n, m)[(i + s) % 2] for i in range(q))
                      for q in range(1, bounds.max_blocks + 1) for s in (0, 1)]
        for pattern in shapes:
            q = len(pattern)
            if m < n and set(pattern) == {n} and not keep_block:
                continue
            for total in range(q, bounds.max_iterations + 1):
                for js in _compositions(total, q):
                    yield SearchSchedule(n, m, tuple(zip(pattern, js)))


def _schedule_key(s: SearchSchedule) -> tuple:
    return (s.m, s.blocks)


def optimize_schedule(problem: SearchProblem, depth_model: DepthModel,
                      bounds: ScheduleBounds = ScheduleBounds()) -> OptimizationResult:
    """Exhaustive minimum of depth / success; ties go to smaller depth, then the lexicographic schedule."""
    if problem.n > 10:
        raise ValueError("exact schedule evaluation is limited to n <= 10")
    if depth_model.n != problem.n:
        raise ValueError("depth model and problem disagree on n")
    scored = []
    for s in enumerate_schedules(problem.n, bounds):
        p = schedule_success(problem, s)
        d = depth_model.depth(s)
        scored.append((d / p if p > 0 else math.inf, d, _schedule_key(s), s, p))
    if not scored:
        raise ValueError("empty feasible set: no schedule fits the bounds")
    scored.sort(key=lambda t: t[:3])
    ed, d, _, s, p = scored[0]
    ranking = tuple((render(t[3]), t[0]) for t in scored[:10])
    return OptimizationResult(s, p, d, ed, len(scored), ranking=ranking)


def optimize_two_stage(problem: SearchProblem, depth_model: DepthModel,
                       bounds: ScheduleBounds = ScheduleBounds(1, 1),
                       measure: Sequence[str] = ("diffused", "undiffused")) -> OptimizationResult:
    """Exhaustive minimum of (d1 + d2) / (P1 P2) over stage-1 schedules, measured blocks and stage-2 schedules.

    Stage 2 runs on the remaining r qubits with the stage-1 bits loaded; its
    G_w costs are read from the same model, which measures them on exactly
    such loaded circuits.
    """
    n = problem.n
    scored = []
    for s1 in enumerate_schedules(n, ScheduleBounds(bounds.max_blocks, bounds.max_iterations,
                                                    tuple(m for m in (bounds.widths or range(1, n + 1)) if m < n)), keep_block=True):
        for choice in measure:
            measured = s1.m if choice == "diffused" else n - s1.m
            r = n - measured
            if measured == 0 or r == 0:
                continue
            for s2 in enumerate_schedules(r, ScheduleBounds(bounds.max_blocks, bounds.max_iterations)):
                spec = TwoStageSpec(s1, s2, choice)
                p1, p2 = stage_probabilities(problem, spec)
                d = depth_model.depth(s1) + depth_model.depth(s2)
                p = p1 * p2
                key = (choice, _schedule_key(s1), _schedule_key(s2))
                scored.append((d / p if p > 0 else math.inf, d, key, spec, p, (p1, p2)))
    if not scored:
        raise ValueError("empty feasible set: no two-stage split fits the bounds")
    scored.sort(key=lambda t: t[:3])
    ed, d, _, spec, p, probs = scored[0]
    ranking = tuple((f"{render_stage1(t[3])}|{render(t[3].stage2)}", t[0]) for t in scored[:10])
    return OptimizationResult(spec, p, d, ed, len(scored), probs, ranking)


# -- noise thresholds ---------------------------------------------------------------

def classical_baseline(N: int, queries: int) -> float:
    """q oracle checks plus one uniform guess among the N - q unchecked items: (q + 1) / N."""
    if not 0 <= queries < N:
        raise ValueError(f"queries must be in [0, N), got {queries}")
    return queries / N + (1 - queries / N) / (N - queries)


def baseline_for(cid: "BenchmarkCircuitId | str", problem: SearchProblem | None = None) -> float:
    cid = BenchmarkCircuitId.parse(cid)
    problem = problem or SearchProblem.default()
    return classical_baseline(problem.size, cid.oracle_calls)


@dataclass(frozen=True)
class ThresholdResult:
    eps1: float | None
    flag: str  # "ok", "no-crossing" or "baseline-above-ideal"
    evaluations: int
    grid: tuple[tuple[float, float], ...] = ()
    monotone: bool = True

    def to_dict(self) -> dict:
        return {"eps1": self.eps1, "flag": self.flag, "evaluations": self.evaluations,
                "monotone": self.monotone}


def default_grid(points: int = 41, upper: float = 0.02) -> np.ndarray:
    return np.linspace(0.0, upper, points)


def find_threshold_eps(cid: "BenchmarkCircuitId | str", graph: CouplingGraph, classical_baseline: float,
                       problem: SearchProblem | None = None, r_mode: str = "rescale",
                       grid: Sequence[float] | None = None, tol: float = 1e-5) -> ThresholdResult:
    """eps1 (with eps2 = 10 eps1) where exact noisy success falls to ``classical_baseline``.

    A grid brackets the first crossing, extended up to eps1 = 0.1 if needed,
    then bisection narrows the bracket to ``tol``.
    """
    cid = BenchmarkCircuitId.parse(cid)

    def success(eps: float) -> float:
        return success_probability_exact(cid, graph, NoiseModel(float(eps)), problem, r_mode)

    grid = list(default_grid() if grid is None else grid)
    if sorted(grid) != grid or grid[0] < 0 or grid[-1] > EPS1_MAX:
        raise ValueError(f"grid must be sorted within [0, {EPS1_MAX}]")
    if grid[-1] < EPS1_MAX:
        step = grid[-1] - grid[-2] if len(grid) > 1 else EPS1_MAX / 40
        grid += list(np.arange(grid[-1] + step, EPS1_MAX + step / 2, step))
        grid[-1] = min(grid[-1], EPS1_MAX)
    values = []
    lo = hi = None
    for eps in grid:
        values.append((float(eps), success(eps)))
        if values[-1][1] <= classical_baseline:
            if len(values) == 1:
                return ThresholdResult(None, "baseline-above-ideal", 1, tuple(values))
            lo, hi = values[-2][0], values[-1][0]
            break
    monotone = all(b[1] < a[1] for a, b in zip(values, values[1:]))
    if hi is None:
        return ThresholdResult(None, "no-crossing", len(values), tuple(values), monotone)
    evals = len(values)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        evals += 1
        if success(mid) > classical_baseline:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(0.5 * (lo + hi), "ok", evals, tuple(values), monotone)
