"""Gate-level simulation of compiled benchmark circuits, noiseless or under depolarizing noise.

Circuits are first transpiled for a coupling graph; measured bitstrings are
read in logical qubit order through the routed circuit's final placement.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .gates import Circuit
from .search import BenchmarkCircuitId, SearchProblem, build_benchmark_circuit
from .state import (
    NoiseModel,
    OutcomeDistribution,
    QuantumState,
    apply_depolarizing,
    apply_unitary,
    measure_distribution,
    stochastic_pauli,
)
from .transpiler import CouplingGraph, transpile

MODES = ("exact", "sampled", "trajectory")
R_MODES = ("rescale", "honest")


def run_circuit(circuit: Circuit, noise: NoiseModel | None = None, density: bool | None = None,
                rng: np.random.Generator | None = None) -> QuantumState:
    """Evolve |0...0> through ``circuit``.

    Each gate is followed by a depolarizing channel of rate ``noise.rate(arity)``
    on the gate's qubits, or on the whole register for ``global_channel``.
    With ``rng`` the channel is sampled as a Pauli trajectory on a pure state.
    """
    noise = noise or NoiseModel()
    if density is None:
        density = not noise.is_noiseless and rng is None
    if density and rng is not None:
        raise ValueError("trajectories run on pure states")
    if not density and rng is None and not noise.is_noiseless:
        raise ValueError("noisy pure-state simulation needs an rng for trajectories")
    n = circuit.n_qubits
    state = QuantumState.zero(n, density=density)
    everything = tuple(range(n))
    for g in circuit.gates:
        state = apply_unitary(state, g.to_matrix(), g.qubits, validate=False)
        eps = noise.rate(g.arity)
        if eps == 0.0:
            continue
        where = everything if noise.global_channel else g.qubits
        if rng is None:
            state = apply_depolarizing(state, where, eps)
        else:
            state = stochastic_pauli(state, where, eps, rng)
    return state


def circuit_distribution(circuit: Circuit, noise: NoiseModel | None = None) -> OutcomeDistribution:
    """Exact distribution over ``circuit.measured`` (density matrix when noisy)."""
    if not circuit.measured:
        raise ValueError("circuit measures no qubits")
    return measure_distribution(run_circuit(circuit, noise), circuit.measured)


def trajectory_distribution(circuit: Circuit, noise: NoiseModel, trajectories: int,
                            seed: int) -> OutcomeDistribution:
    """Average of ``trajectories`` stochastic-Pauli runs; converges to the exact channel."""
    if trajectories < 1:
        raise ValueError("trajectories must be >= 1")
    rng = np.random.default_rng(seed)
    acc = None
    for _ in range(trajectories):
        vec = measure_distribution(run_circuit(circuit, noise, density=False, rng=rng),
                                   circuit.measured).vector()
        acc = vec if acc is None else acc + vec
    return OutcomeDistribution.from_vector(acc / trajectories, circuit.measured)


def trajectory_shots(circuit: Circuit, noise: NoiseModel, shots: int,
                     rng: np.random.Generator) -> OutcomeDistribution:
    """``shots`` single-shot measurements, each of an independent noise trajectory."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    counts: dict[str, int] = {}
    for _ in range(shots):
        dist = measure_distribution(run_circuit(circuit, noise, density=False, rng=rng), circuit.measured)
        keys = sorted(dist.probs)
        p = np.array([dist.probs[k] for k in keys])
        bits = keys[int(rng.choice(len(keys), p=p / p.sum()))]
        counts[bits] = counts.get(bits, 0) + 1
    return OutcomeDistribution({k: c / shots for k, c in sorted(counts.items())}, circuit.measured, shots)


# -- benchmark circuits -----------------------------------------------------------

@lru_cache(maxsize=512)
def compiled_stages(cid: BenchmarkCircuitId, graph: CouplingGraph, problem: SearchProblem,
                    guess_bits: str | None = None, swap_mode: str = "cnot") -> tuple[Circuit, ...]:
    """Physical circuits of every stage, with all compiled gates kept."""
    bench = build_benchmark_circuit(cid, problem, guess_bits)
    return tuple(transpile(c, graph, swap_mode, None, "compiled").circuit for c in bench.stages)


@lru_cache(maxsize=4096)
def _stage_distribution(cid: BenchmarkCircuitId, graph: CouplingGraph, problem: SearchProblem,
                        guess_bits: str | None, stage: int, noise: NoiseModel,
                        swap_mode: str) -> OutcomeDistribution:
    return circuit_distribution(compiled_stages(cid, graph, problem, guess_bits, swap_mode)[stage], noise)


@dataclass(frozen=True)
class StageOutcome:
    """Measured distribution of one stage with the bitstring counted as success."""

    distribution: OutcomeDistribution
    target: str
    scale: float = 1.0

    @property
    def success(self) -> float:
        return self.scale * self.distribution[self.target]


def benchmark_outcomes(cid: "BenchmarkCircuitId | str", graph: CouplingGraph,
                       noise: NoiseModel | None = None, problem: SearchProblem | None = None,
                       r_mode: str = "rescale", swap_mode: str = "cnot") -> tuple[StageOutcome, ...]:
    """Exact per-stage outcome distributions of a benchmark id.

    R-circuits in ``rescale`` mode measure the searched block assuming the
    correct guess and scale success by 2^-k. In ``honest`` mode every guess is
    equally likely and the full n-bit string is reported. Two-stage ids give
    stage 1 and stage 2 (the latter loaded with the correct stage-1 bits).
    """
    cid = BenchmarkCircuitId.parse(cid)
    problem = problem or SearchProblem.default()
    noise = noise or NoiseModel()
    if r_mode not in R_MODES:
        raise ValueError(f"unknown R-circuit mode {r_mode!r}")
    bench = build_benchmark_circuit(cid, problem)
    if cid.guess_width and r_mode == "honest":
        k = cid.guess_width
        vec = np.zeros(2**problem.n)
        for g in range(2**k):
            guess = format(g, f"0{k}b")
            part = _stage_distribution(cid, graph, problem, guess, 0, noise, swap_mode).vector()
            vec[g * len(part):(g + 1) * len(part)] = part / 2**k
        return (StageOutcome(OutcomeDistribution.from_vector(vec, tuple(range(problem.n))), problem.target),)
    return tuple(
        StageOutcome(_stage_distribution(cid, graph, problem, None, i, noise, swap_mode), target,
                     bench.rescale)
        for i, target in enumerate(bench.targets)
    )


def success_probability_exact(cid: "BenchmarkCircuitId | str", graph: CouplingGraph,
                              noise: NoiseModel | None = None, problem: SearchProblem | None = None,
                              r_mode: str = "rescale") -> float:
    """Product of the stage success probabilities."""
    return float(np.prod([s.success for s in benchmark_outcomes(cid, graph, noise, problem, r_mode)]))


@dataclass(frozen=True)
class MonteCarloResult:
    successes: int
    shots: int

    @property
    def estimate(self) -> float:
        return self.successes / self.shots

    @property
    def standard_error(self) -> float:
        p = self.estimate
        return float(np.sqrt(max(p * (1 - p), 1e-300) / self.shots))


def monte_carlo_search(cid: "BenchmarkCircuitId | str", graph: CouplingGraph, shots: int, seed: int,
                       noise: NoiseModel | None = None,
                       problem: SearchProblem | None = None) -> MonteCarloResult:
    """End-to-end sampling with classical feed-forward and no assumed knowledge of the target.

    R-circuits draw their guess uniformly; two-stage ids feed each sampled
    stage-1 outcome into a freshly built stage-2 circuit. A shot succeeds when
    the assembled n-bit string equals the target.
    """
    cid = BenchmarkCircuitId.parse(cid)
    problem = problem or SearchProblem.default()
    noise = noise or NoiseModel()
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    t = problem.target

    def draw(dist: OutcomeDistribution, count: int) -> dict[str, int]:
        keys = sorted(dist.probs)
        p = np.array([dist.probs[k] for k in keys])
        return dict(zip(keys, rng.multinomial(count, p / p.sum())))

    if cid.two_stage:
        bench = build_benchmark_circuit(cid, problem)
        block1 = bench.stages[0].measured
        rest = tuple(q for q in range(problem.n) if q not in block1)
        first = _stage_distribution(cid, graph, problem, None, 0, noise, "cnot")
        wins = 0
        for bits1, count in draw(first, shots).items():
            if not count:
                continue
            second = _stage_distribution(cid, graph, problem, bits1, 1, noise, "cnot")
            for bits2, c2 in draw(second, count).items():
                full = [""] * problem.n
                for q, b in zip(block1, bits1):
                    full[q] = b
                for q, b in zip(rest, bits2):
                    full[q] = b
                wins += c2 if "".join(full) == t else 0
        return MonteCarloResult(int(wins), shots)

    k = cid.guess_width
    guesses = rng.integers(0, 2**k, size=shots) if k else np.zeros(shots, dtype=int)
    wins = 0
    for g, count in zip(*np.unique(guesses, return_counts=True)):
        guess = format(int(g), f"0{k}b") if k else None
        dist = _stage_distribution(cid, graph, problem, guess, 0, noise, "cnot")
        for bits, c in draw(dist, int(count)).items():
            wins += c if (guess or "") + bits == t else 0
    return MonteCarloResult(int(wins), shots)


def ideal_distributions(cid: "BenchmarkCircuitId | str", graph: CouplingGraph,
                        problem: SearchProblem | None = None,
                        r_mode: str = "rescale") -> tuple[OutcomeDistribution, ...]:
    return tuple(s.distribution for s in benchmark_outcomes(cid, graph, NoiseModel(), problem, r_mode))


def stage_widths(outcomes: Sequence[StageOutcome]) -> tuple[int, ...]:
    return tuple(s.distribution.width for s in outcomes)
