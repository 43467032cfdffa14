"""Oracles, global/local diffusion, schedules and the six five-qubit benchmark circuits.

Two evaluation routes exist side by side: an operator-level one that reflects
amplitudes directly (``schedule_success``, ``stage_probabilities``) and a
gate-level one that builds Clifford+T circuits (``build_benchmark_circuit``)
for transpilation and noisy simulation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gates import Circuit, Gate, build_mcx, build_mcx5, build_toffoli

DEFAULT_TARGET = "01011"


@dataclass(frozen=True)
class SearchProblem:
    n: int
    target: str

    def __post_init__(self) -> None:
        if not 1 <= self.n <= 12:
            raise ValueError(f"n must be in [1, 12], got {self.n}")
        if len(self.target) != self.n or set(self.target) - {"0", "1"}:
            raise ValueError(f"target {self.target!r} is not a {self.n}-bit string")

    @classmethod
    def default(cls) -> "SearchProblem":
        return cls(5, DEFAULT_TARGET)

    @property
    def size(self) -> int:
        return 2**self.n

    @property
    def index(self) -> int:
        return int(self.target, 2)


@dataclass(frozen=True)
class SearchSchedule:
    """Ordered Grover blocks ``((width, iterations), ...)`` sharing one local width ``m``.

    Local blocks diffuse ``block`` (default: the last ``m`` qubits).
    """

    n: int
    m: int
    blocks: tuple[tuple[int, int], ...]
    block: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.m <= self.n:
            raise ValueError(f"local width m={self.m} outside [1, {self.n}]")
        blocks = tuple((int(w), int(j)) for w, j in self.blocks)
        for w, j in blocks:
            if w not in (self.n, self.m):
                raise ValueError(f"block width {w} is neither n={self.n} nor m={self.m}")
            if j < 0:
                raise ValueError("iteration counts must be non-negative")
        object.__setattr__(self, "blocks", blocks)
        block = self.block if self.block is not None else tuple(range(self.n - self.m, self.n))
        if len(block) != self.m or len(set(block)) != self.m or any(not 0 <= q < self.n for q in block):
            raise ValueError(f"local block {block} is not {self.m} distinct qubits")
        object.__setattr__(self, "block", tuple(block))

    @classmethod
    def grover(cls, n: int, j: int) -> "SearchSchedule":
        return cls(n, n, ((n, j),))

    @property
    def q(self) -> int:
        return len(self.blocks)

    @property
    def oracle_calls(self) -> int:
        return sum(j for _, j in self.blocks)

    def canonical(self) -> "SearchSchedule":
        """Merge adjacent blocks of equal width and drop empty ones."""
        merged: list[list[int]] = []
        for w, j in self.blocks:
            if j == 0:
                continue
            if merged and merged[-1][0] == w:
                merged[-1][1] += j
            else:
                merged.append([w, j])
        return SearchSchedule(self.n, self.m, tuple(map(tuple, merged)), self.block)

    def notation(self, measured: int | None = None) -> str:
        """Render in G/M notation, e.g. ``G5G5M5``; blocks are listed left to right."""
        ops = "".join(f"G{w}" * j for w, j in self.blocks)
        return f"{ops}M{measured if measured is not None else self.n}"


@dataclass(frozen=True)
class TwoStageSpec:
    """Stage 1 finds a substring of the target, stage 2 searches the remainder.

    ``measure`` picks the stage-1 measured block: ``diffused`` (the local block)
    or ``undiffused`` (its complement). ``stage2`` is a schedule over the
    ``r`` remaining qubits, which keep their order from the full register.
    """

    stage1: SearchSchedule
    stage2: SearchSchedule
    measure: str = "diffused"

    def __post_init__(self) -> None:
        if self.measure not in ("diffused", "undiffused"):
            raise ValueError(f"measure must be 'diffused' or 'undiffused', got {self.measure!r}")
        if len(self.measured_qubits) + self.stage2.n != self.stage1.n:
            raise ValueError("measured widths of the two stages must sum to n")
        if not self.measured_qubits or self.stage2.n < 1:
            raise ValueError("both stages need at least one measured qubit")

    @property
    def n(self) -> int:
        return self.stage1.n

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        block = self.stage1.block
        if self.measure == "diffused":
            return block
        return tuple(q for q in range(self.n) if q not in block)

    @property
    def remaining_qubits(self) -> tuple[int, ...]:
        measured = set(self.measured_qubits)
        return tuple(q for q in range(self.n) if q not in measured)

    def notation(self) -> str:
        return f"{self.stage1.notation(len(self.measured_qubits))}|{self.stage2.notation()}"


class BenchmarkCircuitId(enum.Enum):
    G5M5 = "G5M5"
    G5G5M5 = "G5G5M5"
    R2G3M3 = "R2G3M3"
    R3G2M2 = "R3G2M2"
    G2M2_G3M3 = "G2M2|G3M3"
    G3M3_G2M2 = "G3M3|G2M2"

    @classmethod
    def parse(cls, name: "str | BenchmarkCircuitId") -> "BenchmarkCircuitId":
        if isinstance(name, cls):
            return name
        key = name.strip().upper().replace("_", "|").replace("∣", "|")
        for member in cls:
            if member.value == key:
                return member
        raise KeyError(f"unknown benchmark circuit {name!r}")

    @property
    def guess_width(self) -> int:
        return {"R2G3M3": 2, "R3G2M2": 3}.get(self.value, 0)

    @property
    def two_stage(self) -> bool:
        return "|" in self.value

    @property
    def oracle_calls(self) -> int:
        return 2 if self in (BenchmarkCircuitId.G5G5M5, BenchmarkCircuitId.G2M2_G3M3,
                             BenchmarkCircuitId.G3M3_G2M2) else 1


# -- closed forms ---------------------------------------------------------------

def grover_success_closed_form(n: int, j: int) -> float:
    if j < 0:
        raise ValueError("j must be non-negative")
    theta = math.asin(2 ** (-n / 2))
    return math.sin((2 * j + 1) * theta) ** 2


def hybrid_success_closed_form(n: int, m: int, j: int) -> float:
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    return grover_success_closed_form(m, j) / 2 ** (n - m)


# -- operator-level evaluation ------------------------------------------------------

def _reflect_block(psi: np.ndarray, n: int, block: Sequence[int]) -> np.ndarray:
    """(I - 2|s_m><s_m|) on ``block`` tensored with identity elsewhere."""
    t = psi.reshape([2] * n)
    mean = t.mean(axis=tuple(block), keepdims=True)
    return (t - 2 * mean).reshape(-1)


def apply_schedule(psi: np.ndarray, n: int, target_index: int, schedule: SearchSchedule,
                   block: Sequence[int] | None = None, full_block: Sequence[int] | None = None) -> np.ndarray:
    """Apply ``L`` to ``psi`` block by block (first listed block acts first).

    ``full_block`` is where width-``schedule.n`` diffusions act (default: all
    qubits); it lets a renormalized stage-2 schedule live inside a larger register.
    """
    block = tuple(block if block is not None else schedule.block)
    full_block = tuple(full_block if full_block is not None else range(n))
    psi = psi.copy()
    for w, j in schedule.blocks:
        where = full_block if w == schedule.n else block
        for _ in range(j):
            psi[target_index] = -psi[target_index]
            psi = _reflect_block(psi, n, where)
    return psi


def uniform_state(n: int) -> np.ndarray:
    return np.full(2**n, 2 ** (-n / 2), dtype=complex)


def schedule_success(problem: SearchProblem, schedule: SearchSchedule) -> float:
    """|<t| L |s_n>|^2 at operator level."""
    if schedule.n != problem.n:
        raise ValueError(f"schedule is for n={schedule.n}, problem has n={problem.n}")
    psi = apply_schedule(uniform_state(problem.n), problem.n, problem.index, schedule)
    return float(abs(psi[problem.index]) ** 2)


def _embed(schedule: SearchSchedule, qubits: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Map a schedule over ``len(qubits)`` qubits onto register positions ``qubits``."""
    return tuple(qubits), tuple(qubits[i] for i in schedule.block)


def stage_probabilities(problem: SearchProblem, spec: TwoStageSpec) -> tuple[float, float]:
    n = problem.n
    if spec.n != n:
        raise ValueError(f"two-stage spec is for n={spec.n}, problem has n={n}")
    t = problem.target
    psi = apply_schedule(uniform_state(n), n, problem.index, spec.stage1)
    probs = np.abs(psi.reshape([2] * n)) ** 2
    measured = spec.measured_qubits
    index = tuple(int(t[q]) if q in measured else slice(None) for q in range(n))
    p1 = float(probs[index].sum())
    p2 = float(abs(_stage2_state(problem, spec, t)[problem.index]) ** 2)
    return p1, p2


def _stage2_state(problem: SearchProblem, spec: TwoStageSpec, fixed_bits: str) -> np.ndarray:
    """Stage-2 output with the stage-1 block loaded from ``fixed_bits`` (full n-bit string)."""
    n = problem.n
    remaining = spec.remaining_qubits
    measured = spec.measured_qubits
    t = np.zeros([2] * n, dtype=complex)
    index = tuple(int(fixed_bits[q]) if q in measured else slice(None) for q in range(n))
    t[index] = 2 ** (-len(remaining) / 2)
    full_block, local_block = _embed(spec.stage2, remaining)
    return apply_schedule(t.reshape(-1), n, problem.index, spec.stage2, local_block, full_block)


def stage2_distribution(problem: SearchProblem, spec: TwoStageSpec, stage1_bits: str) -> np.ndarray:
    """Probabilities over the remaining qubits given a stage-1 outcome on the measured block."""
    n = problem.n
    fixed = ["0"] * n
    for q, b in zip(spec.measured_qubits, stage1_bits):
        fixed[q] = b
    psi = _stage2_state(problem, spec, "".join(fixed))
    probs = np.abs(psi.reshape([2] * n)) ** 2
    return probs.sum(axis=spec.measured_qubits).reshape(-1)


def stage1_distribution(problem: SearchProblem, spec: TwoStageSpec) -> np.ndarray:
    n = problem.n
    psi = apply_schedule(uniform_state(n), n, problem.index, spec.stage1)
    probs = np.abs(psi.reshape([2] * n)) ** 2
    return probs.sum(axis=spec.remaining_qubits).reshape(-1)


def two_stage_spec(cid: BenchmarkCircuitId, n: int = 5) -> TwoStageSpec:
    """Operator-level description of G2M2|G3M3 and G3M3|G2M2."""
    m = {BenchmarkCircuitId.G2M2_G3M3: 2, BenchmarkCircuitId.G3M3_G2M2: 3}[cid]
    stage1 = SearchSchedule(n, m, ((m, 1),))
    r = n - m
    stage2 = SearchSchedule(r, r, ((r, 1),))
    return TwoStageSpec(stage1, stage2, "diffused")


# -- gate level ---------------------------------------------------------------------

def _mcz(qubits: Sequence[int], ancillas: Sequence[int]) -> list[Gate]:
    """Lambda_{k-1}(Z) over ``qubits``; the last qubit carries the H conjugation.

    Role order for the five-qubit case: the first three qubits feed the
    ancilla, the fourth is the Toffoli's partner control, the fifth its target.
    """
    *controls, target = qubits
    if not controls:
        return [Gate("Z", (target,))]
    h = Gate("H", (target,))
    if len(controls) == 4 and ancillas:
        # rcccx roles are (a, b, c); c touches the ancilla first and last
        c, a, b, c4 = controls
        core = list(build_mcx5((a, b, c, c4), target, ancillas[0]).gates)
    elif len(controls) == 2:
        core = build_toffoli((controls[0], controls[1]), target)
    else:
        core = build_mcx(controls, target, ancillas)
    return [h] + core + [h]


def _role_order(block: Sequence[int], measured: Sequence[int]) -> list[int]:
    """Unmeasured qubits take the roles whose last gate comes earliest."""
    measured = set(measured)
    return sorted(block, key=lambda q: (q in measured, q))


def build_oracle(problem: SearchProblem, ancillas: Sequence[int] = (),
                 measured: Sequence[int] | None = None) -> Circuit:
    """O_t = I - 2|t><t| by X-conjugating the zero bits of t around Lambda_{n-1}(Z)."""
    n = problem.n
    if problem.n >= 5 and not ancillas:
        ancillas = tuple(range(n, n + 1 + max(0, n - 5)))
    measured = tuple(range(n)) if measured is None else tuple(measured)
    flips = [Gate("X", (q,)) for q, bit in enumerate(problem.target) if bit == "0"]
    core = _mcz(_role_order(range(n), measured), ancillas)
    width = max([n - 1, *ancillas]) + 1
    return Circuit(width, tuple(flips + core + flips), frozenset(ancillas))


def build_diffusion(n: int, m: int, block: Sequence[int], ancillas: Sequence[int] = (),
                    measured: Sequence[int] | None = None) -> Circuit:
    """D_m = H X Lambda_{m-1}(Z) X H on ``block``; equals I - 2|s_m><s_m| (x) I."""
    block = tuple(block)
    if len(block) != m or m > n:
        raise ValueError(f"block {block} does not have m={m} qubits (n={n})")
    if m >= 5 and not ancillas:
        ancillas = (n,)
    measured = tuple(range(n)) if measured is None else tuple(measured)
    ends = [Gate(k, (q,)) for k in ("H", "X") for q in block]
    core = _mcz(_role_order(block, measured), ancillas)
    width = max([n - 1, *ancillas]) + 1
    return Circuit(width, tuple(ends + core + ends[::-1]), frozenset(ancillas))


def _grover_gates(problem: SearchProblem, block: Sequence[int], ancillas, measured) -> list[Gate]:
    oracle = build_oracle(problem, ancillas, measured)
    diff = build_diffusion(problem.n, len(block), block, ancillas, measured)
    return list(oracle.gates) + list(diff.gates)


BENCHMARK_QUBITS = 6
ANCILLA = 5


@dataclass(frozen=True)
class BenchmarkCircuit:
    """Gate-level circuit(s) for one benchmark id.

    ``stages`` holds one circuit (or two for the two-stage ids); ``rescale``
    multiplies measured success for R-circuits in rescale mode; ``targets``
    gives each stage's expected measured bitstring.
    """

    cid: BenchmarkCircuitId
    stages: tuple[Circuit, ...]
    targets: tuple[str, ...]
    rescale: float = 1.0
    guess: str = ""
    notes: dict = field(default_factory=dict, compare=False)


def _prep_circuit(problem: SearchProblem, fixed: dict[int, str], search_qubits: Sequence[int],
                  grover_blocks: Sequence[Sequence[int]], measured: Sequence[int]) -> Circuit:
    gates: list[Gate] = [Gate("X", (q,)) for q, b in sorted(fixed.items()) if b == "1"]
    gates += [Gate("H", (q,)) for q in search_qubits]
    for block in grover_blocks:
        gates += _grover_gates(problem, block, (ANCILLA,), measured)
    return Circuit(BENCHMARK_QUBITS, tuple(gates), frozenset({ANCILLA}), tuple(measured))


def build_benchmark_circuit(cid: "BenchmarkCircuitId | str", problem: SearchProblem | None = None,
                            guess_bits: str | None = None) -> BenchmarkCircuit:
    """Gate-level realization of the six circuits on five data qubits plus ancilla 5.

    ``guess_bits`` sets the classically loaded bits: the R-prefix guess, or the
    stage-1 outcome fed into stage 2 of the two-stage ids. It defaults to the
    correct bits of the target.
    """
    cid = BenchmarkCircuitId.parse(cid)
    problem = problem or SearchProblem.default()
    if problem.n != 5:
        raise ValueError("benchmark circuits are defined for n = 5")
    t = problem.target
    data = tuple(range(5))
    C = BenchmarkCircuitId

    if cid in (C.G5M5, C.G5G5M5):
        reps = 1 if cid is C.G5M5 else 2
        circ = _prep_circuit(problem, {}, data, [data] * reps, data)
        return BenchmarkCircuit(cid, (circ,), (t,))

    if cid in (C.R2G3M3, C.R3G2M2):
        k = cid.guess_width
        guess = t[:k] if guess_bits is None else guess_bits
        if len(guess) != k or set(guess) - {"0", "1"}:
            raise ValueError(f"{cid.value} needs a {k}-bit guess, got {guess!r}")
        search = data[k:]
        circ = _prep_circuit(problem, dict(zip(data[:k], guess)), search, [search], search)
        return BenchmarkCircuit(cid, (circ,), (t[k:],), rescale=2.0**-k, guess=guess)

    spec = two_stage_spec(cid)
    block1 = spec.stage1.block
    stage1 = _prep_circuit(problem, {}, data, [block1], block1)
    rest = spec.remaining_qubits
    loaded = "".join(t[q] for q in block1) if guess_bits is None else guess_bits
    if len(loaded) != len(block1):
        raise ValueError(f"{cid.value} stage 2 needs {len(block1)} loaded bits, got {loaded!r}")
    stage2 = _prep_circuit(problem, dict(zip(block1, loaded)), rest, [rest], rest)
    targets = ("".join(t[q] for q in block1), "".join(t[q] for q in rest))
    return BenchmarkCircuit(cid, (stage1, stage2), targets, guess=loaded)


def ideal_success(cid: "BenchmarkCircuitId | str", problem: SearchProblem | None = None) -> float:
    """Operator-level success probability of a benchmark id (R-circuits after rescale)."""
    cid = BenchmarkCircuitId.parse(cid)
    problem = problem or SearchProblem.default()
    n = problem.n
    C = BenchmarkCircuitId
    if cid is C.G5M5:
        return schedule_success(problem, SearchSchedule.grover(n, 1))
    if cid is C.G5G5M5:
        return schedule_success(problem, SearchSchedule.grover(n, 2))
    if cid in (C.R2G3M3, C.R3G2M2):
        m = n - cid.guess_width
        return schedule_success(problem, SearchSchedule(n, m, ((m, 1),)))
    p1, p2 = stage_probabilities(problem, two_stage_spec(cid, n))
    return p1 * p2
