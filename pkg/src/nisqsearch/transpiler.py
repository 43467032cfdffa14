"""Coupling graphs, peephole passes, SWAP routing and hardware depth."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .gates import Circuit, Gate, circuit_depth, elide_tagged_pairs, u1q

LOOKAHEAD = 5


@dataclass(frozen=True)
class CouplingGraph:
    n_physical: int
    edges: tuple[tuple[int, int], ...]
    name: str = "custom"
    _dist: tuple[tuple[int, ...], ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        edges = tuple(sorted({tuple(sorted(map(int, e))) for e in self.edges}))
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            if not (0 <= a < self.n_physical and 0 <= b < self.n_physical):
                raise ValueError(f"edge ({a}, {b}) outside {self.n_physical} qubits")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_dist", self._all_pairs())

    def _all_pairs(self) -> tuple[tuple[int, ...], ...]:
        adj = self.adjacency
        inf = self.n_physical + 1
        rows = []
        for src in range(self.n_physical):
            dist = [inf] * self.n_physical
            dist[src] = 0
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if dist[v] == inf:
                        dist[v] = dist[u] + 1
                        queue.append(v)
            rows.append(tuple(dist))
        return tuple(rows)

    @property
    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {q: [] for q in range(self.n_physical)}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    @property
    def is_connected(self) -> bool:
        return all(d <= self.n_physical for d in self._dist[0])

    @property
    def is_full(self) -> bool:
        return len(self.edges) == self.n_physical * (self.n_physical - 1) // 2

    def distance(self, a: int, b: int) -> int:
        return self._dist[a][b]

    def adjacent(self, a: int, b: int) -> bool:
        return self._dist[a][b] == 1

    def degree(self, q: int) -> int:
        return len(self.adjacency[q])

    @classmethod
    def full(cls, n: int) -> "CouplingGraph":
        return cls(n, tuple(itertools.combinations(range(n), 2)), f"full{n}")

    @classmethod
    def line(cls, n: int) -> "CouplingGraph":
        return cls(n, tuple((i, i + 1) for i in range(n - 1)), f"line{n}")

    @classmethod
    def lagos_t(cls) -> "CouplingGraph":
        # centre 1 touches 0, 2, 3; the tail runs 3 - 4 - 5
        return cls(6, ((0, 1), (1, 2), (1, 3), (3, 4), (4, 5)), "lagos_t")

    @classmethod
    def from_json(cls, text: str) -> "CouplingGraph":
        payload = json.loads(text)
        if isinstance(payload, list):
            edges = [tuple(e) for e in payload]
            n = max(max(e) for e in edges) + 1
            return cls(n, tuple(edges))
        edges = [tuple(e) for e in payload["edges"]]
        n = payload.get("n_physical", max(max(e) for e in edges) + 1)
        return cls(n, tuple(edges), payload.get("name", "custom"))

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "n_physical": self.n_physical,
                           "edges": [list(e) for e in self.edges]})


def get_graph(name: str) -> CouplingGraph:
    """Resolve a preset name (full5, full6, line6, lagos_t, ...) or a JSON edge-list path."""
    key = name.lower()
    if key == "lagos_t":
        return CouplingGraph.lagos_t()
    for prefix, ctor in (("full", CouplingGraph.full), ("line", CouplingGraph.line)):
        if key.startswith(prefix) and key[len(prefix):].isdigit():
            return ctor(int(key[len(prefix):]))
    path = Path(name)
    if path.suffix == ".json" and path.exists():
        return CouplingGraph.from_json(path.read_text())
    raise KeyError(f"unknown coupling graph {name!r}")


# -- peephole passes ----------------------------------------------------------

def _is_identity_up_to_phase(m: np.ndarray, tol: float = 1e-10) -> bool:
    return abs(m[0, 1]) < tol and abs(m[1, 0]) < tol and abs(m[0, 0] - m[1, 1]) < tol


def fuse_single_qubit(gates: Sequence[Gate]) -> list[Gate]:
    """Merge runs of adjacent one-qubit gates into one ``U1q``; drop identities."""
    out: list[Gate] = []
    pending: dict[int, list[Gate]] = {}

    def flush(q: int) -> None:
        run = pending.pop(q, None)
        if not run:
            return
        if len(run) == 1:
            out.append(run[0])
            return
        m = np.eye(2, dtype=complex)
        for g in run:
            m = g.base @ m
        if not _is_identity_up_to_phase(m):
            out.append(u1q(m, q))

    for g in gates:
        if g.arity == 1:
            pending.setdefault(g.qubits[0], []).append(g)
            continue
        for q in g.qubits:
            flush(q)
        out.append(g)
    for q in sorted(pending):
        flush(q)
    return out


def cancel_two_qubit_pairs(gates: Sequence[Gate]) -> list[Gate]:
    """Remove back-to-back identical self-inverse two-qubit gates."""
    out: list[Gate | None] = []
    last: dict[int, int] = {}
    for g in gates:
        if g.kind in ("CNOT", "CZ", "SWAP"):
            idx = {last.get(q) for q in g.qubits}
            if len(idx) == 1:
                (j,) = idx
                prev = out[j] if j is not None else None
                same = prev is not None and prev.kind == g.kind and (
                    prev.qubits == g.qubits or (g.kind != "CNOT" and set(prev.qubits) == set(g.qubits)))
                if same:
                    out[j] = None
                    for q in g.qubits:
                        del last[q]
                    # the qubits now see whatever preceded the cancelled gate
                    for k in range(j - 1, -1, -1):
                        if out[k] is not None:
                            for q in out[k].qubits:
                                if q in g.qubits and q not in last:
                                    last[q] = k
                    continue
        out.append(g)
        for q in g.qubits:
            last[q] = len(out) - 1
    return [g for g in out if g is not None]


def optimize(gates: Sequence[Gate]) -> list[Gate]:
    """Fixed point of single-qubit fusion and two-qubit pair cancellation."""
    gates = list(gates)
    while True:
        new = fuse_single_qubit(cancel_two_qubit_pairs(gates))
        if new == gates:
            return new
        gates = new


def light_cone(circuit: Circuit) -> Circuit:
    """Drop trailing gates that cannot influence the measured qubits' statistics.

    Going backwards, a gate survives when it touches a qubit that is measured
    or touched by a surviving later gate. Removed gates commute to the end of
    the circuit on unmeasured qubits, so measured marginals (including under
    gate-local noise) are unchanged.
    """
    if not circuit.measured:
        return circuit
    live = set(circuit.measured)
    kept = []
    for g in reversed(circuit.gates):
        if live.intersection(g.qubits):
            kept.append(g)
            live.update(g.qubits)
    return circuit.with_gates(reversed(kept))


def expand_swaps(gates: Sequence[Gate]) -> list[Gate]:
    """SWAP -> three CNOTs, oriented to cancel against a neighbouring CNOT when possible."""
    out: list[Gate] = []
    last: dict[int, Gate] = {}
    for g in gates:
        if g.kind == "SWAP":
            a, b = g.qubits
            prev = last.get(a)
            if prev is not None and prev is last.get(b) and prev.kind == "CNOT" and prev.qubits == (b, a):
                a, b = b, a
            trio = [Gate("CNOT", (a, b)), Gate("CNOT", (b, a)), Gate("CNOT", (a, b))]
            out.extend(trio)
            for q in (a, b):
                last[q] = trio[-1]
            continue
        out.append(g)
        for q in g.qubits:
            last[q] = g
    return out


def compile_logical(circuit: Circuit, prune: bool = True) -> Circuit:
    """Placeholder-free, peephole-optimized logical circuit, optionally light-cone pruned."""
    gates = elide_tagged_pairs(circuit.gates)
    if any(g.kind in ("MCX", "MCU") for g in gates):
        raise ValueError("placeholder gates must be decomposed before compilation")
    out = circuit.with_gates(optimize(gates))
    return light_cone(out) if prune else out


# -- routing --------------------------------------------------------------------

QubitMap = tuple[int, ...]  # logical index -> physical index


@dataclass(frozen=True)
class RoutedCircuit:
    circuit: Circuit  # on physical qubits
    initial: QubitMap
    final: QubitMap
    swaps: int

    @property
    def depth(self) -> int:
        return circuit_depth(self.circuit)

    def report(self) -> dict:
        return {"swaps": self.swaps, "depth": self.depth, "initial_map": list(self.initial),
                "final_map": list(self.final), "cnot_count": self.circuit.cnot_count}


def _validate_map(initial: Sequence[int], n_logical: int, graph: CouplingGraph) -> QubitMap:
    initial = tuple(int(p) for p in initial)
    if len(initial) != n_logical:
        raise ValueError(f"map covers {len(initial)} qubits, circuit has {n_logical}")
    if len(set(initial)) != len(initial):
        raise ValueError("qubit map is not injective")
    if any(not 0 <= p < graph.n_physical for p in initial):
        raise ValueError("qubit map points outside the coupling graph")
    return initial


def route(circuit: Circuit, graph: CouplingGraph, initial: Sequence[int] | None = None,
          swap_mode: str = "cnot") -> RoutedCircuit:
    """Greedy lookahead SWAP insertion.

    When every ready two-qubit gate is blocked, the SWAP on an edge touching a
    blocked gate that minimises the summed distance of the next ``LOOKAHEAD``
    two-qubit gates is inserted (ties: lowest edge). ``swap_mode`` is ``cnot``
    (three CNOTs) or ``native`` (one SWAP gate).
    """
    if not graph.is_connected:
        raise ValueError("coupling graph is disconnected")
    n = circuit.n_qubits
    if n > graph.n_physical:
        raise ValueError(f"circuit needs {n} qubits, graph has {graph.n_physical}")
    initial = _validate_map(initial if initial is not None else range(n), n, graph)
    for g in circuit.gates:
        if g.arity > 2:
            raise ValueError(f"{g.kind} on {g.arity} qubits must be decomposed before routing")

    if graph.is_full:
        phys = circuit.with_gates(g.on(initial) for g in circuit.gates)
        phys = Circuit(graph.n_physical, phys.gates, frozenset(initial[a] for a in circuit.ancillas),
                       tuple(initial[q] for q in circuit.measured))
        if initial == tuple(range(n)) and graph.n_physical == n:
            phys = circuit
        return RoutedCircuit(phys, initial, initial, 0)

    l2p = list(initial)
    p2l = {p: l for l, p in enumerate(l2p)}
    queues: list[deque[int]] = [deque() for _ in range(n)]
    for i, g in enumerate(circuit.gates):
        for q in g.qubits:
            queues[q].append(i)
    done = [False] * len(circuit.gates)
    two_qubit_order = [i for i, g in enumerate(circuit.gates) if g.arity == 2]
    tq_ptr = 0
    out: list[Gate] = []
    swaps = 0
    gates = circuit.gates

    def ready(i: int) -> bool:
        return all(queues[q][0] == i for q in gates[i].qubits)

    def emit(i: int) -> None:
        g = gates[i]
        out.append(g.on(l2p))
        done[i] = True
        for q in g.qubits:
            queues[q].popleft()

    def do_swap(pa: int, pb: int) -> None:
        la, lb = p2l.get(pa), p2l.get(pb)
        if la is not None:
            l2p[la] = pb
        if lb is not None:
            l2p[lb] = pa
        p2l.pop(pa, None)
        p2l.pop(pb, None)
        if la is not None:
            p2l[pb] = la
        if lb is not None:
            p2l[pa] = lb
        out.append(Gate("SWAP", (pa, pb)))

    while True:
        progressed = True
        front: list[int] = []
        while progressed:
            progressed = False
            front = []
            heads = {queues[q][0] for q in range(n) if queues[q]}
            for i in sorted(heads):
                if not ready(i):
                    continue
                g = gates[i]
                if g.arity == 1 or graph.adjacent(l2p[g.qubits[0]], l2p[g.qubits[1]]):
                    emit(i)
                    progressed = True
                else:
                    front.append(i)
        if not front:
            break
        while tq_ptr < len(two_qubit_order) and done[two_qubit_order[tq_ptr]]:
            tq_ptr += 1
        upcoming = list(front)
        for i in two_qubit_order[tq_ptr:]:
            if len(upcoming) >= LOOKAHEAD:
                break
            if not done[i] and i not in upcoming:
                upcoming.append(i)

        def cost(mapping: list[int], which: Sequence[int]) -> int:
            return sum(graph.distance(mapping[gates[i].qubits[0]], mapping[gates[i].qubits[1]])
                       for i in which)

        front_now = cost(l2p, front)
        touched = {l2p[q] for i in front for q in gates[i].qubits}
        best = None
        for pa, pb in graph.edges:
            if pa not in touched and pb not in touched:
                continue
            trial = list(l2p)
            la, lb = p2l.get(pa), p2l.get(pb)
            if la is not None:
                trial[la] = pb
            if lb is not None:
                trial[lb] = pa
            # only swaps that bring the blocked layer closer: the front distance
            # then strictly decreases and routing terminates
            if cost(trial, front) >= front_now:
                continue
            score = cost(trial, upcoming)
            if best is None or score < best[0]:
                best = (score, pa, pb)
        if best is not None:
            do_swap(best[1], best[2])
            swaps += 1
            continue
        # no single swap helps the layer as a whole: walk one gate together
        a, b = (l2p[q] for q in gates[front[0]].qubits)
        while not graph.adjacent(a, b):
            step = next(v for v in graph.adjacency[a] if graph.distance(v, b) < graph.distance(a, b))
            do_swap(a, step)
            swaps += 1
            a = step

    if swap_mode == "cnot":
        out = expand_swaps(out)
    elif swap_mode != "native":
        raise ValueError(f"unknown swap mode {swap_mode!r}")
    final = tuple(l2p)
    phys = Circuit(graph.n_physical, tuple(out), frozenset(final[a] for a in circuit.ancillas),
                   tuple(final[q] for q in circuit.measured))
    return RoutedCircuit(phys, initial, final, swaps)


def permutation_matrix(mapping: Sequence[int], n: int) -> np.ndarray:
    """Unitary moving logical qubit q to physical position mapping[q]."""
    dim = 2**n
    perm = np.zeros((dim, dim))
    for idx in range(dim):
        bits = format(idx, f"0{n}b")
        out = ["0"] * n
        for q, p in enumerate(mapping):
            out[p] = bits[q]
        perm[int("".join(out), 2), idx] = 1
    return perm


def _finish(routed: RoutedCircuit, prune: bool = True) -> RoutedCircuit:
    phys = routed.circuit.with_gates(optimize(routed.circuit.gates))
    if prune:
        phys = light_cone(phys)
    return RoutedCircuit(phys, routed.initial, routed.final, routed.swaps)


def center_qubit(graph: CouplingGraph) -> int:
    degrees = [graph.degree(q) for q in range(graph.n_physical)]
    return degrees.index(max(degrees))


def default_map_lagos(circuit: Circuit, graph: CouplingGraph | None = None,
                      swap_mode: str = "cnot",
                      prune: bool = False) -> tuple[QubitMap, list[tuple[QubitMap, int, int]]]:
    """Ancilla on the degree-3 centre, remaining qubits by exhaustive trial routing.

    Returns the chosen map and every trial as ``(map, swaps, depth)``. The
    winner has the fewest SWAPs; ties go to the lowest map.
    """
    graph = graph or CouplingGraph.lagos_t()
    if circuit.n_qubits != 6 or len(circuit.ancillas) != 1:
        raise ValueError("default_map_lagos needs a 6-qubit circuit with one declared ancilla")
    anc = next(iter(circuit.ancillas))
    centre = center_qubit(graph)
    rest_logical = [q for q in range(6) if q != anc]
    rest_physical = [p for p in range(graph.n_physical) if p != centre]
    trials = []
    for perm in itertools.permutations(rest_physical, 5):
        mapping = [0] * 6
        mapping[anc] = centre
        for q, p in zip(rest_logical, perm):
            mapping[q] = p
        routed = _finish(route(circuit, graph, mapping, swap_mode), prune)
        trials.append((tuple(mapping), routed.swaps, routed.depth))
    best = min(trials, key=lambda t: (t[1], t[0]))
    return best[0], trials


# Depth conventions. ``compiled`` mirrors a hardware compiler: peephole
# optimization, every gate kept, one extra layer for the final measurement.
# ``estimated`` additionally drops gates outside the measured qubits' light
# cone, which is how all-to-all depths are estimated by hand.
CONVENTIONS = ("compiled", "estimated")


def default_convention(graph: CouplingGraph) -> str:
    return "estimated" if graph.is_full else "compiled"


def _check_convention(convention: str | None, graph: CouplingGraph) -> str:
    convention = convention or default_convention(graph)
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown depth convention {convention!r}")
    return convention


@lru_cache(maxsize=256)
def transpile(circuit: Circuit, graph: CouplingGraph, swap_mode: str = "cnot",
              initial: QubitMap | None = None, convention: str | None = None) -> RoutedCircuit:
    """Compile, place, route and re-optimize ``circuit`` for ``graph``."""
    prune = _check_convention(convention, graph) == "estimated"
    logical = compile_logical(circuit, prune)
    if initial is None:
        if graph.is_full or graph.n_physical != 6 or len(logical.ancillas) != 1 or logical.n_qubits != 6:
            initial = tuple(range(logical.n_qubits))
        else:
            initial, _ = default_map_lagos(logical, graph, swap_mode, prune)
    return _finish(route(logical, graph, initial, swap_mode), prune)


def measured_depth(circuit: Circuit) -> int:
    """Gate depth plus one layer when the circuit ends in measurement."""
    return circuit_depth(circuit) + (1 if circuit.measured else 0)


def hardware_depth(circuit: Circuit, graph: CouplingGraph, swap_mode: str = "cnot",
                   convention: str | None = None) -> int:
    return measured_depth(transpile(circuit, graph, swap_mode, None, convention).circuit)


def depth_after_optimize(gates: Iterable[Gate], n_qubits: int) -> int:
    return circuit_depth(Circuit(n_qubits, tuple(optimize(list(gates)))))


# Published depths of the six benchmark circuits with their accepted bands:
# absolute on all-to-all hardware, relative on the routed T-shaped device.
REFERENCE_DEPTHS: dict[str, dict[str, tuple[int, float, str]]] = {
    "full6": {"G5M5": (68, 4, "abs"), "G5G5M5": (134, 8, "abs"), "R2G3M3": (40, 3, "abs"),
              "R3G2M2": (25, 2, "abs"), "G2M2|G3M3": (65, 5, "abs"), "G3M3|G2M2": (69, 5, "abs")},
    "lagos_t": {name: (ref, 0.15, "rel") for name, ref in
                (("G5M5", 112), ("G5G5M5", 220), ("R2G3M3", 64), ("R3G2M2", 44),
                 ("G2M2|G3M3", 108), ("G3M3|G2M2", 108))},
}


def reference_band(graph_name: str, circuit_name: str) -> tuple[int, float, float] | None:
    """(reference, low, high) for a published depth, or None when there is none."""
    entry = REFERENCE_DEPTHS.get(graph_name, {}).get(circuit_name)
    if entry is None:
        return None
    ref, tol, kind = entry
    spread = tol if kind == "abs" else tol * ref
    return ref, ref - spread, ref + spread
