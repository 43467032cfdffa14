"""Circuit IR, gate matrices, depth, and the multi-controlled gate constructions."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .state import apply_matrix

MAX_UNITARY_QUBITS = 12

_S2 = 1 / np.sqrt(2)
_W = np.exp(1j * np.pi / 4)

FIXED_MATRICES: dict[str, np.ndarray] = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "T": np.array([[1, 0], [0, _W]], dtype=complex),
    "Tdg": np.array([[1, 0], [0, np.conj(_W)]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}

ONE_QUBIT = {"H", "X", "Y", "Z", "T", "Tdg", "S", "Sdg", "U1q"}
TWO_QUBIT = {"CNOT", "CZ", "SWAP"}
# MCX: placeholder multi-controlled X (controls..., target).
# MCU: multi-controlled 2x2 unitary with a control-state pattern; only emitted as
# the cancellation-tagged trailing gate of the relative-phase constructions.
PLACEHOLDERS = {"MCX", "MCU"}
KINDS = ONE_QUBIT | TWO_QUBIT | PLACEHOLDERS

_INVERSE_KIND = {"T": "Tdg", "Tdg": "T", "S": "Sdg", "Sdg": "S"}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    # U1q / MCU: row-major 2x2 entries
    matrix: tuple[complex, ...] | None = None
    # MCU only: one character per control, "1" = control on |1>, "0" = on |0>
    ctrl_state: str | None = None
    tag: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubits in {self.kind}{self.qubits}")
        arity = len(self.qubits)
        if self.kind in ONE_QUBIT and arity != 1:
            raise ValueError(f"{self.kind} acts on 1 qubit, got {arity}")
        if self.kind in TWO_QUBIT and arity != 2:
            raise ValueError(f"{self.kind} acts on 2 qubits, got {arity}")
        if self.kind in PLACEHOLDERS and arity < 2:
            raise ValueError(f"{self.kind} needs at least one control")
        if self.kind in ("U1q", "MCU"):
            if self.matrix is None or len(self.matrix) != 4:
                raise ValueError(f"{self.kind} requires a 2x2 matrix")
            object.__setattr__(self, "matrix", tuple(complex(z) for z in self.matrix))
        if self.kind == "MCU":
            state = self.ctrl_state if self.ctrl_state is not None else "1" * (arity - 1)
            if len(state) != arity - 1 or set(state) - {"0", "1"}:
                raise ValueError("ctrl_state must be a bitstring over the controls")
            object.__setattr__(self, "ctrl_state", state)

    @property
    def arity(self) -> int:
        return len(self.qubits)

    @property
    def base(self) -> np.ndarray:
        """The 2x2 (or fixed 4x4) matrix before control expansion."""
        if self.matrix is not None:
            return np.array(self.matrix, dtype=complex).reshape(2, 2)
        if self.kind == "MCX":
            return FIXED_MATRICES["X"]
        return FIXED_MATRICES[self.kind]

    def to_matrix(self) -> np.ndarray:
        """Dense matrix on ``self.qubits`` (controls first, target last)."""
        if self.kind not in PLACEHOLDERS:
            return self.base
        k = self.arity - 1
        state = self.ctrl_state if self.kind == "MCU" else "1" * k
        dim = 2**self.arity
        full = np.eye(dim, dtype=complex)
        row = int(state, 2) * 2
        full[row:row + 2, row:row + 2] = self.base
        return full

    def inverse(self) -> "Gate":
        if self.kind in _INVERSE_KIND:
            return replace(self, kind=_INVERSE_KIND[self.kind])
        if self.matrix is not None:
            inv = self.base.conj().T
            return replace(self, matrix=tuple(inv.reshape(-1)))
        return self

    def on(self, mapping: Sequence[int] | dict[int, int]) -> "Gate":
        return replace(self, qubits=tuple(mapping[q] for q in self.qubits))

    def to_record(self) -> dict:
        rec: dict = {"gate": self.kind, "qubits": list(self.qubits)}
        if self.matrix is not None:
            rec["matrix"] = [[z.real, z.imag] for z in self.matrix]
        if self.ctrl_state is not None:
            rec["ctrl_state"] = self.ctrl_state
        if self.tag is not None:
            rec["tag"] = self.tag
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Gate":
        matrix = rec.get("matrix")
        if matrix is not None:
            matrix = tuple(complex(re, im) for re, im in matrix)
        return cls(rec["gate"], tuple(rec["qubits"]), matrix, rec.get("ctrl_state"), rec.get("tag"))


def u1q(matrix: np.ndarray, qubit: int) -> Gate:
    return Gate("U1q", (qubit,), tuple(np.asarray(matrix, dtype=complex).reshape(-1)))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    ancillas: frozenset[int] = frozenset()
    # order defines the character order of measured bitstrings
    measured: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "ancillas", frozenset(self.ancillas))
        object.__setattr__(self, "measured", tuple(self.measured))
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise ValueError(f"{g.kind}{g.qubits} outside {self.n_qubits} qubits")
        if self.ancillas & set(self.measured):
            raise ValueError("ancilla qubits cannot be measured")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def count(self, *kinds: str) -> int:
        return sum(g.kind in kinds for g in self.gates)

    @property
    def cnot_count(self) -> int:
        return self.count("CNOT")

    @property
    def t_count(self) -> int:
        return self.count("T", "Tdg")

    @property
    def data_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n_qubits) if q not in self.ancillas)

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return replace(self, gates=tuple(gates))

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        return replace(self, gates=self.gates + tuple(gates))

    def inverse(self) -> "Circuit":
        return replace(self, gates=tuple(g.inverse() for g in reversed(self.gates)))

    def to_json(self) -> str:
        return json.dumps({
            "n_qubits": self.n_qubits,
            "ancillas": sorted(self.ancillas),
            "measured": list(self.measured),
            "gates": [g.to_record() for g in self.gates],
        })

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        payload = json.loads(text)
        return cls(
            payload["n_qubits"],
            tuple(Gate.from_record(r) for r in payload["gates"]),
            frozenset(payload.get("ancillas", ())),
            tuple(payload.get("measured", ())),
        )


def circuit_depth(circuit: Circuit) -> int:
    """ASAP layer count; every gate costs one layer, measurements are not gates."""
    level = [0] * circuit.n_qubits
    for g in circuit.gates:
        layer = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = layer
    return max(level, default=0)


def unitary_of(circuit: Circuit) -> np.ndarray:
    n = circuit.n_qubits
    if n > MAX_UNITARY_QUBITS:
        raise ValueError(f"unitary_of supports at most {MAX_UNITARY_QUBITS} qubits, got {n}")
    dim = 2**n
    t = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    for g in circuit.gates:
        t = apply_matrix(t, g.to_matrix(), g.qubits)
    return t.reshape(dim, dim)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray) -> float:
    """Max elementwise |u - e^{i phi} v| at the optimal global phase phi."""
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(u - phase * v)))


def mcx_matrix(n_controls: int) -> np.ndarray:
    """Exact Lambda_k(X) on k controls followed by the target."""
    return Gate("MCX", tuple(range(n_controls + 1))).to_matrix()


def _distinct(*qubits: int) -> None:
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"qubit indices must be distinct: {qubits}")


# -- Toffoli ---------------------------------------------------------------

def build_toffoli(controls: Sequence[int], target: int, connectivity: str = "full") -> list[Gate]:
    """Exact Toffoli from Clifford+T.

    ``full``: 6 CNOTs / 7 T-type gates, the second control ``b`` talks to the
    target first, so the gates before the first use of ``a`` can run early.
    ``linear``: 8 CNOTs / 7 T-type gates for the chain ``a - b - target``
    (nearest-neighbour CNOTs only).
    """
    a, b = controls
    c = target
    _distinct(a, b, c)
    G = Gate
    if connectivity == "full":
        return [
            G("H", (c,)), G("CNOT", (b, c)), G("Tdg", (c,)), G("CNOT", (a, c)),
            G("T", (c,)), G("CNOT", (b, c)), G("Tdg", (c,)), G("CNOT", (a, c)),
            G("T", (b,)), G("T", (c,)), G("H", (c,)),
            G("CNOT", (a, b)), G("T", (a,)), G("Tdg", (b,)), G("CNOT", (a, b)),
        ]
    if connectivity == "linear":
        return [G("H", (c,))] + [
            G(kind, tuple({"a": a, "b": b, "c": c}[s] for s in spec))
            for kind, spec in _LINEAR_CCZ
        ] + [G("H", (c,))]
    raise ValueError(f"unknown connectivity {connectivity!r}")


# CCZ on the chain a - b - c using only (a,b) and (b,c) CNOTs; found by the
# breadth-first phase-polynomial search in scripts/linear_toffoli_search.py.
_LINEAR_CCZ: tuple[tuple[str, str], ...] = (
    ("T", "a"),
    ("T", "b"),
    ("T", "c"),
    ("CNOT", "ab"),
    ("Tdg", "b"),
    ("CNOT", "bc"),
    ("T", "c"),
    ("CNOT", "ab"),
    ("CNOT", "bc"),
    ("Tdg", "c"),
    ("CNOT", "ab"),
    ("CNOT", "bc"),
    ("Tdg", "c"),
    ("CNOT", "ab"),
    ("CNOT", "bc"),
)


def build_ccz(controls: Sequence[int], target: int, connectivity: str = "full") -> list[Gate]:
    a, b = controls
    tof = build_toffoli(controls, target, connectivity)
    # H on the target at both ends of the Toffoli turns it into CCZ; drop them.
    assert tof[0].kind == "H" and tof[0].qubits == (target,)
    if connectivity == "full":
        # the closing H on the target is not the final gate in the full variant
        idx = max(i for i, g in enumerate(tof) if g.kind == "H" and g.qubits == (target,))
        return tof[1:idx] + tof[idx + 1:]
    return tof[1:-1]


# -- relative-phase constructions -------------------------------------------

_MINUS_I_Z = (-1j, 0, 0, 1j)


def build_relative_phase_ccx(controls: Sequence[int], target: int) -> list[Gate]:
    """Margolus-style Toffoli up to a relative phase (3 CNOTs, 4 T-type)."""
    a, b = controls
    _distinct(a, b, target)
    G = Gate
    c = target
    return [
        G("H", (c,)), G("T", (c,)), G("CNOT", (b, c)), G("Tdg", (c,)),
        G("CNOT", (a, c)), G("T", (c,)), G("CNOT", (b, c)), G("Tdg", (c,)), G("H", (c,)),
    ]


def build_relative_phase_ccc_y(controls: Sequence[int], target: int, dagger: bool = False,
                               tag: str | None = "rp") -> list[Gate]:
    """Three-control relative-phase Y with the trailing controlled -iZ correction.

    The 18-gate Clifford+T prefix acts as Y on the target up to phases on
    control patterns; the trailing ``MCU`` gate (controls a, b on |1>, c on |0>)
    removes the stray phase so that the whole list is exactly Lambda_3(iY), a
    real controlled bit flip. It is emitted with ``tag`` so that a
    Y / Y-dagger pair around a commuting middle section can elide both copies.
    """
    a, b, c = controls
    d = target
    _distinct(a, b, c, d)
    G = Gate
    prefix = [
        G("H", (d,)), G("T", (d,)), G("CNOT", (c, d)), G("Tdg", (d,)), G("H", (d,)),
        G("CNOT", (a, d)), G("T", (d,)), G("CNOT", (b, d)), G("Tdg", (d,)),
        G("CNOT", (a, d)), G("T", (d,)), G("CNOT", (b, d)), G("Tdg", (d,)),
        G("H", (d,)), G("T", (d,)), G("CNOT", (c, d)), G("Tdg", (d,)), G("H", (d,)),
    ]
    trailing = Gate("MCU", (a, b, c, d), _MINUS_I_Z, ctrl_state="110", tag=tag)
    gates = prefix + [trailing]
    if dagger:
        gates = [g.inverse() for g in reversed(gates)]
    return gates


def elide_tagged_pairs(gates: Sequence[Gate]) -> list[Gate]:
    """Drop matched pairs of tagged gates that are mutual inverses on the same qubits.

    Callers only tag gates whose intervening section commutes with them.
    """
    gates = list(gates)
    keep = [True] * len(gates)
    open_: dict[tuple, int] = {}
    for i, g in enumerate(gates):
        if g.tag is None:
            continue
        key = (g.tag, g.qubits)
        j = open_.get(key)
        if j is not None and np.allclose(gates[j].to_matrix() @ g.to_matrix(), np.eye(2**g.arity)):
            keep[i] = keep[j] = False
            del open_[key]
        else:
            open_[key] = i
    return [g for g, k in zip(gates, keep) if k]


def build_rcccx(controls: Sequence[int], target: int, dagger: bool = False) -> list[Gate]:
    """Lambda_3(X) up to relative phase: the Y-construction with its correction dropped."""
    return [g for g in build_relative_phase_ccc_y(controls, target, dagger) if g.kind != "MCU"]


def build_c3x(controls: Sequence[int], target: int) -> list[Gate]:
    """Exact ancilla-free Lambda_3(X): 14 CNOTs with +-pi/8 phase gates."""
    a, b, c = controls
    d = target
    _distinct(a, b, c, d)

    def p(sign: int, q: int) -> Gate:
        return u1q(np.diag([1, np.exp(sign * 1j * np.pi / 8)]), q)

    G = Gate
    cx = lambda x, y: G("CNOT", (x, y))  # noqa: E731
    return [
        G("H", (d,)), p(1, a), p(1, b), p(1, c), p(1, d),
        cx(a, b), p(-1, b), cx(a, b), cx(b, c), p(-1, c), cx(a, c), p(1, c), cx(b, c), p(-1, c), cx(a, c),
        cx(c, d), p(-1, d), cx(b, d), p(1, d), cx(c, d), p(-1, d), cx(a, d),
        p(1, d), cx(c, d), p(-1, d), cx(b, d), p(1, d), cx(c, d), p(-1, d), cx(a, d),
        G("H", (d,)),
    ]


def build_mcx5(controls: Sequence[int], target: int, ancilla: int,
               relative_phase: bool = True) -> Circuit:
    """Five-qubit Toffoli Lambda_4(X) with one clean ancilla.

    Three controls are folded into the ancilla with Lambda_3(Y), the ancilla and
    the fourth control drive a Toffoli onto the target, and Lambda_3(Y^dagger)
    restores the ancilla. The tagged controlled -iZ corrections cancel across
    the Toffoli (it only reads the ancilla in the computational basis).
    With ``relative_phase=False`` both outer blocks are exact ancilla-free
    Lambda_3(X) gates instead.
    """
    c1, c2, c3, c4 = controls
    _distinct(c1, c2, c3, c4, target, ancilla)
    if relative_phase:
        gates = (
            build_relative_phase_ccc_y((c1, c2, c3), ancilla)
            + build_toffoli((ancilla, c4), target)
            + build_relative_phase_ccc_y((c1, c2, c3), ancilla, dagger=True)
        )
        gates = elide_tagged_pairs(gates)
    else:
        gates = (
            build_c3x((c1, c2, c3), ancilla)
            + build_toffoli((ancilla, c4), target)
            + build_c3x((c1, c2, c3), ancilla)
        )
    n = max(c1, c2, c3, c4, target, ancilla) + 1
    return Circuit(n, tuple(gates), frozenset({ancilla}))


def build_mcx(controls: Sequence[int], target: int, ancillas: Sequence[int] = ()) -> list[Gate]:
    """Exact Lambda_k(X), recursing through clean ancillas for k > 4."""
    controls = list(controls)
    ancillas = list(ancillas)
    _distinct(*controls, target, *ancillas)
    k = len(controls)
    if k == 0:
        return [Gate("X", (target,))]
    if k == 1:
        return [Gate("CNOT", (controls[0], target))]
    if k == 2:
        return build_toffoli(controls, target)
    if k == 3:
        if ancillas:
            anc = ancillas[0]
            return (build_relative_phase_ccx(controls[:2], anc)
                    + build_toffoli((anc, controls[2]), target)
                    + [g.inverse() for g in reversed(build_relative_phase_ccx(controls[:2], anc))])
        return build_c3x(controls, target)
    if not ancillas:
        raise ValueError(f"Lambda_{k}(X) needs a clean ancilla")
    anc, rest = ancillas[0], ancillas[1:]
    if k == 4:
        return list(build_mcx5(controls, target, anc).gates)
    # fold the first three controls into the ancilla, then recurse
    head = build_rcccx(controls[:3], anc)
    return head + build_mcx([anc] + controls[3:], target, rest) + [g.inverse() for g in reversed(head)]


def clean_ancilla_violation(circuit: Circuit) -> float:
    """Largest amplitude leaking out of |0> on the ancillas over all data-basis inputs."""
    u = unitary_of(circuit)
    n = circuit.n_qubits
    anc = sorted(circuit.ancillas)
    worst = 0.0
    for col in range(2**n):
        bits = format(col, f"0{n}b")
        if any(bits[a] == "1" for a in anc):
            continue
        out = np.abs(u[:, col]) ** 2
        leak = sum(p for idx, p in enumerate(out) if any(format(idx, f"0{n}b")[a] == "1" for a in anc))
        worst = max(worst, leak)
    return float(worst)


def restrict_to_clean_ancillas(u: np.ndarray, n: int, ancillas: Iterable[int]) -> np.ndarray:
    """Block of ``u`` acting on data qubits with every ancilla in |0> on input and output."""
    anc = set(ancillas)
    idx = [i for i in range(2**n) if all(format(i, f"0{n}b")[a] == "0" for a in anc)]
    return u[np.ix_(idx, idx)]

