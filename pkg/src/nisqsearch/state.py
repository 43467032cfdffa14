"""Exact statevector / density-matrix simulation substrate.

Bit ordering is fixed project-wide: qubit 0 is the most significant bit of a
basis index, so basis index ``b`` renders as ``format(b, f"0{n}b")`` with
qubit 0 leftmost.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_QUBITS = 14
UNITARY_TOL = 1e-10
PROBABILITY_FLOOR = 1e-24


def _check_qubits(qubits: Sequence[int], n: int) -> tuple[int, ...]:
    qubits = tuple(int(q) for q in qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit indices: {qubits}")
    for q in qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    return qubits


def apply_matrix(tensor: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Contract a ``2^k x 2^k`` matrix into the given axes of a rank-n ``[2]*n`` tensor.

    Extra trailing axes (batch dimensions) are left untouched. No validation.
    """
    k = len(qubits)
    op = matrix.reshape([2] * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, list(range(k)), list(qubits))


@dataclass(frozen=True)
class QuantumState:
    """Pure amplitudes (``data.ndim == 1``) or a density matrix (``data.ndim == 2``)."""

    n_qubits: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        dim = 2**self.n_qubits
        if self.data.shape not in ((dim,), (dim, dim)):
            raise ValueError(f"data shape {self.data.shape} does not match {self.n_qubits} qubits")

    @classmethod
    def zero(cls, n_qubits: int, density: bool = False) -> "QuantumState":
        return cls.basis("0" * n_qubits, density=density)

    @classmethod
    def basis(cls, bits: str, density: bool = False) -> "QuantumState":
        n = len(bits)
        psi = np.zeros(2**n, dtype=complex)
        psi[int(bits, 2)] = 1.0
        state = cls(n, psi)
        return state.to_density() if density else state

    @classmethod
    def uniform(cls, n_qubits: int, density: bool = False) -> "QuantumState":
        psi = np.full(2**n_qubits, 2 ** (-n_qubits / 2), dtype=complex)
        state = cls(n_qubits, psi)
        return state.to_density() if density else state

    @property
    def is_density(self) -> bool:
        return self.data.ndim == 2

    def to_density(self) -> "QuantumState":
        if self.is_density:
            return self
        return QuantumState(self.n_qubits, np.outer(self.data, self.data.conj()))

    def probabilities(self) -> np.ndarray:
        if self.is_density:
            return np.clip(np.real(np.diagonal(self.data)), 0.0, None)
        return np.abs(self.data) ** 2

    def check(self, tol: float = 1e-10) -> None:
        """Raise if the representation invariants are violated."""
        if self.is_density:
            rho = self.data
            if np.max(np.abs(rho - rho.conj().T)) > tol:
                raise ValueError("density matrix is not Hermitian")
            if abs(np.trace(rho).real - 1.0) > tol:
                raise ValueError("density matrix trace is not 1")
            if np.linalg.eigvalsh(rho).min() < -1e-9:
                raise ValueError("density matrix is not positive semidefinite")
        elif abs(np.vdot(self.data, self.data).real - 1.0) > tol:
            raise ValueError("state vector is not normalized")


@dataclass(frozen=True)
class NoiseModel:
    """Per-gate depolarizing rates. With ``ratio_locked`` the two-qubit rate is 10x eps1."""

    eps1: float = 0.0
    eps2: float | None = None
    ratio_locked: bool = True
    global_channel: bool = False

    def __post_init__(self) -> None:
        if self.ratio_locked:
            if self.eps2 is not None and not np.isclose(self.eps2, 10 * self.eps1):
                raise ValueError("eps2 must equal 10*eps1 when ratio_locked")
            object.__setattr__(self, "eps2", 10 * self.eps1)
        elif self.eps2 is None:
            raise ValueError("eps2 required when ratio is unlocked")
        for name in ("eps1", "eps2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")

    def rate(self, arity: int) -> float:
        return self.eps1 if arity == 1 else self.eps2

    @property
    def is_noiseless(self) -> bool:
        return self.eps1 == 0.0 and self.eps2 == 0.0


@dataclass(frozen=True)
class OutcomeDistribution:
    """Bitstring -> probability over an ordered subset of measured qubits."""

    probs: Mapping[str, float]
    qubits: tuple[int, ...] = ()
    shots: int | None = None

    def __post_init__(self) -> None:
        widths = {len(k) for k in self.probs}
        if len(widths) > 1:
            raise ValueError("bitstrings of mixed width")
        if self.qubits and widths and widths != {len(self.qubits)}:
            raise ValueError("bitstring width does not match measured qubits")
        total = sum(self.probs.values())
        if any(p < -1e-12 or p > 1 + 1e-12 for p in self.probs.values()) or abs(total - 1) > 1e-9:
            raise ValueError(f"not a probability distribution (sum={total})")

    @property
    def width(self) -> int:
        return len(next(iter(self.probs)))

    def __getitem__(self, bits: str) -> float:
        return self.probs.get(bits, 0.0)

    def vector(self) -> np.ndarray:
        """Dense probability vector indexed by integer value of the bitstring."""
        vec = np.zeros(2**self.width)
        for bits, p in self.probs.items():
            vec[int(bits, 2)] = p
        return vec

    @classmethod
    def from_vector(cls, vec: np.ndarray, qubits: Sequence[int] = (), shots: int | None = None,
                    drop_zeros: bool = True) -> "OutcomeDistribution":
        width = int(np.log2(len(vec)))
        probs = {
            format(i, f"0{width}b"): float(p)
            for i, p in enumerate(vec)
            if not (drop_zeros and p == 0.0)
        }
        return cls(probs, tuple(qubits), shots)

    @classmethod
    def uniform(cls, width: int) -> "OutcomeDistribution":
        return cls.from_vector(np.full(2**width, 2.0**-width))

    def to_json(self) -> str:
        payload: dict = dict(sorted(self.probs.items()))
        if self.shots is not None:
            payload["shots"] = self.shots
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "OutcomeDistribution":
        payload = json.loads(text)
        shots = payload.pop("shots", None)
        return cls({k: float(v) for k, v in payload.items()}, shots=shots)


def is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return bool(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))) < tol)


def apply_unitary(state: QuantumState, unitary: np.ndarray, qubits: Sequence[int],
                  validate: bool = True) -> QuantumState:
    n = state.n_qubits
    qubits = _check_qubits(qubits, n)
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (2 ** len(qubits),) * 2:
        raise ValueError(f"matrix shape {unitary.shape} does not act on {len(qubits)} qubits")
    if validate and not is_unitary(unitary):
        raise ValueError("matrix is not unitary")
    if state.is_density:
        t = state.data.reshape([2] * (2 * n))
        t = apply_matrix(t, unitary, qubits)
        t = apply_matrix(t, unitary.conj(), [n + q for q in qubits])
        return QuantumState(n, t.reshape(2**n, 2**n))
    t = apply_matrix(state.data.reshape([2] * n), unitary, qubits)
    return QuantumState(n, t.reshape(-1))


def _depolarize_tensor(t: np.ndarray, qubits: Sequence[int], n: int, eps: float) -> np.ndarray:
    k = len(qubits)
    src = list(qubits) + [n + q for q in qubits]
    moved = np.moveaxis(t, src, list(range(2 * k)))
    shape = moved.shape
    block = moved.reshape(2**k, 2**k, -1)
    reduced = np.trace(block, axis1=0, axis2=1)
    mixed = np.eye(2**k)[:, :, None] * (reduced[None, None, :] / 2**k)
    out = ((1 - eps) * block + eps * mixed).reshape(shape)
    return np.moveaxis(out, list(range(2 * k)), src)


def apply_depolarizing(state: QuantumState, qubits: Sequence[int], eps: float) -> QuantumState:
    """rho -> (1-eps) rho + eps * Tr_Q(rho) (x) I_Q / 2^k on the listed qubits Q."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"depolarizing rate {eps} outside [0, 1]")
    if not state.is_density:
        raise ValueError("exact depolarizing requires a density matrix; use stochastic_pauli")
    n = state.n_qubits
    qubits = _check_qubits(qubits, n)
    if eps == 0.0 or not qubits:
        return state
    t = _depolarize_tensor(state.data.reshape([2] * (2 * n)), qubits, n, eps)
    return QuantumState(n, t.reshape(2**n, 2**n))


_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def stochastic_pauli(state: QuantumState, qubits: Sequence[int], eps: float,
                     rng: np.random.Generator) -> QuantumState:
    """One trajectory of the depolarizing channel on a pure state.

    With probability eps a uniformly random Pauli string (identity included) is
    applied to the listed qubits, which averages to the exact channel.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"depolarizing rate {eps} outside [0, 1]")
    if state.is_density:
        raise ValueError("stochastic_pauli expects a pure state")
    qubits = _check_qubits(qubits, state.n_qubits)
    if eps == 0.0 or rng.random() >= eps:
        return state
    t = state.data.reshape([2] * state.n_qubits)
    for q in qubits:
        t = apply_matrix(t, _PAULIS[rng.integers(4)], [q])
    return QuantumState(state.n_qubits, t.reshape(-1))


def measure_distribution(state: QuantumState, qubits: Sequence[int]) -> OutcomeDistribution:
    """Exact marginal over ``qubits``; bitstring characters follow the given order."""
    if len(qubits) == 0:
        raise ValueError("measured subset is empty")
    n = state.n_qubits
    qubits = _check_qubits(qubits, n)
    probs = state.probabilities().reshape([2] * n)
    others = tuple(q for q in range(n) if q not in qubits)
    marginal = probs.sum(axis=others) if others else probs
    # axes of `marginal` are in ascending qubit order; reorder to the requested order
    order = sorted(qubits)
    marginal = np.transpose(marginal, [order.index(q) for q in qubits]).reshape(-1)
    # squared round-off of cancelled amplitudes, far below any physical probability here
    marginal = np.where(marginal < PROBABILITY_FLOOR, 0.0, marginal)
    marginal = marginal / marginal.sum()
    return OutcomeDistribution.from_vector(marginal, qubits)


def sample_counts(dist: OutcomeDistribution, shots: int, seed: int | np.random.Generator) -> OutcomeDistribution:
    """Multinomial estimate of ``dist`` from ``shots`` draws, normalized."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    keys = sorted(dist.probs)
    p = np.array([dist.probs[k] for k in keys], dtype=float)
    counts = rng.multinomial(shots, p / p.sum())
    probs = {k: c / shots for k, c in zip(keys, counts) if c}
    return OutcomeDistribution(probs, dist.qubits, shots)


def counts_of(dist: OutcomeDistribution) -> dict[str, int]:
    if dist.shots is None:
        raise ValueError("distribution carries no shot count")
    return {k: int(round(p * dist.shots)) for k, p in dist.probs.items()}


def batches(dist: OutcomeDistribution, n_batches: int, shots: int, seed: int) -> list[OutcomeDistribution]:
    """Independent sampled batches, e.g. the 3 x 400 shot protocol."""
    rng = np.random.default_rng(seed)
    return [sample_counts(dist, shots, rng) for _ in range(n_batches)]


def partial_trace_keep(state: QuantumState, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on ``keep`` (ascending order)."""
    keep = sorted(keep)
    n = state.n_qubits
    rho = state.to_density().data.reshape([2] * (2 * n))
    drop = [q for q in range(n) if q not in keep]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = [letters[q] for q in range(n)]
    cols = [letters[q] if q in drop else letters[n + q] for q in range(n)]
    out = "".join(letters[q] for q in keep) + "".join(letters[n + q] for q in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, rho)
    k = len(keep)
    return red.reshape(2**k, 2**k)
