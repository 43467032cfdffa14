import numpy as np
import pytest
from hypothesis import given, strategies as st

from nisqsearch.gates import Gate, unitary_of
from nisqsearch.state import (
    NoiseModel,
    OutcomeDistribution,
    QuantumState,
    apply_depolarizing,
    apply_unitary,
    batches,
    counts_of,
    is_unitary,
    measure_distribution,
    partial_trace_keep,
    sample_counts,
    stochastic_pauli,
)

from .strategies import circuits


def random_density(n, rng):
    z = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = z @ z.conj().T
    return QuantumState(n, rho / np.trace(rho))


def test_zero_basis_uniform():
    assert QuantumState.zero(2).data[0] == 1
    assert QuantumState.basis("10").probabilities()[2] == pytest.approx(1)
    assert np.allclose(QuantumState.uniform(3).probabilities(), 1 / 8)
    assert QuantumState.uniform(2, density=True).is_density


def test_invalid_states_rejected():
    with pytest.raises(ValueError):
        QuantumState(2, np.ones(4)).check()
    with pytest.raises(ValueError):
        apply_unitary(QuantumState.zero(1), np.ones((2, 2)), [0])


def test_measure_order_follows_request():
    psi = QuantumState.basis("110")
    assert measure_distribution(psi, [0, 2])["10"] == 1.0
    assert measure_distribution(psi, [2, 0])["01"] == 1.0


@given(circuits(3, 20))
def test_pure_and_density_paths_agree(circuit):
    pure = QuantumState.zero(3)
    dens = QuantumState.zero(3, density=True)
    for g in circuit.gates:
        pure = apply_unitary(pure, g.to_matrix(), g.qubits)
        dens = apply_unitary(dens, g.to_matrix(), g.qubits)
    assert np.max(np.abs(np.outer(pure.data, pure.data.conj()) - dens.data)) < 1e-9
    u = unitary_of(circuit)
    assert np.max(np.abs(u[:, 0] - pure.data)) < 1e-9


def test_depolarizing_full_rate_gives_maximally_mixed_subsystem(rng):
    rho = random_density(3, rng)
    out = apply_depolarizing(rho, [1], 1.0)
    assert np.allclose(partial_trace_keep(out, [1]), np.eye(2) / 2)
    assert np.allclose(partial_trace_keep(out, [0, 2]), partial_trace_keep(rho, [0, 2]))


@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from([(0,), (1, 2), (0, 1, 2)]))
def test_depolarizing_composition_law(a, b, qubits):
    rho = random_density(3, np.random.default_rng(7))
    two = apply_depolarizing(apply_depolarizing(rho, qubits, a), qubits, b)
    one = apply_depolarizing(rho, qubits, 1 - (1 - a) * (1 - b))
    assert np.max(np.abs(two.data - one.data)) < 1e-10


def test_depolarizing_preserves_trace_and_positivity(rng):
    rho = apply_depolarizing(random_density(3, rng), [0, 2], 0.3)
    rho.check()


def test_depolarizing_requires_density():
    with pytest.raises(ValueError):
        apply_depolarizing(QuantumState.zero(2), [0], 0.1)
    with pytest.raises(ValueError):
        apply_depolarizing(QuantumState.zero(2, density=True), [0], 1.5)


def test_stochastic_pauli_averages_to_channel():
    rng = np.random.default_rng(0)
    psi = apply_unitary(QuantumState.zero(2), Gate("H", (0,)).to_matrix(), [0])
    psi = apply_unitary(psi, Gate("CNOT", (0, 1)).to_matrix(), [0, 1])
    exact = apply_depolarizing(psi.to_density(), [0, 1], 0.4).data
    acc = np.zeros((4, 4), dtype=complex)
    trials = 20000
    for _ in range(trials):
        d = stochastic_pauli(psi, [0, 1], 0.4, rng).data
        acc += np.outer(d, d.conj())
    assert np.max(np.abs(acc / trials - exact)) < 0.02


def test_noise_model_ratio_lock():
    m = NoiseModel(0.01)
    assert m.rate(1) == 0.01 and m.rate(2) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        NoiseModel(0.01, 0.05)
    with pytest.raises(ValueError):
        NoiseModel(0.2)  # 10x would exceed 1
    free = NoiseModel(0.01, 0.05, ratio_locked=False)
    assert free.rate(2) == 0.05
    assert NoiseModel().is_noiseless


def test_outcome_distribution_roundtrip_and_validation():
    d = OutcomeDistribution({"00": 0.25, "11": 0.75}, shots=400)
    back = OutcomeDistribution.from_json(d.to_json())
    assert back.probs == d.probs and back.shots == 400
    assert counts_of(d) == {"00": 100, "11": 300}
    with pytest.raises(ValueError):
        OutcomeDistribution({"0": 0.5, "11": 0.5})
    with pytest.raises(ValueError):
        OutcomeDistribution({"0": 0.5, "1": 0.6})


def test_sampling_is_seeded():
    d = OutcomeDistribution.uniform(3)
    assert sample_counts(d, 400, 5).probs == sample_counts(d, 400, 5).probs
    bs = batches(d, 3, 400, 11)
    assert len(bs) == 3 and all(b.shots == 400 for b in bs)
    assert bs[0].probs != bs[1].probs


def test_is_unitary():
    assert is_unitary(Gate("H", (0,)).to_matrix())
    assert not is_unitary(np.array([[1, 1], [0, 1]]))
