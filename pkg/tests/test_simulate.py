import numpy as np
import pytest

from nisqsearch.gates import Circuit, Gate
from nisqsearch.search import (
    BenchmarkCircuitId,
    build_benchmark_circuit,
    ideal_success,
    stage1_distribution,
    stage2_distribution,
    two_stage_spec,
)
from nisqsearch.simulate import (
    benchmark_outcomes,
    circuit_distribution,
    compiled_stages,
    monte_carlo_search,
    run_circuit,
    success_probability_exact,
    trajectory_distribution,
)
from nisqsearch.state import NoiseModel


@pytest.mark.parametrize("cid", list(BenchmarkCircuitId))
@pytest.mark.parametrize("graph_name", ["full6", "lagos"])
def test_gate_level_matches_operator_level(request, cid, graph_name):
    graph = request.getfixturevalue(graph_name)
    assert success_probability_exact(cid, graph) == pytest.approx(ideal_success(cid), abs=1e-9)


@pytest.mark.parametrize("cid", [BenchmarkCircuitId.G2M2_G3M3, BenchmarkCircuitId.G3M3_G2M2])
def test_two_stage_distributions_match_operator_level(problem, lagos, cid):
    spec = two_stage_spec(cid)
    first, second = benchmark_outcomes(cid, lagos)
    assert np.max(np.abs(first.distribution.vector() - stage1_distribution(problem, spec))) < 1e-9
    bits1 = "".join(problem.target[q] for q in spec.measured_qubits)
    assert np.max(np.abs(second.distribution.vector() - stage2_distribution(problem, spec, bits1))) < 1e-9


def test_compiled_stages_respect_coupling(problem, lagos):
    for cid in BenchmarkCircuitId:
        for c in compiled_stages(cid, lagos, problem):
            assert all(g.arity == 1 or lagos.adjacent(*g.qubits) for g in c.gates)


def test_honest_mode_equals_rescale(full6):
    for cid in ("R2G3M3", "R3G2M2"):
        for eps in (0.0, 0.003):
            noise = NoiseModel(eps)
            a = success_probability_exact(cid, full6, noise, r_mode="rescale")
            b = success_probability_exact(cid, full6, noise, r_mode="honest")
            assert a == pytest.approx(b, abs=1e-12)
    (honest,) = benchmark_outcomes("R3G2M2", full6, r_mode="honest")
    assert honest.distribution.width == 5
    assert sum(honest.distribution.probs.values()) == pytest.approx(1)


def test_noise_lowers_success(full6):
    ideal = success_probability_exact("G5M5", full6)
    local = success_probability_exact("G5M5", full6, NoiseModel(0.005))
    glob = success_probability_exact("G5M5", full6, NoiseModel(0.005, global_channel=True))
    assert glob < local < ideal


def test_full_noise_gives_uniform(full6):
    (out,) = benchmark_outcomes("G5M5", full6, NoiseModel(0.1, 1.0, ratio_locked=False))
    assert np.allclose(out.distribution.vector(), 1 / 32, atol=1e-12)


def test_trajectories_converge_to_exact():
    c = Circuit(3, (Gate("H", (0,)), Gate("CNOT", (0, 1)), Gate("CNOT", (1, 2)), Gate("T", (2,)),
                    Gate("H", (2,))), measured=(0, 1, 2))
    noise = NoiseModel(0.02)
    exact = circuit_distribution(c, noise).vector()
    approx = trajectory_distribution(c, noise, 4000, seed=3).vector()
    assert np.max(np.abs(exact - approx)) < 0.02


def test_noisy_pure_state_needs_rng():
    c = Circuit(1, (Gate("H", (0,)),), measured=(0,))
    with pytest.raises(ValueError):
        run_circuit(c, NoiseModel(0.01), density=False)


def test_unmeasured_circuit_rejected():
    with pytest.raises(ValueError):
        circuit_distribution(Circuit(1, (Gate("H", (0,)),)))


def test_monte_carlo_feed_forward_is_unbiased(full6):
    res = monte_carlo_search("G2M2|G3M3", full6, 20000, seed=1)
    assert abs(res.estimate - ideal_success("G2M2|G3M3")) < 4 * res.standard_error
    r = monte_carlo_search("R3G2M2", full6, 8000, seed=2)
    assert abs(r.estimate - 0.125) < 4 * r.standard_error


def test_monte_carlo_is_seeded(full6):
    assert monte_carlo_search("G5M5", full6, 500, 9) == monte_carlo_search("G5M5", full6, 500, 9)


def test_unknown_r_mode(full6):
    with pytest.raises(ValueError):
        benchmark_outcomes("R2G3M3", full6, r_mode="guess")
