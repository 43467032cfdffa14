import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nisqsearch.gates import Circuit, equal_up_to_phase, unitary_of
from nisqsearch.search import (
    BenchmarkCircuitId,
    SearchProblem,
    SearchSchedule,
    TwoStageSpec,
    build_benchmark_circuit,
    build_diffusion,
    build_oracle,
    grover_success_closed_form,
    hybrid_success_closed_form,
    ideal_success,
    schedule_success,
    stage1_distribution,
    stage2_distribution,
    stage_probabilities,
    two_stage_spec,
    uniform_state,
)
from nisqsearch.gates import restrict_to_clean_ancillas


def data_unitary(circuit: Circuit, n: int) -> np.ndarray:
    u = unitary_of(circuit)
    return restrict_to_clean_ancillas(u, circuit.n_qubits, circuit.ancillas) if circuit.ancillas else u


def dense_reflection(n, block):
    """(I - 2|s_m><s_m|) on ``block`` (x) I, built from Kronecker products."""
    ops = []
    for q in range(n):
        ops.append(np.full((2, 2), 0.5) if q in block else np.eye(2))
    proj = ops[0]
    for op in ops[1:]:
        proj = np.kron(proj, op)
    return np.eye(2**n) - 2 * proj


def test_problem_validation():
    with pytest.raises(ValueError):
        SearchProblem(5, "0101")
    with pytest.raises(ValueError):
        SearchProblem(3, "01a")
    assert SearchProblem.default().index == 0b01011


def test_oracle_is_target_sign_flip(problem):
    u = data_unitary(build_oracle(problem), 5)
    expect = np.eye(32)
    expect[problem.index, problem.index] = -1
    assert equal_up_to_phase(u, expect) < 1e-10
    assert np.allclose(u @ u, np.eye(32) * (u[0, 0] ** 2), atol=1e-10)
    s = uniform_state(5)
    phase = u[0, 0]
    assert (np.vdot(s, u @ s) / phase).real == pytest.approx(15 / 16)


@pytest.mark.parametrize("n,target", [(2, "10"), (3, "110"), (4, "0001")])
def test_small_oracles(n, target):
    p = SearchProblem(n, target)
    u = data_unitary(build_oracle(p), n)
    expect = np.eye(2**n)
    expect[p.index, p.index] = -1
    assert equal_up_to_phase(u, expect) < 1e-10


def test_diffusion_sign_convention():
    u = unitary_of(build_diffusion(2, 2, (0, 1)))
    s = uniform_state(2)
    out = u @ s
    # D|s> = -|s> up to the circuit's global phase, fixed by D|11..> components
    ref = dense_reflection(2, (0, 1))
    assert equal_up_to_phase(u, ref) < 1e-10
    assert np.allclose(ref @ s, -s)
    assert abs(abs(np.vdot(s, out)) - 1) < 1e-10


def test_full_diffusion_matches_reflection():
    u = data_unitary(build_diffusion(5, 5, tuple(range(5))), 5)
    assert equal_up_to_phase(u, dense_reflection(5, range(5))) < 1e-10


def test_local_diffusion_commutes_with_other_qubits(rng):
    u = data_unitary(build_diffusion(5, 2, (3, 4)), 5)
    z = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    other = np.kron(z, np.eye(4))
    assert np.allclose(u @ other, other @ u, atol=1e-10)
    assert equal_up_to_phase(u @ u, np.eye(32)) < 1e-10


def test_closed_forms():
    assert grover_success_closed_form(2, 1) == pytest.approx(1.0, abs=1e-15)
    assert grover_success_closed_form(5, 0) == pytest.approx(1 / 32)
    assert grover_success_closed_form(5, 1) == pytest.approx(0.25830, abs=1e-5)
    # sin(5x) = 5s - 20s^3 + 16s^5 with s^2 = 1/32
    assert grover_success_closed_form(5, 2) == pytest.approx((5 - 20 / 32 + 16 / 1024) ** 2 / 32, abs=1e-15)
    assert hybrid_success_closed_form(5, 3, 1) == pytest.approx(25 / 128)
    assert hybrid_success_closed_form(5, 2, 1) == pytest.approx(1 / 8)
    assert hybrid_success_closed_form(4, 4, 2) == grover_success_closed_form(4, 2)


def test_grover_monotone_window():
    theta = math.asin(32**-0.5)
    js = [j for j in range(3) if (2 * j + 1) * theta < math.pi / 2]
    values = [grover_success_closed_form(5, j) for j in js]
    assert values == sorted(values) and len(set(values)) == len(values)


def test_hybrid_consistency_exhaustive():
    for n in range(1, 9):
        target = format(5 % 2**n, f"0{n}b")
        p = SearchProblem(n, target)
        for m in range(1, n + 1):
            for j in range(6):
                s = SearchSchedule(n, m, ((m, j),))
                assert schedule_success(p, s) == pytest.approx(hybrid_success_closed_form(n, m, j), abs=1e-12)


def test_schedule_examples(problem):
    assert schedule_success(problem, SearchSchedule.grover(5, 1)) == pytest.approx(grover_success_closed_form(5, 1))
    local = SearchSchedule(5, 3, ((3, 1),))
    assert schedule_success(problem, local) * 4 == pytest.approx(0.78125)
    assert schedule_success(problem, SearchSchedule(5, 2, ((5, 0), (2, 0)))) == pytest.approx(1 / 32)


def test_schedule_validation():
    with pytest.raises(ValueError):
        SearchSchedule(5, 6, ((5, 1),))
    with pytest.raises(ValueError):
        SearchSchedule(5, 3, ((4, 1),))
    with pytest.raises(ValueError):
        SearchSchedule(5, 3, ((3, -1),))


def test_canonical_merges_and_drops():
    s = SearchSchedule(5, 2, ((2, 1), (2, 2), (5, 0), (5, 1)))
    assert s.canonical().blocks == ((2, 3), (5, 1))


@pytest.mark.parametrize("cid,p1,p2", [
    (BenchmarkCircuitId.G2M2_G3M3, 11 / 32, 0.78125),
    (BenchmarkCircuitId.G3M3_G2M2, 37 / 128, 1.0),
])
def test_stage_probabilities(problem, cid, p1, p2):
    got = stage_probabilities(problem, two_stage_spec(cid))
    assert got == pytest.approx((p1, p2), abs=1e-12)


def test_stage_probabilities_against_dense_oracle(problem):
    """Independent evaluation with dense matrices and explicit projectors."""
    oracle = np.eye(32)
    oracle[problem.index, problem.index] = -1
    s = np.full(32, 32**-0.5)
    for m in (2, 3):
        block = tuple(range(5 - m, 5))
        psi = dense_reflection(5, block) @ oracle @ s
        probs = (np.abs(psi) ** 2).reshape([2] * 5)
        sel = tuple(int(problem.target[q]) if q in block else slice(None) for q in range(5))
        p1 = probs[sel].sum()
        r = 5 - m
        rest = tuple(range(r))
        phi = np.zeros([2] * 5)
        phi[tuple(slice(None) if q in rest else int(problem.target[q]) for q in range(5))] = 2 ** (-r / 2)
        phi = dense_reflection(5, rest) @ oracle @ phi.reshape(-1)
        p2 = abs(phi[problem.index]) ** 2
        cid = BenchmarkCircuitId.G2M2_G3M3 if m == 2 else BenchmarkCircuitId.G3M3_G2M2
        assert stage_probabilities(problem, two_stage_spec(cid)) == pytest.approx((p1, p2), abs=1e-12)


def test_degenerate_stage1(problem):
    spec = TwoStageSpec(SearchSchedule(5, 2, ((2, 0),)), SearchSchedule(3, 3, ((3, 1),)))
    assert stage_probabilities(problem, spec)[0] == pytest.approx(1 / 4)


def test_stage_distributions_normalized(problem):
    spec = two_stage_spec(BenchmarkCircuitId.G2M2_G3M3)
    assert stage1_distribution(problem, spec).sum() == pytest.approx(1)
    assert stage2_distribution(problem, spec, "11").sum() == pytest.approx(1)


def test_two_stage_spec_validation():
    with pytest.raises(ValueError):
        TwoStageSpec(SearchSchedule(5, 2, ((2, 1),)), SearchSchedule(2, 2, ((2, 1),)))
    with pytest.raises(ValueError):
        TwoStageSpec(SearchSchedule(5, 2, ((2, 1),)), SearchSchedule(3, 3, ((3, 1),)), "middle")


@given(st.sampled_from(["g5m5", "G5G5M5", "r2g3m3", "R3G2M2", "g2m2|g3m3", "G3M3_G2M2", "G2M2∣G3M3"]))
def test_id_parsing(name):
    assert BenchmarkCircuitId.parse(name) in BenchmarkCircuitId


def test_id_metadata():
    assert BenchmarkCircuitId.R2G3M3.guess_width == 2
    assert BenchmarkCircuitId.R3G2M2.guess_width == 3
    assert BenchmarkCircuitId.G2M2_G3M3.two_stage
    with pytest.raises(KeyError):
        BenchmarkCircuitId.parse("G4M4")


def test_benchmark_circuit_shapes(problem):
    for cid in BenchmarkCircuitId:
        bench = build_benchmark_circuit(cid, problem)
        assert len(bench.stages) == (2 if cid.two_stage else 1)
        for c, t in zip(bench.stages, bench.targets):
            assert len(c.measured) == len(t) and 5 in c.ancillas
    assert build_benchmark_circuit("R3G2M2").rescale == 0.125
    with pytest.raises(ValueError):
        build_benchmark_circuit("R2G3M3", guess_bits="011")
    with pytest.raises(ValueError):
        build_benchmark_circuit("G5M5", SearchProblem(4, "0101"))


def test_ideal_success_values():
    expected = {"G5M5": grover_success_closed_form(5, 1), "G5G5M5": grover_success_closed_form(5, 2),
                "R2G3M3": 25 / 128, "R3G2M2": 1 / 8, "G2M2|G3M3": 275 / 1024, "G3M3|G2M2": 37 / 128}
    for name, p in expected.items():
        assert ideal_success(name) == pytest.approx(p, abs=1e-12)


def test_any_target_works():
    for bits in itertools.islice(itertools.product("01", repeat=5), 0, 32, 5):
        p = SearchProblem(5, "".join(bits))
        assert ideal_success("G5M5", p) == pytest.approx(grover_success_closed_form(5, 1))
