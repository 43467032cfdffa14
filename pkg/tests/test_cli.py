import csv
import io
import json
import math

import pytest

from nisqsearch.cli import EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE, ConfigError, RunConfig, main, parse_grid
from nisqsearch.search import BenchmarkCircuitId


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_run_g5m5_ideal(capsys):
    code, out, _ = run_cli(capsys, "run", "--circuit", "G5M5", "--format", "json")
    assert code == EXIT_OK
    (rep,) = json.loads(out)
    assert rep["success_probability"]["mean"] == pytest.approx(0.2583007812, abs=1e-9)
    assert rep["fidelity"]["mean"] == 1.0
    assert rep["selectivity"]["mean"] > 0


def test_run_r3g2m2_infinite_selectivity(capsys):
    code, out, _ = run_cli(capsys, "run", "--circuit", "R3G2M2", "--rescale")
    (row,) = csv_rows(out)
    assert float(row["p_success"]) == pytest.approx(0.125)
    assert row["selectivity"] == "inf"


def test_run_fully_depolarized(capsys):
    code, out, _ = run_cli(capsys, "run", "--circuit", "G5M5", "--eps1", "1", "--eps2", "1", "--format", "json")
    (rep,) = json.loads(out)
    assert rep["success_probability"]["mean"] == pytest.approx(1 / 32, abs=1e-9)
    assert rep["fidelity"]["mean"] == pytest.approx(0.0, abs=1e-9)
    assert rep["selectivity"]["mean"] == pytest.approx(0.0, abs=1e-9)


def test_run_two_stage_lists_stages_and_combined(capsys):
    _, out, _ = run_cli(capsys, "run", "--circuit", "G2M2|G3M3")
    rows = csv_rows(out)
    assert [r["circuit"] for r in rows] == ["G2M2|G3M3[1]", "G2M2|G3M3[2]", "G2M2|G3M3"]
    assert float(rows[-1]["p_success"]) == pytest.approx(275 / 1024)
    assert int(rows[-1]["depth"]) == int(rows[0]["depth"]) + int(rows[1]["depth"])


def test_sampled_mode_reports_spread(capsys):
    _, out, _ = run_cli(capsys, "run", "--circuit", "G5M5", "--mode", "sampled", "--seed", "4",
                        "--eps1", "0.002", "--format", "json")
    (rep,) = json.loads(out)
    assert rep["batches"] == 3 and rep["shots"] == 400
    assert rep["success_probability"]["std"] > 0


def test_trajectory_mode_runs(capsys):
    code, out, _ = run_cli(capsys, "run", "--circuit", "R3G2M2", "--mode", "trajectory", "--seed", "1",
                           "--eps1", "0.002", "--shots", "40", "--batches", "2")
    assert code == EXIT_OK and csv_rows(out)[0]["shots"] == "40"


@pytest.mark.parametrize("argv", [
    ["run", "--circuit", "G9M9"],
    ["run", "--circuit", "G5M5", "--mode", "sampled"],
    ["run", "--circuit", "G5M5", "--eps1", "0.5"],
    ["run", "--circuit", "G5M5", "--target", "0101"],
    ["run", "--circuit", "G5M5", "--graph", "ring9"],
    ["sweep", "--circuit", "G5M5", "--grid", "0.02,0.01"],
    ["sweep", "--circuit", "G5M5", "--eps2", "0.1"],
    ["optimize", "--max-iterations", "0"],
    ["transpile-report", "--circuit", "G5M5", "--swap-mode", "teleport"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == EXIT_CONFIG and err.startswith("error:")


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig((BenchmarkCircuitId.R2G3M3,), mode="trajectory", seed=1, r_mode="honest")
    with pytest.raises(ConfigError):
        RunConfig((BenchmarkCircuitId.G5M5,), shots=0)


def test_sweep_monotone_and_graph_ordering(capsys):
    _, out, _ = run_cli(capsys, "sweep", "--circuit", "G5M5,R3G2M2", "--grid", "0:0.01:5")
    rows = csv_rows(out)
    assert len(rows) == 2 * 5 * 2
    assert rows[0]["classical_baseline"] == "0.0625"
    by = {(r["circuit"], float(r["eps1"]), r["graph"]): float(r["p_success"]) for r in rows}
    for cid in ("G5M5", "R3G2M2"):
        for graph in ("full6", "lagos_t"):
            values = [by[(cid, e, graph)] for e in parse_grid("0:0.01:5")]
            assert all(b <= a for a, b in zip(values, values[1:]))
        for e in parse_grid("0:0.01:5"):
            assert by[(cid, e, "full6")] >= by[(cid, e, "lagos_t")] - 1e-12


def test_sweep_baseline_override(capsys):
    _, out, _ = run_cli(capsys, "sweep", "--circuit", "G5M5", "--grid", "0", "--graphs", "full6",
                        "--classical-baseline", "0.2")
    assert csv_rows(out)[0]["classical_baseline"] == "0.2"


def test_transpile_report_full_graph_passes(capsys):
    code, out, _ = run_cli(capsys, "transpile-report", "--circuit", "R3G2M2")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["pass"] is True
    assert rep["band"] == [23, 27] and rep["swaps"] == 0


def test_transpile_report_out_of_band_exits_3(capsys, tmp_path):
    path = tmp_path / "rep.json"
    code, _, _ = run_cli(capsys, "transpile-report", "--circuit", "G5M5", "--graph", "lagos_t", "--out", str(path))
    rep = json.loads(path.read_text())
    assert (code == EXIT_TOLERANCE) == (rep["pass"] is False)
    assert rep["swaps"] > 0


def test_optimize_renders_r3g2m2(capsys):
    code, out, _ = run_cli(capsys, "optimize")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["schedule"] == "R3G2M2"
    assert rep["expected_depth"] == pytest.approx(200)


def test_optimize_two_qubits(capsys):
    _, out, _ = run_cli(capsys, "optimize", "--target", "10")
    assert json.loads(out)["schedule"] == "G2M2"


def test_optimize_two_stage(capsys):
    _, out, _ = run_cli(capsys, "optimize", "--two-stage")
    rep = json.loads(out)
    assert "|" in rep["schedule"] and len(rep["stage_probabilities"]) == 2
    assert rep["expected_depth"] == pytest.approx(rep["depth"] / rep["probability"], rel=1e-12)


def test_outputs_are_deterministic(capsys):
    argv = ["run", "--circuit", "R2G3M3,G3M3|G2M2", "--mode", "sampled", "--seed", "7",
            "--eps1", "0.003", "--graph", "lagos_t", "--format", "json"]
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert first == second
    assert not math.isnan(json.loads(first)[0]["success_probability"]["mean"])
