import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from uqd.boolean_functions import BiasHypothesis
from uqd.cli import format_value, main
from uqd.discrimination import chernoff_information, exact_bayes_error
from uqd.ensemble import ensemble_brute_force


def run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_single_examples(tmp_path):
    code, out = run(["single", "--n-qubits", "2", "--m0", "0", "--m1", "2", "--trials", "10000"], tmp_path)
    row = read_rows(out)[0]
    assert code == 0
    assert float(row["theoretical_success"]) == 1.0 and float(row["empirical_success"]) == 1.0

    code, out = run(["single", "--n-qubits", "2", "--m0", "1", "--m1", "3", "--trials", "10000"], tmp_path)
    row = read_rows(out)[0]
    assert code == 0 and float(row["theoretical_success"]) == 0.5 and float(row["trace_distance"]) == 0.0

    code, out = run(["single", "--n-qubits", "2", "--m0", "0", "--m1", "1", "--trials", "100000"], tmp_path)
    row = read_rows(out)[0]
    assert code == 0 and float(row["theoretical_success"]) == 0.875
    assert row["within_ci"] == "true"


def test_multi_examples(tmp_path):
    code, out = run(["multi", "--n-qubits", "2", "--m0", "2", "--m1", "0", "--t", "5", "--trials", "100000"], tmp_path)
    row = read_rows(out)[0]
    assert code == 0
    assert float(row["exact_error"]) == 0.0 and float(row["empirical_error"]) == 0.0 and row["k_star"] == "1"

    code, out = run(["multi", "--n-qubits", "2", "--m0", "1", "--m1", "0", "--t", "1,3", "--trials", "100000"], tmp_path)
    rows = read_rows(out)
    assert code == 0 and [r["t"] for r in rows] == ["1", "3"]
    h0, h1 = BiasHypothesis(4, 1), BiasHypothesis(4, 0)
    assert float(rows[1]["exact_error"]) == exact_bayes_error(h0, h1, 3)
    assert float(rows[1]["exact_error"]) <= float(rows[1]["chernoff_bound"]) * (1 + 1e-12)

    code, out = run(["multi", "--n-qubits", "2", "--m0", "1", "--m1", "3", "--t", "4", "--trials", "100000"], tmp_path)
    row = read_rows(out)[0]
    assert code == 0 and row["degenerate"] == "true"
    assert abs(float(row["empirical_error"]) - 0.5) <= float(row["half_width_3sigma"])


def test_verify(tmp_path, capsys):
    code, out = run(["verify"], tmp_path)
    assert code == 0
    rows = read_rows(out)
    assert all(r["passed"] == "true" for r in rows)
    assert {"query_identity_n3", "closed_form_N16", "commutation_N16", "nonfactorization_N4_m1_t2"} <= {
        r["check"] for r in rows
    }
    code, _ = run(["verify", "--inject-fault"], tmp_path)
    assert code == 1
    assert "closed_form_N2" in capsys.readouterr().err
    code, out = run(["verify", "--max-n", "2"], tmp_path)
    assert code == 0
    assert max(int(r["check"].rsplit("N", 1)[-1]) for r in read_rows(out) if r["check"].startswith("closed_form")) == 4


def test_scan(tmp_path):
    code, out = run(["scan", "--delta", "0.05"], tmp_path)
    rows = {float(r["epsilon"]): r for r in read_rows(out)}
    assert code == 0
    assert int(rows[0.1]["t_needed"]) == 57
    assert int(rows[0.5]["t_needed"]) == 1
    assert 3.9 <= int(rows[0.01]["t_needed"]) / int(rows[0.02]["t_needed"]) <= 4.1
    assert all(float(r["exact_error"]) <= 0.05 for r in rows.values())


def test_chernoff_table(tmp_path):
    code, out = run(["chernoff", "--n-qubits", "2"], tmp_path)
    rows = read_rows(out)
    assert code == 0 and len(rows) == 25
    table = {(int(r["m0"]), int(r["m1"])): r for r in rows}
    for m in range(5):
        assert float(table[m, m]["xi"]) == 0.0
    # mu^2 pair (1/4, 1) is the continuity case with xi = log 4
    assert abs(float(table[1, 0]["xi"]) - math.log(4)) <= 1e-9 and table[1, 0]["boundary_case"] == "true"
    for (a, b), r in table.items():
        assert float(r["xi"]) == pytest.approx(float(table[b, a]["xi"]), abs=1e-10)


def test_ensemble_dump_csv_and_json(tmp_path):
    code, out = run(["ensemble", "--n-qubits", "3", "--m0", "3"], tmp_path)
    assert code == 0
    with open(out, newline="") as fh:
        cells = list(csv.reader(fh))
    parsed = np.array([[complex(*map(float, c.split(","))) for c in row] for row in cells])
    np.testing.assert_array_equal(parsed, ensemble_brute_force(8, 3))

    code, out = run(["ensemble", "--n-qubits", "3", "--m0", "3", "--closed", "--format", "json"], tmp_path, "e.json")
    payload = json.loads(out.read_text())
    assert payload["N"] == 8 and payload["source"] == "closed_form"
    mat = np.array([[complex(re, im) for re, im in row] for row in payload["matrix"]])
    np.testing.assert_allclose(mat, ensemble_brute_force(8, 3), atol=1e-12)


def test_collective_table(tmp_path):
    code, out = run(["collective", "--n-qubits", "2", "--m0", "0", "--m1", "1", "--t", "2"], tmp_path)
    rows = read_rows(out)
    assert code == 0 and [int(r["t"]) for r in rows] == [1, 2]
    assert float(rows[0]["collective_trace_distance"]) == pytest.approx(0.75, abs=1e-12)
    assert 0 < float(rows[1]["collective_trace_distance"]) <= 1


def test_json_mirrors_csv(tmp_path):
    argv = ["multi", "--n-qubits", "3", "--m0", "1", "--m1", "4", "--t", "2,6", "--trials", "5000"]
    _, csv_out = run(argv, tmp_path)
    _, json_out = run([*argv, "--format", "json"], tmp_path, "out.json")
    csv_rows = read_rows(csv_out)
    json_rows = json.loads(json_out.read_text())
    assert [list(r) for r in csv_rows] == [list(r) for r in json_rows]
    for c, j in zip(csv_rows, json_rows):
        for key, value in j.items():
            assert c[key] == format_value(value)


def test_csv_floats_round_trip(tmp_path):
    _, out = run(["chernoff", "--n-qubits", "3"], tmp_path)
    for r in read_rows(out):
        h0, h1 = BiasHypothesis(8, int(r["m0"])), BiasHypothesis(8, int(r["m1"]))
        xi = chernoff_information(h0.mu_sq, h1.mu_sq).xi
        assert float(r["xi"]) == xi
        assert format_value(float(r["xi"])) == r["xi"]
        assert float(r["mu_sq0"]) == h0.mu_sq


@pytest.mark.parametrize(
    "argv",
    [
        ["single", "--n-qubits", "2", "--m0", "0"],
        ["single", "--n-qubits", "2", "--m0", "0", "--m1", "9"],
        ["single", "--n-qubits", "2", "--m0", "0", "--m1", "1", "--trials", "0"],
        ["multi", "--n-qubits", "2", "--m0", "0", "--m1", "1", "--t", "x"],
        ["scan", "--epsilon", "0.7"],
        ["collective", "--n-qubits", "2", "--m0", "0", "--m1", "1", "--t", "7"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 2


def test_cap_env_override(monkeypatch):
    monkeypatch.setenv("UQD_MAX_N", "1")
    assert main(["single", "--n-qubits", "2", "--m0", "0", "--m1", "1"]) == 2


def test_stdout_when_no_out(capsys):
    assert main(["chernoff", "--n-qubits", "1"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 9


def test_module_entry_point(tmp_path):
    out = tmp_path / "v.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "uqd", "verify", "--max-n", "1", "--out", str(out)], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert "all" in proc.stderr and out.exists()
