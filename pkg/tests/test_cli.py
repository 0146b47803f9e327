import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from birkhoff_hessian import cli
from birkhoff_hessian.birkhoff import build_operators
from birkhoff_hessian.grid import grid
from birkhoff_hessian.kkt import assemble, read_matrix_market, to_dense
from birkhoff_hessian.model import builtin_problem
from birkhoff_hessian.solver import SolverError, initial_guess


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    try:
        cfg = cli.parse_args(argv)
    except cli.ValidationError as exc:
        return cli.EXIT_INVALID, "", str(exc)
    return cli.run(cfg, out, err), out.getvalue(), err.getvalue()


def test_grid_json():
    code, out, _ = invoke(["grid", "--family", "lgl", "-N", "3", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    np.testing.assert_allclose(doc["nodes"], [-1, -0.4472135954999579, 0.4472135954999579, 1], atol=1e-15)
    assert doc["exact_degree"] == 5 and doc["max_quadrature_error"] <= 1e-14


def test_grid_csv_is_rfc4180():
    code, out, _ = invoke(["grid", "--family", "cgl", "-N", "2", "--format", "csv"])
    assert code == 0
    assert out.startswith("i,tau,w\r\n")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["w"]) for r in rows] == pytest.approx([1 / 3, 4 / 3, 1 / 3])


def test_solve_tp1():
    code, out, _ = invoke(["solve", "--problem", "tp1", "--family", "cgl", "-N", "16"])
    assert code == 0
    doc = json.loads(out)
    assert doc["converged"]
    assert abs(doc["extracted"]["xb"] - 0.1353352832366127) <= 1e-8
    assert doc["errors"]["state_err"] <= 1e-8


def test_solve_krylov_path():
    code, out, _ = invoke(["solve", "--problem", "tp2", "-N", "12", "--linear-path", "krylov", "--fast"])
    assert code == 0 and json.loads(out)["converged"]


def test_assemble_matrix_market(tmp_path):
    path = tmp_path / "A.mtx"
    code, out, _ = invoke(["assemble", "--problem", "tp1", "-N", "8", "--out", str(path)])
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate real general"
    size = next(line for line in lines[1:] if not line.startswith("%")).split()
    assert size[:2] == ["50", "50"]
    p = builtin_problem("tp1")
    g = grid("cgl", 8)
    ref = to_dense(assemble(initial_guess(p, g), p, build_operators(g)))
    np.testing.assert_array_equal(read_matrix_market(path), ref)
    assert json.loads(out)["n"] == 50


@pytest.mark.parametrize("matrix,shape", [("alt", [49, 49]), ("A0", [20, 50]), ("Adata", [30, 50])])
def test_assemble_variants(matrix, shape):
    code, out, _ = invoke(["assemble", "-N", "8", "--matrix", matrix])
    assert code == 0
    doc = json.loads(out)
    assert doc["shape"] == shape
    if matrix == "alt":
        assert doc["asymmetry_inf"] <= 1e-12


def test_output_dir_override(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = invoke(["grid", "-N", "4", "--out", "g.json"])
    assert code == 0 and out == ""
    assert json.loads((tmp_path / "g.json").read_text())["N"] == 4
    assert [p.name for p in tmp_path.iterdir()] == ["g.json"]


def test_spectrum_report():
    code, out, _ = invoke(["spectrum", "--problem", "tp1", "-N", "8"])
    assert code == 0
    doc = json.loads(out)
    assert doc["containment_row"] and doc["containment_col"]
    assert doc["count_in_minus2_4"] >= 38


def test_spectrum_sweep_csv():
    code, out, _ = invoke(["spectrum", "--problem", "tp2", "--sweep", "8,16", "--format", "csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["N"]) for r in rows] == [8, 16]


def test_memory():
    code, out, _ = invoke(["memory", "--nx", "6", "--nu", "3", "--nn", "1000000"])
    doc = json.loads(out)
    assert code == 0 and doc["bytes"] == 936_000_000 and doc["values"] == 117_000_000


def test_table1_csv():
    code, out, _ = invoke(["table1", "--format", "csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["n"]) for r in rows] == [1000, 10000, 100000, 1000000]
    assert float(rows[-1]["t_n3"]) == pytest.approx(1e6)


def test_basis_json():
    code, out, _ = invoke(["basis", "-N", "2"])
    doc = json.loads(out)
    assert code == 0 and doc["lemma1_residual"] == pytest.approx(1 / 9, abs=1e-12)


@pytest.mark.parametrize(
    "argv",
    [
        ["grid", "-N", "1"],
        ["grid", "--family", "radau"],
        ["solve", "--problem", "tp9"],
        ["assemble", "-N", "600"],
        ["spectrum", "-N", "200"],
        ["memory", "--nx", "0"],
        ["frobnicate"],
        ["grid", "--bogus"],
        ["bench", "--ladder", "a,b"],
    ],
)
def test_validation_errors_exit_1(argv):
    code, _, err = invoke(argv)
    assert code == cli.EXIT_INVALID
    assert err


def test_numerical_failure_exit_2(monkeypatch):
    def boom(*a, **k):
        raise SolverError("singular", iteration=3)

    monkeypatch.setattr(cli, "newton_solve", boom)
    code, _, err = invoke(["solve", "-N", "8"])
    assert code == cli.EXIT_NUMERICAL and "singular" in err


def test_main_exit_codes():
    assert cli.main(["grid", "-N", "1"]) == 1
    assert cli.main(["memory", "--nx", "1", "--nu", "1", "--nn", "1"]) == 0


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "birkhoff_hessian", "memory", "--nx", "1", "--nu", "1", "--nn", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["bytes"] == 40


def test_json_round_trip_all_reports():
    for argv in (["grid", "-N", "5"], ["solve", "-N", "8"], ["spectrum", "-N", "6"], ["table1"], ["memory"]):
        code, out, _ = invoke(argv)
        assert code == 0
        doc = json.loads(out)
        assert json.loads(json.dumps(doc)) == doc
        assert not any(isinstance(v, float) and math.isnan(v) for v in doc.values())
