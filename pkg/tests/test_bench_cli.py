from __future__ import annotations

import functools
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from fracshoot import bench
from fracshoot.bench import (
    ExperimentMatrix,
    SummaryRow,
    emit_figure_bundle,
    format_table,
    rows_from_csv,
    rows_to_csv,
    rows_to_json,
    run_cell,
    run_matrix,
    worker_count,
)
from fracshoot.cli import main
from fracshoot.errors import UnknownProblemError, ValidationError
from fracshoot.ivp import Trajectory

text = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\x00"), max_size=20)
num = st.floats(allow_nan=True, allow_infinity=False)


@settings(max_examples=60)
@given(st.sampled_from(["ex1", "ex2"]), st.sampled_from(["secting", "bisection"]),
       st.sampled_from(["adams", "bdf2"]), st.floats(1e-4, 1), st.floats(1e-12, 1e-2),
       st.sampled_from(bench.STRATEGIES), st.integers(0, 100), st.booleans(),
       num, num, num, num, num, text)
def test_property_summary_row_csv_round_trip(problem, method, solver, h, eps, strategy, shots,
                                            converged, max_err, wall, c_low, c_high, c_hat, msg):
    row = SummaryRow(problem, method, solver, h, eps, strategy, shots, converged,
                     max_err, wall, c_low, c_high, c_hat, msg)
    back = rows_from_csv(rows_to_csv([row]))
    assert len(back) == 1
    for name in SummaryRow.FIELDS:
        a, b = getattr(row, name), getattr(back[0], name)
        if isinstance(a, float) and math.isnan(a):
            assert math.isnan(b)
        else:
            assert a == b, name


def test_json_rows_use_null_for_missing_numbers():
    row = SummaryRow("ex1", "bisection", "adams", 0.001, 1e-6, "bisection", 20, True, 1e-6, 0.1)
    doc = json.loads(rows_to_json([row]))
    assert doc[0]["c_low"] is None and doc[0]["shots"] == 20


def test_matrix_validation_and_order():
    m = ExperimentMatrix("EX2", solvers=("bdf2",), eps=(1e-6, 1e-8), strategies=("unit", "auto"))
    assert m.problem == "ex2" and m.steps == (0.014, 0.007, 0.0035)
    cells = m.cells()
    assert len(cells) == 12 and cells[0] == ("bdf2", 0.014, 1e-6, "unit")
    assert cells[1][3] == "auto"
    with pytest.raises(UnknownProblemError):
        ExperimentMatrix("ex4")
    with pytest.raises(ValidationError):
        ExperimentMatrix("ex1", steps=(0.3,))
    with pytest.raises(ValidationError):
        ExperimentMatrix("ex1", strategies=())
    with pytest.raises(ValidationError):
        ExperimentMatrix("ex1", strategies=("newton",))
    with pytest.raises(ValidationError):
        ExperimentMatrix("ex1", repetitions=0)


def _one_shot_budget(monkeypatch):
    monkeypatch.setattr(bench, "ShootingConfig", functools.partial(bench.ShootingConfig, max_shots=1))


def test_run_cell_reports_non_convergence_in_row(monkeypatch):
    _one_shot_budget(monkeypatch)
    row = run_cell("ex2", None, "bdf2", 0.014, 1e-8, "unit", repetitions=1)
    assert not row.converged and row.shots == 1 and "no convergence" in row.message


def test_run_cell_row_values():
    ok = run_cell("ex2", None, "bdf2", 0.014, 1e-8, "auto", repetitions=1)
    assert ok.converged and ok.shots == 3 and ok.c_low == pytest.approx(0.2313, abs=1e-3)


def test_parallel_matrix_matches_serial():
    m = ExperimentMatrix("ex2", solvers=("bdf2",), steps=(0.014,), eps=(1e-8,), repetitions=1)
    serial = run_matrix(m, 1)
    parallel = run_matrix(m, 2)
    assert [(r.strategy, r.shots, r.max_error) for r in serial] == \
           [(r.strategy, r.shots, r.max_error) for r in parallel]
    table = format_table(serial)
    assert "bisection" in table.splitlines()[0] and "1e-08" in table


def test_worker_count(monkeypatch):
    monkeypatch.delenv(bench.WORKERS_ENV, raising=False)
    assert worker_count() == 1
    monkeypatch.setenv(bench.WORKERS_ENV, "3")
    assert worker_count() == 3
    monkeypatch.setenv(bench.WORKERS_ENV, "many")
    with pytest.raises(ValidationError):
        worker_count()


def test_figure_bundle(tmp_path):
    b = emit_figure_bundle("ex1", "auto", "adams", 0.002, 1e-6, tmp_path)
    manifest = json.loads(b.manifest.read_text())
    assert len(manifest["shots"]) == b.report.n_shots == len(b.files)
    first = Trajectory.from_csv(tmp_path / manifest["shots"][0]["file"])
    assert first.terminal == pytest.approx(manifest["shots"][0]["yb"])


# command line

def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_mlf(capsys):
    code, out, _ = run_cli(capsys, "mlf", "--alpha", "0.5", "--z", "0")
    assert code == 0 and out.strip() == "1"
    code, out, _ = run_cli(capsys, "mlf", "--alpha", "0.3", "--z", "-2.5", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and 0 < doc["value"] < 1 and doc["error_bound"] >= 0


def test_cli_solve(capsys, tmp_path):
    path = tmp_path / "y.csv"
    code, _, _ = run_cli(capsys, "solve", "--problem", "ex2", "--method", "bdf2",
                         "--step", "0.014", "--out", str(path))
    traj = Trajectory.from_csv(path)
    assert code == 0 and traj.mesh.N == 500 and traj.initial == 2.8
    code, out, _ = run_cli(capsys, "solve", "--problem", "ex1", "--step", "0.01",
                           "--y0", "0.1", "--format", "json")
    assert code == 0 and json.loads(out)["y"][0] == 0.1


def test_cli_shoot(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "shoot", "--problem", "ex1", "--step", "0.0005",
                           "--eps", "1e-6", "--strategy", "auto")
    row = rows_from_csv(out)[0]
    assert code == 0 and row.converged and row.shots == 5
    code, out, _ = run_cli(capsys, "shoot", "--problem", "ex2", "--method", "bdf2",
                           "--step", "0.014", "--format", "json", "--bundle", str(tmp_path / "b"))
    assert code == 0 and json.loads(out)["converged"]
    assert (tmp_path / "b" / "manifest.json").exists()


def test_cli_bench(capsys):
    code, out, _ = run_cli(capsys, "bench", "--problem", "ex2", "--method", "bdf2",
                           "--step", "0.014", "--eps", "1e-6", "--strategy", "unit",
                           "--strategy", "bisection", "--repeat", "1")
    rows = rows_from_csv(out)
    assert code == 0 and [r.strategy for r in rows] == ["unit", "bisection"]


@pytest.mark.parametrize("argv", [
    ["solve", "--problem", "ex9", "--step", "0.1"],
    ["solve", "--problem", "ex1", "--step", "0.3"],
    ["solve", "--problem", "ex1", "--step", "-1"],
    ["mlf", "--alpha", "1.5", "--z", "1"],
    ["bench", "--problem", "ex1", "--workers", "0"],
    [],
])
def test_cli_invalid_input_exit_code(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 1 and err


def test_cli_non_convergence_exit_code(capsys, monkeypatch):
    _one_shot_budget(monkeypatch)
    code, _, err = run_cli(capsys, "shoot", "--problem", "ex2", "--method", "bdf2",
                           "--step", "0.014", "--eps", "1e-8")
    assert code == 2 and "convergence" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracshoot", "mlf", "--alpha", "1", "--z", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(math.e, rel=1e-15)
