import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from etlasso.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARSE, exit_code, main
from etlasso.errors import RankDeficient

from oracles import orthonormal_design


def write_csv(path, X, y, names=None):
    names = names or [f"x{j + 1}" for j in range(X.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y"] + names)
        for row, target in zip(X, y):
            w.writerow([repr(float(target))] + [repr(float(v)) for v in row])
    return path


@pytest.fixture
def planted_csv(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((200, 20))
    y = 3 * X[:, 0] - 2 * X[:, 1]
    return write_csv(tmp_path / "planted.csv", X, y)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# --- select ------------------------------------------------------------------


def test_select_recovers_planted_model(planted_csv, capsys):
    code, out, _ = run(capsys, "select", planted_csv, "--response", "y", "--train-fraction", "0.7")
    assert code == 0
    report = json.loads(out)
    et = report["methods"]["etlasso"]
    assert et["selected"] == ["x1", "x2"]
    assert et["test_mse"] <= 1e-6
    assert et["coefficients"]["x1"] == pytest.approx(3.0, abs=1e-8)
    assert report["n_train"] == 140 and report["n_test"] == 60
    assert report["config"]["train_fraction"] == 0.7


def test_select_full_training_omits_test_mse(planted_csv, capsys):
    code, out, _ = run(capsys, "select", planted_csv, "--response", "y", "--methods", "etlasso,bic")
    assert code == 0
    report = json.loads(out)
    assert report["n_test"] == 0
    for entry in report["methods"].values():
        assert "test_mse" not in entry
        assert "train_mse" in entry


def test_select_constant_column_names_it(tmp_path, capsys):
    rng = np.random.default_rng(1)
    X = rng.standard_normal((30, 3))
    X[:, 2] = 4.0
    path = write_csv(tmp_path / "flat.csv", X, X[:, 0], ["a", "b", "flat"])
    code, _, err = run(capsys, "select", path, "--response", "y")
    assert code == EXIT_PARSE
    assert "flat" in err


def test_select_reports_bad_cell_position(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("y,a,b\n1,2,3\n4,oops,6\n")
    code, _, err = run(capsys, "select", path, "--response", "y")
    assert code == EXIT_PARSE
    assert "row 3" in err and "'a'" in err


def test_select_without_times_is_deterministic(planted_csv, tmp_path, capsys):
    outs = []
    for _ in range(2):
        code, _, _ = run(
            capsys, "select", planted_csv, "--response", "y", "--no-times",
            "--train-fraction", "0.5", "--out", tmp_path / "r.json",
        )
        assert code == 0
        outs.append((tmp_path / "r.json").read_bytes())
    assert outs[0] == outs[1]
    assert b"wall_time_s" not in outs[0]


def test_missing_response_is_config_error(planted_csv, capsys):
    code, _, _ = run(capsys, "select", planted_csv)
    assert code == EXIT_CONFIG
    code, _, _ = run(capsys, "select", planted_csv, "--response", "nope")
    assert code == EXIT_CONFIG


# --- path --------------------------------------------------------------------


def read_path(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    assert body[-1][0] == "Z"
    lam = np.array([float(r[0]) for r in body[:-1]])
    coefs = np.array([[float(v) for v in r[1:]] for r in body[:-1]])
    z = np.array([float(v) for v in body[-1][1:]])
    return header, lam, coefs, z


def test_path_export_is_self_consistent(planted_csv, tmp_path, capsys):
    out = tmp_path / "path.csv"
    code, _, _ = run(capsys, "path", planted_csv, "--response", "y", "--d", "30", "--out", out)
    assert code == 0
    header, lam, coefs, z = read_path(out)
    assert header == ["lambda"] + [f"beta_{j}" for j in range(1, 21)]
    assert lam.size == 30
    assert np.all(coefs[0] == 0.0)
    for j in range(20):
        active = np.flatnonzero(coefs[:, j] != 0)
        assert z[j] == (lam[active].max() if active.size else 0.0)


def test_path_orthonormal_ranking(tmp_path, capsys):
    rng = np.random.default_rng(3)
    X = orthonormal_design(100, 5, rng)
    y = X @ np.array([0.2, -1.5, 0.8, 0.05, 1.1]) + 0.1 * rng.standard_normal(100)
    out = tmp_path / "path.csv"
    code, _, _ = run(capsys, "path", write_csv(tmp_path / "o.csv", X, y), "--response", "y", "--out", out)
    assert code == 0
    *_, z = read_path(out)
    order = np.argsort(-np.abs(X.T @ y))
    assert np.all(np.diff(z[order]) <= 0)
    assert list(np.argsort(-z, kind="stable")) == list(order)


# --- simulate ----------------------------------------------------------------


SMALL = ["simulate", "--n", "60", "--p", "40", "--k", "3", "--reps", "2", "--d", "30"]


def test_simulate_json_report_schema(capsys):
    code, out, _ = run(capsys, *SMALL, "--seed", "7", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["schema_version"] == 1
    assert report["replications"] == 2
    assert report["config"]["sim"]["n"] == 60
    assert [r["method"] for r in report["rows"]] == ["etlasso", "bic", "cv"]
    keys = {"precision_mean", "precision_sd", "recall_mean", "recall_sd", "f1_mean", "f1_sd",
            "time_mean_s", "time_sd_s", "undefined_count"}
    assert keys <= set(report["rows"][0])


def test_simulate_prints_table(capsys):
    code, out, _ = run(capsys, *SMALL, "--methods", "etlasso,bic")
    assert code == 0
    assert "ET-Lasso" in out and "BIC" in out and "CV" not in out


def test_simulate_twice_is_byte_identical(tmp_path, capsys):
    # the output path is part of the echoed config, so both runs use the same one
    reports = []
    for _ in range(2):
        assert run(capsys, *SMALL, "--reps", "1", "--seed", "7", "--out", tmp_path / "r.json")[0] == 0
        reports.append((tmp_path / "r.json").read_bytes())
    assert reports[0] == reports[1]


def test_simulate_record_times(capsys):
    code, out, _ = run(capsys, *SMALL, "--methods", "etlasso", "--record-times", "--json")
    assert code == 0
    assert json.loads(out)["rows"][0]["time_mean_s"] > 0


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 50, "p": 30, "k": 2, "reps": 3, "methods": "etlasso", "d": 20}))
    code, out, _ = run(capsys, "simulate", "--config", cfg, "--reps", "1", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["replications"] == 1
    assert report["config"]["sim"]["n"] == 50
    assert report["config"]["grid"]["d"] == 20
    assert report["config"]["folds"] == 5


@pytest.mark.parametrize(
    "extra",
    [["--reps", "0"], ["--cov", "ar1:1.5"], ["--methods", "etlasso,knockoff"], ["--d", "1"], ["--k", "50"]],
)
def test_simulate_config_errors(extra, capsys):
    code, _, err = run(capsys, *SMALL, *extra)
    assert code == EXIT_CONFIG
    assert "error" in err


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"bogus": 1}')
    assert run(capsys, "simulate", "--config", cfg)[0] == EXIT_CONFIG
    cfg.write_text("not json")
    assert run(capsys, "simulate", "--config", cfg)[0] == EXIT_CONFIG


def test_jobs_environment_variable(monkeypatch, capsys):
    monkeypatch.setenv("ETLASSO_JOBS", "zero")
    assert run(capsys, *SMALL)[0] == EXIT_CONFIG


def test_numeric_failures_map_to_their_own_code():
    assert exit_code(RankDeficient([0, 1])) == EXIT_NUMERIC


def test_module_entry_point(planted_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "etlasso.cli", "select", str(planted_csv), "--response", "y", "--no-times"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["methods"]["etlasso"]["selected"] == ["x1", "x2"]
