import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from ssnal_en.cli import main, read_solution


def run(*argv):
    return main([str(a) for a in argv])


def records(out):
    return [json.loads(line) for line in (out / "runs.jsonl").read_text().splitlines()]


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    assert run("gen", "--m", 50, "--n", 2000, "--n0", 10, "--seed", 3, "--out", out) == 0
    return out


def test_gen_tiny_and_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("gen", "--m", 5, "--n", 3, "--n0", 1, "--seed", 7, "--write-csv", "--out", out) == 0
    printed = capsys.readouterr().out
    assert "realized snr" in printed and "rho_hat" in printed
    for name in ("A.npy", "b.npy", "truth.txt", "dataset.json", "A.csv", "b.csv"):
        assert digest(a / name) == digest(b / name)
    A = np.load(a / "A.npy")
    assert A.shape == (5, 3) and A.flags.f_contiguous
    np.testing.assert_array_equal(np.loadtxt(a / "A.csv", delimiter=","), A)


def test_gen_preset_provenance(tmp_path):
    assert run("gen", "--preset", "sim1", "--n", "1e3", "--seed", 7, "--out", tmp_path) == 0
    meta = json.loads((tmp_path / "dataset.json").read_text())
    assert meta["provenance"]["m"] == 500 and meta["provenance"]["n0"] == 100
    assert meta["provenance"]["preset"] == "sim1"
    assert len((tmp_path / "truth.txt").read_text().splitlines()) == 100


def test_gen_invalid_spec(tmp_path, capsys):
    assert run("gen", "--m", 5, "--n", 3, "--n0", 9, "--out", tmp_path) == 1
    assert "n0" in capsys.readouterr().err


def test_solve_with_oracle_check(dataset, tmp_path, capsys):
    out = tmp_path / "s"
    assert run("solve", "--data", dataset, "--alpha", 0.8, "--clambda", 0.3, "--oracle-check", "--out", out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["oracle"]["relative_gap"] <= 1e-6
    assert summary["outer_iters"] >= 1 and summary["converged"]
    sol = read_solution(out / "solution.txt")
    assert len(sol) == summary["r"]
    assert min(sol) >= 1 and max(sol) <= 2000
    line = (out / "solution.txt").read_text().splitlines()[0]
    assert float(line.split()[1]) == sol[int(line.split()[0])]
    rec = records(out)
    assert len(rec) == 1 and rec[0]["command"] == "solve" and rec[0]["exit_code"] == 0


def test_solve_lambda_max_is_empty(dataset, tmp_path):
    assert run("solve", "--data", dataset, "--alpha", 1, "--clambda", 1, "--out", tmp_path) == 0
    assert (tmp_path / "solution.txt").read_text() == ""


def test_solve_nonconvergence_exit_code(dataset, tmp_path):
    code = run("solve", "--data", dataset, "--alpha", 0.5, "--clambda", 0.1, "--max-iter", 1, "--out", tmp_path)
    assert code == 2
    assert not json.loads((tmp_path / "summary.json").read_text())["converged"]


def test_usage_errors(dataset, tmp_path):
    assert run("solve", "--data", dataset, "--out", tmp_path) == 1
    assert run("solve", "--data", dataset, "--lambda1", 1, "--out", tmp_path) == 1
    assert run("bogus") == 1
    assert run("solve", "--data", tmp_path / "missing", "--alpha", 0.5, "--clambda", 0.5, "--out", tmp_path) == 1


def test_config_file_precedence(dataset, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nalpha = 0.7\nclambda = 0.4\nmax-iter = 1\n")
    assert run("solve", "--data", dataset, "--config", cfg, "--max-iter", 50, "--out", tmp_path / "a") == 0
    snap = records(tmp_path / "a")[0]["config"]
    assert snap["alpha"] == 0.7 and snap["clambda"] == 0.4 and snap["max_iter"] == 50
    assert run("solve", "--data", dataset, "--config", cfg, "--out", tmp_path / "b") == 2
    cfg.write_text("nonsense = 1\n")
    assert run("solve", "--data", dataset, "--config", cfg, "--out", tmp_path / "c") == 1


def test_run_from_record_reproduces_outputs(dataset, tmp_path):
    out = tmp_path / "first"
    assert run("solve", "--data", dataset, "--alpha", 0.6, "--clambda", 0.2, "--out", out) == 0
    argv = records(out)[0]["argv"]
    argv[argv.index("--out") + 1] = str(tmp_path / "second")
    assert main(argv) == 0
    assert digest(out / "solution.txt") == digest(tmp_path / "second" / "solution.txt")


def test_path_warm_vs_cold_and_single_point(dataset, tmp_path):
    for mode in ("warm", "cold"):
        extra = ["--cold"] if mode == "cold" else []
        assert run("path", "--data", dataset, "--alpha-list", 0.8, "--n-lambda", 12, "--c-min", 0.2,
                   "--out", tmp_path / mode, *extra) == 0
    rows = {m: list(csv.DictReader(open(tmp_path / m / "path.csv"))) for m in ("warm", "cold")}
    assert len(rows["warm"]) == 12
    for a, b in zip(rows["warm"], rows["cold"]):
        assert abs(float(a["objective"]) - float(b["objective"])) <= 1e-6 * abs(float(b["objective"]))

    assert run("path", "--data", dataset, "--alpha-list", 0.8, "--n-lambda", 1, "--out", tmp_path / "one") == 0
    assert run("solve", "--data", dataset, "--alpha", 0.8, "--clambda", 1, "--out", tmp_path / "one") == 0
    row = next(csv.DictReader(open(tmp_path / "one" / "path.csv")))
    summary = json.loads((tmp_path / "one" / "summary.json").read_text())
    assert float(row["objective"]) == summary["primal_objective"]
    assert len(records(tmp_path / "one")) == 2


def test_tune_outputs(dataset, tmp_path, capsys):
    assert run("tune", "--data", dataset, "--alpha-list", "0.9,0.8,0.6", "--n-lambda", 8, "--max-active", 40,
               "--cv-folds", 3, "--threads", 2, "--out", tmp_path) == 0
    rows = list(csv.DictReader(open(tmp_path / "tune.csv")))
    assert {r["alpha"] for r in rows} == {"0.9", "0.8", "0.6"}
    for crit in ("gcv", "ebic", "cv"):
        assert (tmp_path / f"chosen_{crit}.txt").exists()
        plot = list(csv.DictReader(open(tmp_path / f"plot_{crit}.csv")))
        assert len(plot) == len(rows)
    assert set(json.loads((tmp_path / "tune.json").read_text())["chosen"]) == {"gcv", "ebic", "cv"}
    assert run("tune", "--data", dataset, "--criteria", "aic", "--out", tmp_path) == 1


def test_libsvm_and_csv_sources(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 4))
    b = A @ [1.0, 0.0, -2.0, 0.5] + 0.1 * rng.standard_normal(30)
    with open(tmp_path / "d.svm", "w") as fh:
        for row, y in zip(A, b):
            fh.write(f"{float(y)!r} " + " ".join(f"{j + 1}:{float(v)!r}" for j, v in enumerate(row)) + "\n")
    np.savetxt(tmp_path / "d.csv", np.column_stack([b, A]), delimiter=",", header="y,a,b,c,d", comments="")
    outs = []
    for flag, f in (("--libsvm", "d.svm"), ("--csv", "d.csv")):
        out = tmp_path / flag.strip("-")
        assert run("solve", flag, tmp_path / f, "--poly", 2, "--alpha", 0.9, "--clambda", 0.1, "--out", out) == 0
        outs.append(read_solution(out / "solution.txt"))
    assert outs[0].keys() == outs[1].keys()
    assert max(outs[0]) <= 14  # 4 + 10 quadratic terms


def test_bench_single_rep_has_empty_se(tmp_path):
    assert run("bench", "--preset", "sim3", "--n-list", "500", "--m", 60, "--reps", 1, "--out", tmp_path) == 0
    row = next(csv.DictReader(open(tmp_path / "bench.csv")))
    assert row["ssnal_time_se"] == "" and row["baseline_time_se"] == ""
    assert float(row["speedup"]) > 0


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "ssnal_en.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("gen", "solve", "path", "tune", "bench"):
        assert cmd in proc.stdout
