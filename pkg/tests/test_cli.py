import json
import math
import subprocess
import sys

import pytest

from cayley_moser.cli import parse_grid, run

E = math.e


def _run(args, tmp_path, capsys):
    code = run(args + ["--out", str(tmp_path)])
    return code, capsys.readouterr()


def test_policy_example(tmp_path, capsys):
    code, out = _run(["policy", "--family", "uniform", "--a", "0", "--b", "1", "--mu0", "0.5", "--lambda", "1", "--t", "4"], tmp_path, capsys)
    assert code == 0
    lines = (tmp_path / "policy.csv").read_text().splitlines()
    assert lines[0] == "t,mu,mu_prime,h"
    assert float(lines[1].split(",")[1]) == 0.75


def test_stoptime_example(tmp_path, capsys):
    code, out = _run(["stoptime", "--family", "exponential", "--eta", "2", "--residual", "same", "--lambda", "1", "--t", "10"], tmp_path, capsys)
    assert code == 0
    data = json.loads((tmp_path / "stoptime.json").read_text())
    assert data["atom"] == pytest.approx(E / (10 + E), rel=1e-14)
    assert data["mean"] == pytest.approx(5 * (1 + E / (10 + E)), rel=1e-14)
    assert (tmp_path / "stoptime.csv").read_text().startswith("r,H\n")


def test_price_and_asymptotics(tmp_path, capsys):
    code, _ = _run(["price", "--family", "pareto", "--xm", "1", "--alpha", "3", "--residual", "same", "--lambda", "1", "--t", "2"], tmp_path, capsys)
    assert code == 0
    assert (tmp_path / "price.csv").read_text().startswith("x,G,g\n")
    assert set(json.loads((tmp_path / "price.json").read_text())) == {"t", "mean", "var"}
    code, out = _run(["asymptotics", "--family", "uniform", "--a", "1", "--b", "3", "--residual", "same", "--lambda", "1", "--t", "100", "--s-grid", "0:0.9:4"], tmp_path, capsys)
    assert code == 0
    rep = json.loads((tmp_path / "asymptotics.json").read_text())
    assert rep["class"] == "BoundedEdge" and rep["gamma"] == 2
    assert (tmp_path / "asymptotics_that.csv").read_text().startswith("s,limit,exact\n")


def test_validate_figure_example(tmp_path, capsys):
    code, _ = _run(["validate", "--figure", "f2", "--n", "100000", "--seed", "7"], tmp_path, capsys)
    assert code == 0
    rep = json.loads((tmp_path / "f2_report.json").read_text())
    assert all(c["pass"] for c in rep["checks"])
    assert (tmp_path / "f2.svg").exists()


def test_validate_oracle(tmp_path, capsys):
    code, _ = _run(["validate", "--oracle", "--family", "pareto", "--xm", "1", "--alpha", "1.5", "--lambda", "1", "--t-grid", "2,10"], tmp_path, capsys)
    assert code == 0
    assert (tmp_path / "oracle_pareto_report.json").exists()


def test_validate_failure_exits_2(tmp_path, capsys, monkeypatch):
    import cayley_moser.cli as cli

    def failing(*a, **k):
        return {"checks": [{"name": "x", "statistic": 1.0, "threshold": 0.5, "pass": False}]}

    monkeypatch.setattr(cli, "figure_replication", failing)
    code, _ = _run(["validate", "--figure", "f2"], tmp_path, capsys)
    assert code == 2


def test_simulate_determinism_across_threads(tmp_path, capsys):
    base = ["simulate", "--family", "uniform", "--a", "1", "--b", "3", "--residual", "same", "--lambda", "1", "--t", "10", "--n", "30000", "--seed", "9"]
    assert run(base + ["--out", str(tmp_path / "a")]) == 0
    assert run(base + ["--threads", "4", "--out", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    assert (tmp_path / "a" / "simulate.csv").read_bytes() == (tmp_path / "b" / "simulate.csv").read_bytes()
    assert (tmp_path / "a" / "simulate_summary.json").read_bytes() == (tmp_path / "b" / "simulate_summary.json").read_bytes()


def test_reconstruct(tmp_path, capsys):
    src = tmp_path / "mu.csv"
    rows = ["t,mu"] + [f"{t},{2 * math.log(t + E)!r}" for t in [i * 0.05 for i in range(1001)]]
    src.write_text("\n".join(rows) + "\n")
    code, _ = _run(["reconstruct", "--input", str(src), "--lambda", "1"], tmp_path, capsys)
    assert code == 0
    lines = (tmp_path / "reconstructed.csv").read_text().splitlines()
    assert lines[0] == "x,F"
    x, F = map(float, lines[500].split(","))
    assert F == pytest.approx(1 - math.exp(-x / 2), abs=1e-3)


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# policy run\nsubcommand=policy\nfamily=uniform\na=0\nb=1\nmu0=0.5\nlambda=1\nt=4\n")
    assert run(["--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert run(["--config", str(cfg), "--t", "0", "--out", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    assert (tmp_path / "a" / "policy.csv").read_text().splitlines()[1].split(",")[1] == "0.75"
    assert (tmp_path / "b" / "policy.csv").read_text().splitlines()[1].split(",")[1] == "0.5"


def test_env_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CAYLEY_MOSER_OUTDIR", str(tmp_path / "env"))
    assert run(["policy", "--family", "exponential", "--eta", "1", "--mu0", "0", "--lambda", "1", "--t-grid", "0:1:3"]) == 0
    capsys.readouterr()
    assert len((tmp_path / "env" / "policy.csv").read_text().splitlines()) == 4


@pytest.mark.parametrize(
    "args",
    [
        ["bogus"],
        ["policy", "--family", "uniform", "--a", "0", "--lambda", "1", "--t", "4", "--mu0", "0.5"],
        ["policy", "--family", "uniform", "--a", "0", "--b", "1", "--mu0", "1.5", "--lambda", "1", "--t", "4"],
        ["policy", "--family", "pareto", "--xm", "1", "--alpha", "0.5", "--mu0", "1", "--lambda", "1", "--t", "4"],
        ["price", "--family", "uniform", "--a", "0", "--b", "1", "--residual", "same", "--mu0", "0.2", "--lambda", "1", "--t", "1"],
        ["validate", "--figure", "f2", "--n", "10"],
        ["validate"],
        ["policy", "--t-grid", "1:2"],
        ["reconstruct", "--input", "/nonexistent.csv", "--lambda", "1"],
    ],
)
def test_usage_errors_exit_1(args, tmp_path, capsys):
    code, out = _run(args, tmp_path, capsys)
    assert code == 1
    assert "error" in out.err


def test_grid_parsing():
    assert list(parse_grid("0:1:3")) == [0.0, 0.5, 1.0]
    assert list(parse_grid("1,2.5")) == [1.0, 2.5]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cayley_moser", "policy", "--family", "uniform", "--a", "0", "--b", "1", "--mu0", "0.5", "--lambda", "1", "--t", "4", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("4,0.75,")
    proc = subprocess.run([sys.executable, "-m", "cayley_moser", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "stoptime" in proc.stdout
