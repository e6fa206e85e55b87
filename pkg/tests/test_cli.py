import csv
import json

import pytest
from click.testing import CliRunner

from magflow.cli import ConfigError, RunConfig, load_config, main


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(main, [str(a) for a in args])


def test_simulate_writes_outputs(runner, tmp_path):
    res = run(runner, "simulate", "--n", 5, "--blocks", "1,2", "--t-end", 10, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    with open(tmp_path / "trajectory.csv") as fh:
        header = next(csv.reader(fh))
    assert header[:11] == ["t"] + [f"gamma_{i}" for i in range(1, 6)] + [f"p_{i}" for i in range(1, 6)]
    assert "H" in header and "J" in header
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["max_drift"] < 1e-8
    assert summary["provenance"]["seed"] == 0


def test_simulate_ambient_larmor(runner, tmp_path):
    cfg = {"n": 2, "blocks": [2.0], "flow": "ambient", "initial": {"gamma": [0, 0], "p": [1, 0]}, "t_end": 6.283185307179586}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    res = run(runner, "simulate", "--config", path, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    c = json.loads((tmp_path / "summary.json").read_text())["circles"][0]
    assert abs(c["radius"] - 0.5) < 1e-6 and abs(c["period"] - 3.141592653589793) < 1e-6


def test_simulate_pendulum(runner, tmp_path):
    res = run(runner, "simulate", "--flow", "pendulum", "--s", 1, "--t-end", 20, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert abs(summary["circle_radius"] - summary["circle_radius_formula"]) < 1e-4


@pytest.mark.parametrize(
    "args",
    [
        ("simulate", "--n", 5, "--blocks", "1,2,3"),
        ("simulate", "--n", 4, "--blocks", "1,x"),
        ("simulate", "--n", 4, "--blocks", "1,2", "--rel-tol", -1),
        ("simulate", "--n", 4, "--blocks", "1,-2"),
        ("verify", "--n", 4, "--blocks", "1,2", "--targets", "L9"),
        ("simulate", "--config", "/nonexistent.json"),
    ],
)
def test_config_errors_exit_2(runner, tmp_path, args):
    res = run(runner, *args, "--out", tmp_path)
    assert res.exit_code == 2, res.output


def test_verify_report(runner, tmp_path):
    res = run(runner, "verify", "--n", 5, "--blocks", "3,3", "--targets", "L1,L5,glavna-i", "--out", tmp_path)
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["all_hold"]
    assert {v["target"] for v in report["verdicts"]} == {"L1", "L5", "glavna-i"}
    cert = next(v for v in report["verdicts"] if v["target"] == "glavna-i")["certificate"]
    assert (cert["ddim"], cert["dind"]) == (5, 3)


def test_verify_hypothesis_violation_exit_5(runner, tmp_path):
    res = run(runner, "verify", "--n", 6, "--blocks", "1,2,3", "--targets", "glavna-iii", "--out", tmp_path)
    assert res.exit_code == 5


def test_verify_failure_exit_4(runner, tmp_path, monkeypatch):
    from magflow import cli

    monkeypatch.setattr(cli, "run_target", lambda *a, **k: [{"label": "X", "claim": "fake", "holds": False, "asserted": True}])
    res = run(runner, "verify", "--n", 4, "--blocks", "1,2", "--targets", "L1", "--out", tmp_path)
    assert res.exit_code == 4
    assert not json.loads((tmp_path / "report.json").read_text())["all_hold"]


def test_integration_failure_exit_3(runner, tmp_path):
    res = run(runner, "simulate", "--n", 3, "--blocks", "1", "--rel-tol", 1e-30, "--abs-tol", 1e-300, "--t-end", 1, "--out", tmp_path)
    assert res.exit_code == 3


def test_report_is_deterministic(runner, tmp_path):
    for d in ("a", "b"):
        res = run(runner, "verify", "--n", 4, "--blocks", "1,1", "--targets", "L1,L2,L5", "--seed", 3, "--out", tmp_path / d)
        assert res.exit_code == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_scan_caches_by_hash(runner, tmp_path):
    args = ("scan", "--n", "4,5", "--blocks", "1,2;1,1", "--t-end", 5, "--jobs", 2, "--out", tmp_path)
    res = run(runner, *args)
    assert res.exit_code == 0, res.output
    with open(tmp_path / "scan_results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert all(r["status"] == "ok" for r in rows)
    assert len({r["config_hash"] for r in rows}) == 4
    res = run(runner, *args)
    assert res.output.count("(cached)") == 4
    with open(tmp_path / "scan_results.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 4


def test_reduce(runner, tmp_path):
    res = run(runner, "reduce", "--n", 9, "--blocks", "1,1,1,1", "--t-end", 10, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    doc = json.loads((tmp_path / "reduce.json").read_text())
    assert doc["r"] == 4 and doc["zeroed_coordinates"] == [1, 2, 3, 4]
    assert doc["invariance_drift"] < 1e-8
    reduced = json.loads((tmp_path / "reduced_config.json").read_text())
    assert max(abs(v) for v in reduced["initial"]["gamma"][:4] + reduced["initial"]["p"][:4]) < 1e-15


def test_reduce_hypothesis_exit_5(runner, tmp_path):
    res = run(runner, "reduce", "--n", 6, "--blocks", "1,2,2", "--r", 2, "--out", tmp_path)
    assert res.exit_code == 5


def test_config_hash_ignores_out():
    a = load_config(n=4, blocks=[1, 2], out="x")
    b = load_config(n=4, blocks=[1, 2], out="y")
    c = load_config(n=4, blocks=[1, 3])
    assert a.hash() == b.hash() != c.hash()


def test_config_requires_field():
    with pytest.raises(ConfigError):
        RunConfig(n=4).validate()
    with pytest.raises(ConfigError):
        load_config(n=4, blocks=[1, 2], flow="warp")


def test_matrix_config(tmp_path):
    cfg = load_config(matrix=[[0, 2, 0], [-2, 0, 0], [0, 0, 0]])
    assert cfg.n == 3 and cfg.field().blocks == (2.0,)
    with pytest.raises(ConfigError):
        load_config(matrix=[[0, 1], [1, 0]])
