import csv
import json
import subprocess
import sys

import pytest

from cheaptalk.cli import main

SMALL = """\
sweep:
  bias_grid: [0.0, 0.3]
  n_replications: 2
  base_seed: 3
sim:
  max_periods: 30000
  window: 300
"""


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text(SMALL)
    return p


def test_sweep_writes_outputs(tmp_path, config):
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(config), "--out", str(out), "--store-policies"]) == 0
    lines = (out / "runs.jsonl").read_text().splitlines()
    assert len(lines) == 4 and "policy_S" in json.loads(lines[0])
    with (out / "aggregates.csv").open() as fh:
        assert len(list(csv.DictReader(fh))) == 2
    assert json.loads((out / "manifest.json").read_text())["n_missing"] == 0


def test_seed_flag_changes_sweep(tmp_path, config):
    main(["sweep", "--config", str(config), "--out", str(tmp_path / "a")])
    main(["sweep", "--config", str(config), "--out", str(tmp_path / "b"), "--seed", "4"])
    assert (tmp_path / "a" / "runs.jsonl").read_text() != (tmp_path / "b" / "runs.jsonl").read_text()


def test_workers_env_and_flag(tmp_path, config, monkeypatch):
    monkeypatch.setenv("CHEAPTALK_WORKERS", "2")
    main(["sweep", "--config", str(config), "--out", str(tmp_path / "env")])
    main(["sweep", "--config", str(config), "--out", str(tmp_path / "flag"), "--workers", "1"])
    assert (tmp_path / "env" / "runs.jsonl").read_bytes() == (tmp_path / "flag" / "runs.jsonl").read_bytes()


def test_analyze_reproduces_records(tmp_path, config):
    out = tmp_path / "out"
    main(["sweep", "--config", str(config), "--out", str(out), "--store-policies"])
    again = tmp_path / "again.jsonl"
    assert main(["analyze", str(out / "runs.jsonl"), "--check", "--out", str(again)]) == 0
    assert again.read_bytes() == (out / "runs.jsonl").read_bytes()


def test_analyze_detects_tampering(tmp_path, config, capsys):
    out = tmp_path / "out"
    main(["sweep", "--config", str(config), "--out", str(out), "--store-policies"])
    path = out / "runs.jsonl"
    recs = [json.loads(x) for x in path.read_text().splitlines()]
    recs[0]["MI"] = 0.123
    path.write_text("\n".join(json.dumps(r) for r in recs) + "\n")
    assert main(["analyze", str(path), "--check"]) == 3
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["mismatches"] == 1


def test_analyze_needs_policies(tmp_path, config):
    out = tmp_path / "out"
    main(["sweep", "--config", str(config), "--out", str(out)])
    assert main(["analyze", str(out / "runs.jsonl")]) == 1


def test_run_prints_record(capsys, config):
    assert main(["run", "--config", str(config), "--bias", "0.1", "--seed", "5"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["bias"] == 0.1 and rec["seed"] == 5 and len(rec["policy_S"]) == 6


def test_enumerate_csv(tmp_path):
    out = tmp_path / "eq.csv"
    assert main(["enumerate", "--bias", "0.2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["block_sizes"] for r in rows] == ["2;4", "1;5", "6"]
    assert float(rows[0]["U_R"]) == pytest.approx(-0.0366666666666667)


def test_plot_and_errors(tmp_path, config):
    out = tmp_path / "out"
    main(["sweep", "--config", str(config), "--out", str(out)])
    assert main(["plot", "--kind", "mi_distribution", str(out / "aggregates.csv"), "--out", str(tmp_path / "mi")]) == 0
    assert (tmp_path / "mi.svg").exists() and (tmp_path / "mi.csv").exists()
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["plot", "--kind", "mi_distribution", str(empty), "--out", str(tmp_path / "none")]) == 1
    assert not (tmp_path / "none.svg").exists()


@pytest.mark.parametrize("argv", [
    ["run", "--config", "/nonexistent/x.yaml"],
    ["analyze", "/nonexistent/runs.jsonl"],
])
def test_errors_exit_nonzero(argv):
    assert main(argv) == 1


def test_bad_config_reports_line(tmp_path, caplog):
    bad = tmp_path / "bad.yaml"
    bad.write_text("game:\n  bias: -1\n")
    assert main(["enumerate", "--config", str(bad)]) == 1
    assert f"{bad}:2:" in caplog.text


def test_installed_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "cheaptalk.cli", "enumerate", "--bias", "0.45"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1].startswith("0.45") and len(res.stdout.splitlines()) == 2
