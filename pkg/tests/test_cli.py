import csv
import json
import os
from pathlib import Path

import pytest

from relnet.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, main
from relnet.io import strip_meta

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
PARAMS = '{"A": "4", "c_A": "3/2", "c_B": "2", "delta": "1", "tau": 1}'
SIM_PARAMS = '{"A": "5", "c_A": "2", "c_B": "3", "delta": "0", "tau": 1}'

CASES = {
    "topology_cycles": ["topology", "cycles", "--network", str(DATA / "snapshots"), "--ranking", str(DATA / "ranking.txt"), "--top-k", "4"],
    "topology_core_ratio": ["topology", "core-ratio", "--network", str(DATA / "snapshots"), "--ranking", str(DATA / "ranking.txt"), "--top-k", "4"],
    "motifs_count": ["motifs", "count", "--network", str(DATA / "small.txt"), "--motif", "double_star:1", "--motif", "entangled_cycle:3", "--motif", "entangled_cycle:4"],
    "motifs_null": ["motifs", "null", "--network", str(DATA / "small.txt"), "--motif", "entangled_cycle:3", "--samples", "20", "--seed", "1"],
    "cost": ["cost", "--network", str(DATA / "network.json"), "--params", PARAMS],
    "stable_check": ["stable", "check", "--network", str(DATA / "network.json"), "--params", PARAMS],
    "stable_prices": ["stable", "prices", "--n-major", "2", "--n-minor", "2", "--params", PARAMS],
    "simulate": ["simulate", "--config", str(DATA / "sim_config.json")],
}


def run(argv, tmp_path, name="out"):
    out = tmp_path / f"{name}.json"
    code = main(argv + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def _golden_text(report):
    return json.dumps(strip_meta(report), indent=2, sort_keys=True) + "\n"


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_reports(name, tmp_path):
    code, report = run(CASES[name], tmp_path)
    assert code == EXIT_OK
    assert report["meta"]["command"].startswith(CASES[name][0])
    path = GOLDEN / f"{name}.json"
    if os.environ.get("RELNET_REGEN_GOLDEN"):
        path.write_text(_golden_text(report))
    assert _golden_text(report) == path.read_text()


@pytest.mark.parametrize("name", ["simulate", "motifs_null", "topology_cycles"])
def test_reports_are_byte_identical_apart_from_meta(name, tmp_path):
    _, a = run(CASES[name], tmp_path, "a")
    _, b = run(CASES[name], tmp_path, "b")
    assert _golden_text(a) == _golden_text(b)


def test_cycle_series_decreases(tmp_path):
    _, report = run(CASES["topology_cycles"], tmp_path)
    series = report["results"]["series"]
    assert [s["label"] for s in series] == ["20060101", "20070101", "20080101"]
    means = [s["mean"] for s in series]
    assert means[0] > means[1] > means[2]


def test_csv_projection(tmp_path):
    out = tmp_path / "rows.csv"
    assert main(CASES["motifs_count"] + ["--out", str(tmp_path / "r.json"), "--csv", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["motif"] for r in rows] == ["double_star:1", "entangled_cycle:3", "entangled_cycle:4"]
    assert rows[1]["count"] == "2"


def test_external_ids_in_outputs(tmp_path):
    _, report = run(["cost", "--network", str(DATA / "small.txt"), "--params", PARAMS, "--node", "5"], tmp_path)
    assert [r["node"] for r in report["results"]["nodes"]] == [5]
    assert report["results"]["input"]["self_loops_dropped"] == 1


def test_simulate_log_and_seed_env(tmp_path, monkeypatch):
    log = tmp_path / "log.jsonl"
    monkeypatch.setenv("RELNET_SEED", "7")
    code, report = run(["simulate", "--params", SIM_PARAMS, "--n-major", "2", "--n-minor", "2", "--order", "random", "--log", str(log)], tmp_path)
    assert code == EXIT_OK
    assert report["config"]["seeds"] == [7]
    lines = [json.loads(x) for x in log.read_text().splitlines()]
    assert lines and all(x["seed"] == 7 for x in lines)
    code, flagged = run(["simulate", "--params", SIM_PARAMS, "--n-major", "2", "--n-minor", "2", "--seed", "3"], tmp_path, "f")
    assert flagged["config"]["seeds"] == [3]


def test_flags_override_config(tmp_path):
    code, report = run(["simulate", "--config", str(DATA / "sim_config.json"), "--rule", "2a", "--seed", "5"], tmp_path)
    assert code == EXIT_OK
    assert report["config"]["rule"]["variant"] == "2a" and report["config"]["seeds"] == [5]


@pytest.mark.parametrize(
    "argv",
    [
        ["cost", "--network", str(DATA / "network.json")],
        ["cost", "--network", str(DATA / "network.json"), "--params", '{"A": 1, "c_A": 1, "c_B": 1}'],
        ["cost", "--network", "/nonexistent/file.txt", "--params", PARAMS],
        ["motifs", "count", "--network", str(DATA / "small.txt"), "--motif", "entangled_cycle:5"],
        ["motifs", "count", "--network", str(DATA / "small.txt"), "--motif", "blob:2"],
        ["topology", "cycles", "--network", str(DATA / "small.txt")],
        ["stable", "enumerate", "--params", PARAMS],
    ],
)
def test_input_errors_exit_2(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path / "x.json")]) == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_budget_refusal_exit_3(tmp_path):
    argv = ["stable", "enumerate", "--n-major", "4", "--n-minor", "5", "--params", PARAMS]
    assert main(argv + ["--out", str(tmp_path / "x.json")]) == EXIT_BUDGET
