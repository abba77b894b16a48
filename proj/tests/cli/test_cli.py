import csv
import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("AUTOSCALE_CLI", "autoscale")


def run(*args, cwd=None):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_gen_stream_cardinality_and_digest(tmp_path):
    r = run("gen-stream", "--delta", 5, "--n", 500, "--partitions", 100, "--seed", 1,
            "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    path, digest = r.stdout.split()
    doc = json.loads(Path(path).read_text())
    assert len(doc["measurements"]) == 500
    assert all(len(m) == 100 for m in doc["measurements"])
    assert len(doc["partitions"]) == 100
    again = run("gen-stream", "--delta", 5, "--n", 500, "--partitions", 100, "--seed", 1,
                "--out", tmp_path / "again")
    assert again.stdout.split()[1] == digest


def test_gen_stream_constant_half(tmp_path):
    r = run("gen-stream", "--delta", 0, "--init", "half", "--n", 20, "--partitions", 5,
            "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    doc = json.loads(Path(r.stdout.split()[0]).read_text())
    rows = doc["measurements"]
    assert all(row == rows[0] for row in rows)
    assert all(v == 1.15e6 for v in rows[0])


def test_bench_single_algorithm_cbs_zero(tmp_path):
    r = run("bench", "--algorithms", "BFD", "--deltas", "0,10", "--seeds", "1,2", "--n", 40,
            "--partitions", 30, "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    summary = read_csv(tmp_path / "summary.csv")
    assert len(summary) == 2
    assert all(float(row["cbs"]) == 0.0 for row in summary)
    records = read_csv(tmp_path / "records.csv")
    assert len(records) == 2 * 2 * 40
    assert list(records[0].keys()) == ["delta", "seed", "algorithm", "iteration", "bins",
                                       "rscore"]


@pytest.mark.parametrize("init", ["zero", "half", "full"])
def test_bench_zero_delta_modified_stable(tmp_path, init):
    r = run("bench", "--deltas", 0, "--seeds", "1,2", "--n", 30, "--partitions", 40,
            "--init", init, "--algorithms", "MWF,MBF,MWFP,MBFP", "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    for row in read_csv(tmp_path / "records.csv"):
        if int(row["iteration"]) >= 2:
            assert float(row["rscore"]) == 0.0, row


def test_bench_zero_delta_mbf_uniform_stable(tmp_path):
    r = run("bench", "--deltas", 0, "--seeds", "1,2,3", "--n", 30, "--algorithms", "MBF",
            "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    for row in read_csv(tmp_path / "records.csv"):
        if int(row["iteration"]) >= 2:
            assert float(row["rscore"]) == 0.0, row


def write_summary(path, rows):
    with open(path, "w") as f:
        f.write("delta,algorithm,cbs,avg_rscore,on_pareto\n")
        for r in rows:
            f.write(",".join(map(str, r)) + "\n")


def test_pareto_examples(tmp_path):
    summary = tmp_path / "summary.csv"
    write_summary(summary, [(5, "NF", 0, 1, 0), (5, "FF", 1, 0, 0), (5, "BF", 1, 1, 0)])
    r = run("pareto", summary, "--delta", 5, "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    rows = read_csv(tmp_path / "pareto.csv")
    assert [row["algorithm"] for row in rows] == ["NF", "FF"]
    assert all(row["on_pareto"] == "1" for row in rows)

    write_summary(summary, [(5, "MBF", 0.2, 0.3, 1)])
    r = run("pareto", summary, "--delta", 5, "--out", tmp_path)
    assert [row["algorithm"] for row in read_csv(tmp_path / "pareto.csv")] == ["MBF"]

    r = run("pareto", summary, "--delta", 10, "--out", tmp_path)
    assert r.returncode == 2
    assert "UnknownDelta" in r.stderr


def test_pareto_parse_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    r = run("pareto", bad, "--delta", 5, "--out", tmp_path)
    assert r.returncode == 2
    assert "ParseError" in r.stderr


def test_simulate_builtins(tmp_path):
    r = run("simulate", "--scenario", "steady-60pct", "--out", tmp_path / "steady")
    assert r.returncode == 0, r.stderr
    assert "(bounded)" in r.stdout

    r = run("simulate", "--scenario", "step-overload", "--out", tmp_path / "step")
    assert r.returncode == 0, r.stderr
    events = [json.loads(l) for l in (tmp_path / "step" / "controller.jsonl").open()]
    assert sum(e["event"] == "reassign" for e in events) == 1
    assert set(events[0]) == {"tick", "event", "consumer", "partitions", "token"}
    lag = (tmp_path / "step" / "lag.jsonl").open().readline()
    assert set(json.loads(lag)) == {"tick", "partition", "lag", "paused", "owner"}

    r = run("simulate", "--scenario", "double-start", "--out", tmp_path / "ds")
    assert r.returncode == 3
    assert "invariant violation" in r.stderr


def test_simulate_scenario_file_and_overrides(tmp_path):
    scenario = tmp_path / "s.json"
    scenario.write_text(json.dumps({"base": "step-overload", "ticks": 50}))
    r = run("simulate", "--scenario", scenario, "--ticks", 20, "--ack-timeout", 5,
            "--hysteresis", 2, "--algorithms", "MWF", "--out", tmp_path / "o")
    assert r.returncode == 0, r.stderr
    assert "20 ticks" in r.stdout


def test_simulate_errors(tmp_path):
    r = run("simulate", "--scenario", "no-such-scenario", "--out", tmp_path)
    assert r.returncode == 2
    assert "ScenarioError" in r.stderr
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("simulate", "--scenario", bad, "--out", tmp_path).returncode == 2


@pytest.mark.parametrize("args", [
    [],
    ["frobnicate"],
    ["gen-stream", "--bogus"],
    ["gen-stream", "--init", "sideways"],
    ["gen-stream", "--delta", "150"],
    ["bench", "--algorithms", "XYZ"],
    ["pareto"],
    ["simulate"],
    ["simulate", "--scenario", "steady-60pct", "--algorithms", "MBF,MWF"],
])
def test_usage_errors(tmp_path, args):
    assert run(*args, cwd=tmp_path).returncode == 1


def test_deterministic(tmp_path):
    a = run("bench", "--deltas", 5, "--seeds", 3, "--n", 20, "--partitions", 20,
            "--out", tmp_path / "a")
    b = run("bench", "--deltas", 5, "--seeds", 3, "--n", 20, "--partitions", 20,
            "--out", tmp_path / "b")
    assert a.stdout.replace(str(tmp_path / "a"), "") == b.stdout.replace(str(tmp_path / "b"), "")
    assert (tmp_path / "a" / "records.csv").read_bytes() == (
        tmp_path / "b" / "records.csv").read_bytes()
