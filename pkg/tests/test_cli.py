import csv
import json
import math
import subprocess
import sys

import pytest

from pullguide.cli import COMPARISON_HEADER, main, parse_seeds
from pullguide.sim import Trace, metrics

SHORT = {"name": "short", "start": [0, 0, 0], "goal": [20, 0, 0],
         "world": {"bounds": [-3, -3, 22, 3]},
         "human": {"drift": {"kind": "profile"}}, "sim": {"max_time": 4.0}}


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "short.json"
    p.write_text(json.dumps(SHORT))
    return p


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return p


def test_parse_seeds():
    assert parse_seeds("1..4") == [1, 2, 3, 4]
    assert parse_seeds("3") == [3]
    assert parse_seeds("2,5") == [2, 5]
    import argparse
    for bad in ("4..1", "a..b", "x"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_seeds(bad)


def test_run_writes_outputs(scenario, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scenario), "--seed", "3", "--out", str(out)]) == 0
    assert (out / "trace.csv").exists() and (out / "metrics.json").exists()
    assert "seed=3 mode=adaptive" in capsys.readouterr().out


def test_metrics_json_matches_recompute(scenario, tmp_path, capsys):
    out = tmp_path / "out"
    main(["run", "--scenario", str(scenario), "--out", str(out), "--baseline",
          "--footprint-half-width", "0.3"])
    saved = json.loads((out / "metrics.json").read_text())
    fresh = json.loads(metrics(Trace.from_csv(out / "trace.csv"), 0.3).to_json())
    assert saved.keys() == fresh.keys()
    for k, v in saved.items():
        if isinstance(v, float):
            assert math.isclose(v, fresh[k], rel_tol=0, abs_tol=1e-12), k
        else:
            assert v == fresh[k], k
    capsys.readouterr()
    assert main(["metrics", "--trace", str(out / "trace.csv"),
                 "--footprint-half-width", "0.3"]) == 0
    assert json.loads(capsys.readouterr().out) == saved


def test_run_exit_codes(tmp_path):
    out = str(tmp_path / "o")
    assert main(["run", "--scenario", str(tmp_path / "missing.json"), "--out", out]) == 2
    bad = write(tmp_path, "bad.json", {"name": "x", "start": [0, 0], "goal": [1, 0, 0],
                                       "world": {"bounds": [0, 0, 1, 1]}})
    assert main(["run", "--scenario", str(bad), "--out", out]) == 2
    assert main(["run", "--scenario", str(write(tmp_path, "junk.json", "{,")), "--out", out]) == 2
    walled = dict(SHORT, world={"bounds": [-3, -3, 22, 3], "segments": [[10, -3, 10, 3]]})
    assert main(["run", "--scenario", str(write(tmp_path, "w.json", walled)), "--out", out]) == 3
    with pytest.raises(SystemExit) as exc:
        main(["run", "--out", out])
    assert exc.value.code == 2


def test_run_is_byte_identical_across_processes(scenario, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        subprocess.run([sys.executable, "-m", "pullguide", "run", "--scenario", str(scenario),
                        "--seed", "7", "--out", str(out)], check=True, capture_output=True)
        outs.append((out / "trace.csv").read_bytes())
    assert outs[0] == outs[1]


def test_compare_single_seed(scenario, tmp_path, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--scenario", str(scenario), "--seeds", "2..2", "--out", str(out)]) == 0
    rows = list(csv.reader((out / "comparison.csv").open()))
    assert tuple(rows[0]) == COMPARISON_HEADER
    assert [(r[0], r[1]) for r in rows[1:]] == [("2", "adaptive"), ("2", "baseline")]
    summary = json.loads((out / "sign_test.json").read_text())
    assert summary["pairs"] == 1 and summary["underpowered"] is True
    assert "underpowered" in capsys.readouterr().out
    assert (out / "seed_002" / "adaptive" / "metrics.json").exists()


def test_compare_parallel_order(scenario, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["compare", "--scenario", str(scenario), "--seeds", "1..3", "--out", str(a)]) == 0
    assert main(["compare", "--scenario", str(scenario), "--seeds", "1..3", "--out", str(b),
                 "--jobs", "2"]) == 0
    assert (a / "comparison.csv").read_bytes() == (b / "comparison.csv").read_bytes()
    seeds = [int(r["seed"]) for r in csv.DictReader((a / "comparison.csv").open())]
    assert seeds == sorted(seeds)


def test_compare_failures(tmp_path):
    assert main(["compare", "--scenario", str(tmp_path / "nope.json"), "--seeds", "1..2",
                 "--out", str(tmp_path / "c")]) == 2
    walled = dict(SHORT, world={"bounds": [-3, -3, 22, 3], "segments": [[10, -3, 10, 3]]})
    p = write(tmp_path, "w.json", walled)
    assert main(["compare", "--scenario", str(p), "--seeds", "1..2",
                 "--out", str(tmp_path / "c")]) == 1
    summary = json.loads((tmp_path / "c" / "sign_test.json").read_text())
    assert summary["pairs"] == 0 and len(summary["failed"]) == 4
    assert (tmp_path / "c" / "comparison.csv").read_text().strip() == ",".join(COMPARISON_HEADER)


def test_figures_and_report(scenario, tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--scenario", str(scenario), "--out", str(out), "--figures"]) == 0
    assert (out / "trajectory.png").stat().st_size > 0 and (out / "pulling.png").exists()
    cmp = tmp_path / "cmp"
    main(["compare", "--scenario", str(scenario), "--seeds", "1..2", "--out", str(cmp),
          "--figures"])
    assert (cmp / "comparison.png").exists()
    rep = tmp_path / "rep"
    assert main(["report", "--trace", str(out / "trace.csv"),
                 "--comparison", str(cmp / "comparison.csv"), "--out", str(rep)]) == 0
    assert {p.name for p in rep.iterdir()} == {"trajectory.png", "pulling.png", "comparison.png"}
    assert main(["report", "--out", str(rep)]) == 2
    assert main(["report", "--trace", str(tmp_path / "none.csv"), "--out", str(rep)]) == 2
