import csv
import json

import numpy as np
import pytest

from conftest import instance_path
from staffing_minimax.cli import main
from staffing_minimax.model import instance_to_dict, make_instance


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_fig3_values(capsys):
    code, out, _ = run_cli(capsys, "solve", "--instance",
                           instance_path("fig3a.json"))
    assert code == 0
    assert out.splitlines()[0] == "0.000000"
    code, out, _ = run_cli(capsys, "solve", "--instance",
                           instance_path("fig3b.json"))
    assert code == 0
    assert abs(float(out.splitlines()[0]) - 0.476) <= 5e-3


def test_solve_matches_fixed_point(capsys):
    from staffing_minimax.model import load_instance
    from staffing_minimax.policies import gamma_star_single_pool
    for name in ("fig3a", "fig3b", "fig3c"):
        code, out, _ = run_cli(capsys, "solve", "--instance",
                               instance_path(f"{name}.json"))
        assert code == 0
        printed = float(out.splitlines()[0])
        fp = gamma_star_single_pool(load_instance(
            instance_path(f"{name}.json")))
        assert printed == pytest.approx(fp.gamma_star, abs=1e-6)


def test_solve_writes_canonical_profile(capsys, tmp_path):
    out_path = tmp_path / "canon.json"
    code, out, _ = run_cli(capsys, "solve", "--instance",
                           instance_path("fig3c.json"), "--out",
                           str(out_path))
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["objective"] == pytest.approx(0.338, abs=5e-3)
    assert len(payload["hires"][0]) == 10


def test_solve_malformed_file_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run_cli(capsys, "solve", "--instance", str(bad))
    assert code == 2
    assert "error" in err


def test_zero_horizon_rejected_exit_2(capsys, tmp_path):
    inst = make_instance([1.0], np.zeros((1, 1)), (0, 1), [0.0])
    d = instance_to_dict(inst)
    d["availability"] = [[]]
    d["error_bounds"] = []
    d["inconsistency"] = []
    d["horizon"] = 0
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(d))
    code, _, err = run_cli(capsys, "solve", "--instance", str(path))
    assert code == 2


def test_run_emulator_fig3c_worst_case(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = run_cli(capsys, "run", "--instance",
                           instance_path("fig3c.json"), "--policy",
                           "lp_emulator", "--sequence", "worst_case",
                           "--out", str(trace))
    assert code == 0
    cost = float([l for l in out.splitlines()
                  if l.startswith("cost =")][0].split()[2])
    assert cost == pytest.approx(0.338, abs=5e-3)
    rows = list(csv.DictReader(trace.open()))
    assert len(rows) == 10


def test_run_file_sequence_replays_identically(capsys, tmp_path):
    seq_path = tmp_path / "seq.csv"
    with seq_path.open("w") as f:
        f.write("day,lo,hi\n")
        lo, hi = 0.0, 1.0
        T = 10
        for t in range(1, T + 1):
            width = min(1 - 0.5 ** (T - t), hi - lo)
            lo = min(lo + 0.01, hi - width)
            hi = lo + width
            f.write(f"{t},{lo},{hi}\n")
    outputs = []
    for rep in range(2):
        trace = tmp_path / f"trace{rep}.csv"
        code, out, _ = run_cli(capsys, "run", "--instance",
                               instance_path("fig3b.json"), "--policy",
                               "lp_resolving", "--sequence",
                               f"file:{seq_path}", "--out", str(trace))
        assert code == 0
        cost_lines = [l for l in out.splitlines()
                      if l.startswith(("total_staffed", "cost"))]
        outputs.append((cost_lines, trace.read_text()))
    assert outputs[0] == outputs[1]


def test_run_release_policy_on_configuration(capsys):
    code, out, _ = run_cli(capsys, "run", "--instance",
                           instance_path("release_demo.json"), "--policy",
                           "release", "--sequence", "configuration:1,3")
    assert code == 0
    assert "cost =" in out


def test_bench_single_replication_and_reproducibility(capsys, tmp_path):
    out1 = tmp_path / "r1.csv"
    code, text, _ = run_cli(capsys, "bench", "--config",
                            instance_path("bench_short.json"), "--reps", "1",
                            "--out", str(out1))
    assert code == 0
    rows = list(csv.DictReader(out1.open()))
    by_policy = {r["policy"]: float(r["cost"]) for r in rows}
    for line in text.splitlines():
        parts = line.split()
        if parts and parts[0] in by_policy:
            assert float(parts[1]) == pytest.approx(by_policy[parts[0]])
    out2 = tmp_path / "r2.csv"
    code, _, _ = run_cli(capsys, "bench", "--config",
                         instance_path("bench_short.json"), "--reps", "1",
                         "--out", str(out2))
    strip = lambda p: [(r["replication"], r["policy"], r["cost"], r["seed"])
                       for r in csv.DictReader(p.open())]
    # Byte-identical up to the wall-clock runtime column.
    assert strip(out1) == strip(out2)


def test_sweep_eta_monotone(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, text, _ = run_cli(capsys, "sweep-eta", "--T", "14", "--s", "1",
                            "--etas", "0.25,0.5,1,2,4", "--out", str(out))
    assert code == 0
    assert "nonincreasing: yes" in text
    rows = list(csv.reader(out.open()))
    values = [float(r[1]) for r in rows[1:]]
    assert all(values[i + 1] <= values[i] + 1e-9 for i in range(len(values) - 1))


def test_sweep_eta_single_point(capsys):
    code, text, _ = run_cli(capsys, "sweep-eta", "--T", "6", "--s", "0.8",
                            "--etas", "1.0")
    assert code == 0
    assert "nonincreasing: yes" in text


def test_oracle_command(capsys, tmp_path):
    inst = make_instance([0.8], [[1.0, 0.7]], (0, 1), [0.6, 0.25])
    path = tmp_path / "small.json"
    path.write_text(json.dumps(instance_to_dict(inst)))
    code, out, _ = run_cli(capsys, "oracle", "--instance", str(path),
                           "--policy", "lp_emulator", "--grid-step", "0.25")
    assert code == 0
    lines = {l.split(" = ")[0]: l.split(" = ")[1]
             for l in out.splitlines() if " = " in l}
    assert float(lines["max_cost"]) <= float(lines["gamma_star"]) + 1e-6


def test_calibrate_command(capsys, tmp_path):
    out = tmp_path / "table.json"
    code, text, _ = run_cli(capsys, "calibrate", "--T", "4", "--draws",
                            "10000", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload["lower"]) == 4


def test_unknown_policy_exit_2(capsys):
    code, _, err = run_cli(capsys, "run", "--instance",
                           instance_path("fig3a.json"), "--policy", "magic",
                           "--sequence", "worst_case")
    assert code == 2
