import csv
import json
from pathlib import Path

import numpy as np
import pytest

from lagrange_ising import random_instance, to_gset
from lagrange_ising.cli import main
from lagrange_ising.regression import RegressionProblem, lattice, residual

DATA = Path(__file__).resolve().parent.parent / "data"
FAST = ["--steps", "300", "--dt", "0.05"]


def strip_wall_time(obj):
    if isinstance(obj, dict):
        return {k: strip_wall_time(v) for k, v in obj.items() if k != "wall_time"}
    if isinstance(obj, list):
        return [strip_wall_time(v) for v in obj]
    return obj


def test_solve_writes_record(tmp_path):
    out = tmp_path / "r.json"
    traj = tmp_path / "t.csv"
    code = main(["solve", "--instance", str(DATA / "sample10.gset"), "--solver", "opo", "--restarts", "4",
                 "--seed", "7", "--out", str(out), "--trajectory", str(traj)] + FAST)
    assert code == 0
    rec = json.loads(out.read_text())
    assert {"final_energy", "final_spins", "schema_version"} <= rec.keys()
    assert len(rec["final_spins"]) == 10 and rec["restarts"] == 4
    rows = list(csv.reader(traj.open()))
    assert rows[0] == ["t", "lagrange", "energy", "max_amp"] and len(rows) > 2


def test_solve_is_reproducible(tmp_path):
    texts = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["solve", "--instance", str(DATA / "sample10.gset"), "--solver", "phase", "--restarts", "3",
                     "--seed", "7", "--out", str(out)] + FAST) == 0
        texts.append(strip_wall_time(json.loads(out.read_text())))
    assert texts[0] == texts[1]


def test_unknown_solver(capsys):
    assert main(["solve", "--solver", "nosuch"]) == 1
    err = capsys.readouterr().err
    assert "opo" in err and "soljacic" in err


@pytest.mark.parametrize("argv", [[], ["solve", "--instance", "x.gset"], ["regress"], ["frobnicate"]])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_missing_instance_file(tmp_path):
    assert main(["solve", "--instance", str(tmp_path / "none.gset"), "--solver", "opo"]) == 2


def test_bruteforce_antiferro(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert main(["bruteforce", "--instance", str(DATA / "antiferro2.gset"), "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["ground_energy"] == -2 and rec["spins"][0] == -rec["spins"][1]
    assert "ground_energy=-2" in capsys.readouterr().out


def test_bruteforce_size_guard(tmp_path, capsys):
    path = tmp_path / "big.gset"
    path.write_text(to_gset(random_instance(25, 0.2, seed=0)))
    assert main(["bruteforce", "--instance", str(path)]) == 2
    assert "24" in capsys.readouterr().err


def test_bruteforce_matches_opo_best_of_32(tmp_path):
    b, s = tmp_path / "b.json", tmp_path / "s.json"
    assert main(["bruteforce", "--instance", str(DATA / "sample10.gset"), "--out", str(b)]) == 0
    assert main(["solve", "--instance", str(DATA / "sample10.gset"), "--solver", "opo", "--restarts", "32",
                 "--out", str(s)]) == 0
    assert json.loads(b.read_text())["ground_energy"] == json.loads(s.read_text())["final_energy"]


def test_regress_identity_one_bit(tmp_path):
    y = [0.7, -2.0, 0.1]
    path = tmp_path / "d.csv"
    rows = [",".join(str(v) for v in list(np.eye(3)[i]) + [y[i]]) for i in range(3)]
    path.write_text("x1,x2,x3,y\n" + "\n".join(rows) + "\n")
    out = tmp_path / "w.json"
    assert main(["regress", "--data", str(path), "--bits", "1", "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    prob = RegressionProblem(np.eye(3), y, bits=1)
    best = min(lattice(prob), key=lambda w: residual(prob, w))
    assert rec["w"] == best.tolist() == [1.0, -1.0, 1.0]
    assert rec["residual"] == pytest.approx(residual(prob, best))


def test_regress_with_solver_is_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"w{k}.json"
        assert main(["regress", "--data", str(DATA / "regress_small.csv"), "--bits", "2", "--solver", "opo",
                     "--restarts", "4", "--seed", "3", "--out", str(out)]) == 0
        outs.append(out.read_text())
    assert outs[0] == outs[1]


def test_regress_bits_zero():
    assert main(["regress", "--data", str(DATA / "regress_small.csv"), "--bits", "0"]) == 1


def test_regress_malformed_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,x\n")
    assert main(["regress", "--data", str(path)]) == 2


def bench(tmp_path, name, extra=()):
    out = tmp_path / name
    code = main(["bench", "--instances", str(DATA / "sample10.gset"), "--solvers", "opo", "phase",
                 "--seeds", "0", "1", "--out", str(out)] + FAST + list(extra))
    return code, list(csv.DictReader(out.open())) if out.exists() else []


def test_bench_counts_and_determinism(tmp_path):
    code, rows = bench(tmp_path, "a.csv")
    assert code == 0
    assert len(rows) == 6
    assert [r["instance"] for r in rows[4:]] == ["ALL", "ALL"]
    assert [(r["solver"], r["seed"]) for r in rows[:4]] == [("opo", "0"), ("opo", "1"), ("phase", "0"), ("phase", "1")]
    _, again = bench(tmp_path, "b.csv")
    assert [r["best_energy"] for r in rows] == [r["best_energy"] for r in again]


def test_bench_cut_identity(tmp_path):
    from lagrange_ising import load_instance

    inst = load_instance(DATA / "sample10.gset")
    W = float(np.sum(np.triu(inst.J, 1)))
    _, rows = bench(tmp_path, "c.csv")
    for r in rows[:4]:
        assert float(r["best_cut"]) == pytest.approx((W - float(r["best_energy"]) / 2.0) / 2.0)


def test_bench_threads_env(tmp_path, monkeypatch):
    _, serial = bench(tmp_path, "s.csv")
    monkeypatch.setenv("LAGRANGE_ISING_THREADS", "3")
    _, threaded = bench(tmp_path, "p.csv")
    assert [r["best_energy"] for r in serial] == [r["best_energy"] for r in threaded]


def test_bench_empty_sweep():
    assert main(["bench", "--solvers", "opo"]) == 1


def test_bench_all_rows_fail(tmp_path):
    assert main(["bench", "--instances", str(tmp_path / "none.gset"), "--solvers", "opo",
                 "--out", str(tmp_path / "x.csv")]) == 2


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"solver": "opo", "restarts": 2, "seed": 4, "steps": 200}))
    out = tmp_path / "r.json"
    assert main(["solve", "--config", str(cfg), "--instance", str(DATA / "sample10.gset"), "--restarts", "3",
                 "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["restarts"] == 3 and rec["seed"] == 4
