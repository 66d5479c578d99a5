import csv
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from conftest import instance
from mttspo import cli
from mttspo.model import load_instance, load_solution, save_instance, validate_solution


@pytest.fixture
def gen_dir(tmp_path):
    out = tmp_path / "gen"
    assert cli.main(["generate", "--targets", "4", "--rows", "6", "--cols", "6", "--seed", "3",
                     "--out", str(out)]) == 0
    return out


def _write(tmp_path, name, inst):
    path = tmp_path / name
    save_instance(inst, path)
    return str(path)


def test_solve_generated(gen_dir, tmp_path, capsys):
    sol = tmp_path / "sol.json"
    stats = tmp_path / "stats.json"
    rc = cli.main(["solve", str(gen_dir / "instance.json"), "--solution-out", str(sol),
                   "--stats-out", str(stats), "--json"])
    assert rc == cli.EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "FEASIBLE" and out["valid"]
    inst = load_instance(gen_dir / "instance.json")
    assert validate_solution(inst, load_solution(sol, inst)).ok
    st = json.loads(stats.read_text())
    assert set(st) == {"visibility_s", "twg_s", "tree_s", "nodes_popped", "astar_calls",
                       "prunes", "status"}


def test_solve_zero_targets(tmp_path, capsys):
    path = _write(tmp_path, "empty.json", instance([], depot=(1, 2)))
    assert cli.main(["solve", path, "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["final_time"] == 0.0


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["solve", str(bad)]) == cli.EXIT_INPUT
    assert cli.main(["solve", str(tmp_path / "missing.json")]) == cli.EXIT_INPUT
    hard = _write(tmp_path, "hard.json", instance([[(0, 1, (1, 0))], [(0, 2, (50, 0))]]))
    assert cli.main(["solve", hard]) == cli.EXIT_INFEASIBLE
    easy = _write(tmp_path, "easy.json", instance([[(0, 10, (1, 0))], [(0, 10, (0, 1))]]))
    assert cli.main(["solve", easy, "--budget", "0"]) == cli.EXIT_TIMEOUT
    assert cli.main(["baseline", easy, "--budget", "0"]) == cli.EXIT_TIMEOUT
    assert cli.main(["analyze", hard, "--out", str(tmp_path / "u.json")]) == cli.EXIT_INFEASIBLE


def test_baseline_attempts(tmp_path, capsys):
    easy = _write(tmp_path, "easy.json", instance([[(0, 20, (1, 0))], [(0, 20, (0, 2))]]))
    log = tmp_path / "att.csv"
    assert cli.main(["baseline", easy, "--attempts-out", str(log), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["n_per_target"] == 10
    hard = _write(tmp_path, "hard.json", instance([[(0, 1, (1, 0))], [(0, 2, (50, 0))]]))
    assert cli.main(["baseline", hard, "--max-n", "30", "--attempts-out", str(log)]) == 4
    rows = list(csv.reader(open(log)))
    assert rows[0] == ["n_per_target", "wall_s", "status"]
    ns = [int(r[0]) for r in rows[1:]]
    assert ns == sorted(ns) == [10, 20, 30]


def test_sweep_counts_and_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sweep", "--experiment", "1", "--seeds", "5", "--out", str(a)]) == 0
    files = sorted(p.name for p in a.glob("*.json") if not p.name.endswith(".witness.json"))
    assert len(files) == 105
    assert cli.main(["sweep", "--experiment", "1", "--seeds", "5", "--out", str(b)]) == 0
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    c = tmp_path / "c"
    assert cli.main(["sweep", "--experiment", "2", "--seeds", "1", "--out", str(c)]) == 0
    inst = load_instance(c / "exp2_t4_w6_r0.json")
    assert all(len(w) == 6 for w in inst.targets)


def test_sweep_plan_full_scale():
    plan = cli.sweep_plan(1, full_scale=True, seeds=10)
    assert len(plan) == 3 * 10 * 13
    assert {p.n_targets for _, p, _ in plan} == {10, 20, 30}


def test_bench(tmp_path, gen_dir):
    empty = tmp_path / "empty"
    empty.mkdir()
    out = tmp_path / "bench.csv"
    assert cli.main(["bench", str(empty), "--out", str(out)]) == 0
    assert out.read_text().splitlines() == [",".join(cli.BENCH_FIELDS)]
    assert cli.main(["bench", str(gen_dir), "--out", str(out), "--budget", "60"]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [r["solver"] for r in rows] == ["mtvg", "baseline"]
    assert rows[0]["status"] == "FEASIBLE" and float(rows[0]["cost"]) > 0
    out2 = tmp_path / "bench2.csv"
    assert cli.main(["bench", str(gen_dir), "--out", str(out2), "--budget", "60",
                     "--workers", "2"]) == 0
    again = list(csv.DictReader(open(out2)))
    assert [(r["status"], r["cost"]) for r in again] == [(r["status"], r["cost"]) for r in rows]
    assert cli.main(["bench", str(gen_dir), "--solvers", "magic"]) == cli.EXIT_INPUT


def test_render_parses(tmp_path, gen_dir):
    svg = tmp_path / "scene.svg"
    assert cli.main(["render", str(gen_dir / "instance.json"), "--out", str(svg)]) == 0
    root = ET.parse(svg).getroot()
    assert root.tag.endswith("svg")
    assert not any(e.tag.endswith("polyline") for e in root.iter())
    assert cli.main(["render", str(gen_dir / "instance.json"), "--solution",
                     str(gen_dir / "witness.json"), "--out", str(svg)]) == 0
    root = ET.parse(svg).getroot()
    assert any(e.tag.endswith("polyline") for e in root.iter())


def test_analyze(tmp_path, gen_dir, capsys):
    out = tmp_path / "u.json"
    assert cli.main(["analyze", str(gen_dir / "instance.json"), "--out", str(out),
                     "--csv-prefix", str(tmp_path / "u"), "--json"]) == 0
    rep = json.loads(out.read_text())
    assert 0.0 <= rep["min_fraction"] <= 1.0
    assert json.loads(capsys.readouterr().out)["min_fraction"] == rep["min_fraction"]
    assert (tmp_path / "u_fractions.csv").exists()


def test_debug_dumps(tmp_path, gen_dir):
    args = ["solve", str(gen_dir / "instance.json"), "--dump-dot", str(tmp_path / "g.dot"),
            "--dump-intervals", str(tmp_path / "v.csv"), "--dump-lfdt", str(tmp_path / "l.csv"),
            "--trace-out", str(tmp_path / "t.csv")]
    assert cli.main(args) == 0
    assert (tmp_path / "g.dot").read_text().startswith("graph")
    assert (tmp_path / "l.csv").read_text().startswith("u,v,lfdt")
    assert (tmp_path / "t.csv").read_text().startswith("search,node,g,f,parent")


def test_no_timing_reruns_identical(tmp_path, gen_dir):
    outs = []
    for k in range(2):
        sol, st = tmp_path / f"s{k}.json", tmp_path / f"t{k}.json"
        cli.main(["solve", str(gen_dir / "instance.json"), "--solution-out", str(sol),
                  "--stats-out", str(st), "--no-timing"])
        outs.append((sol.read_bytes(), st.read_bytes()))
    assert outs[0] == outs[1]


def test_console_script(tmp_path):
    path = _write(tmp_path, "one.json", instance([[(0, 10, (1, 0))]]))
    proc = subprocess.run([sys.executable, "-m", "mttspo.cli", "solve", path, "--json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "FEASIBLE"
