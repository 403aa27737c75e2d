import json
import os
import signal
import subprocess
import sys
import time

import pytest

from conftest import path, triangle
from misbench.bench import parse_graph, read_results, write_graph
from misbench.bench.cli import main, parse_duration
from misbench.exact import export_lp
from misbench.gen import gen_er
from misbench.graph import is_independent_set, set_weight


@pytest.fixture
def er_file(tmp_path):
    f = tmp_path / "g.metis"
    write_graph(gen_er(40, 0.15, seed=1), f)
    return f


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_duration():
    assert parse_duration("15") == 15.0
    assert parse_duration("15s") == 15.0
    assert parse_duration("500ms") == 0.5
    assert parse_duration("2m") == 120.0
    for bad in ("", "abc", "-1s", "0"):
        with pytest.raises(Exception):
            parse_duration(bad)


def test_solve(er_file, capsys, tmp_path):
    sol = tmp_path / "sol.txt"
    code, out, _ = run(["solve", "--provider", "random", "--reduction", "--local-search",
                        "--time-limit", "15s", "--max-steps", "30", "--solution-out", sol,
                        er_file], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["found"] is True and rec["valid"] is True
    G = parse_graph(er_file)
    assert set_weight(G, rec["best_set"]) == rec["best_weight"]
    assert main(["verify", str(er_file), str(sol)]) == 0


def test_solve_exact_and_greedy(er_file, capsys):
    code, out, _ = run(["solve", "--solver", "exact", er_file], capsys)
    exact = json.loads(out)
    assert code == 0 and exact["proven_optimal"]
    code, out, _ = run(["solve", "--solver", "greedy-maximal", er_file], capsys)
    assert code == 0 and json.loads(out)["best_weight"] <= exact["best_weight"]


def test_verify(tmp_path, capsys):
    g = tmp_path / "t.metis"
    write_graph(triangle(), g)
    bad = tmp_path / "bad.txt"
    bad.write_text("0\n1\n")
    code, out, _ = run(["verify", g, bad], capsys)
    assert code != 0
    assert "INVALID" in out and "(0, 1)" in out
    good = tmp_path / "good.txt"
    good.write_text("2\n")
    code, out, _ = run(["verify", g, good], capsys)
    assert code == 0 and out.startswith("VALID")
    bad.write_text("7\n")
    assert run(["verify", g, bad], capsys)[0] != 0


def test_gen_deterministic(tmp_path, capsys):
    args = ["gen", "--model", "er", "--n", "100", "--p", "0.15", "--seed", "7", "--count", "10"]
    assert run(args + ["--out", tmp_path / "a"], capsys)[0] == 0
    assert run(args + ["--out", tmp_path / "b"], capsys)[0] == 0
    a = sorted((tmp_path / "a").iterdir())
    b = sorted((tmp_path / "b").iterdir())
    assert len(a) == 10 and [f.name for f in a] == [f.name for f in b]
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))
    assert len({f.read_bytes() for f in a}) == 10
    G = parse_graph(a[0])
    assert G.n == 100 and G.unweighted


def test_gen_weighted_range(tmp_path, capsys):
    code, _, _ = run(["gen", "--model", "hk", "--n-min", "20", "--n-max", "30", "--count", "3",
                      "--weighted", "--format", "dimacs", "--out", tmp_path], capsys)
    assert code == 0
    for f in sorted(tmp_path.iterdir()):
        G = parse_graph(f)
        assert 20 <= G.n <= 30 and not G.unweighted


def test_gen_rejects_foreign_parameter(tmp_path):
    with pytest.raises(SystemExit):
        main(["gen", "--model", "ba", "--n", "10", "--p", "0.1", "--out", str(tmp_path)])


def test_usage_errors():
    for argv in (["frobnicate"], [], ["solve", "--no-such-flag", "g.metis"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code != 0


def test_missing_file(capsys):
    code, _, err = run(["solve", "/nonexistent/g.metis"], capsys)
    assert code != 0 and "error" in err


def test_export(tmp_path, capsys):
    g = tmp_path / "p.metis"
    write_graph(path(3), g)
    code, out, _ = run(["export-lp", g], capsys)
    assert code == 0 and out == export_lp(path(3))
    dest = tmp_path / "p.qp"
    assert run(["export-qp", g, "-o", dest], capsys)[0] == 0
    assert "x0^2" in dest.read_text()


def test_benchmark_and_table(tmp_path, capsys):
    d = tmp_path / "inst"
    d.mkdir()
    optima = {}
    for i in range(3):
        f = d / f"g{i}.metis"
        G = gen_er(25, 0.2, seed=i)
        write_graph(G, f)
    for i in range(3):
        rec = json.loads(run(["solve", "--solver", "exact", d / f"g{i}.metis"], capsys)[1])
        optima[f"g{i}.metis"] = rec["best_weight"]
    opt_file = tmp_path / "opt.json"
    opt_file.write_text(json.dumps(optima))
    res = tmp_path / "res.jsonl"
    code, out, _ = run(["benchmark", d, "--results", res, "--optima", opt_file, "--label", "ER",
                        "--reduction", "--local-search", "--max-steps", "40", "--prob-maps", "8"],
                       capsys)
    assert code == 0
    assert out.splitlines()[0].split()[0] == "dataset"
    assert "(3)" in out.splitlines()[3]
    records = read_results(res)
    assert len(records) == 3 and all(r["found"] for r in records)

    code, out, _ = run(["table", res, "--optima", opt_file, "--style", "csv"], capsys)
    assert code == 0
    row = out.splitlines()[1].split(",")
    assert row[0] == "ER" and 0 < float(row[3]) <= 1.0 and row[5] == "3"


def test_benchmark_partial_failure(tmp_path, capsys):
    d = tmp_path / "inst"
    d.mkdir()
    for i in range(4):
        write_graph(gen_er(15, 0.2, seed=i), d / f"g{i}.metis")
    (d / "broken.metis").write_text("not a graph\n")
    code, _, err = run(["benchmark", d, "--results", tmp_path / "r.jsonl", "--max-steps", "10"],
                       capsys)
    assert code != 0 and "1 of 5" in err
    records = read_results(tmp_path / "r.jsonl")
    assert sum(r["found"] for r in records) == 4


def test_batch_is_crash_safe(tmp_path):
    d = tmp_path / "inst"
    d.mkdir()
    for i in range(20):
        write_graph(gen_er(60, 0.15, seed=i), d / f"g{i:02d}.metis")
    res = tmp_path / "r.jsonl"
    proc = subprocess.Popen([sys.executable, "-m", "misbench", "benchmark", str(d),
                             "--results", str(res), "--time-limit", "0.4s"],
                            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    deadline = time.time() + 60
    while time.time() < deadline:
        if res.exists() and res.read_text().count("\n") >= 3:
            break
        time.sleep(0.05)
    os.kill(proc.pid, signal.SIGKILL)
    proc.wait()
    records = read_results(res)
    assert 3 <= len(records) < 20
    for rec in records:
        G = parse_graph(rec["instance"])
        assert is_independent_set(G, rec["best_set"])
        assert set_weight(G, rec["best_set"]) == rec["best_weight"]
