from __future__ import annotations

import csv
import io
import subprocess
import sys

import pytest

from mvrc_robust.cli import EXIT_INPUT, EXIT_INVARIANT, EXIT_NOT_ROBUST, EXIT_ROBUST, SCALE_HEADER, main, scale_rows


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_check_auction():
    code, out = run("check", "--bench", "auction", "--granularity", "attr", "--fk")
    assert code == EXIT_ROBUST
    assert out.startswith("ROBUST\n")
    assert "summary graph: 3 nodes, 17 edges, 1 counterflow" in out


def test_check_auction_type1():
    code, out = run("check", "--bench", "auction", "--method", "type1")
    assert code == EXIT_NOT_ROBUST
    assert out.startswith("NOT ROBUST\n")
    assert "FindBids.q2 --[counterflow]--> PlaceBid[1].q5" in out


def test_check_smallbank_prints_witness():
    code, out = run("check", "--bench", "smallbank")
    assert code == EXIT_NOT_ROBUST
    lines = out.splitlines()
    assert lines[0] == "NOT ROBUST"
    assert lines[1].startswith("cycle (")
    assert all("--[" in l for l in lines[2:-1])


def test_check_delivery_alone():
    code, out = run("check", "--bench", "tpcc", "--programs", "Del")
    assert code == EXIT_NOT_ROBUST
    assert "statement-order" in out


@pytest.mark.parametrize("argv, expected", [
    (("--bench", "tpcc"), ["{OS, Pay, SL}", "{NO, Pay}"]),
    (("--bench", "smallbank", "--granularity", "tuple", "--no-fk"), ["{Am, DC, TS}", "{Bal, DC}", "{Bal, TS}"]),
    (("--bench", "auction", "--granularity", "tuple", "--no-fk"), ["{FB}"]),
])
def test_subsets(argv, expected):
    code, out = run("subsets", *argv)
    assert code == EXIT_ROBUST
    assert out.splitlines() == expected


def test_subsets_guard():
    code, _ = run("subsets", "--bench", "tpcc", "--limit", "3")
    assert code == EXIT_INPUT


def test_graph_dot(tmp_path):
    code, out = run("graph", "--bench", "auction", "--dot", "-")
    assert code == EXIT_ROBUST
    lines = out.splitlines()
    assert lines[0] == "digraph summary {" and lines[-1] == "}"
    dashed = [l for l in lines if "style=dashed" in l]
    assert dashed == ['  "FindBids" -> "PlaceBid[1]" [label="q2 -> q5", style=dashed];']
    path = tmp_path / "sb.dot"
    code, out = run("graph", "--bench", "smallbank", "--dot", str(path))
    assert out == "nodes 5 edges 56 counterflow 12\n"
    assert sum(" -> " in l and "[label=" in l for l in path.read_text().splitlines()) == 56


def test_graph_empty_workload(tmp_path):
    wl = tmp_path / "empty.wl"
    wl.write_text("schema {\n}\n")
    code, out = run("graph", str(wl), "--dot", "-")
    assert code == EXIT_ROBUST
    assert out == "digraph summary {\n}\n"


def test_scale_rows():
    rows = list(scale_rows([1, 10], repeats=1))
    assert [(r[0], r[3], r[4], r[5]) for r in rows] == [(1, 17, 1, "ROBUST"), (10, 980, 10, "ROBUST")]
    assert list(scale_rows([1, 2], repeats=0)) == []


def test_scale_csv(tmp_path):
    path = tmp_path / "scale.csv"
    code, _ = run("scale", "--n-list", "1-3", "--repeats", "1", "--csv", str(path))
    assert code == EXIT_ROBUST
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == SCALE_HEADER
    assert [r[0] for r in rows[1:]] == ["1", "2", "3"]
    code, out = run("scale", "--n-list", "1", "--repeats", "0")
    assert out == ",".join(SCALE_HEADER) + "\n"


def test_scale_bad_n_list():
    assert run("scale", "--n-list", "x")[0] == EXIT_INPUT
    assert run("scale", "--n-list", "0")[0] == EXIT_INPUT


def test_fuzz_ok():
    code, out = run("fuzz", "--bench", "auction", "--budget", "50", "--seed", "7")
    assert code == EXIT_ROBUST
    assert "OK: no invariant violations" in out
    code, out = run("fuzz", "--bench", "auction", "--budget", "0")
    assert code == EXIT_ROBUST and "schedules=0" in out


def test_fuzz_non_robust_subset_is_not_a_failure():
    code, out = run("fuzz", "--bench", "smallbank", "--programs", "Bal,Am", "--budget", "400", "--seed", "1")
    assert code == EXIT_ROBUST
    assert "expected, the workload is not declared robust" in out


def test_fuzz_exit_code_on_violation(monkeypatch):
    from mvrc_robust import oracle

    real = oracle.fuzz

    def broken(*args, **kwargs):
        report = real(*args, **kwargs)
        report.lemma_violations = 1
        return report

    monkeypatch.setattr(oracle, "fuzz", broken)
    code, out = run("fuzz", "--bench", "auction", "--budget", "5")
    assert code == EXIT_INVARIANT
    assert "INVARIANT VIOLATION" in out


def test_input_errors(tmp_path, capsys):
    assert run("check")[0] == EXIT_INPUT
    assert run("check", "--bench", "nope")[0] == EXIT_INPUT
    assert run("check", str(tmp_path / "missing.wl"))[0] == EXIT_INPUT
    assert run("check", "--bench", "tpcc", "--programs", "Zzz")[0] == EXIT_INPUT
    bad = tmp_path / "bad.wl"
    bad.write_text("schema { relation A(x) key(x) }\nprogram P {\n  q1: key_update A read {} write {}\n}\n")
    assert run("check", str(bad))[0] == EXIT_INPUT
    assert "stmt.key_update.write" in capsys.readouterr().err


def test_sql2btp(tmp_path, capsys):
    from mvrc_robust.benchmarks import data_text

    sql = tmp_path / "auction.sql"
    sql.write_text(data_text("auction.sql"))
    code, out = run("sql2btp", str(sql), "--bench", "auction")
    assert code == EXIT_ROBUST
    assert "program PlaceBid {" in out and "# constraint q3 = f1(q4)" in out
    join = tmp_path / "join.sql"
    join.write_text("P(:b):\n  SELECT bid FROM Bids JOIN Buyer ON id = buyerId WHERE id = :b;\n")
    assert run("sql2btp", str(join), "--bench", "auction")[0] == EXIT_INPUT
    assert "unsupported syntax" in capsys.readouterr().err


def test_output_is_deterministic():
    assert run("subsets", "--bench", "smallbank") == run("subsets", "--bench", "smallbank")
    assert run("graph", "--bench", "tpcc", "--dot", "-") == run("graph", "--bench", "tpcc", "--dot", "-")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mvrc_robust", "check", "--bench", "auction"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("ROBUST")
