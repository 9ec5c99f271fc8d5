from __future__ import annotations

import itertools
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from mvrc_robust.benchmarks import build, build_auction
from mvrc_robust.model import AnalysisSettings, BTP, Kind, RelationDecl, Schema, Statement, Stmt, Workload, seq
from mvrc_robust.oracle import (
    DepKind,
    GeneratorReport,
    OpKind,
    Schedule,
    TupleId,
    Universe,
    check_summary_condition,
    check_theorem_cycles,
    compute_dependencies,
    count_interleavings,
    fuzz,
    generate_mvrc_schedules,
    instantiate,
    is_conflict_serializable,
    is_mvrc_allowed,
    lemma_violations,
    mvrc_violations,
    random_transactions,
    serialization_graph,
)
from mvrc_robust.robustness import build_graph
from mvrc_robust.unfold import unfold_program, unfold_workload

from fixtures import running_example
from strategies import workloads

SCHEMA = Schema((RelationDecl("R", ("id", "v"), ("id",)),))
X, Y = TupleId("R", "x"), TupleId("R", "y")
UNIVERSE = Universe({"R": (X, Y)})


def _stmt(label, kind, obs=None, mod=None, pred=None):
    return Statement(label, kind, "R", pred, obs, mod)


def _ltp(name, *stmts):
    (ltp,) = unfold_program(BTP(name, seq(*(Stmt(s) for s in stmts))))
    return ltp


READ_WRITE = _ltp("RW", _stmt("r", Kind.KEY_SEL, frozenset({"v"})), _stmt("w", Kind.KEY_UPD, frozenset(), frozenset({"v"})))


# --- the running Auction example -------------------------------------------

def test_running_example_dependencies():
    s, graph = running_example()
    assert is_mvrc_allowed(s)
    deps = compute_dependencies(s)
    by_ops = {(str(d.src_op), str(d.dst_op)): d for d in deps}
    wr = by_ops["W1[t1]", "R2[t1]"]
    assert wr.kind is DepKind.WR and not wr.counterflow
    rw = by_ops["R3[v1]", "W2[v1]"]
    assert rw.kind is DepKind.RW and rw.counterflow
    assert check_summary_condition(s, graph, deps)
    assert is_conflict_serializable(s, deps)
    assert (str(wr.src_op.origin), str(wr.dst_op.origin)) == ("q3", "q3")
    assert (str(rw.src_op.origin), str(rw.dst_op.origin)) == ("q2", "q5")


# --- generation -------------------------------------------------------------

def _commit_only(tid):
    return instantiate(_ltp("E"), {}, tid)


def test_commit_only_transactions_have_two_schedules():
    txns = [_commit_only(1), _commit_only(2)]
    assert len(list(generate_mvrc_schedules(txns, UNIVERSE, budget=100))) == 2


def test_one_statement_each_gives_six_schedules():
    ltp = _ltp("S", _stmt("q", Kind.KEY_SEL, frozenset({"v"})))
    txns = [instantiate(ltp, {0: X}, 1), instantiate(ltp, {0: X}, 2)]
    assert count_interleavings(txns) == 6
    report = GeneratorReport()
    assert len(list(generate_mvrc_schedules(txns, UNIVERSE, budget=100, report=report))) == 6
    assert report.exhaustive


def test_dirty_writes_are_excluded():
    ltp = _ltp("W", _stmt("q", Kind.KEY_UPD, frozenset(), frozenset({"v"})))
    txns = [instantiate(ltp, {0: X}, 1), instantiate(ltp, {0: X}, 2)]
    # W1 W2 C1 C2 is a dirty write; only the two serial orders survive.
    schedules = list(generate_mvrc_schedules(txns, UNIVERSE, budget=100))
    assert len(schedules) == 2
    bad = Schedule.from_units(txns, [1, 2, 1, 2], UNIVERSE)
    assert any("dirty write" in p for p in mvrc_violations(bad))


def test_budget_zero_yields_nothing():
    txns = [_commit_only(1), _commit_only(2)]
    assert list(generate_mvrc_schedules(txns, UNIVERSE, budget=0)) == []
    report = fuzz(build_auction(), budget=0)
    assert report.ok and report.schedules == 0


def test_write_skew_is_found():
    t1 = instantiate(READ_WRITE, {0: X, 1: Y}, 1)
    t2 = instantiate(READ_WRITE, {0: Y, 1: X}, 2)
    found = [s for s in generate_mvrc_schedules([t1, t2], UNIVERSE, budget=100) if not is_conflict_serializable(s)]
    assert found
    s = found[0]
    deps = compute_dependencies(s)
    assert sum(d.counterflow for d in deps) >= 1
    assert check_theorem_cycles(s, deps).ok


def test_lost_update_is_not_possible():
    # Updates read the latest committed version after acquiring the write,
    # so two increments of the same tuple serialize.
    upd = _ltp("U", _stmt("q", Kind.KEY_UPD, frozenset({"v"}), frozenset({"v"})))
    txns = [instantiate(upd, {0: X}, 1), instantiate(upd, {0: X}, 2)]
    assert all(is_conflict_serializable(s) for s in generate_mvrc_schedules(txns, UNIVERSE, budget=100))


# --- properties over random schedules ---------------------------------------

def _serializable_by_permutation(s: Schedule) -> bool:
    deps = compute_dependencies(s)
    ids = [t.id for t in s.transactions]
    for perm in itertools.permutations(ids):
        rank = {t: i for i, t in enumerate(perm)}
        if all(rank[d.src_txn] < rank[d.dst_txn] for d in deps):
            return True
    return False


def _random_schedules(workload: Workload, seed: int, n: int = 20):
    rng = random.Random(seed)
    ltps = unfold_workload(workload.programs)
    out = []
    for _ in range(10):
        universe = Universe.random(workload.schema, rng, 2)
        txns = random_transactions(ltps, universe, rng, 3)
        if txns is None:
            continue
        out.extend(generate_mvrc_schedules(txns, universe, budget=n, seed=rng.randrange(1000)))
    return out


@settings(max_examples=40)
@given(workloads(max_programs=2), st.integers(0, 10_000))
def test_schedule_invariants(workload, seed):
    graph = build_graph(workload)
    for s in _random_schedules(workload, seed):
        deps = compute_dependencies(s)
        assert is_mvrc_allowed(s)
        assert lemma_violations(deps) == []
        assert check_theorem_cycles(s, deps).ok
        assert check_summary_condition(s, graph, deps)
        assert is_conflict_serializable(s, deps) == _serializable_by_permutation(s)
        assert len(serialization_graph(s, deps).quadruples()) == len(deps)
        # versions are a function of the operation order alone
        again = Schedule(s.transactions, s.order, s.initial_visible, s.universe)
        assert again.read_version == s.read_version and again.pred_versions == s.pred_versions


@settings(max_examples=40)
@given(workloads(max_programs=2), st.integers(0, 10_000))
def test_serial_schedules_have_only_forward_dependencies(workload, seed):
    for s in _random_schedules(workload, seed):
        commits = sorted(s.transactions, key=lambda t: s.commit_pos[t.id])
        serial = Schedule.from_units(
            commits, [t.id for t in commits for _ in t.units], s.universe, s.initial_visible
        )
        if not is_mvrc_allowed(serial):
            continue
        rank = {t.id: i for i, t in enumerate(commits)}
        for d in compute_dependencies(serial):
            assert not d.counterflow
            assert rank[d.src_txn] < rank[d.dst_txn]


@settings(max_examples=40)
@given(workloads(max_programs=2), st.integers(0, 10_000))
def test_each_tuple_inserted_or_deleted_at_most_once(workload, seed):
    for s in _random_schedules(workload, seed):
        for kind in (OpKind.I, OpKind.D):
            touched = [op.tuple for op in s.order if op.kind is kind]
            assert len(touched) == len(set(touched))


@settings(max_examples=25)
@given(workloads(max_programs=3), st.integers(0, 10_000))
def test_fuzz_finds_no_invariant_violation(workload, seed):
    report = fuzz(workload, AnalysisSettings(), budget=60, seed=seed, max_txns=3, max_tuples=2)
    assert report.ok, [c.detail for c in report.counterexamples]


def test_fuzz_is_deterministic():
    a = fuzz(build("smallbank"), budget=50, seed=3)
    b = fuzz(build("smallbank"), budget=50, seed=3)
    assert a.summary() == b.summary()


def test_fuzz_reports_expected_anomalies_on_non_robust_subset():
    w = build("smallbank").restrict(["Balance", "Amalgamate"])
    report = fuzz(w, budget=400, seed=1)
    assert not report.robust
    assert report.ok
    assert report.non_serializable > 0
    assert report.lemma_violations == report.theorem_violations == report.condition_violations == 0
