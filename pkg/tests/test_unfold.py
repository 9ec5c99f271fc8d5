from __future__ import annotations

from hypothesis import given

from mvrc_robust.benchmarks import build_auction, build_tpcc
from mvrc_robust.model import BTP, Branch, Kind, Loop, Optional_, Seq, Statement, Stmt, seq
from mvrc_robust.unfold import LTPAnnotation, count_unfoldings, unfold_program, unfold_workload

from strategies import workloads


def _s(label: str) -> Stmt:
    return Stmt(Statement(label, Kind.KEY_SEL, "R", None, frozenset(), None))


def _labels(ltp):
    return [s.label for s in ltp.statements]


def test_place_bid_has_two_unfoldings():
    ltps = unfold_program(build_auction().program("PlaceBid"))
    assert [_labels(l) for l in ltps] == [["q3", "q4", "q5", "q6"], ["q3", "q4", "q6"]]
    assert [l.name for l in ltps] == ["PlaceBid[1]", "PlaceBid[2]"]


def test_single_unfolding_keeps_name():
    (ltp,) = unfold_program(build_auction().program("FindBids"))
    assert ltp.name == "FindBids"


def test_tpcc_unfolding_counts():
    counts = {p.name: len(unfold_program(p)) for p in build_tpcc().programs}
    assert counts == {"Delivery": 3, "NewOrder": 3, "OrderStatus": 2, "Payment": 4, "StockLevel": 1}
    assert sum(counts.values()) == 13


def test_loop_gives_zero_one_two_iterations():
    ltps = unfold_program(BTP("P", seq(_s("a"), Loop(seq(_s("b"), _s("c"))))))
    assert [_labels(l) for l in ltps] == [["a"], ["a", "b", "c"], ["a", "b", "c", "b", "c"]]
    assert [str(o) for o in ltps[2].occurrences] == ["a", "b", "c", "b#2", "c#2"]


def test_branch_and_optional():
    body = seq(Branch(_s("a"), _s("b")), Optional_(_s("c")))
    assert [_labels(l) for l in unfold_program(BTP("P", body))] == [["a", "c"], ["a"], ["b", "c"], ["b"]]
    assert count_unfoldings(body) == 4


def test_annotations_replicated_over_occurrences():
    from mvrc_robust.model import FKAnnotation

    body = seq(_s("t"), Loop(_s("s")))
    ltps = unfold_program(BTP("P", body, (FKAnnotation("t", "f", "s"),)))
    assert [l.fk_annotations for l in ltps] == [
        (),
        (LTPAnnotation(0, "f", 1),),
        (LTPAnnotation(0, "f", 1), LTPAnnotation(0, "f", 2)),
    ]


def test_empty_workload_unfolds_to_nothing():
    assert unfold_workload([]) == []


def _nested(node) -> bool:
    def inside(n, depth):
        if isinstance(n, Stmt):
            return False
        if isinstance(n, Seq):
            return any(inside(c, depth) for c in n.children)
        if depth >= 1:
            return True
        kids = (n.left, n.right) if isinstance(n, Branch) else (n.body,)
        return any(inside(k, depth + 1) for k in kids)
    return inside(node, 0)


@given(workloads())
def test_unfoldings_are_distinct_and_bounded(workload):
    for prog in workload.programs:
        ltps = unfold_program(prog)
        seqs = [tuple(_labels(l)) for l in ltps]
        assert len(set(seqs)) == len(seqs)
        assert 1 <= len(ltps) <= count_unfoldings(prog.body)
        labels = {s.label for s in prog.statements()}
        for ltp in ltps:
            assert set(_labels(ltp)) <= labels
            for ann in ltp.fk_annotations:
                assert ltp.statements[ann.target].label in labels
                assert ltp.statements[ann.source].label in labels


@given(workloads())
def test_count_formula_is_exact_without_duplicates(workload):
    # Labels are unique, so two different choices give different sequences
    # except where an empty alternative coincides with another empty one.
    for prog in workload.programs:
        seqs = [tuple(_labels(l)) for l in unfold_program(prog)]
        if () not in seqs and not _nested(prog.body):
            assert len(seqs) == count_unfoldings(prog.body)
