from __future__ import annotations

import itertools

from hypothesis import given

from mvrc_robust.benchmarks import build, build_auction, build_auction_n
from mvrc_robust.model import ALL_SETTINGS, AnalysisSettings, Granularity, Kind
from mvrc_robust.robustness import build_graph
from mvrc_robust.summary_graph import (
    CHECK,
    C_DEP_TABLE,
    Edge,
    Flow,
    NC_DEP_TABLE,
    c_dep_conds,
    c_dep_table,
    construct_summary_graph,
    fk_guards,
    nc_dep_conds,
    nc_dep_table,
)
from mvrc_robust.unfold import unfold_program, unfold_workload

from strategies import workloads

WRITERS = {Kind.INS, Kind.KEY_UPD, Kind.PRED_UPD, Kind.KEY_DEL, Kind.PRED_DEL}
PURE_WRITERS = {Kind.INS, Kind.KEY_DEL, Kind.KEY_UPD}


def naive_graph(ltps, settings, schema) -> set[Edge]:
    """Pairwise construction straight from the public cell and condition functions."""
    edges = set()
    for a, b in itertools.product(ltps, repeat=2):
        for i, j in itertools.product(range(len(a)), range(len(b))):
            qi, qj = a.statements[i], b.statements[j]
            if qi.relation != qj.relation:
                continue
            cell = nc_dep_table(qi.kind, qj.kind)
            if cell is True or (cell == CHECK and nc_dep_conds(qi, qj, settings.granularity, schema)):
                edges.add(Edge(a.name, a.occurrences[i], Flow.NON_COUNTERFLOW, b.occurrences[j], b.name))
            cell = c_dep_table(qi.kind, qj.kind)
            if cell is True or (cell == CHECK and c_dep_conds(i, a, j, b, settings, schema)):
                edges.add(Edge(a.name, a.occurrences[i], Flow.COUNTERFLOW, b.occurrences[j], b.name))
    return edges


def test_table_cells():
    assert nc_dep_table(Kind.INS, Kind.PRED_SEL) is True
    assert nc_dep_table(Kind.KEY_SEL, Kind.KEY_SEL) is False
    assert nc_dep_table(Kind.KEY_SEL, Kind.KEY_UPD) == CHECK
    assert c_dep_table(Kind.PRED_SEL, Kind.INS) is True
    assert c_dep_table(Kind.KEY_SEL, Kind.KEY_UPD) == CHECK
    assert len(NC_DEP_TABLE) == len(C_DEP_TABLE) == 49


def test_counterflow_needs_a_reader_and_a_writer():
    for (ki, kj), cell in C_DEP_TABLE.items():
        if ki in PURE_WRITERS or kj not in WRITERS:
            assert cell is False, (ki, kj)


def test_two_readers_never_conflict():
    readers = set(Kind) - WRITERS
    for ki, kj in itertools.product(readers, repeat=2):
        assert NC_DEP_TABLE[ki, kj] is False
        assert C_DEP_TABLE[ki, kj] is False


def test_condition_examples():
    place = unfold_program(build_auction().program("PlaceBid"))[0]
    find = unfold_program(build_auction().program("FindBids"))[0]
    q2, q5 = find.statements[1], place.statements[2]
    assert nc_dep_conds(q2, q5)
    # q2 reads bid through a predicate, q5 writes bid: counterflow with or without FKs.
    for settings in ALL_SETTINGS:
        assert c_dep_conds(1, find, 2, place, settings, build_auction().schema)
    # q4 reads Bids and q5 writes the same tuple; both are guarded by q3 = f1(.).
    assert fk_guards(place, 1) == fk_guards(place, 2) == frozenset({"f1"})
    assert not c_dep_conds(1, place, 2, place, AnalysisSettings(use_fk=True))
    assert c_dep_conds(1, place, 2, place, AnalysisSettings(use_fk=False))


def test_auction_graph_has_single_counterflow_edge():
    graph = build_graph(build_auction())
    assert graph.stats() == (3, 17, 1)
    (cf,) = [e for e in graph.edges if e.counterflow]
    assert (cf.src_program, str(cf.src), str(cf.dst), cf.dst_program) == ("FindBids", "q2", "q5", "PlaceBid[1]")


def test_auction_n_matches_naive_construction():
    for n in (1, 2, 3):
        w = build_auction_n(n)
        ltps = unfold_workload(w.programs)
        graph = build_graph(w)
        assert set(graph.edges) == naive_graph(ltps, AnalysisSettings(), w.schema)
    assert build_graph(build_auction_n(2)).stats() == (6, 52, 2)


def test_benchmarks_match_naive_construction():
    for bench in ("smallbank", "tpcc"):
        w = build(bench)
        ltps = unfold_workload(w.programs)
        for settings in ALL_SETTINGS:
            assert set(build_graph(w, settings).edges) == naive_graph(ltps, settings, w.schema)


@given(workloads())
def test_random_workloads_match_naive_construction(workload):
    ltps = unfold_workload(workload.programs)
    for settings in ALL_SETTINGS:
        graph = construct_summary_graph(ltps, settings, workload.schema)
        assert len(set(graph.edges)) == len(graph.edges)
        assert set(graph.edges) == naive_graph(ltps, settings, workload.schema)


def _split(graph):
    nc = {e for e in graph.edges if not e.counterflow}
    cf = {e for e in graph.edges if e.counterflow}
    return nc, cf


@given(workloads())
def test_settings_monotonicity(workload):
    ltps = unfold_workload(workload.programs)
    g = {(s.granularity, s.use_fk): _split(construct_summary_graph(ltps, s, workload.schema)) for s in ALL_SETTINGS}
    for fk in (False, True):
        attr, tpl = g[Granularity.ATTRIBUTE, fk], g[Granularity.TUPLE, fk]
        assert attr[0] <= tpl[0] and attr[1] <= tpl[1]
    for gran in Granularity:
        with_fk, without = g[gran, True], g[gran, False]
        assert with_fk[0] == without[0]
        assert with_fk[1] <= without[1]


def test_empty_graph():
    graph = construct_summary_graph([], AnalysisSettings())
    assert graph.stats() == (0, 0, 0)
