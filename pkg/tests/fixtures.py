"""Shared schedule used by the oracle and acceptance tests."""

from __future__ import annotations

from mvrc_robust.benchmarks import build_auction
from mvrc_robust.oracle import Schedule, TupleId, Universe, instantiate
from mvrc_robust.robustness import build_graph


def running_example():
    """Three Auction transactions interleaved as in the running example:
    T1 and T2 place bids for buyer t1 while T3 scans every bid."""
    w = build_auction()
    graph = build_graph(w)
    ltps = graph.ltps
    t1, t2 = TupleId("Buyer", "t1"), TupleId("Buyer", "t2")
    v1, v2, v3 = (TupleId("Bids", f"v{i}") for i in (1, 2, 3))
    l1, l2 = TupleId("Log", "l1"), TupleId("Log", "l2")
    universe = Universe(
        {"Buyer": (t1, t2), "Bids": (v1, v2, v3), "Log": (l1, l2)},
        {"f1": {v1: t1, v2: t2, v3: t2}, "f2": {l1: t1, l2: t1}},
    )
    txns = [
        instantiate(ltps["PlaceBid[2]"], {0: t1, 1: v1, 2: l1}, 1, universe),
        instantiate(ltps["PlaceBid[1]"], {0: t1, 1: v1, 2: v1, 3: l2}, 2, universe),
        instantiate(ltps["FindBids"], {0: t2, 1: [v1, v2, v3]}, 3, universe),
    ]
    order = [1, 1, 1, 1, 2, 2, 3, 2, 3, 2, 2, 3]
    return Schedule.from_units(txns, order, universe), graph
