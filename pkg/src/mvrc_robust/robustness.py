"""Robustness tests on summary graphs.

``has_type2_cycle`` is the refined test; ``has_type1_cycle`` is the older
"any cycle through a counterflow edge" baseline.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

from .model import AnalysisSettings, Kind, Method, Workload
from .summary_graph import Edge, Flow, SummaryGraph, construct_summary_graph
from .unfold import unfold_workload
from .validate import ValidationError, check

# Source kinds of the incoming edge that make a following counterflow edge dangerous.
READ_SOURCE_KINDS = frozenset({Kind.KEY_SEL, Kind.PRED_SEL, Kind.PRED_UPD, Kind.PRED_DEL})

TRIGGER_COUNTERFLOW = "second-edge-counterflow"
TRIGGER_ORDER = "statement-order"
TRIGGER_READ_SOURCE = "read-source-kind"

DEFAULT_SUBSET_LIMIT = 20


@dataclass(frozen=True)
class CycleWitness:
    """Edges e1 (non-counterflow), e2 and e3 (counterflow) of a dangerous cycle,
    plus the paths closing it: e1.dst ~> e2.src and e3.dst ~> e1.src."""

    e1: Edge
    e2: Edge
    e3: Edge
    path_e1_to_e2: tuple[Edge, ...]
    path_e3_to_e1: tuple[Edge, ...]
    trigger: str

    def cycle(self) -> tuple[Edge, ...]:
        return (self.e1,) + self.path_e1_to_e2 + (self.e2, self.e3) + self.path_e3_to_e1

    def describe(self) -> str:
        lines = [f"cycle ({self.trigger}):"]
        lines += [f"  {e}" for e in self.cycle()]
        return "\n".join(lines)


@dataclass(frozen=True)
class Verdict:
    robust: bool
    witness: Union[CycleWitness, "CounterflowCycle", None] = None
    graph: Optional[SummaryGraph] = field(default=None, compare=False, repr=False)

    def __bool__(self) -> bool:
        return self.robust


class Reachability:
    """Reflexive-transitive reachability between graph nodes, stored as bitsets."""

    def __init__(self, graph: SummaryGraph):
        self.index = {name: i for i, name in enumerate(graph.nodes)}
        n = len(graph.nodes)
        succ: list[set[int]] = [set() for _ in range(n)]
        for e in graph.edges:
            succ[self.index[e.src_program]].add(self.index[e.dst_program])
        self.succ = succ
        self.rows = []
        for start in range(n):
            seen = 1 << start
            stack = [start]
            while stack:
                u = stack.pop()
                for v in succ[u]:
                    if not seen >> v & 1:
                        seen |= 1 << v
                        stack.append(v)
            self.rows.append(seen)

    def reachable(self, src: str, dst: str) -> bool:
        return bool(self.rows[self.index[src]] >> self.index[dst] & 1)

    def __call__(self, src: str, dst: str) -> bool:
        return self.reachable(src, dst)

    def pairs(self) -> set[tuple[str, str]]:
        names = list(self.index)
        return {(a, b) for a in names for b in names if self.reachable(a, b)}


def reachability(graph: SummaryGraph) -> Reachability:
    return Reachability(graph)


def shortest_path(graph: SummaryGraph, src: str, dst: str) -> Optional[tuple[Edge, ...]]:
    """Fewest-edge path from ``src`` to ``dst`` (empty when they coincide)."""
    if src == dst:
        return ()
    out = graph.out_edges()
    prev: dict[str, Edge] = {}
    queue = deque([src])
    seen = {src}
    while queue:
        u = queue.popleft()
        for e in out.get(u, ()):
            v = e.dst_program
            if v in seen:
                continue
            seen.add(v)
            prev[v] = e
            if v == dst:
                path = []
                while v != src:
                    path.append(prev[v])
                    v = prev[v].src_program
                return tuple(reversed(path))
            queue.append(v)
    return None


def _trigger(graph: SummaryGraph, e2: Edge, e3: Edge) -> Optional[str]:
    if e2.flow is Flow.COUNTERFLOW:
        return TRIGGER_COUNTERFLOW
    if e3.src.position < e2.dst.position:
        return TRIGGER_ORDER
    if graph.statement(e2.src_program, e2.src).kind in READ_SOURCE_KINDS:
        return TRIGGER_READ_SOURCE
    return None


def has_type2_cycle(graph: SummaryGraph) -> Verdict:
    """Search for edges e1 = (P1,q1,nc,q2,P2), e2 = (P3,q3,c,q4,P4) and
    e3 = (P4,q4',cf,q5,P5) with P2 ~> P3 and P5 ~> P1 satisfying the trigger.

    Instead of looping over e1 innermost, the existence of a suitable e1 is
    precomputed per (P5, P3) pair: ``closing[P5]`` holds every P3 such that
    some non-counterflow edge P1 -> P2 has P5 ~> P1 and P2 ~> P3.
    """
    reach = Reachability(graph)
    idx = reach.index
    n = len(graph.nodes)
    # after_nc[P1] = nodes reachable from the target of some nc edge leaving P1
    after_nc = [0] * n
    for e in graph.edges:
        if e.flow is Flow.NON_COUNTERFLOW:
            after_nc[idx[e.src_program]] |= reach.rows[idx[e.dst_program]]
    closing = [0] * n
    for p5 in range(n):
        row = reach.rows[p5]
        acc = 0
        for p1 in range(n):
            if row >> p1 & 1:
                acc |= after_nc[p1]
        closing[p5] = acc

    incoming: dict[str, list[Edge]] = {}
    counterflow_out: dict[str, list[Edge]] = {}
    for e in graph.edges:
        incoming.setdefault(e.dst_program, []).append(e)
        if e.flow is Flow.COUNTERFLOW:
            counterflow_out.setdefault(e.src_program, []).append(e)

    for p4 in graph.nodes:
        for e3 in counterflow_out.get(p4, ()):
            row = closing[idx[e3.dst_program]]
            for e2 in incoming.get(p4, ()):
                if not row >> idx[e2.src_program] & 1:
                    continue
                trigger = _trigger(graph, e2, e3)
                if trigger is not None:
                    return Verdict(False, _witness(graph, reach, e2, e3, trigger), graph)
    return Verdict(True, None, graph)


def _witness(graph: SummaryGraph, reach: Reachability, e2: Edge, e3: Edge, trigger: str) -> CycleWitness:
    for e1 in graph.edges:
        if e1.flow is not Flow.NON_COUNTERFLOW:
            continue
        if reach(e1.dst_program, e2.src_program) and reach(e3.dst_program, e1.src_program):
            return CycleWitness(
                e1, e2, e3,
                shortest_path(graph, e1.dst_program, e2.src_program),
                shortest_path(graph, e3.dst_program, e1.src_program),
                trigger,
            )
    raise AssertionError("no closing non-counterflow edge; reachability is inconsistent")


def has_type2_cycle_naive(graph: SummaryGraph) -> bool:
    """Literal triple loop over (e1, e2, e3); only for cross-checking small graphs."""
    reach = Reachability(graph)
    for e1 in graph.edges:
        if e1.flow is not Flow.NON_COUNTERFLOW:
            continue
        for e2 in graph.edges:
            if not reach(e1.dst_program, e2.src_program):
                continue
            for e3 in graph.edges:
                if e3.flow is not Flow.COUNTERFLOW or e3.src_program != e2.dst_program:
                    continue
                if reach(e3.dst_program, e1.src_program) and _trigger(graph, e2, e3) is not None:
                    return False
    return True


@dataclass(frozen=True)
class CounterflowCycle:
    """A counterflow edge together with a path closing it into a cycle."""

    edge: Edge
    path_back: tuple[Edge, ...]
    trigger: str = "counterflow-cycle"

    def cycle(self) -> tuple[Edge, ...]:
        return (self.edge,) + self.path_back

    def describe(self) -> str:
        lines = [f"cycle ({self.trigger}):"]
        lines += [f"  {e}" for e in self.cycle()]
        return "\n".join(lines)


def has_type1_cycle(graph: SummaryGraph) -> Verdict:
    """Not robust iff some counterflow edge P -> P' lies on a cycle (P' ~> P)."""
    reach = Reachability(graph)
    for e in graph.edges:
        if e.flow is Flow.COUNTERFLOW and reach(e.dst_program, e.src_program):
            return Verdict(False, CounterflowCycle(e, shortest_path(graph, e.dst_program, e.src_program)), graph)
    return Verdict(True, None, graph)


def build_graph(workload: Workload, settings: AnalysisSettings = AnalysisSettings()) -> SummaryGraph:
    return construct_summary_graph(unfold_workload(workload.programs), settings, workload.schema)


def check_robust(workload: Workload, settings: AnalysisSettings = AnalysisSettings(), validate: bool = True) -> Verdict:
    if validate:
        diags = check(workload)
        if diags:
            raise ValidationError(diags)
    graph = build_graph(workload, settings)
    if settings.method is Method.TYPE1:
        return has_type1_cycle(graph)
    return has_type2_cycle(graph)


class SubsetLimitExceeded(ValueError):
    pass


def maximal_robust_subsets(
    workload: Workload,
    settings: AnalysisSettings = AnalysisSettings(),
    limit: int = DEFAULT_SUBSET_LIMIT,
) -> list[tuple[str, ...]]:
    """Every inclusion-maximal robust subset of the workload's programs, largest
    first and lexicographic within a size."""
    diags = check(workload)
    if diags:
        raise ValidationError(diags)
    names = [p.name for p in workload.programs]
    if len(names) > limit:
        raise SubsetLimitExceeded(f"{len(names)} programs exceed the subset enumeration bound of {limit}")
    robust: list[frozenset] = []
    # Larger subsets first, so a subset of a known robust set is skipped:
    # robustness is closed under taking subsets.
    for size in range(len(names), 0, -1):
        for combo in itertools.combinations(names, size):
            subset = frozenset(combo)
            if any(subset <= r for r in robust):
                continue
            if check_robust(workload.restrict(subset), settings, validate=False).robust:
                robust.append(subset)
    return sorted((tuple(sorted(s)) for s in robust), key=lambda s: (-len(s), s))


def robust_subsets(workload: Workload, settings: AnalysisSettings = AnalysisSettings()) -> dict[frozenset, bool]:
    """Verdict for every non-empty subset (no pruning); used to test anti-monotonicity."""
    names = [p.name for p in workload.programs]
    out = {}
    for size in range(1, len(names) + 1):
        for combo in itertools.combinations(names, size):
            out[frozenset(combo)] = check_robust(workload.restrict(combo), settings, validate=False).robust
    return out
