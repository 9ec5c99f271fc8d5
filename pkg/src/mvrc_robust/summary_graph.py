"""Summary graph construction over a set of LTPs.

An edge ``(P_i, q_i, flow, q_j, P_j)`` records that an instantiation of
``q_i`` in ``P_i`` may give rise to a dependency of the given flow class on an
instantiation of ``q_j`` in ``P_j`` in some MVRC schedule.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .model import AnalysisSettings, Granularity, Kind, Schema, Statement, effective_sets
from .unfold import LTP, Occurrence

CHECK = "check"

_KIND_ORDER = (Kind.INS, Kind.KEY_SEL, Kind.PRED_SEL, Kind.KEY_UPD, Kind.PRED_UPD, Kind.KEY_DEL, Kind.PRED_DEL)

# Rows are the source kind, columns the target kind, both in _KIND_ORDER.
# T = true, F = false, ? = decided by the attribute-set conditions.
_NC_ROWS = (
    "F?T?T?T",
    "FFF????",
    "TFF??TT",
    "F??????",
    "T????TT",
    "FFTFTFT",
    "TFT?TTT",
)
_C_ROWS = (
    "FFFFFFF",
    "FFF????",
    "TFF??TT",
    "FFFFFFF",
    "TFF??TT",
    "FFFFFFF",
    "TFF??TT",
)
_CELL = {"T": True, "F": False, "?": CHECK}


def _table(rows):
    return {
        (ki, kj): _CELL[rows[i][j]]
        for i, ki in enumerate(_KIND_ORDER)
        for j, kj in enumerate(_KIND_ORDER)
    }


NC_DEP_TABLE = _table(_NC_ROWS)
C_DEP_TABLE = _table(_C_ROWS)

# Kinds whose instantiation writes the referenced tuple before the guarded statement.
FK_GUARD_KINDS = frozenset({Kind.KEY_UPD, Kind.KEY_DEL, Kind.INS})


def nc_dep_table(kind_i: Kind, kind_j: Kind):
    """True, False or ``CHECK`` for a non-counterflow dependency q_i -> q_j."""
    return NC_DEP_TABLE[Kind(kind_i), Kind(kind_j)]


def c_dep_table(kind_i: Kind, kind_j: Kind):
    """True, False or ``CHECK`` for a counterflow dependency q_i -> q_j."""
    return C_DEP_TABLE[Kind(kind_i), Kind(kind_j)]


class Flow(str, enum.Enum):
    NON_COUNTERFLOW = "non-counterflow"
    COUNTERFLOW = "counterflow"


class Edge(NamedTuple):
    src_program: str
    src: Occurrence
    flow: Flow
    dst: Occurrence
    dst_program: str

    @property
    def counterflow(self) -> bool:
        return self.flow is Flow.COUNTERFLOW

    def __str__(self) -> str:
        return f"{self.src_program}.{self.src} --[{self.flow.value}]--> {self.dst_program}.{self.dst}"


def _meets(a, b) -> bool:
    return a is not None and b is not None and not a.isdisjoint(b)


def _sets(stmt: Statement, granularity, schema: Optional[Schema]):
    if Granularity(granularity) is Granularity.ATTRIBUTE:
        return stmt.pred, stmt.obs, stmt.mod
    if schema is None:
        raise ValueError("tuple granularity needs the schema")
    return effective_sets(stmt, granularity, schema)


def nc_dep_conds(q_i: Statement, q_j: Statement, granularity=Granularity.ATTRIBUTE, schema: Optional[Schema] = None) -> bool:
    p_i, o_i, m_i = _sets(q_i, granularity, schema)
    p_j, o_j, m_j = _sets(q_j, granularity, schema)
    return _nc_conds(p_i, o_i, m_i, p_j, o_j, m_j)


def _nc_conds(p_i, o_i, m_i, p_j, o_j, m_j) -> bool:
    return (
        _meets(m_i, m_j)
        or _meets(m_i, o_j)
        or _meets(m_i, p_j)
        or _meets(o_i, m_j)
        or _meets(p_i, m_j)
    )


def fk_guards(ltp: LTP, position: int) -> frozenset:
    """Foreign keys f with an annotation ``q_k = f(q)`` for the statement ``q``
    at ``position`` where ``q_k`` writes and comes strictly earlier."""
    return frozenset(
        ann.fk
        for ann in ltp.fk_annotations
        if ann.source == position
        and ann.target < position
        and ltp.statements[ann.target].kind in FK_GUARD_KINDS
    )


def c_dep_conds(
    q_i: int,
    p_i: LTP,
    q_j: int,
    p_j: LTP,
    settings: AnalysisSettings = AnalysisSettings(),
    schema: Optional[Schema] = None,
) -> bool:
    """Counterflow condition for the statements at positions ``q_i`` of ``p_i``
    and ``q_j`` of ``p_j``."""
    pi, oi, _ = _sets(p_i.statements[q_i], settings.granularity, schema)
    _, _, mj = _sets(p_j.statements[q_j], settings.granularity, schema)
    return _c_conds(pi, oi, mj, settings.use_fk, lambda: fk_guards(p_i, q_i), lambda: fk_guards(p_j, q_j))


def _c_conds(p_i, o_i, m_j, use_fk, guards_i, guards_j) -> bool:
    if _meets(p_i, m_j):
        return True
    if _meets(o_i, m_j):
        if use_fk and not guards_i().isdisjoint(guards_j()):
            return False
        return True
    return False


@dataclass
class SummaryGraph:
    nodes: tuple[str, ...] = ()
    edges: tuple[Edge, ...] = ()
    ltps: dict[str, LTP] = field(default_factory=dict)

    def statement(self, program: str, occ: Occurrence) -> Statement:
        return self.ltps[program].statements[occ.position]

    def stats(self) -> tuple[int, int, int]:
        return graph_stats(self)

    def out_edges(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = defaultdict(list)
        for e in self.edges:
            out[e.src_program].append(e)
        return out


def graph_stats(graph: SummaryGraph) -> tuple[int, int, int]:
    """(nodes, edges, counterflow edges)."""
    return len(graph.nodes), len(graph.edges), sum(1 for e in graph.edges if e.counterflow)


@dataclass
class _Prepared:
    ltp: LTP
    by_relation: dict[str, list[tuple[int, Statement, tuple]]]
    guards: list[frozenset]


def _prepare(ltp: LTP, settings: AnalysisSettings, schema: Optional[Schema]) -> _Prepared:
    by_rel: dict[str, list] = defaultdict(list)
    for pos, stmt in enumerate(ltp.statements):
        by_rel[stmt.relation].append((pos, stmt, _sets(stmt, settings.granularity, schema)))
    guards = [fk_guards(ltp, pos) if settings.use_fk else frozenset() for pos in range(len(ltp))]
    return _Prepared(ltp, by_rel, guards)


def construct_summary_graph(ltps, settings: AnalysisSettings = AnalysisSettings(), schema: Optional[Schema] = None) -> SummaryGraph:
    """Build the summary graph; ``schema`` is required at tuple granularity."""
    ltps = list(ltps)
    names = [l.name for l in ltps]
    if len(set(names)) != len(names):
        raise ValueError("LTP names must be unique")
    prepared = [_prepare(l, settings, schema) for l in ltps]
    edges: dict[Edge, None] = {}
    nc, cf = Flow.NON_COUNTERFLOW, Flow.COUNTERFLOW
    for a in prepared:
        occ_a = a.ltp.occurrences
        for b in prepared:
            occ_b = b.ltp.occurrences
            for rel, stmts_a in a.by_relation.items():
                stmts_b = b.by_relation.get(rel)
                if not stmts_b:
                    continue
                for pos_i, q_i, (p_i, o_i, m_i) in stmts_a:
                    for pos_j, q_j, (p_j, o_j, m_j) in stmts_b:
                        cell = NC_DEP_TABLE[q_i.kind, q_j.kind]
                        if cell is True or (cell is CHECK and _nc_conds(p_i, o_i, m_i, p_j, o_j, m_j)):
                            edges[Edge(a.ltp.name, occ_a[pos_i], nc, occ_b[pos_j], b.ltp.name)] = None
                        cell = C_DEP_TABLE[q_i.kind, q_j.kind]
                        if cell is True or (
                            cell is CHECK
                            and _c_conds(
                                p_i, o_i, m_j, settings.use_fk,
                                lambda: a.guards[pos_i], lambda: b.guards[pos_j],
                            )
                        ):
                            edges[Edge(a.ltp.name, occ_a[pos_i], cf, occ_b[pos_j], b.ltp.name)] = None
    return SummaryGraph(tuple(names), tuple(edges), {l.name: l for l in ltps})
