"""Brute-force multiversion schedule oracle.

Transactions are instantiated from LTPs over a small finite tuple universe,
interleaved at chunk granularity, and kept only when the interleaving is
allowed under multi-version Read Committed (read-last-committed, no dirty
writes).  Dependencies and serialization graphs are computed directly from
the version functions, independently of the summary-graph code, so the two
can be cross-checked.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

from .model import AnalysisSettings, Granularity, Kind, Schema, Workload, effective_sets
from .summary_graph import Edge, Flow, SummaryGraph
from .unfold import LTP, Occurrence


class OpKind(str, enum.Enum):
    R = "R"
    W = "W"
    I = "I"
    D = "D"
    PR = "PR"
    C = "C"

    @property
    def is_write(self) -> bool:
        return self in (OpKind.W, OpKind.I, OpKind.D)


@dataclass(frozen=True, order=True)
class TupleId:
    relation: str
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Operation:
    txn: int
    seq: int
    kind: OpKind
    tuple: Optional[TupleId] = None
    relation: Optional[str] = None
    attrs: frozenset = frozenset()
    origin: Optional[Occurrence] = None

    def __str__(self) -> str:
        if self.kind is OpKind.C:
            return f"C{self.txn}"
        if self.kind is OpKind.PR:
            return f"PR{self.txn}[{self.relation}]"
        return f"{self.kind.value}{self.txn}[{self.tuple}]"


@dataclass(frozen=True)
class Transaction:
    """Operations grouped into interleaving units; the last unit is the commit."""

    id: int
    program: str
    units: tuple[tuple[Operation, ...], ...]

    @property
    def operations(self) -> tuple[Operation, ...]:
        return tuple(op for unit in self.units for op in unit)

    @property
    def commit(self) -> Operation:
        return self.units[-1][0]

    def chunks(self) -> list[tuple[Operation, Operation]]:
        return [(u[0], u[-1]) for u in self.units[:-1] if len(u) > 1]

    def __str__(self) -> str:
        return " ".join(str(op) for op in self.operations)


class InstantiationError(ValueError):
    pass


# --- universes and instantiation ------------------------------------------

@dataclass
class Universe:
    """Finite tuple universe with a fixed image for every foreign key."""

    tuples: dict[str, tuple[TupleId, ...]]
    fk_images: dict[str, dict[TupleId, TupleId]] = field(default_factory=dict)

    def of(self, relation: str) -> tuple[TupleId, ...]:
        return self.tuples.get(relation, ())

    def image(self, fk: str, t: TupleId) -> Optional[TupleId]:
        return self.fk_images.get(fk, {}).get(t)

    @classmethod
    def random(cls, schema: Schema, rng: random.Random, max_tuples: int = 3) -> "Universe":
        tuples = {}
        for rel in schema.relations:
            n = rng.randint(1, max_tuples)
            tuples[rel.name] = tuple(TupleId(rel.name, f"{rel.name}{i}") for i in range(1, n + 1))
        images = {}
        for fk in schema.foreign_keys:
            targets = tuples.get(fk.range, ())
            if targets:
                images[fk.name] = {t: rng.choice(targets) for t in tuples.get(fk.domain, ())}
        return cls(tuples, images)


Binding = Union[TupleId, Sequence[TupleId]]


def _as_list(b: Binding) -> list[TupleId]:
    return [b] if isinstance(b, TupleId) else list(b)


def check_fk_bindings(ltp: LTP, bindings: dict[int, Binding], universe: Universe) -> Optional[str]:
    """None if every replicated annotation t_j = f(t_i) holds, else a message."""
    for ann in ltp.fk_annotations:
        targets = _as_list(bindings[ann.target])
        for t_i in _as_list(bindings[ann.source]):
            for t_j in targets:
                if universe.image(ann.fk, t_i) != t_j:
                    return f"{ann.fk}({t_i}) != {t_j}"
    return None


def instantiate(
    ltp: LTP,
    bindings: dict[int, Binding],
    txn_id: int,
    universe: Optional[Universe] = None,
    granularity: Granularity = Granularity.ATTRIBUTE,
    schema: Optional[Schema] = None,
) -> Transaction:
    """Turn an LTP into a transaction.

    ``bindings`` maps each statement position to one tuple (key-based) or a
    list of tuples (predicate-based).  A transaction touches each tuple with at
    most one read and one write; an update on a tuple the transaction already
    read keeps only its write.
    """
    if universe is not None:
        problem = check_fk_bindings(ltp, bindings, universe)
        if problem:
            raise InstantiationError(f"foreign key violated: {problem}")
    read: set[TupleId] = set()
    written: set[TupleId] = set()
    units: list[tuple[Operation, ...]] = []
    seq = itertools.count()

    def op(kind, occ, attrs, t=None, rel=None):
        return Operation(txn_id, next(seq), kind, t, rel, attrs or frozenset(), occ)

    def do_read(occ, t, attrs, allow_merge: bool):
        if t in written:
            raise InstantiationError(f"{t} read after being written")
        if t in read:
            if allow_merge:
                return None
            raise InstantiationError(f"{t} read twice")
        read.add(t)
        return op(OpKind.R, occ, attrs, t)

    def do_write(occ, kind, t, attrs):
        if t in written:
            raise InstantiationError(f"{t} written twice")
        written.add(t)
        return op(kind, occ, attrs, t)

    for pos, stmt in enumerate(ltp.statements):
        occ = ltp.occurrences[pos]
        if pos not in bindings:
            raise InstantiationError(f"no binding for {occ}")
        tuples = _as_list(bindings[pos])
        for t in tuples:
            if t.relation != stmt.relation:
                raise InstantiationError(f"{t} is not a {stmt.relation} tuple")
        if stmt.kind.is_key_based and len(tuples) != 1:
            raise InstantiationError(f"key-based {occ} needs exactly one tuple")
        if len(set(tuples)) != len(tuples):
            raise InstantiationError(f"{occ} binds a tuple twice")
        if schema is not None:
            p, o, m = effective_sets(stmt, granularity, schema)
        else:
            p, o, m = stmt.pred, stmt.obs, stmt.mod
        k = stmt.kind
        ops: list[Operation] = []
        if k.is_predicate_based:
            ops.append(op(OpKind.PR, occ, p, rel=stmt.relation))
        for t in tuples:
            if k in (Kind.KEY_SEL, Kind.PRED_SEL):
                ops.append(do_read(occ, t, o, allow_merge=False))
            elif k in (Kind.KEY_UPD, Kind.PRED_UPD):
                r = do_read(occ, t, o, allow_merge=True)
                if r is not None:
                    ops.append(r)
                ops.append(do_write(occ, OpKind.W, t, m))
            elif k is Kind.INS:
                ops.append(do_write(occ, OpKind.I, t, m))
            else:
                ops.append(do_write(occ, OpKind.D, t, m))
        units.append(tuple(ops))
    units.append((op(OpKind.C, None, None),))
    return Transaction(txn_id, ltp.name, tuple(units))


# --- schedules -------------------------------------------------------------

INITIAL = None  # writer of the initial version


class VersionState(str, enum.Enum):
    UNBORN = "unborn"
    VISIBLE = "visible"
    DEAD = "dead"


@dataclass
class Schedule:
    """A multiversion schedule; version functions are derived from the
    operation order under read-last-committed semantics, with the version
    order equal to the commit order of the writers."""

    transactions: tuple[Transaction, ...]
    order: tuple[Operation, ...]
    initial_visible: dict[TupleId, bool]
    universe: dict[str, tuple[TupleId, ...]]

    def __post_init__(self):
        self.txn = {t.id: t for t in self.transactions}
        self.pos = {op: i for i, op in enumerate(self.order)}
        self.commit_pos = {t.id: self.pos[t.commit] for t in self.transactions}
        self._derive()

    @classmethod
    def from_units(
        cls,
        transactions: Sequence[Transaction],
        unit_order: Sequence[int],
        universe: Union[Universe, dict[str, tuple[TupleId, ...]]],
        initial_visible: Optional[dict[TupleId, bool]] = None,
    ) -> "Schedule":
        """Schedule taking the next unit of transaction ``unit_order[k]`` at step k."""
        tuples = universe.tuples if isinstance(universe, Universe) else universe
        by_id = {t.id: t for t in transactions}
        cursor = defaultdict(int)
        ops: list[Operation] = []
        for tid in unit_order:
            ops.extend(by_id[tid].units[cursor[tid]])
            cursor[tid] += 1
        if any(cursor[t.id] != len(t.units) for t in transactions):
            raise ValueError("unit order does not exhaust every transaction")
        if initial_visible is None:
            initial_visible = default_initial_visibility(transactions, tuples)
        return cls(tuple(transactions), tuple(ops), dict(initial_visible), dict(tuples))

    # version functions ------------------------------------------------------

    def _derive(self) -> None:
        # writers per tuple in version order (commit order of their transactions)
        writers: dict[TupleId, list[Operation]] = defaultdict(list)
        for op in self.order:
            if op.kind.is_write:
                writers[op.tuple].append(op)
        for ops in writers.values():
            ops.sort(key=lambda o: self.commit_pos[o.txn])
        self.writers = dict(writers)
        self.rank: dict[Operation, int] = {}
        for ops in writers.values():
            for i, o in enumerate(ops, start=1):
                self.rank[o] = i
        self.read_version: dict[Operation, Optional[Operation]] = {}
        self.pred_versions: dict[Operation, dict[TupleId, Optional[Operation]]] = {}
        for op in self.order:
            if op.kind is OpKind.R:
                self.read_version[op] = self._last_committed(op.tuple, self.pos[op])
            elif op.kind is OpKind.PR:
                self.pred_versions[op] = {
                    t: self._last_committed(t, self.pos[op]) for t in self.universe.get(op.relation, ())
                }

    def _last_committed(self, t: TupleId, before: int) -> Optional[Operation]:
        last = INITIAL
        for w in self.writers.get(t, ()):
            if self.commit_pos[w.txn] < before:
                last = w
        return last

    def version_rank(self, version: Optional[Operation]) -> int:
        return 0 if version is INITIAL else self.rank[version]

    def state(self, t: TupleId, version: Optional[Operation]) -> VersionState:
        if version is INITIAL:
            return VersionState.VISIBLE if self.initial_visible.get(t, True) else VersionState.UNBORN
        return VersionState.DEAD if version.kind is OpKind.D else VersionState.VISIBLE

    def before(self, a: Operation, b: Operation) -> bool:
        return self.pos[a] < self.pos[b]

    def dump(self) -> str:
        return " ".join(str(op) for op in self.order)

    def __str__(self) -> str:
        return self.dump()


def default_initial_visibility(transactions: Iterable[Transaction], universe: dict[str, tuple[TupleId, ...]]) -> dict[TupleId, bool]:
    """A tuple starts unborn iff some transaction inserts it."""
    inserted = {op.tuple for t in transactions for op in t.operations if op.kind is OpKind.I}
    return {t: t not in inserted for ts in universe.values() for t in ts}


def mvrc_violations(s: Schedule) -> list[str]:
    """Every reason ``s`` is not a schedule allowed under MVRC; empty if allowed."""
    problems: list[str] = []
    # chunk atomicity and program order
    for txn in s.transactions:
        positions = [s.pos[op] for op in txn.operations]
        if positions != sorted(positions):
            problems.append(f"T{txn.id} operations out of program order")
        for unit in txn.units:
            first, last = s.pos[unit[0]], s.pos[unit[-1]]
            if last - first != len(unit) - 1:
                problems.append(f"chunk {unit[0]}..{unit[-1]} is interleaved")
    # at most one R and one write per tuple per transaction
    for txn in s.transactions:
        seen = defaultdict(int)
        for op in txn.operations:
            if op.tuple is not None:
                seen[op.kind is OpKind.R, op.tuple] += 1
        for (is_read, t), n in seen.items():
            if n > 1:
                problems.append(f"T{txn.id} has {n} {'reads' if is_read else 'writes'} on {t}")
    # dirty writes
    for ops in s.writers.values():
        for b, a in itertools.permutations(ops, 2):
            if b.txn != a.txn and s.pos[b] < s.pos[a] < s.commit_pos[b.txn]:
                problems.append(f"dirty write {b} .. {a} .. C{b.txn}")
    # version creation rules
    for t, ops in s.writers.items():
        initially_visible = s.initial_visible.get(t, True)
        for i, w in enumerate(ops):
            first_visible = i == 0 and not initially_visible
            if (w.kind is OpKind.I) != first_visible:
                problems.append(f"{w} {'must' if first_visible else 'cannot'} be an insert")
            if w.kind is OpKind.D and i != len(ops) - 1:
                problems.append(f"{w} creates the dead version but is not the last writer of {t}")
    # reads observe visible versions
    for op, v in s.read_version.items():
        if s.state(op.tuple, v) is not VersionState.VISIBLE:
            problems.append(f"{op} observes a {s.state(op.tuple, v).value} version")
    return problems


def is_mvrc_allowed(s: Schedule) -> bool:
    return not mvrc_violations(s)


# --- dependencies ----------------------------------------------------------

class DepKind(str, enum.Enum):
    WW = "ww"
    WR = "wr"
    RW = "rw"
    PRED_WR = "pred-wr"
    PRED_RW = "pred-rw"


@dataclass(frozen=True)
class Dependency:
    src_txn: int
    src_op: Operation
    dst_op: Operation
    dst_txn: int
    kind: DepKind
    counterflow: bool

    def __str__(self) -> str:
        flow = "counterflow" if self.counterflow else "non-counterflow"
        return f"{self.src_op} -> {self.dst_op} ({self.kind.value}, {flow})"


def compute_dependencies(s: Schedule) -> list[Dependency]:
    """All dependencies b_i -> a_j between operations of distinct transactions.

    Attribute sets are taken from the operations, so granularity is decided
    when the transactions are instantiated.
    """
    deps: list[Dependency] = []
    ops = [op for op in s.order if op.kind is not OpKind.C]
    rank = s.version_rank

    def add(b, a, kind):
        deps.append(Dependency(b.txn, b, a, a.txn, kind, s.commit_pos[a.txn] < s.commit_pos[b.txn]))

    for b in ops:
        for a in ops:
            if a.txn == b.txn:
                continue
            if b.kind.is_write and a.kind.is_write:
                if a.tuple == b.tuple and b.attrs & a.attrs and rank(b) < rank(a):
                    add(b, a, DepKind.WW)
            elif b.kind.is_write and a.kind is OpKind.R:
                if a.tuple == b.tuple and b.attrs & a.attrs and rank(b) <= rank(s.read_version[a]):
                    add(b, a, DepKind.WR)
            elif b.kind is OpKind.R and a.kind.is_write:
                if a.tuple == b.tuple and b.attrs & a.attrs and rank(s.read_version[b]) < rank(a):
                    add(b, a, DepKind.RW)
            elif b.kind.is_write and a.kind is OpKind.PR:
                if b.tuple.relation == a.relation and (b.kind is not OpKind.W or b.attrs & a.attrs):
                    if rank(b) <= rank(s.pred_versions[a][b.tuple]):
                        add(b, a, DepKind.PRED_WR)
            elif b.kind is OpKind.PR and a.kind.is_write:
                if a.tuple.relation == b.relation and (a.kind is not OpKind.W or b.attrs & a.attrs):
                    if rank(s.pred_versions[b][a.tuple]) < rank(a):
                        add(b, a, DepKind.PRED_RW)
    return deps


@dataclass
class SerializationGraph:
    nodes: tuple[int, ...]
    edges: tuple[Dependency, ...]

    def successors(self) -> dict[int, set[int]]:
        succ = {n: set() for n in self.nodes}
        for d in self.edges:
            succ[d.src_txn].add(d.dst_txn)
        return succ

    def quadruples(self) -> list[tuple[int, Operation, Operation, int]]:
        return [(d.src_txn, d.src_op, d.dst_op, d.dst_txn) for d in self.edges]


def serialization_graph(s: Schedule, deps: Optional[list[Dependency]] = None) -> SerializationGraph:
    if deps is None:
        deps = compute_dependencies(s)
    return SerializationGraph(tuple(t.id for t in s.transactions), tuple(deps))


def _has_cycle(succ: dict[int, set[int]]) -> bool:
    color = dict.fromkeys(succ, 0)

    def visit(u) -> bool:
        color[u] = 1
        for v in succ[u]:
            if color[v] == 1 or (color[v] == 0 and visit(v)):
                return True
        color[u] = 2
        return False

    return any(color[u] == 0 and visit(u) for u in succ)


def is_conflict_serializable(s: Schedule, deps: Optional[list[Dependency]] = None) -> bool:
    return not _has_cycle(serialization_graph(s, deps).successors())


# --- property checks -------------------------------------------------------

def lemma_violations(deps: Iterable[Dependency]) -> list[Dependency]:
    """Counterflow dependencies that are not (predicate) rw-antidependencies."""
    return [d for d in deps if d.counterflow and d.kind not in (DepKind.RW, DepKind.PRED_RW)]


def simple_cycles(nodes: Sequence[int], succ: dict[int, set[int]]) -> Iterator[tuple[int, ...]]:
    """Simple cycles of length >= 2, each reported once starting at its least node."""
    for start in sorted(nodes):
        stack = [(start, (start,))]
        while stack:
            u, path = stack.pop()
            for v in succ.get(u, ()):
                if v == start and len(path) >= 2:
                    yield path
                elif v > start and v not in path:
                    stack.append((v, path + (v,)))


def cycle_satisfies_theorem(s: Schedule, cycle: Sequence[Dependency]) -> bool:
    """At least one non-counterflow dependency, plus an adjacent counterflow
    pair or an ordered counterflow pair."""
    n = len(cycle)
    if all(d.counterflow for d in cycle):
        return False
    for i in range(n):
        prev, cur = cycle[i - 1], cycle[i]
        if not cur.counterflow:
            continue
        if prev.counterflow:
            return True
        # cur leaves the transaction prev enters: b_i = cur.src_op, a_i = prev.dst_op
        if s.before(cur.src_op, prev.dst_op) or prev.src_op.kind in (OpKind.R, OpKind.PR):
            return True
    return False


@dataclass
class CycleReport:
    cycles_checked: int = 0
    truncated: bool = False
    violations: list[tuple[Dependency, ...]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_theorem_cycles(s: Schedule, deps: Optional[list[Dependency]] = None, cap: int = 5000) -> CycleReport:
    """Check the cycle condition on every cycle of the serialization graph,
    choosing the labelling dependency of each edge in every possible way (up to
    ``cap`` cycles in total)."""
    if deps is None:
        deps = compute_dependencies(s)
    report = CycleReport()
    by_pair: dict[tuple[int, int], list[Dependency]] = defaultdict(list)
    for d in deps:
        by_pair[d.src_txn, d.dst_txn].append(d)
    graph = serialization_graph(s, deps)
    for txns in simple_cycles(graph.nodes, graph.successors()):
        pairs = [by_pair[txns[i], txns[(i + 1) % len(txns)]] for i in range(len(txns))]
        for choice in itertools.product(*pairs):
            if report.cycles_checked >= cap:
                report.truncated = True
                return report
            report.cycles_checked += 1
            if not cycle_satisfies_theorem(s, choice):
                report.violations.append(choice)
    return report


def missing_summary_edges(deps: Iterable[Dependency], programs: dict[int, str], graph: SummaryGraph) -> list[tuple[Dependency, Edge]]:
    """Dependencies without the summary-graph edge they require.

    ``programs`` maps transaction ids to the name of the LTP they instantiate.
    """
    edges = set(graph.edges)
    missing = []
    for d in deps:
        flow = Flow.COUNTERFLOW if d.counterflow else Flow.NON_COUNTERFLOW
        need = Edge(programs[d.src_txn], d.src_op.origin, flow, d.dst_op.origin, programs[d.dst_txn])
        if need not in edges:
            missing.append((d, need))
    return missing


def check_summary_condition(s: Schedule, graph: SummaryGraph, deps: Optional[list[Dependency]] = None) -> bool:
    if deps is None:
        deps = compute_dependencies(s)
    return not missing_summary_edges(deps, {t.id: t.program for t in s.transactions}, graph)


# --- schedule generation ---------------------------------------------------

@dataclass
class GeneratorReport:
    produced: int = 0
    rejected: int = 0
    dead_ends: int = 0
    exhaustive: bool = False


def count_interleavings(transactions: Sequence[Transaction]) -> int:
    sizes = [len(t.units) for t in transactions]
    total = math.factorial(sum(sizes))
    for k in sizes:
        total //= math.factorial(k)
    return total


def _merges(sizes: list[int]) -> Iterator[tuple[int, ...]]:
    """Every interleaving of the transactions' units, as a sequence of indexes."""
    total = sum(sizes)
    left = list(sizes)
    out: list[int] = []

    def rec():
        if len(out) == total:
            yield tuple(out)
            return
        for i, k in enumerate(left):
            if k:
                left[i] -= 1
                out.append(i)
                yield from rec()
                out.pop()
                left[i] += 1

    yield from rec()


class _Sim:
    """Incremental state used to steer random interleavings away from
    prefixes that can never become MVRC-allowed."""

    def __init__(self, initial_visible: dict[TupleId, bool]):
        self.committed_state = {t: (VersionState.VISIBLE if v else VersionState.UNBORN) for t, v in initial_visible.items()}
        self.pending: dict[TupleId, int] = {}  # tuple -> txn with an uncommitted write
        self.staged: dict[int, list[Operation]] = defaultdict(list)

    def enabled(self, unit: tuple[Operation, ...]) -> bool:
        for op in unit:
            if op.kind is OpKind.C:
                return True
            if op.kind.is_write:
                holder = self.pending.get(op.tuple)
                if holder is not None and holder != op.txn:
                    return False
                state = self.committed_state.get(op.tuple, VersionState.VISIBLE)
                if op.kind is OpKind.I and state is not VersionState.UNBORN:
                    return False
                if op.kind is not OpKind.I and state is not VersionState.VISIBLE:
                    return False
            elif op.kind is OpKind.R:
                if self.committed_state.get(op.tuple, VersionState.VISIBLE) is not VersionState.VISIBLE:
                    return False
        return True

    def apply(self, unit: tuple[Operation, ...]) -> None:
        for op in unit:
            if op.kind is OpKind.C:
                for w in self.staged.pop(op.txn, ()):
                    self.committed_state[w.tuple] = VersionState.DEAD if w.kind is OpKind.D else VersionState.VISIBLE
                    if self.pending.get(w.tuple) == op.txn:
                        del self.pending[w.tuple]
            elif op.kind.is_write:
                self.pending[op.tuple] = op.txn
                self.staged[op.txn].append(op)


def generate_mvrc_schedules(
    transactions: Sequence[Transaction],
    universe: Union[Universe, dict[str, tuple[TupleId, ...]]],
    budget: int = 100,
    seed: int = 0,
    exhaustive_threshold: int = 2000,
    report: Optional[GeneratorReport] = None,
    max_attempts: Optional[int] = None,
) -> Iterator[Schedule]:
    """MVRC-allowed schedules over ``transactions``.

    When there are at most ``exhaustive_threshold`` interleavings, all of them
    are tried in a fixed order (distinct schedules, at most ``budget``).
    Otherwise interleavings are sampled with a seeded RNG, steering each step
    towards units that keep the prefix valid; duplicates are possible.
    """
    report = report if report is not None else GeneratorReport()
    tuples = universe.tuples if isinstance(universe, Universe) else universe
    initial = default_initial_visibility(transactions, tuples)
    txns = list(transactions)
    if budget <= 0 or not txns:
        return
    if count_interleavings(txns) <= exhaustive_threshold:
        report.exhaustive = True
        for merge in _merges([len(t.units) for t in txns]):
            s = Schedule.from_units(txns, [txns[i].id for i in merge], tuples, initial)
            if is_mvrc_allowed(s):
                report.produced += 1
                yield s
                if report.produced >= budget:
                    return
            else:
                report.rejected += 1
        return
    rng = random.Random(seed)
    attempts = 0
    limit = max_attempts if max_attempts is not None else budget * 20
    while report.produced < budget and attempts < limit:
        attempts += 1
        order = _steered_merge(txns, initial, rng)
        if order is None:
            report.dead_ends += 1
            continue
        s = Schedule.from_units(txns, order, tuples, initial)
        if is_mvrc_allowed(s):
            report.produced += 1
            yield s
        else:
            report.rejected += 1


def _steered_merge(txns: list[Transaction], initial: dict[TupleId, bool], rng: random.Random) -> Optional[list[int]]:
    sim = _Sim(initial)
    cursor = [0] * len(txns)
    order: list[int] = []
    total = sum(len(t.units) for t in txns)
    while len(order) < total:
        live = [i for i, t in enumerate(txns) if cursor[i] < len(t.units)]
        ok = [i for i in live if sim.enabled(txns[i].units[cursor[i]])]
        if not ok:
            return None
        weights = [len(txns[i].units) - cursor[i] for i in ok]
        i = rng.choices(ok, weights)[0]
        sim.apply(txns[i].units[cursor[i]])
        cursor[i] += 1
        order.append(txns[i].id)
    return order


# --- random instantiation --------------------------------------------------

def random_bindings(ltp: LTP, universe: Universe, rng: random.Random, tries: int = 20) -> Optional[dict[int, Binding]]:
    """Bindings for ``ltp`` that respect its foreign-key annotations, or None."""
    for _ in range(tries):
        b: dict[int, Binding] = {}
        for pos, stmt in enumerate(ltp.statements):
            pool = list(universe.of(stmt.relation))
            if not pool:
                break
            if stmt.kind.is_key_based:
                b[pos] = rng.choice(pool)
            else:
                rng.shuffle(pool)
                b[pos] = pool[: rng.randint(0, len(pool))]
        else:
            for _ in range(3):
                for ann in ltp.fk_annotations:
                    src = b[ann.source]
                    if isinstance(src, TupleId):
                        img = universe.image(ann.fk, src)
                        if img is not None:
                            b[ann.target] = img
                    else:
                        tgt = b[ann.target]
                        b[ann.source] = [t for t in src if universe.image(ann.fk, t) == tgt]
            if check_fk_bindings(ltp, b, universe) is None:
                return b
    return None


def random_transactions(
    ltps: Sequence[LTP],
    universe: Universe,
    rng: random.Random,
    max_txns: int = 4,
    granularity: Granularity = Granularity.ATTRIBUTE,
    schema: Optional[Schema] = None,
    tries: int = 50,
) -> Optional[list[Transaction]]:
    """2..max_txns random instantiations; no tuple is inserted or deleted twice."""
    candidates = [l for l in ltps if len(l) > 0] or list(ltps)
    if not candidates:
        return None
    for _ in range(tries):
        n = rng.randint(2, max(2, max_txns))
        out: list[Transaction] = []
        for tid in range(1, n + 1):
            ltp = rng.choice(candidates)
            b = random_bindings(ltp, universe, rng)
            if b is None:
                break
            try:
                out.append(instantiate(ltp, b, tid, universe, granularity, schema))
            except InstantiationError:
                break
        else:
            inserts = [op.tuple for t in out for op in t.operations if op.kind is OpKind.I]
            deletes = [op.tuple for t in out for op in t.operations if op.kind is OpKind.D]
            if len(set(inserts)) == len(inserts) and len(set(deletes)) == len(deletes):
                return out
    return None


# --- fuzzing ---------------------------------------------------------------

@dataclass
class Counterexample:
    check: str
    schedule: str
    detail: str


@dataclass
class FuzzReport:
    seed: int
    budget: int
    robust: bool
    schedules: int = 0
    transaction_sets: int = 0
    dependencies: int = 0
    cycles_checked: int = 0
    lemma_violations: int = 0
    theorem_violations: int = 0
    condition_violations: int = 0
    non_serializable: int = 0
    counterexamples: list[Counterexample] = field(default_factory=list)

    @property
    def invariant_violations(self) -> int:
        """Violations that indicate a bug (a non-serializable schedule only
        counts when the workload was declared robust)."""
        bad = self.lemma_violations + self.theorem_violations + self.condition_violations
        return bad + (self.non_serializable if self.robust else 0)

    @property
    def ok(self) -> bool:
        return self.invariant_violations == 0

    def summary(self) -> str:
        return (
            f"seed={self.seed} schedules={self.schedules} transaction-sets={self.transaction_sets} "
            f"dependencies={self.dependencies} cycles={self.cycles_checked} "
            f"lemma-violations={self.lemma_violations} cycle-violations={self.theorem_violations} "
            f"missing-edges={self.condition_violations} non-serializable={self.non_serializable} "
            f"declared-robust={'yes' if self.robust else 'no'}"
        )


def fuzz(
    workload: Workload,
    settings: AnalysisSettings = AnalysisSettings(),
    budget: int = 1000,
    seed: int = 0,
    max_txns: int = 4,
    max_tuples: int = 3,
    per_set: int = 8,
    keep: int = 5,
) -> FuzzReport:
    """Random MVRC schedules over instantiations of ``workload``, each checked
    against the dependency lemma, the cycle theorem, the summary graph, and,
    when the workload is declared robust, conflict serializability."""
    from .robustness import build_graph, check_robust

    graph = build_graph(workload, settings)
    robust = check_robust(workload, settings).robust
    report = FuzzReport(seed, budget, robust)
    if budget <= 0:
        return report
    ltps = list(graph.ltps.values())
    rng = random.Random(seed)
    stall = 0
    while report.schedules < budget and stall < 200:
        universe = Universe.random(workload.schema, rng, max_tuples)
        txns = random_transactions(ltps, universe, rng, max_txns, settings.granularity, workload.schema)
        if txns is None:
            stall += 1
            continue
        report.transaction_sets += 1
        gen = generate_mvrc_schedules(
            txns, universe, budget=min(per_set, budget - report.schedules), seed=rng.randrange(2**32),
            exhaustive_threshold=0,
        )
        produced = 0
        for s in gen:
            produced += 1
            report.schedules += 1
            _check_one(s, graph, report, keep)
        stall = 0 if produced else stall + 1
    return report


def _check_one(s: Schedule, graph: SummaryGraph, report: FuzzReport, keep: int) -> None:
    deps = compute_dependencies(s)
    report.dependencies += len(deps)

    def record(check: str, detail: str):
        if len(report.counterexamples) < keep:
            report.counterexamples.append(Counterexample(check, s.dump(), detail))

    bad = lemma_violations(deps)
    if bad:
        report.lemma_violations += 1
        record("lemma", str(bad[0]))
    cyc = check_theorem_cycles(s, deps, cap=500)
    report.cycles_checked += cyc.cycles_checked
    if cyc.violations:
        report.theorem_violations += 1
        record("cycle", " ; ".join(str(d) for d in cyc.violations[0]))
    missing = missing_summary_edges(deps, {t.id: t.program for t in s.transactions}, graph)
    if missing:
        report.condition_violations += 1
        record("summary-graph", f"{missing[0][0]} needs {missing[0][1]}")
    if not is_conflict_serializable(s, deps):
        report.non_serializable += 1
        if report.robust:
            record("serializability", "cyclic serialization graph")
