"""Workload model: schemas, typed statements, basic transaction programs.

Attribute sets are ``frozenset`` values; an undefined set is ``None`` and is
kept distinct from the empty set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

AttrSet = Optional[frozenset]


class Kind(str, enum.Enum):
    INS = "insert"
    KEY_DEL = "key_delete"
    PRED_DEL = "pred_delete"
    KEY_SEL = "key_select"
    PRED_SEL = "pred_select"
    KEY_UPD = "key_update"
    PRED_UPD = "pred_update"

    @property
    def is_key_based(self) -> bool:
        return self in KEY_BASED

    @property
    def is_predicate_based(self) -> bool:
        return self in (Kind.PRED_DEL, Kind.PRED_SEL, Kind.PRED_UPD)


KEY_BASED = frozenset({Kind.INS, Kind.KEY_SEL, Kind.KEY_UPD, Kind.KEY_DEL})


class Granularity(str, enum.Enum):
    ATTRIBUTE = "attr"
    TUPLE = "tuple"


class Method(str, enum.Enum):
    TYPE2 = "type2"
    TYPE1 = "type1"


@dataclass(frozen=True)
class AnalysisSettings:
    granularity: Granularity = Granularity.ATTRIBUTE
    use_fk: bool = True
    method: Method = Method.TYPE2

    @property
    def label(self) -> str:
        base = "attr dep" if self.granularity is Granularity.ATTRIBUTE else "tpl dep"
        return base + (" + FK" if self.use_fk else "")


# The four rows of the experimental comparison, in the order they are reported.
ALL_SETTINGS = (
    AnalysisSettings(Granularity.TUPLE, False),
    AnalysisSettings(Granularity.ATTRIBUTE, False),
    AnalysisSettings(Granularity.TUPLE, True),
    AnalysisSettings(Granularity.ATTRIBUTE, True),
)


@dataclass(frozen=True)
class RelationDecl:
    name: str
    attributes: tuple[str, ...]
    key: tuple[str, ...]

    @property
    def attribute_set(self) -> frozenset:
        return frozenset(self.attributes)


@dataclass(frozen=True)
class ForeignKey:
    """``name: domain(domain_attrs) -> range(range_attrs)``."""

    name: str
    domain: str
    domain_attrs: tuple[str, ...]
    range: str
    range_attrs: tuple[str, ...]


@dataclass(frozen=True)
class Schema:
    relations: tuple[RelationDecl, ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()

    def relation(self, name: str) -> RelationDecl:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise KeyError(name)

    def has_relation(self, name: str) -> bool:
        return any(rel.name == name for rel in self.relations)

    def attrs(self, name: str) -> frozenset:
        return self.relation(name).attribute_set

    def foreign_key(self, name: str) -> ForeignKey:
        for fk in self.foreign_keys:
            if fk.name == name:
                return fk
        raise KeyError(name)

    def has_foreign_key(self, name: str) -> bool:
        return any(fk.name == name for fk in self.foreign_keys)


@dataclass(frozen=True)
class Statement:
    label: str
    kind: Kind
    relation: str
    pred: AttrSet = None
    obs: AttrSet = None
    mod: AttrSet = None


# Program tree. ``Optional`` is the ``(P | eps)`` form.


@dataclass(frozen=True)
class Stmt:
    statement: Statement


@dataclass(frozen=True)
class Seq:
    children: tuple["Node", ...]


@dataclass(frozen=True)
class Loop:
    body: "Node"


@dataclass(frozen=True)
class Branch:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Optional_:
    body: "Node"


Node = Union[Stmt, Seq, Loop, Branch, Optional_]


def iter_statements(node: Node) -> Iterator[Statement]:
    """Statements of a program tree in textual order."""
    if isinstance(node, Stmt):
        yield node.statement
    elif isinstance(node, Seq):
        for child in node.children:
            yield from iter_statements(child)
    elif isinstance(node, (Loop, Optional_)):
        yield from iter_statements(node.body)
    elif isinstance(node, Branch):
        yield from iter_statements(node.left)
        yield from iter_statements(node.right)
    else:
        raise TypeError(f"not a program node: {node!r}")


@dataclass(frozen=True)
class FKAnnotation:
    """``target = fk(source)``: tuples touched by ``target`` are the image under
    ``fk`` of the tuples touched by ``source``."""

    target: str
    fk: str
    source: str

    def __str__(self) -> str:
        return f"{self.target} = {self.fk}({self.source})"


@dataclass(frozen=True)
class BTP:
    name: str
    body: Node
    fk_annotations: tuple[FKAnnotation, ...] = ()

    def statements(self) -> list[Statement]:
        return list(iter_statements(self.body))

    def statement(self, label: str) -> Statement:
        for stmt in iter_statements(self.body):
            if stmt.label == label:
                return stmt
        raise KeyError(label)


@dataclass(frozen=True)
class Workload:
    schema: Schema = field(default_factory=Schema)
    programs: tuple[BTP, ...] = ()

    def program(self, name: str) -> BTP:
        for prog in self.programs:
            if prog.name == name:
                return prog
        raise KeyError(name)

    def restrict(self, names) -> "Workload":
        """The workload containing only the named programs (original order kept)."""
        wanted = set(names)
        unknown = wanted - {p.name for p in self.programs}
        if unknown:
            raise KeyError(f"unknown programs: {sorted(unknown)}")
        return Workload(self.schema, tuple(p for p in self.programs if p.name in wanted))


def seq(*nodes: Node) -> Node:
    """Build a sequence, flattening a single child."""
    if len(nodes) == 1:
        return nodes[0]
    return Seq(tuple(nodes))


def effective_sets(stmt: Statement, granularity: Granularity, schema: Schema) -> tuple[AttrSet, AttrSet, AttrSet]:
    """(pred, obs, mod) of ``stmt`` as seen at the given granularity.

    At tuple granularity every defined set, empty ones included, becomes the
    full attribute set of the relation; undefined sets stay undefined.
    """
    if Granularity(granularity) is Granularity.ATTRIBUTE:
        return stmt.pred, stmt.obs, stmt.mod
    full = schema.attrs(stmt.relation)
    return tuple(None if s is None else full for s in (stmt.pred, stmt.obs, stmt.mod))
