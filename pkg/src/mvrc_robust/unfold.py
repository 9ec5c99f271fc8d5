"""Unfolding of programs into linear transaction programs (LTPs).

Loops are expanded to zero, one or two repetitions and each repetition is
unfolded independently; branches pick one side.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable

from .model import BTP, Branch, Loop, Node, Optional_, Seq, Statement, Stmt


@dataclass(frozen=True, order=True)
class Occurrence:
    """A statement occurrence inside an LTP.

    ``index`` counts earlier occurrences of the same label (starting at 1);
    ``position`` is the place in the LTP and defines the program order.
    """

    position: int
    label: str
    index: int = 1

    def __str__(self) -> str:
        return self.label if self.index == 1 else f"{self.label}#{self.index}"


@dataclass(frozen=True)
class LTPAnnotation:
    target: int
    fk: str
    source: int


@dataclass(frozen=True)
class LTP:
    name: str
    program: str
    statements: tuple[Statement, ...]
    fk_annotations: tuple[LTPAnnotation, ...] = ()

    @cached_property
    def occurrences(self) -> tuple[Occurrence, ...]:
        seen: dict[str, int] = defaultdict(int)
        out = []
        for pos, stmt in enumerate(self.statements):
            seen[stmt.label] += 1
            out.append(Occurrence(pos, stmt.label, seen[stmt.label]))
        return tuple(out)

    def occurrence(self, position: int) -> Occurrence:
        return self.occurrences[position]

    def __len__(self) -> int:
        return len(self.statements)


def _unfold_node(node: Node) -> list[tuple[Statement, ...]]:
    if isinstance(node, Stmt):
        return [(node.statement,)]
    if isinstance(node, Seq):
        parts = [_unfold_node(child) for child in node.children]
        return _dedup(sum(combo, ()) for combo in product(*parts))
    if isinstance(node, Loop):
        inner = _unfold_node(node.body)
        return _dedup([()] + inner + [a + b for a in inner for b in inner])
    if isinstance(node, Branch):
        return _dedup(_unfold_node(node.left) + _unfold_node(node.right))
    if isinstance(node, Optional_):
        return _dedup(_unfold_node(node.body) + [()])
    raise TypeError(f"not a program node: {node!r}")


def _dedup(seqs: Iterable[tuple[Statement, ...]]) -> list[tuple[Statement, ...]]:
    return list(dict.fromkeys(seqs))


def count_unfoldings(node: Node) -> int:
    """Number of unfoldings before removing duplicates."""
    if isinstance(node, Stmt):
        return 1
    if isinstance(node, Seq):
        n = 1
        for child in node.children:
            n *= count_unfoldings(child)
        return n
    if isinstance(node, Loop):
        k = count_unfoldings(node.body)
        return 1 + k + k * k
    if isinstance(node, Branch):
        return count_unfoldings(node.left) + count_unfoldings(node.right)
    if isinstance(node, Optional_):
        return count_unfoldings(node.body) + 1
    raise TypeError(f"not a program node: {node!r}")


def unfold_program(btp: BTP) -> list[LTP]:
    """All LTPs of ``btp``; a single unfolding keeps the program name,
    otherwise unfoldings are named ``Name[1]``, ``Name[2]``, ..."""
    seqs = _unfold_node(btp.body)
    ltps = []
    for i, stmts in enumerate(seqs, start=1):
        name = btp.name if len(seqs) == 1 else f"{btp.name}[{i}]"
        ltps.append(LTP(name, btp.name, stmts, _replicate(btp, stmts)))
    return ltps


def _replicate(btp: BTP, stmts: tuple[Statement, ...]) -> tuple[LTPAnnotation, ...]:
    positions: dict[str, list[int]] = defaultdict(list)
    for pos, stmt in enumerate(stmts):
        positions[stmt.label].append(pos)
    out = []
    for ann in btp.fk_annotations:
        for src in positions.get(ann.source, ()):
            for tgt in positions.get(ann.target, ()):
                out.append(LTPAnnotation(tgt, ann.fk, src))
    return tuple(out)


def unfold_workload(programs) -> list[LTP]:
    out: list[LTP] = []
    for btp in programs:
        out.extend(unfold_program(btp))
    return out
