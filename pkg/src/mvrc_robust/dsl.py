"""Workload DSL: parser with source spans and a canonical emitter.

Example::

    schema {
      relation Buyer(id, calls) key(id)
      relation Bids(buyerId, bid) key(buyerId)
      fk f1: Bids(buyerId) -> Buyer(id)
    }

    program PlaceBid {
      q3: key_update Buyer read {calls} write {calls}
      q4: key_select Bids read {bid}
      branch {
        q5: key_update Bids read {} write {bid}
      }
      constraint q3 = f1(q4)
    }

``branch { A }`` is an optional block, ``branch { A } else { B }`` a choice,
``loop { A }`` an iteration.  ``write`` may be left out for inserts and
deletes, which always write every attribute.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .model import (
    BTP,
    Branch,
    FKAnnotation,
    ForeignKey,
    Kind,
    Loop,
    Node,
    Optional_,
    RelationDecl,
    Schema,
    Seq,
    Statement,
    Stmt,
    Workload,
    seq,
)
from .validate import Diagnostic, SourceSpan, ValidationError, validate_workload

KIND_NAMES = {k.value: k for k in Kind}
_WRITE_IMPLIED = (Kind.INS, Kind.KEY_DEL, Kind.PRED_DEL)

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[{}():,=])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int

    @property
    def end_column(self) -> int:
        return self.column + len(self.text)


class ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            span = SourceSpan(filename, line, col, line, col + 1)
            raise ParseError(Diagnostic("dsl.lex", f"unexpected character {text[pos]!r}", span=span))
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class ParseResult:
    workload: Optional[Workload]
    diagnostics: list[Diagnostic]
    spans: dict[tuple, SourceSpan] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.workload is not None and not self.diagnostics


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.toks = tokens
        self.i = 0
        self.file = filename
        self.spans: dict[tuple, SourceSpan] = {}

    # token helpers ---------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def span_from(self, start: Token) -> SourceSpan:
        last = self.toks[max(self.i - 1, 0)]
        return SourceSpan(self.file, start.line, start.column, last.line, last.end_column)

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        span = SourceSpan(self.file, tok.line, tok.column, tok.line, max(tok.end_column, tok.column + 1))
        return ParseError(Diagnostic("dsl.syntax", message, span=span))

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident_list(self, close: str) -> list[str]:
        out = []
        if not self.at(close):
            out.append(self.ident("an attribute name").text)
            while self.at(","):
                self.i += 1
                out.append(self.ident("an attribute name").text)
        return out

    # grammar -------------------------------------------------------------

    def workload(self) -> Workload:
        schema = Schema()
        programs: list[BTP] = []
        seen_schema = False
        while self.tok.kind != "eof":
            if self.at("schema"):
                if seen_schema:
                    raise self.error("only one schema block is allowed")
                seen_schema = True
                schema = self.schema()
            elif self.at("program"):
                programs.append(self.program(schema))
            else:
                raise self.error(f"expected 'schema' or 'program', found {self.tok.text!r}")
        return Workload(schema, tuple(programs))

    def schema(self) -> Schema:
        start = self.expect("schema")
        self.expect("{")
        rels: list[RelationDecl] = []
        fks: list[ForeignKey] = []
        while not self.at("}"):
            if self.at("relation"):
                first = self.expect("relation")
                name = self.ident("a relation name").text
                self.expect("(")
                attrs = self.ident_list(")")
                self.expect(")")
                self.expect("key")
                self.expect("(")
                key = self.ident_list(")")
                self.expect(")")
                rels.append(RelationDecl(name, tuple(attrs), tuple(key)))
                self.spans.setdefault(("relation", name), self.span_from(first))
            elif self.at("fk"):
                first = self.expect("fk")
                name = self.ident("a foreign key name").text
                self.expect(":")
                dom = self.ident("a relation name").text
                self.expect("(")
                dom_attrs = self.ident_list(")")
                self.expect(")")
                self.expect("->")
                rng = self.ident("a relation name").text
                self.expect("(")
                rng_attrs = self.ident_list(")")
                self.expect(")")
                fks.append(ForeignKey(name, dom, tuple(dom_attrs), rng, tuple(rng_attrs)))
                self.spans.setdefault(("fk", name), self.span_from(first))
            else:
                raise self.error(f"expected 'relation', 'fk' or '}}', found {self.tok.text or 'end of input'!r}")
        self.expect("}")
        self.spans[("schema",)] = self.span_from(start)
        return Schema(tuple(rels), tuple(fks))

    def program(self, schema: Schema) -> BTP:
        start = self.expect("program")
        name = self.ident("a program name").text
        self.prog = name
        self.annotations: list[FKAnnotation] = []
        body = self.block(schema)
        self.spans.setdefault(("program", name), self.span_from(start))
        return BTP(name, body, tuple(self.annotations))

    def block(self, schema: Schema) -> Node:
        self.expect("{")
        items: list[Node] = []
        while not self.at("}"):
            node = self.item(schema)
            if node is not None:
                items.append(node)
        self.expect("}")
        return seq(*items)

    def item(self, schema: Schema) -> Optional[Node]:
        start = self.tok
        if self.at("loop"):
            self.i += 1
            return Loop(self.block(schema))
        if self.at("branch"):
            self.i += 1
            left = self.block(schema)
            if self.at("else"):
                self.i += 1
                return Branch(left, self.block(schema))
            return Optional_(left)
        if self.at("constraint"):
            self.i += 1
            target = self.ident("a statement label").text
            self.expect("=")
            fk = self.ident("a foreign key name").text
            self.expect("(")
            source = self.ident("a statement label").text
            self.expect(")")
            ann = FKAnnotation(target, fk, source)
            self.spans.setdefault(("constraint", self.prog, str(ann)), self.span_from(start))
            self.annotations.append(ann)
            return None
        if self.tok.kind == "ident" and self.toks[self.i + 1].text == ":":
            return Stmt(self.statement(schema))
        raise self.error(f"expected a statement, 'loop', 'branch' or 'constraint', found {self.tok.text or 'end of input'!r}")

    def statement(self, schema: Schema) -> Statement:
        start = self.tok
        label = self.ident("a statement label").text
        self.expect(":")
        kind_tok = self.ident("a statement kind")
        if kind_tok.text not in KIND_NAMES:
            raise self.error(f"unknown statement kind {kind_tok.text!r}; expected one of {', '.join(KIND_NAMES)}", kind_tok)
        kind = KIND_NAMES[kind_tok.text]
        relation = self.ident("a relation name").text
        sets: dict[str, frozenset] = {}
        while self.tok.text in ("pred", "read", "write") and self.toks[self.i + 1].text == "{":
            which = self.tok.text
            if which in sets:
                raise self.error(f"duplicate {which} set")
            self.i += 1
            self.expect("{")
            sets[which] = frozenset(self.ident_list("}"))
            self.expect("}")
        mod = sets.get("write")
        if mod is None and kind in _WRITE_IMPLIED and schema.has_relation(relation):
            mod = schema.attrs(relation)
        self.spans.setdefault(("stmt", self.prog, label), self.span_from(start))
        return Statement(label, kind, relation, sets.get("pred"), sets.get("read"), mod)


def _locate(diag: Diagnostic, spans: dict[tuple, SourceSpan]) -> Diagnostic:
    if diag.span is not None:
        return diag
    keys = []
    if diag.program is not None:
        if diag.rule.startswith("fk.annotation"):
            text = diag.message.split(":", 1)[0].removeprefix("constraint ")
            keys.append(("constraint", diag.program, text))
        if diag.label is not None:
            keys.append(("stmt", diag.program, diag.label))
        keys.append(("program", diag.program))
    keys.append(("schema",))
    for key in keys:
        if key in spans:
            return Diagnostic(diag.rule, diag.message, diag.program, diag.label, spans[key])
    return diag


def parse_workload(text: str, filename: str = "<input>", validate: bool = True) -> ParseResult:
    """Parse DSL text; syntax errors stop parsing, validation problems are all reported."""
    try:
        parser = _Parser(tokenize(text, filename), filename)
        workload = parser.workload()
    except ParseError as e:
        return ParseResult(None, [e.diagnostic])
    diags = []
    if validate:
        diags = [_locate(d, parser.spans) for d in validate_workload(workload.schema, workload.programs)]
    return ParseResult(workload, diags, parser.spans)


def parse_workload_or_raise(text: str, filename: str = "<input>") -> Workload:
    result = parse_workload(text, filename)
    if not result.ok:
        raise ValidationError(result.diagnostics)
    return result.workload


def load_workload(path: str) -> Workload:
    with open(path, encoding="utf-8") as fh:
        return parse_workload_or_raise(fh.read(), str(path))


# --- emitter ---------------------------------------------------------------

def _set(name: str, attrs) -> str:
    return f" {name} {{{', '.join(sorted(attrs))}}}" if attrs is not None else ""


def emit_statement(stmt: Statement, schema: Schema) -> str:
    line = f"{stmt.label}: {stmt.kind.value} {stmt.relation}"
    line += _set("pred", stmt.pred) + _set("read", stmt.obs)
    implied = (
        stmt.kind in _WRITE_IMPLIED
        and schema.has_relation(stmt.relation)
        and stmt.mod == schema.attrs(stmt.relation)
    )
    if not implied:
        line += _set("write", stmt.mod)
    return line


def _emit_node(node: Node, schema: Schema, indent: str, out: list[str]) -> None:
    if isinstance(node, Stmt):
        out.append(indent + emit_statement(node.statement, schema))
    elif isinstance(node, Seq):
        for child in node.children:
            _emit_node(child, schema, indent, out)
    elif isinstance(node, Loop):
        out.append(indent + "loop {")
        _emit_node(node.body, schema, indent + "  ", out)
        out.append(indent + "}")
    elif isinstance(node, Optional_):
        out.append(indent + "branch {")
        _emit_node(node.body, schema, indent + "  ", out)
        out.append(indent + "}")
    elif isinstance(node, Branch):
        out.append(indent + "branch {")
        _emit_node(node.left, schema, indent + "  ", out)
        out.append(indent + "} else {")
        _emit_node(node.right, schema, indent + "  ", out)
        out.append(indent + "}")
    else:
        raise TypeError(f"not a program node: {node!r}")


def emit_schema(schema: Schema) -> list[str]:
    out = ["schema {"]
    for rel in schema.relations:
        out.append(f"  relation {rel.name}({', '.join(rel.attributes)}) key({', '.join(rel.key)})")
    for fk in schema.foreign_keys:
        out.append(
            f"  fk {fk.name}: {fk.domain}({', '.join(fk.domain_attrs)}) -> {fk.range}({', '.join(fk.range_attrs)})"
        )
    out.append("}")
    return out


def emit_program(prog: BTP, schema: Schema, candidates=()) -> list[str]:
    out = [f"program {prog.name} {{"]
    _emit_node(prog.body, schema, "  ", out)
    for ann in prog.fk_annotations:
        out.append(f"  constraint {ann}")
    for ann in candidates:
        out.append(f"  # constraint {ann}")
    out.append("}")
    return out


def emit_workload(workload: Workload, header: Optional[str] = None) -> str:
    """Canonical DSL text; parsing it back gives an equal workload."""
    out: list[str] = []
    if header:
        out += [f"# {line}" if line else "#" for line in header.splitlines()]
    out += emit_schema(workload.schema)
    for prog in workload.programs:
        out.append("")
        out += emit_program(prog, workload.schema)
    return "\n".join(out) + "\n"
