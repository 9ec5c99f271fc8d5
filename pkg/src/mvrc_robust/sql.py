"""Translate a restricted SQL fragment into BTPs.

Accepted statement shapes::

    SELECT <cols> [INTO :v, ...] FROM R [[AS] a] [WHERE <cond>] [INTO ...]
    UPDATE R [[AS] a] SET A1 = <expr>, ... [WHERE <cond>] [RETURNING <cols> [INTO ...]]
    INSERT INTO R [(cols)] VALUES (...)
    DELETE FROM R [WHERE <cond>]

Control flow: ``IF ... ELSE ... ENDIF`` (or ``END IF``), ``REPEAT ... END
REPEAT`` and ``FOR ... ENDFOR``.  A line ``Name(params):`` or ``Name:`` starts
a program.  Host assignments (``:x = ...;``) and ``COMMIT`` are skipped.  A
``--q7`` comment names the statement it sits on or, failing that, the next one.

A statement is key-based iff its WHERE clause is a conjunction of equalities
that binds every primary key attribute to a parameter or constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .model import (
    BTP,
    Branch,
    FKAnnotation,
    Kind,
    Loop,
    Node,
    Optional_,
    Schema,
    Statement,
    Stmt,
    Workload,
    seq,
)
from .validate import Diagnostic, SourceSpan, ValidationError, validate_workload

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>--[^\n]*)"
    r"|(?P<param>:[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<number>\d+(?:\.\d+)?)"
    r"|(?P<string>'(?:[^']|'')*'|\"[^\"]*\")"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><>|<=|>=|==|!=|\+=|-=|\|\||[<>=+\-*/%])"
    r"|(?P<punct>[(),;.:])"
)
_LABEL = re.compile(r"--\s*(q\d+)\b")

_STATEMENT_START = {"SELECT", "UPDATE", "INSERT", "DELETE"}
_BLOCK_WORDS = {"IF", "ELSE", "ENDIF", "END", "REPEAT", "FOR", "ENDFOR", "COMMIT"}
_CLAUSE_WORDS = {
    "SELECT", "FROM", "WHERE", "INTO", "SET", "RETURNING", "VALUES", "AS",
    "AND", "OR", "NOT", "IN", "IS", "NULL", "LIKE", "BETWEEN", "TRUE", "FALSE",
}
_UNSUPPORTED = {
    "JOIN": "join", "ON": "join", "USING": "join", "UNION": "set operation",
    "INTERSECT": "set operation", "EXCEPT": "set operation",
    "GROUP": "grouping", "HAVING": "grouping", "ORDER": "ordering", "LIMIT": "limit",
    "DISTINCT": "distinct", "EXISTS": "subquery",
    "COUNT": "aggregate", "SUM": "aggregate", "AVG": "aggregate", "MIN": "aggregate", "MAX": "aggregate",
}
_KEYWORDS = _STATEMENT_START | _BLOCK_WORDS | _CLAUSE_WORDS | set(_UNSUPPORTED)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    column: int

    @property
    def upper(self) -> str:
        return self.text.upper() if self.kind == "ident" else self.text

    def is_kw(self, *words: str) -> bool:
        return self.kind == "ident" and self.text.upper() in words


class SqlError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


def _lex(text: str, filename: str) -> tuple[list[Tok], list[tuple[int, str]]]:
    """Tokens plus (token index, label) for every ``--qN`` comment."""
    toks: list[Tok] = []
    labels: list[tuple[int, str]] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            span = SourceSpan(filename, line, col, line, col + 1)
            raise SqlError(Diagnostic("sql.lex", f"unexpected character {text[pos]!r}", span=span))
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            lm = _LABEL.match(m.group())
            if lm:
                labels.append((len(toks), lm.group(1)))
        elif kind != "ws":
            toks.append(Tok(kind, m.group(), line, col))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks, labels


# --- per-statement analysis ------------------------------------------------

@dataclass
class SqlStatement:
    """One translated statement plus the parameter bindings used for FK inference."""

    statement: Statement
    bindings: dict[str, set[str]] = field(default_factory=dict)
    span: Optional[SourceSpan] = None


@dataclass
class SqlResult:
    programs: list[BTP]
    candidates: dict[str, list[FKAnnotation]]
    diagnostics: list[Diagnostic]
    statements: dict[str, dict[str, SqlStatement]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def workload(self, schema: Schema, apply_candidates: bool = False) -> Workload:
        progs = self.programs
        if apply_candidates:
            progs = [BTP(p.name, p.body, tuple(self.candidates.get(p.name, ()))) for p in progs]
        return Workload(schema, tuple(progs))


class _Translator:
    def __init__(self, toks: list[Tok], labels, schema: Schema, filename: str):
        self.toks = self.main = toks
        self.i = 0
        self.schema = schema
        self.file = filename
        self.pending_labels = dict(labels)
        self.label_queue: list[str] = []
        self.counter = 0
        self.used: set[str] = {lbl for _, lbl in labels}
        self.info: dict[str, dict[str, SqlStatement]] = {}

    # helpers -------------------------------------------------------------

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def span(self, start: Tok, end: Optional[Tok] = None) -> SourceSpan:
        end = end or start
        return SourceSpan(self.file, start.line, start.column, end.line, end.column + max(len(end.text), 1))

    def fail(self, rule: str, message: str, tok: Optional[Tok] = None) -> SqlError:
        return SqlError(Diagnostic(rule, message, span=self.span(tok or self.tok)))

    def unsupported(self, what: str, tok: Optional[Tok] = None) -> SqlError:
        return self.fail("sql.unsupported", f"unsupported syntax: {what}", tok)

    def advance(self) -> Tok:
        tok = self.tok
        # a label comment just before this token names the next statement
        if self.toks is self.main and self.i in self.pending_labels:
            self.label_queue.append(self.pending_labels.pop(self.i))
        self.i += 1
        return tok

    def expect_kw(self, word: str) -> Tok:
        if not self.tok.is_kw(word):
            raise self.fail("sql.syntax", f"expected {word}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def expect(self, text: str) -> Tok:
        if self.tok.text != text:
            raise self.fail("sql.syntax", f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def at_end_of_statement(self) -> bool:
        t = self.tok
        if t.kind == "eof" or t.text == ";":
            return True
        if t.is_kw(*(_STATEMENT_START | _BLOCK_WORDS)):
            return True
        return self._at_header()

    def _at_header(self) -> bool:
        t = self.tok
        if t.kind != "ident" or t.upper in _KEYWORDS:
            return False
        j = self.i + 1
        if self.toks[j].text == "(":
            depth = 0
            while self.toks[j].kind != "eof":
                if self.toks[j].text == "(":
                    depth += 1
                elif self.toks[j].text == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            j += 1
        if j >= len(self.toks):
            return False
        return self.toks[j].text == ":" and self.toks[j].line == t.line

    def relation(self, tok: Tok) -> str:
        for rel in self.schema.relations:
            if rel.name.lower() == tok.text.lower():
                return rel.name
        raise self.fail("sql.unknown-relation", f"unknown relation {tok.text}", tok)

    def _take_label(self) -> str:
        if self.label_queue:
            return self.label_queue.pop(0)
        while True:
            self.counter += 1
            label = f"q{self.counter}"
            if label not in self.used:
                self.used.add(label)
                return label

    # programs ----------------------------------------------------------

    def translate(self) -> list[BTP]:
        programs: list[BTP] = []
        while self.tok.kind != "eof":
            if self._at_header():
                name = self.advance().text
                if self.tok.text == "(":
                    self._skip_parens()
                self.expect(":")
            elif not programs:
                name = "Program"
            else:
                raise self.fail("sql.syntax", f"unexpected {self.tok.text!r}")
            self.program = name
            self.info[name] = {}
            body = self.block(stop=())
            programs.append(BTP(name, body if body is not None else seq()))
        return programs

    def _skip_parens(self) -> None:
        depth = 0
        while self.tok.kind != "eof":
            t = self.advance()
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    return

    def block(self, stop: tuple[str, ...]) -> Optional[Node]:
        items: list[Node] = []
        while True:
            t = self.tok
            if t.kind == "eof" or self._at_header():
                if stop:
                    raise self.fail("sql.syntax", f"missing {stop[0]}")
                break
            if t.is_kw(*stop):
                break
            node = self.item()
            if node is not None:
                items.append(node)
        if not items:
            return None
        return seq(*items)

    def _skip_to_colon_or_then(self) -> None:
        while self.tok.kind != "eof":
            t = self.advance()
            if t.is_kw("THEN") or t.text == ":":
                return

    def _close(self, *words: str) -> None:
        t = self.tok
        if t.is_kw("END"):
            self.advance()
            if self.tok.kind == "ident" and self.tok.upper in words:
                self.advance()
        elif t.kind == "ident" and t.upper in {"END" + w for w in words}:
            self.advance()
        else:
            raise self.fail("sql.syntax", f"expected END {words[0]}")
        if self.tok.text == ";":
            self.advance()

    def item(self) -> Optional[Node]:
        t = self.tok
        if t.is_kw("IF"):
            self.advance()
            self._skip_to_colon_or_then()
            then = self.block(stop=("ELSE", "ENDIF", "END"))
            other = None
            if self.tok.is_kw("ELSE"):
                self.advance()
                if self.tok.text == ":":
                    self.advance()
                other = self.block(stop=("ENDIF", "END"))
            self._close("IF")
            if then is None and other is None:
                return None
            if then is None:
                return Optional_(other)
            if other is None:
                return Optional_(then)
            return Branch(then, other)
        if t.is_kw("REPEAT"):
            self.advance()
            body = self.block(stop=("END",))
            self._close("REPEAT")
            return Loop(body) if body is not None else None
        if t.is_kw("FOR"):
            self.advance()
            self._skip_to_colon_or_then()
            body = self.block(stop=("ENDFOR", "END"))
            self._close("FOR")
            return Loop(body) if body is not None else None
        if t.is_kw("COMMIT"):
            self.advance()
            if self.tok.text == ";":
                self.advance()
            return None
        if t.text == ";":
            self.advance()
            return None
        if t.kind == "param":
            # host-variable assignment
            while self.tok.kind != "eof" and self.tok.text != ";":
                self.advance()
            self.advance()
            return None
        if t.is_kw(*_STATEMENT_START):
            return Stmt(self.statement())
        if t.is_kw("ELSE", "ENDIF", "END", "ENDFOR"):
            raise self.fail("sql.syntax", f"unmatched {t.text}")
        raise self.fail("sql.syntax", f"expected a statement, found {t.text!r}")

    # statements --------------------------------------------------------

    def statement(self) -> Statement:
        start = self.tok
        word = start.upper
        self.advance()
        if word == "SELECT":
            parsed = self._select()
        elif word == "UPDATE":
            parsed = self._update()
        elif word == "INSERT":
            parsed = self._insert()
        else:
            parsed = self._delete()
        end = self.toks[self.i - 1]
        if self.tok.text == ";":
            self.advance()
        kind, rel, pred, obs, mod, bindings = parsed
        label = self._take_label()
        stmt = Statement(label, kind, rel, pred, obs, mod)
        self.info[self.program][label] = SqlStatement(stmt, bindings, self.span(start, end))
        return stmt

    def _expr(self, rel: str, aliases: set[str], stop) -> tuple[list[Tok], set[str]]:
        """Consume an expression up to a top-level stop keyword/punctuation;
        return its tokens and the attributes of ``rel`` it mentions."""
        toks: list[Tok] = []
        attrs: set[str] = set()
        depth = 0
        while True:
            t = self.tok
            if t.kind == "eof":
                break
            if depth == 0 and (t.text in (",", ";", ")") or t.is_kw(*stop) or self.at_end_of_statement()):
                break
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
            elif t.is_kw("SELECT"):
                raise self.unsupported("subquery", t)
            elif t.kind == "ident" and t.upper in _UNSUPPORTED:
                raise self.unsupported(_UNSUPPORTED[t.upper], t)
            elif t.kind == "ident" and t.upper not in _KEYWORDS:
                if self.peek().text == "(":
                    raise self.unsupported(f"function call {t.text}", t)
                name = t.text
                if self.peek().text == ".":
                    if t.text.lower() not in aliases:
                        raise self.fail("sql.unknown-relation", f"unknown table reference {t.text}", t)
                    self.advance()
                    self.advance()
                    t = self.tok
                    if t.kind != "ident":
                        raise self.fail("sql.syntax", "expected an attribute after '.'")
                    name = t.text
                attrs.add(self._attr(rel, t, name))
            toks.append(self.advance())
        return toks, attrs

    def _attr(self, rel: str, tok: Tok, name: str) -> str:
        for a in self.schema.relation(rel).attributes:
            if a.lower() == name.lower():
                return a
        raise self.fail("sql.unknown-attribute", f"unknown attribute {name} of {rel}", tok)

    def _list(self, rel, aliases, stop) -> list[tuple[list[Tok], set[str]]]:
        items = [self._expr(rel, aliases, stop)]
        while self.tok.text == ",":
            self.advance()
            items.append(self._expr(rel, aliases, stop))
        return items

    def _into(self) -> list[str]:
        self.expect_kw("INTO")
        names = []
        while True:
            if self.tok.kind != "param":
                raise self.fail("sql.syntax", "expected a :variable after INTO")
            names.append(self.advance().text)
            if self.tok.text != ",":
                return names
            self.advance()

    def _table(self) -> tuple[str, set[str]]:
        tok = self.tok
        if tok.kind != "ident" or tok.upper in _KEYWORDS:
            raise self.fail("sql.syntax", f"expected a relation name, found {tok.text!r}")
        self.advance()
        rel = self.relation(tok)
        aliases = {tok.text.lower()}
        if self.tok.is_kw("AS"):
            self.advance()
            aliases.add(self.advance().text.lower())
        elif self.tok.kind == "ident" and self.tok.upper not in _KEYWORDS and not self._at_header():
            aliases.add(self.advance().text.lower())
        if self.tok.text == ",":
            raise self.unsupported("join")
        if self.tok.kind == "ident" and self.tok.upper in _UNSUPPORTED:
            raise self.unsupported(_UNSUPPORTED[self.tok.upper])
        return rel, aliases

    def _where(self, rel, aliases):
        """(predicate attributes, equality bindings, is pure conjunction of equalities)."""
        toks, attrs = self._expr(rel, aliases, stop=("RETURNING", "INTO"))
        conjuncts: list[list[Tok]] = [[]]
        simple = True
        depth = 0
        for t in toks:
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
            if depth == 0 and t.is_kw("AND"):
                conjuncts.append([])
                continue
            conjuncts[-1].append(t)
        bindings: dict[str, set[str]] = {}
        for c in conjuncts:
            eq = self._equality(rel, c)
            if eq is None:
                simple = False
                continue
            attr, value = eq
            bindings.setdefault(attr, set()).add(value)
        return attrs, bindings, simple

    def _equality(self, rel, conj: list[Tok]) -> Optional[tuple[str, str]]:
        """``attr = value`` (either side), value a parameter or a literal."""
        toks = [t for t in conj if t.text not in ("(", ")")]
        # strip qualifiers: alias . attr
        flat = []
        k = 0
        while k < len(toks):
            if k + 2 < len(toks) and toks[k + 1].text == ".":
                flat.append(toks[k + 2])
                k += 3
            else:
                flat.append(toks[k])
                k += 1
        if len(flat) != 3 or flat[1].text not in ("=", "=="):
            return None
        a, b = flat[0], flat[2]
        for col, val in ((a, b), (b, a)):
            if col.kind == "ident" and col.upper not in _KEYWORDS and val.kind in ("param", "number", "string"):
                return self._attr(rel, col, col.text), val.text
        return None

    def _kind(self, rel, bindings, simple, key_kind, pred_kind):
        key = self.schema.relation(rel).key
        if simple and all(k in bindings for k in key):
            return key_kind
        return pred_kind

    def _plain_column(self, rel, toks: list[Tok]) -> Optional[str]:
        toks = toks[2:] if len(toks) == 3 and toks[1].text == "." else toks
        if len(toks) == 1 and toks[0].kind == "ident" and toks[0].upper not in _KEYWORDS:
            return self._attr(rel, toks[0], toks[0].text)
        return None

    def _bind_into(self, rel, items, into, bindings) -> None:
        for (toks, _), var in zip(items, into):
            col = self._plain_column(rel, toks)
            if col is not None:
                bindings.setdefault(col, set()).add(var)

    def _select(self):
        star = self.tok.text == "*"
        if star:
            self.advance()
            items = []
        else:
            # the relation is not known yet: collect raw tokens, resolve after FROM
            items_raw = self._raw_list(stop=("INTO", "FROM"))
        into = self._into() if self.tok.is_kw("INTO") else []
        self.expect_kw("FROM")
        rel, aliases = self._table()
        if not star:
            items = [self._resolve(rel, aliases, raw) for raw in items_raw]
        pred_attrs, bindings, simple = set(), {}, True
        has_where = self.tok.is_kw("WHERE")
        if has_where:
            self.advance()
            pred_attrs, bindings, simple = self._where(rel, aliases)
        if self.tok.is_kw("INTO"):
            if into:
                raise self.fail("sql.syntax", "INTO given twice")
            into = self._into()
        if not self.at_end_of_statement():
            raise self.unsupported(f"unexpected {self.tok.text!r} in SELECT")
        obs = set(self.schema.attrs(rel)) if star else set().union(*(a for _, a in items))
        kind = self._kind(rel, bindings, simple and has_where, Kind.KEY_SEL, Kind.PRED_SEL)
        self._bind_into(rel, items, into, bindings)
        pred = None if kind is Kind.KEY_SEL else frozenset(pred_attrs)
        return kind, rel, pred, frozenset(obs), None, bindings

    def _raw_list(self, stop) -> list[list[Tok]]:
        items: list[list[Tok]] = [[]]
        depth = 0
        while self.tok.kind != "eof":
            t = self.tok
            if depth == 0 and (t.is_kw(*stop) or t.text in (";", ")")):
                break
            if t.is_kw("SELECT"):
                raise self.unsupported("subquery", t)
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
            if depth == 0 and t.text == ",":
                items.append([])
                self.advance()
                continue
            items[-1].append(self.advance())
        return items

    def _resolve(self, rel, aliases, raw: list[Tok]) -> tuple[list[Tok], set[str]]:
        saved = (self.toks, self.i)
        self.toks, self.i = raw + [Tok("eof", "", raw[-1].line if raw else 0, 0)], 0
        try:
            toks, attrs = self._expr(rel, aliases, stop=())
            if self.tok.kind != "eof":
                raise self.fail("sql.syntax", f"unexpected {self.tok.text!r} in select list")
        finally:
            self.toks, self.i = saved
        return toks, attrs

    def _update(self):
        rel, aliases = self._table()
        if self.tok.is_kw("FROM"):
            raise self.unsupported("join (UPDATE ... FROM)")
        self.expect_kw("SET")
        mod: set[str] = set()
        obs: set[str] = set()
        while True:
            tok = self.tok
            if tok.kind != "ident":
                raise self.fail("sql.syntax", "expected an attribute in SET")
            self.advance()
            if self.tok.text == ".":
                self.advance()
                tok = self.advance()
            target = self._attr(rel, tok, tok.text)
            op = self.tok
            if op.text not in ("=", "+=", "-="):
                raise self.fail("sql.syntax", f"expected '=' after {target}")
            self.advance()
            if op.text != "=":
                obs.add(target)
            _, attrs = self._expr(rel, aliases, stop=("WHERE", "RETURNING", "FROM"))
            if self.tok.is_kw("FROM"):
                raise self.unsupported("join (UPDATE ... FROM)")
            obs |= attrs
            mod.add(target)
            if self.tok.text != ",":
                break
            self.advance()
        pred_attrs, bindings, simple, has_where = set(), {}, True, False
        if self.tok.is_kw("WHERE"):
            has_where = True
            self.advance()
            pred_attrs, bindings, simple = self._where(rel, aliases)
        kind = self._kind(rel, bindings, simple and has_where, Kind.KEY_UPD, Kind.PRED_UPD)
        if self.tok.is_kw("RETURNING"):
            self.advance()
            items = self._list(rel, aliases, stop=("INTO",))
            for _, attrs in items:
                obs |= attrs
            if self.tok.is_kw("INTO"):
                self._bind_into(rel, items, self._into(), bindings)
        if not self.at_end_of_statement():
            raise self.unsupported(f"unexpected {self.tok.text!r} in UPDATE")
        pred = None if kind is Kind.KEY_UPD else frozenset(pred_attrs)
        return kind, rel, pred, frozenset(obs), frozenset(mod), bindings

    def _insert(self):
        self.expect_kw("INTO")
        rel, _ = self._table()
        attrs = self.schema.relation(rel).attributes
        cols: list[str] = list(attrs)
        if self.tok.text == "(":
            self.advance()
            cols = []
            while True:
                tok = self.tok
                if tok.kind != "ident":
                    raise self.fail("sql.syntax", "expected a column name")
                self.advance()
                cols.append(self._attr(rel, tok, tok.text))
                if self.tok.text != ",":
                    break
                self.advance()
            self.expect(")")
        if self.tok.is_kw("SELECT"):
            raise self.unsupported("INSERT ... SELECT")
        self.expect_kw("VALUES")
        self.expect("(")
        values = self._raw_list(stop=())
        self.expect(")")
        if len(values) != len(cols):
            raise self.fail("sql.syntax", f"{len(cols)} columns but {len(values)} values")
        bindings: dict[str, set[str]] = {}
        for col, val in zip(cols, values):
            if len(val) == 1 and val[0].kind in ("param", "number", "string"):
                bindings.setdefault(col, set()).add(val[0].text)
        if not self.at_end_of_statement():
            raise self.unsupported(f"unexpected {self.tok.text!r} in INSERT")
        return Kind.INS, rel, None, None, self.schema.attrs(rel), bindings

    def _delete(self):
        self.expect_kw("FROM")
        rel, aliases = self._table()
        pred_attrs, bindings, simple, has_where = set(), {}, True, False
        if self.tok.is_kw("WHERE"):
            has_where = True
            self.advance()
            pred_attrs, bindings, simple = self._where(rel, aliases)
        if not self.at_end_of_statement():
            raise self.unsupported(f"unexpected {self.tok.text!r} in DELETE")
        kind = self._kind(rel, bindings, simple and has_where, Kind.KEY_DEL, Kind.PRED_DEL)
        pred = None if kind is Kind.KEY_DEL else frozenset(pred_attrs)
        return kind, rel, pred, None, self.schema.attrs(rel), bindings


def infer_fk_candidates(schema: Schema, statements: dict[str, SqlStatement]) -> list[FKAnnotation]:
    """``qj = f(qi)`` whenever qi (over the domain of f) and key-based qj (over
    its range) bind every attribute pair of f to a common parameter."""
    out: list[FKAnnotation] = []
    items = list(statements.values())
    for fk in schema.foreign_keys:
        for src in items:
            if src.statement.relation != fk.domain:
                continue
            for dst in items:
                if dst is src or dst.statement.relation != fk.range or not dst.statement.kind.is_key_based:
                    continue
                if all(
                    src.bindings.get(a, set()) & {v for v in dst.bindings.get(b, set()) if v.startswith(":")}
                    for a, b in zip(fk.domain_attrs, fk.range_attrs)
                ):
                    out.append(FKAnnotation(dst.statement.label, fk.name, src.statement.label))
    return out


def translate_sql(text: str, schema: Schema, filename: str = "<sql>") -> SqlResult:
    """Translate every program in ``text``; diagnostics are returned, never raised."""
    try:
        toks, labels = _lex(text, filename)
        tr = _Translator(toks, labels, schema, filename)
        programs = tr.translate()
    except SqlError as e:
        return SqlResult([], {}, [e.diagnostic])
    candidates = {p.name: infer_fk_candidates(schema, tr.info[p.name]) for p in programs}
    diags = validate_workload(schema, programs)
    return SqlResult(programs, candidates, diags, tr.info)


def sql_to_btp(text: str, schema: Schema, filename: str = "<sql>") -> BTP:
    """Translate a single program; raises :class:`ValidationError` on any diagnostic."""
    result = translate_sql(text, schema, filename)
    if not result.ok:
        raise ValidationError(result.diagnostics)
    if len(result.programs) != 1:
        raise ValidationError([Diagnostic("sql.syntax", f"expected one program, found {len(result.programs)}")])
    return result.programs[0]


def sql_to_dsl(text: str, schema: Schema, filename: str = "<sql>") -> str:
    """DSL text for the translated programs with FK candidates commented out."""
    from .dsl import emit_program, emit_schema

    result = translate_sql(text, schema, filename)
    if not result.ok:
        raise ValidationError(result.diagnostics)
    out = ["# generated from " + filename, "# review the commented constraints before enabling them"]
    out += emit_schema(schema)
    for prog in result.programs:
        out.append("")
        out += emit_program(prog, schema, result.candidates.get(prog.name, ()))
    return "\n".join(out) + "\n"
