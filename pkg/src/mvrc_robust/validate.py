"""Well-formedness checks for schemas and programs.

Validation never raises; it collects every problem into a list of
:class:`Diagnostic` so a caller can show them all at once.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .model import BTP, Kind, Schema, Statement, Workload

# Allowed shape of (mod, obs, pred) per statement kind:
#   "all"      defined and equal to Attr(rel)
#   "undef"    undefined
#   "any"      defined, possibly empty
#   "nonempty" defined and non-empty
SET_RULES: dict[Kind, tuple[str, str, str]] = {
    Kind.INS: ("all", "undef", "undef"),
    Kind.KEY_DEL: ("all", "undef", "undef"),
    Kind.PRED_DEL: ("all", "undef", "any"),
    Kind.KEY_SEL: ("undef", "any", "undef"),
    Kind.PRED_SEL: ("undef", "any", "any"),
    Kind.KEY_UPD: ("nonempty", "any", "undef"),
    Kind.PRED_UPD: ("nonempty", "any", "any"),
}


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    end_line: int
    end_column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str
    program: Optional[str] = None
    label: Optional[str] = None
    span: Optional[SourceSpan] = None

    def __str__(self) -> str:
        where = []
        if self.span is not None:
            where.append(str(self.span))
        if self.program is not None:
            where.append(self.program + (f".{self.label}" if self.label else ""))
        prefix = " ".join(where)
        return f"{prefix + ': ' if prefix else ''}error[{self.rule}]: {self.message}"


def set_shape_ok(rule: str, value, full: frozenset) -> bool:
    if rule == "undef":
        return value is None
    if value is None:
        return False
    if rule == "all":
        return value == full
    if rule == "nonempty":
        return len(value) > 0
    return True


_RULE_TEXT = {
    "all": "must be the full attribute set of the relation",
    "undef": "must be undefined",
    "any": "must be defined",
    "nonempty": "must be defined and non-empty",
}


def validate_schema(schema: Schema) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for name, n in Counter(r.name for r in schema.relations).items():
        if n > 1:
            diags.append(Diagnostic("schema.duplicate-relation", f"relation {name} declared {n} times"))
    for rel in schema.relations:
        for attr, n in Counter(rel.attributes).items():
            if n > 1:
                diags.append(Diagnostic("schema.duplicate-attribute", f"attribute {rel.name}.{attr} declared {n} times"))
        if not rel.key:
            diags.append(Diagnostic("schema.empty-key", f"relation {rel.name} has no key"))
        for attr in rel.key:
            if attr not in rel.attributes:
                diags.append(Diagnostic("schema.key-attribute", f"key attribute {attr} is not an attribute of {rel.name}"))
    for name, n in Counter(f.name for f in schema.foreign_keys).items():
        if n > 1:
            diags.append(Diagnostic("schema.duplicate-fk", f"foreign key {name} declared {n} times"))
    for fk in schema.foreign_keys:
        ok = True
        for rel_name, attrs in ((fk.domain, fk.domain_attrs), (fk.range, fk.range_attrs)):
            if not schema.has_relation(rel_name):
                diags.append(Diagnostic("fk.unknown-relation", f"foreign key {fk.name} refers to unknown relation {rel_name}"))
                ok = False
                continue
            missing = [a for a in attrs if a not in schema.relation(rel_name).attributes]
            if missing:
                diags.append(Diagnostic("fk.unknown-attribute", f"foreign key {fk.name}: {rel_name} has no attribute(s) {', '.join(missing)}"))
                ok = False
        if len(fk.domain_attrs) != len(fk.range_attrs) or not fk.domain_attrs:
            diags.append(Diagnostic("fk.arity", f"foreign key {fk.name} maps {len(fk.domain_attrs)} attribute(s) to {len(fk.range_attrs)}"))
        elif ok and set(fk.range_attrs) != set(schema.relation(fk.range).key):
            diags.append(Diagnostic("fk.range-not-key", f"foreign key {fk.name}: range attributes of {fk.range} are not its key"))
    return diags


def validate_statement(stmt: Statement, schema: Schema, program: Optional[str] = None) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    def err(rule: str, msg: str) -> None:
        diags.append(Diagnostic(rule, msg, program, stmt.label))

    if not schema.has_relation(stmt.relation):
        err("stmt.unknown-relation", f"unknown relation {stmt.relation}")
        return diags
    full = schema.attrs(stmt.relation)
    for set_name, value, rule in zip(("write", "read", "pred"), (stmt.mod, stmt.obs, stmt.pred), SET_RULES[stmt.kind]):
        if value is not None:
            unknown = sorted(value - full)
            if unknown:
                err("stmt.unknown-attribute", f"{set_name} set mentions unknown attribute(s) {', '.join(unknown)} of {stmt.relation}")
                continue
        if not set_shape_ok(rule, value, full):
            err(f"stmt.{stmt.kind.value}.{set_name}", f"{set_name} set of a {stmt.kind.value} statement {_RULE_TEXT[rule]}")
    return diags


def validate_program(prog: BTP, schema: Schema) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    stmts = prog.statements()
    for label, n in Counter(s.label for s in stmts).items():
        if n > 1:
            diags.append(Diagnostic("stmt.duplicate-label", f"label {label} used {n} times", prog.name, label))
    for stmt in stmts:
        diags.extend(validate_statement(stmt, schema, prog.name))
    by_label = {s.label: s for s in stmts}
    for ann in prog.fk_annotations:
        def err(rule: str, msg: str) -> None:
            diags.append(Diagnostic(rule, f"constraint {ann}: {msg}", prog.name, ann.target))

        missing = [lbl for lbl in (ann.target, ann.source) if lbl not in by_label]
        if missing:
            err("fk.annotation-unknown-label", f"unknown statement label(s) {', '.join(missing)}")
            continue
        if not schema.has_foreign_key(ann.fk):
            err("fk.annotation-unknown-fk", f"unknown foreign key {ann.fk}")
            continue
        fk = schema.foreign_key(ann.fk)
        target, source = by_label[ann.target], by_label[ann.source]
        if source.relation != fk.domain:
            err("fk.annotation-domain", f"{source.label} is over {source.relation}, not the domain {fk.domain}")
        if target.relation != fk.range:
            err("fk.annotation-range", f"{target.label} is over {target.relation}, not the range {fk.range}")
        if not target.kind.is_key_based:
            err("fk.annotation-not-key-based", f"{target.label} is a {target.kind.value} statement; the target must be key-based")
    return diags


def validate_workload(schema: Schema, programs) -> list[Diagnostic]:
    """All well-formedness violations of a schema plus programs; empty if valid."""
    diags = validate_schema(schema)
    for name, n in Counter(p.name for p in programs).items():
        if n > 1:
            diags.append(Diagnostic("program.duplicate-name", f"program {name} declared {n} times", name))
    for prog in programs:
        diags.extend(validate_program(prog, schema))
    return diags


def check(workload: Workload) -> list[Diagnostic]:
    return validate_workload(workload.schema, workload.programs)


class ValidationError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))
