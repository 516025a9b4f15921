"""Undoable command sessions over (workbook, fact base, model).

A session holds one loaded workbook, the fact base derived from it, the
current model, named grammars, the suggestions produced by the last
match, and an undo stack with one frame per elementary transform.  The
same command set backs the CLI pipeline, the REPL and the HTTP service.

Sessions are immutable values: ``execute`` returns a new session plus a
JSON-ready result payload, so a failing command can never leave a
half-applied state behind.  Every payload for a model-changing command
carries the freshly emitted MM listing under ``"mm"``.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, replace

from . import factbase as fbase
from .arrows import (
    Group,
    Model,
    NameFromLabel,
    Rename,
    Transform,
    TransformError,
    Ungroup,
    apply_transform,
    compile_model,
    decompile,
    emit_mm,
    generalize,
    match_to_transforms,
    model_summary,
    validate_model,
)
from .cells import (
    FactFileError,
    Formula,
    Number,
    Text,
    Workbook,
    col_to_letters,
    dump_facts,
    format_number,
    load_csv_grid,
    load_facts,
)
from .factbase import FactBase, PredicateRegistry, is_label
from .formula import FormulaError, render_expr
from .grammar import (
    Grammar,
    GrammarError,
    Match,
    match_all,
    parse_grammar,
    select_cover,
    validate_grammar,
)

__all__ = [
    "Session",
    "SessionError",
    "Load",
    "LoadGrammar",
    "MatchRule",
    "AcceptSuggestions",
    "ApplyTransform",
    "Generalize",
    "Undo",
    "Export",
    "Command",
    "create_session",
    "execute",
    "grid_cells",
    "match_payload",
    "discover",
]

EXPORT_FORMATS = ("mm", "facts", "json")


class SessionError(ValueError):
    """A command that cannot run.

    ``kind`` drives the HTTP status mapping: "malformed" (bad request
    shape), "precondition" (valid request, state refuses it; the model is
    unchanged) or "parse" (grammar/formula/facts text failed to parse).
    """

    def __init__(self, message: str, kind: str = "precondition"):
        super().__init__(message)
        self.kind = kind


# === commands =========================================================

@dataclass(frozen=True)
class Load:
    facts: str | None = None
    csv: str | None = None
    sheet: str | None = None


@dataclass(frozen=True)
class LoadGrammar:
    name: str
    text: str


@dataclass(frozen=True)
class MatchRule:
    grammar: str
    rule: str


@dataclass(frozen=True)
class AcceptSuggestions:
    indices: tuple[int, ...]


@dataclass(frozen=True)
class ApplyTransform:
    transform: Transform


@dataclass(frozen=True)
class Generalize:
    attr: str


@dataclass(frozen=True)
class Undo:
    pass


@dataclass(frozen=True)
class Export:
    format: str = "mm"


Command = (
    Load
    | LoadGrammar
    | MatchRule
    | AcceptSuggestions
    | ApplyTransform
    | Generalize
    | Undo
    | Export
)


@dataclass(frozen=True)
class Session:
    id: str
    wb: Workbook
    fb: FactBase
    model: Model
    registry: PredicateRegistry
    grammars: dict[str, Grammar]
    pending_matches: tuple[Match, ...]
    history: tuple[tuple[str, Model], ...]

    @property
    def mm(self) -> str:
        return emit_mm(self.model)


# === construction =====================================================

def _load_workbook(
    facts: str | None, csv_text: str | None, sheet: str | None
) -> Workbook:
    if (facts is None) == (csv_text is None):
        raise SessionError("provide exactly one of facts or csv", kind="malformed")
    try:
        if facts is not None:
            return load_facts(facts)
        return load_csv_grid(csv_text or "", sheet or "Sheet1")
    except (FactFileError, FormulaError) as e:
        raise SessionError(str(e), kind="parse") from e


def _fresh(sid: str, wb: Workbook) -> Session:
    model = decompile(wb)
    validate_model(model)
    return Session(
        id=sid,
        wb=wb,
        fb=fbase.build(wb),
        model=model,
        registry=PredicateRegistry(),
        grammars={},
        pending_matches=(),
        history=(),
    )


def create_session(
    facts: str | None = None,
    csv_text: str | None = None,
    sheet: str | None = None,
    session_id: str | None = None,
) -> Session:
    wb = _load_workbook(facts, csv_text, sheet)
    return _fresh(session_id or uuid.uuid4().hex, wb)


# === views ============================================================

def grid_cells(s: Session) -> list[dict]:
    """Grid projection: one entry per non-empty cell, reading order."""
    out = []
    for addr in sorted(s.wb.cells, key=lambda a: a.sort_key):
        content = s.wb.cells[addr]
        if isinstance(content, Number):
            kind, display = "num", format_number(content.value)
        elif isinstance(content, Text):
            kind = "label" if is_label(s.fb, addr) else "str"
            display = content.value
        else:
            assert isinstance(content, Formula)
            kind, display = "formula", content.source
        out.append(
            {
                "sheet": addr.sheet,
                "col": addr.col,
                "row": addr.row,
                "a1": f"{col_to_letters(addr.col)}{addr.row}",
                "kind": kind,
                "display": display,
            }
        )
    return out


def match_payload(matches: tuple[Match, ...] | list[Match]) -> list[dict]:
    return [
        {
            "index": i,
            "rule": m.rule,
            "anchor": repr(m.anchor),
            "bindings": [
                {"rule": name, "cells": [repr(a) for a in addrs]}
                for name, addrs in m.bindings
                if addrs
            ],
            "cells": [repr(a) for a in m.bound_cells],
        }
        for i, m in enumerate(matches)
    ]


def _export(s: Session, fmt: str) -> str:
    if fmt == "mm":
        return s.mm
    if fmt == "facts":
        return dump_facts(compile_model(s.model))
    if fmt == "json":
        return json.dumps(model_summary(s.model), indent=2, sort_keys=True) + "\n"
    raise SessionError(
        f"unknown export format {fmt!r}; expected one of {', '.join(EXPORT_FORMATS)}",
        kind="malformed",
    )


def _describe(t: Transform) -> str:
    if isinstance(t, Group):
        return f"group {t.name}"
    if isinstance(t, Rename):
        return f"rename {t.old} -> {t.new}"
    if isinstance(t, Ungroup):
        return f"ungroup {t.name}"
    if isinstance(t, NameFromLabel):
        return f"name {t.name}"
    return repr(t)


def _apply_with_frame(
    s: Session, t: Transform
) -> tuple[Session, str | None]:
    try:
        model, diagnostic = apply_transform(s.model, t, s.fb)
    except (TransformError, FormulaError) as e:
        raise SessionError(str(e)) from e
    validate_model(model)
    return (
        replace(s, model=model, history=s.history + ((_describe(t), s.model),)),
        diagnostic,
    )


# === execution ========================================================

def execute(s: Session, c: Command) -> tuple[Session, dict]:
    """Run one command; returns the successor session and a result payload."""
    if isinstance(c, Load):
        wb = _load_workbook(c.facts, c.csv, c.sheet)
        s2 = _fresh(s.id, wb)
        return s2, {"mm": s2.mm}

    if isinstance(c, LoadGrammar):
        try:
            g = parse_grammar(c.text)
        except GrammarError as e:
            raise SessionError(str(e), kind="parse") from e
        diagnostics = validate_grammar(g, s.registry)
        if diagnostics:
            return s, {"diagnostics": diagnostics}
        grammars = dict(s.grammars)
        grammars[c.name] = g
        return replace(s, grammars=grammars), {"diagnostics": []}

    if isinstance(c, MatchRule):
        g = s.grammars.get(c.grammar)
        if g is None:
            raise SessionError(f"unknown grammar {c.grammar!r}")
        if c.rule not in g.rules:
            raise SessionError(f"grammar {c.grammar!r} has no rule {c.rule!r}")
        cover = select_cover(match_all(g, c.rule, s.fb, s.registry))
        s2 = replace(s, pending_matches=tuple(cover))
        return s2, {"matches": match_payload(s2.pending_matches)}

    if isinstance(c, AcceptSuggestions):
        picked = []
        for i in c.indices:
            if not 0 <= i < len(s.pending_matches):
                raise SessionError(
                    f"no pending match {i}; have {len(s.pending_matches)}"
                )
            picked.append(s.pending_matches[i])
        transforms = match_to_transforms(picked, s.fb)
        s2 = s
        diagnostics = []
        for t in transforms:
            s2, diag = _apply_with_frame(s2, t)
            if diag:
                diagnostics.append(diag)
        remaining = tuple(
            m for i, m in enumerate(s.pending_matches) if i not in set(c.indices)
        )
        s2 = replace(s2, pending_matches=remaining)
        payload = {"mm": s2.mm, "applied": len(transforms)}
        if diagnostics:
            payload["diagnostics"] = diagnostics
        return s2, payload

    if isinstance(c, ApplyTransform):
        s2, diag = _apply_with_frame(s, c.transform)
        payload = {"mm": s2.mm}
        if diag:
            payload["diagnostics"] = [diag]
        return s2, payload

    if isinstance(c, Generalize):
        try:
            template = generalize(s.model, c.attr)
        except TransformError as e:
            raise SessionError(str(e)) from e
        equation = (
            f"{c.attr}[all t] = {render_expr(template)}" if template is not None else None
        )
        s2 = replace(s, history=s.history + ((f"generalize {c.attr}", s.model),))
        return s2, {"mm": s2.mm, "equation": equation}

    if isinstance(c, Undo):
        if not s.history:
            raise SessionError("nothing to undo")
        description, model = s.history[-1]
        s2 = replace(s, model=model, history=s.history[:-1], pending_matches=())
        return s2, {"mm": s2.mm, "undone": description}

    if isinstance(c, Export):
        return s, {"format": c.format, "content": _export(s, c.format)}

    raise SessionError(f"unknown command {c!r}", kind="malformed")


# === the non-interactive pipeline =====================================

def discover(
    source_text: str,
    grammar_text: str,
    *,
    is_csv: bool = False,
    sheet: str | None = None,
    rule: str | None = None,
) -> tuple[str, Model]:
    """Load, match every rule (or one), keep a disjoint cover, group, name, emit.

    Returns the MM listing and the final model.  Raises SessionError with
    a parse kind for unloadable inputs, precondition kind otherwise.
    """
    wb = _load_workbook(
        None if is_csv else source_text, source_text if is_csv else None, sheet
    )
    fb = fbase.build(wb)
    model = decompile(wb)
    validate_model(model)
    registry = PredicateRegistry()
    try:
        g = parse_grammar(grammar_text)
    except GrammarError as e:
        raise SessionError(str(e), kind="parse") from e
    diagnostics = validate_grammar(g, registry)
    if diagnostics:
        raise SessionError("; ".join(diagnostics), kind="parse")
    if rule is not None and rule not in g.rules:
        raise SessionError(f"grammar has no rule {rule!r}")
    rules = [rule] if rule is not None else list(g.rules)
    matches: list[Match] = []
    for name in rules:
        matches.extend(match_all(g, name, fb, registry))
    for t in match_to_transforms(select_cover(matches), fb):
        try:
            model, _ = apply_transform(model, t, fb)
        except (TransformError, FormulaError) as e:
            raise SessionError(str(e)) from e
        validate_model(model)
    return emit_mm(model), model
