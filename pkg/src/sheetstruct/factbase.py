"""Derived facts over a workbook: dependencies, labels, copies, predicates.

Everything here is computed once from an immutable :class:`Workbook` and
never mutated afterwards; the structure-matching layer treats this as its
read-only world.  All returned collections are ordered by (sheet, row,
col) so downstream behaviour is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cells import Address, CellContent, Formula, Number, Text, Workbook
from .formula import Expr, refs_of, to_offset_form

__all__ = [
    "FactBase",
    "build",
    "depends_on",
    "dependents",
    "depends_on_transitive",
    "is_label",
    "detect_cycles",
    "copy_of",
    "column_all_copies",
    "PredicateRegistry",
    "PredicateError",
    "eval_predicate",
]


def _ordered(addrs) -> tuple[Address, ...]:
    return tuple(sorted(addrs, key=lambda a: a.sort_key))


@dataclass(frozen=True)
class FactBase:
    wb: Workbook
    precedents: dict[Address, tuple[Address, ...]]
    dependents: dict[Address, tuple[Address, ...]]
    labels: frozenset[Address]
    bounds: dict[str, tuple[int, int]]
    offset_forms: dict[Address, Expr] = field(default_factory=dict, repr=False)


def build(wb: Workbook) -> FactBase:
    """Compute the dependency graph and label set for a workbook.

    A reference into an empty cell still counts as a dependency (inputs
    are often blank at dump time), so the dependents map may be keyed by
    addresses that hold no content.
    """
    precedents: dict[Address, tuple[Address, ...]] = {}
    dependents_raw: dict[Address, list[Address]] = {}
    offset_forms: dict[Address, Expr] = {}

    for addr, content in wb.cells.items():
        if not isinstance(content, Formula):
            continue
        targets = refs_of(content.ast)
        precedents[addr] = _ordered(targets)
        offset_forms[addr] = to_offset_form(content.ast, addr)
        for t in targets:
            dependents_raw.setdefault(t, []).append(addr)

    dependents = {t: _ordered(ds) for t, ds in dependents_raw.items()}
    labels = frozenset(
        addr
        for addr, content in wb.cells.items()
        if isinstance(content, Text) and not dependents.get(addr)
    )
    bounds = {sheet: wb.bounds(sheet) for sheet in wb.sheets}
    return FactBase(wb, precedents, dependents, labels, bounds, offset_forms)


def depends_on(fb: FactBase, c: Address) -> tuple[Address, ...]:
    """Direct precedents of ``c`` (cells its formula reads)."""
    return fb.precedents.get(c, ())


def dependents(fb: FactBase, c: Address) -> tuple[Address, ...]:
    """Formula cells that read ``c`` directly."""
    return fb.dependents.get(c, ())


def depends_on_transitive(fb: FactBase, c: Address) -> tuple[Address, ...]:
    """Everything reachable from ``c`` through one or more references.

    ``c`` itself appears only when it sits on a reference cycle.
    """
    seen: set[Address] = set()
    stack = list(fb.precedents.get(c, ()))
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        stack.extend(fb.precedents.get(cur, ()))
    return _ordered(seen)


def is_label(fb: FactBase, c: Address) -> bool:
    """Text content that no formula reads."""
    return c in fb.labels


def detect_cycles(fb: FactBase) -> list[tuple[Address, ...]]:
    """Reference cycles: SCCs of size >= 2 plus self-referencing cells.

    Each cycle is reported once with members ordered; the list is ordered
    by each cycle's first member.
    """
    # Tarjan's algorithm, iterative so deep chains cannot overflow the stack.
    index: dict[Address, int] = {}
    low: dict[Address, int] = {}
    on_stack: set[Address] = set()
    stack: list[Address] = []
    counter = 0
    sccs: list[tuple[Address, ...]] = []

    for root in fb.precedents:
        if root in index:
            continue
        work: list[tuple[Address, int]] = [(root, 0)]
        while work:
            node, child_i = work.pop()
            if child_i == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            children = fb.precedents.get(node, ())
            advanced = False
            for i in range(child_i, len(children)):
                child = children[i]
                if child not in index:
                    work.append((node, i + 1))
                    work.append((child, 0))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                self_loop = len(comp) == 1 and comp[0] in fb.precedents.get(comp[0], ())
                if len(comp) > 1 or self_loop:
                    sccs.append(_ordered(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    return sorted(sccs, key=lambda comp: comp[0].sort_key)


def copy_of(fb: FactBase, c: Address, d: Address) -> bool:
    """True when both cells hold formulas equal in offset normal form."""
    return (
        c in fb.offset_forms
        and d in fb.offset_forms
        and fb.offset_forms[c] == fb.offset_forms[d]
    )


def column_all_copies(fb: FactBase, sheet: str, col: int, row_from: int, row_to: int) -> bool:
    """True when rows ``row_from..row_to`` of a column are all formula copies."""
    if row_to < row_from:
        return False
    first = Address(sheet, col, row_from)
    if first not in fb.offset_forms:
        return False
    return all(
        copy_of(fb, first, Address(sheet, col, r))
        for r in range(row_from + 1, row_to + 1)
    )


# === predicates =======================================================

class PredicateError(ValueError):
    """Unknown predicate name or invalid definition."""


class _PredExpr:
    __slots__ = ()


@dataclass(frozen=True)
class _Name(_PredExpr):
    name: str


@dataclass(frozen=True)
class _And(_PredExpr):
    left: _PredExpr
    right: _PredExpr


@dataclass(frozen=True)
class _Or(_PredExpr):
    left: _PredExpr
    right: _PredExpr


@dataclass(frozen=True)
class _Not(_PredExpr):
    inner: _PredExpr


def _builtin(fb: FactBase, name: str, c: Address) -> bool:
    content: CellContent | None = fb.wb.cells.get(c)
    if name == "empty":
        return content is None
    if name == "label":
        return c in fb.labels
    if name == "number":
        return isinstance(content, Number)
    if name == "text":
        return isinstance(content, Text)
    if name == "formula":
        return isinstance(content, Formula)
    if name == "cell":
        # Attribute material: numbers and formulas always, text only when
        # nothing marks it out as a label.
        if isinstance(content, (Number, Formula)):
            return True
        return isinstance(content, Text) and c not in fb.labels
    raise PredicateError(f"unknown predicate {name!r}")


BUILTIN_PREDICATES = ("label", "cell", "empty", "number", "text", "formula")


class PredicateRegistry:
    """Named cell predicates: built-ins plus and/or/not compositions.

    User definitions are tiny boolean expressions over existing predicate
    names, e.g. ``define("data", "number or formula")``.  Built-ins cannot
    be shadowed and arbitrary code is not accepted.
    """

    def __init__(self) -> None:
        self._defs: dict[str, _PredExpr] = {}

    def names(self) -> tuple[str, ...]:
        return BUILTIN_PREDICATES + tuple(self._defs)

    def knows(self, name: str) -> bool:
        return name in BUILTIN_PREDICATES or name in self._defs

    def define(self, name: str, expression: str) -> None:
        if name in BUILTIN_PREDICATES:
            raise PredicateError(f"cannot shadow built-in predicate {name!r}")
        if not name.isidentifier() or not name.islower():
            raise PredicateError(f"bad predicate name {name!r}")
        expr = _parse_pred(expression)
        _check_names(expr, self, defining=name)
        self._defs[name] = expr

    def evaluate(self, name: str, fb: FactBase, c: Address) -> bool:
        if name in BUILTIN_PREDICATES:
            return _builtin(fb, name, c)
        expr = self._defs.get(name)
        if expr is None:
            raise PredicateError(f"unknown predicate {name!r}")
        return _eval_pred(expr, self, fb, c)


def _check_names(e: _PredExpr, reg: PredicateRegistry, defining: str) -> None:
    if isinstance(e, _Name):
        if e.name == defining or not reg.knows(e.name):
            raise PredicateError(f"unknown predicate {e.name!r}")
    elif isinstance(e, (_And, _Or)):
        _check_names(e.left, reg, defining)
        _check_names(e.right, reg, defining)
    elif isinstance(e, _Not):
        _check_names(e.inner, reg, defining)


def _eval_pred(e: _PredExpr, reg: PredicateRegistry, fb: FactBase, c: Address) -> bool:
    if isinstance(e, _Name):
        return reg.evaluate(e.name, fb, c)
    if isinstance(e, _And):
        return _eval_pred(e.left, reg, fb, c) and _eval_pred(e.right, reg, fb, c)
    if isinstance(e, _Or):
        return _eval_pred(e.left, reg, fb, c) or _eval_pred(e.right, reg, fb, c)
    if isinstance(e, _Not):
        return not _eval_pred(e.inner, reg, fb, c)
    raise TypeError(f"bad predicate expression {e!r}")


def _parse_pred(text: str) -> _PredExpr:
    # or-expr := and-expr ("or" and-expr)* ; and-expr := unary ("and" unary)*
    # unary := "not" unary | name | "(" or-expr ")"
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def unary() -> _PredExpr:
        tok = peek()
        if tok is None:
            raise PredicateError(f"truncated predicate expression {text!r}")
        if tok == "not":
            take()
            return _Not(unary())
        if tok == "(":
            take()
            e = or_expr()
            if peek() != ")":
                raise PredicateError(f"missing ')' in {text!r}")
            take()
            return e
        if tok in ("and", "or", ")"):
            raise PredicateError(f"unexpected {tok!r} in {text!r}")
        return _Name(take())

    def and_expr() -> _PredExpr:
        e = unary()
        while peek() == "and":
            take()
            e = _And(e, unary())
        return e

    def or_expr() -> _PredExpr:
        e = and_expr()
        while peek() == "or":
            take()
            e = _Or(e, and_expr())
        return e

    e = or_expr()
    if peek() is not None:
        raise PredicateError(f"trailing tokens in predicate expression {text!r}")
    return e


def eval_predicate(reg: PredicateRegistry, name: str, fb: FactBase, c: Address) -> bool:
    """Evaluate a named predicate at one cell."""
    return reg.evaluate(name, fb, c)
