"""Formula abstract syntax, parsing and printing.

The expression dialect::

    expr    :=  cmp
    cmp     :=  add (("=" | "<" | ">" | "<=" | ">=" | "<>") add)*
    add     :=  mul (("+" | "-") mul)*
    mul     :=  pow (("*" | "/") pow)*
    pow     :=  unary ("^" pow)?          -- right associative
    unary   :=  "-" unary | primary       -- unary minus binds tighter than ^
    primary :=  number | string | ref | ref ":" ref
             |  NAME "(" expr ("," expr)* ")" | "(" expr ")"

References are A1 style with optional ``$`` absolute markers and an
optional ``Sheet!`` prefix (quoted when the name is not identifier-like).
Ranges like ``A1:B3`` may appear only as call arguments or as operands of
a comparison.  Function names are case-insensitive and normalized to
upper case.

Attribute references (``Income[1]``, ``Income[t]``, ``Income[1..3]``)
never come from the parser; they are introduced by model transformations
and only printed here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Callable, Mapping

from .cells import Address, col_to_letters, format_number, letters_to_col

__all__ = [
    "Expr",
    "Num",
    "Str",
    "Ref",
    "RangeRef",
    "BinOp",
    "Neg",
    "Call",
    "AttrRef",
    "AttrRange",
    "OffsetRef",
    "IndexExpr",
    "ConstIndex",
    "ParamIndex",
    "EnumIndex",
    "FormulaError",
    "parse_formula",
    "print_formula",
    "render_expr",
    "refs_of",
    "rewrite_refs",
    "expand_range",
    "to_offset_form",
    "from_offset_form",
]

COMPARISONS = ("=", "<", ">", "<=", ">=", "<>")
_BINARY_LEVEL = {
    "=": 1, "<": 1, ">": 1, "<=": 1, ">=": 1, "<>": 1,
    "+": 2, "-": 2,
    "*": 3, "/": 3,
    "^": 4,
}
_NEG_LEVEL = 5
_ATOM_LEVEL = 6


class FormulaError(ValueError):
    """Formula syntax or rewrite failure; ``pos`` is a 0-based offset."""

    def __init__(self, message: str, pos: int | None = None):
        super().__init__(message if pos is None else f"{message} (at offset {pos})")
        self.pos = pos


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Str(Expr):
    value: str


@dataclass(frozen=True)
class Ref(Expr):
    """Reference to one cell.

    ``col_abs``/``row_abs`` mirror ``$`` markers; ``sheet_explicit`` is
    true exactly when the target lies on a different sheet than the host
    cell, which is also when printing emits a sheet prefix.
    """

    target: Address
    col_abs: bool = False
    row_abs: bool = False
    sheet_explicit: bool = False


@dataclass(frozen=True)
class RangeRef(Expr):
    """Rectangular range; corners are normalized so start <= end per axis."""

    start: Ref
    end: Ref


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]


class IndexExpr:
    __slots__ = ()


@dataclass(frozen=True)
class ConstIndex(IndexExpr):
    value: int


@dataclass(frozen=True)
class ParamIndex(IndexExpr):
    """The quantified index variable plus a constant offset: t, t+1, t-2."""

    offset: int = 0


@dataclass(frozen=True)
class EnumIndex(IndexExpr):
    label: str


@dataclass(frozen=True)
class AttrRef(Expr):
    """Reference to one element of a named attribute, e.g. ``Income[2]``.

    The absolute markers of the cell reference it replaced are carried
    along (unprinted) so un-grouping can restore the original reference.
    """

    attr: str
    index: IndexExpr
    col_abs: bool = False
    row_abs: bool = False


@dataclass(frozen=True)
class AttrRange(Expr):
    """A run of consecutive attribute elements, e.g. ``Income[1..3]``."""

    attr: str
    lo: int
    hi: int
    start_flags: tuple[bool, bool] = (False, False)
    end_flags: tuple[bool, bool] = (False, False)


@dataclass(frozen=True)
class OffsetRef(Expr):
    """A reference in offset normal form (copy detection).

    Relative axes hold the delta to the host cell, absolute axes hold the
    absolute coordinate.  ``sheet`` is None for same-sheet references.
    """

    sheet: str | None
    col_abs: bool
    col: int
    row_abs: bool
    row: int


# === tokenizer ========================================================

_REF_RE = re.compile(
    r"(?:(?:'(?P<qsheet>[^'\n]+)'|(?P<sheet>[A-Za-z_][A-Za-z0-9_]*))!)?"
    r"(?P<cabs>\$?)(?P<col>[A-Za-z]+)(?P<rabs>\$?)(?P<row>[0-9]+)"
)
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
_NUM_RE = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_STR_RE = re.compile(r'"(?:[^"]|"")*"')
_OP_RE = re.compile(r"<=|>=|<>|[=<>+\-*/^(),:]")


@dataclass(frozen=True)
class _Token:
    kind: str  # ref | ident | num | str | op | end
    text: str
    pos: int
    groups: dict | None = None


def _tokenize(body: str, offset: int) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(body)
    while i < n:
        ch = body[i]
        if ch in " \t":
            i += 1
            continue
        if ch in "\n\r":
            raise FormulaError("formulas are single-line", offset + i)
        m = _STR_RE.match(body, i)
        if m:
            raw = m.group(0)
            if "\n" in raw or "\t" in raw:
                raise FormulaError("control characters in string literal", offset + i)
            tokens.append(_Token("str", raw[1:-1].replace('""', '"'), offset + i))
            i = m.end()
            continue
        m = _NUM_RE.match(body, i)
        if m:
            tokens.append(_Token("num", m.group(0), offset + i))
            i = m.end()
            continue
        m = _REF_RE.match(body, i)
        if m and body[m.end() : m.end() + 1] != "(":
            tokens.append(_Token("ref", m.group(0), offset + i, m.groupdict()))
            i = m.end()
            continue
        m = _IDENT_RE.match(body, i)
        if m:
            tokens.append(_Token("ident", m.group(0), offset + i))
            i = m.end()
            continue
        m = _OP_RE.match(body, i)
        if m:
            tokens.append(_Token("op", m.group(0), offset + i))
            i = m.end()
            continue
        raise FormulaError(f"unexpected character {ch!r}", offset + i)
    tokens.append(_Token("end", "", offset + n))
    return tokens


# === parser ===========================================================

class _Parser:
    def __init__(self, tokens: list[_Token], host: Address):
        self.tokens = tokens
        self.pos = 0
        self.host = host
        self.ranges: list[tuple[int, RangeRef, int]] = []  # (id, node, pos)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            raise FormulaError(f"expected {text!r}", tok.pos)
        return self.take()

    def parse(self) -> Expr:
        e = self.cmp()
        tok = self.peek()
        if tok.kind != "end":
            raise FormulaError(f"unexpected {tok.text!r}", tok.pos)
        self._check_ranges(e)
        return e

    def cmp(self) -> Expr:
        e = self.add()
        while self.peek().kind == "op" and self.peek().text in COMPARISONS:
            op = self.take().text
            e = BinOp(op, e, self.add())
        return e

    def add(self) -> Expr:
        e = self.mul()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.take().text
            e = BinOp(op, e, self.mul())
        return e

    def mul(self) -> Expr:
        e = self.power()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.take().text
            e = BinOp(op, e, self.power())
        return e

    def power(self) -> Expr:
        e = self.unary()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            return BinOp("^", e, self.power())
        return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Expr:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "str":
            return Str(tok.text)
        if tok.kind == "ref":
            start = self._mk_ref(tok, default_sheet=self.host.sheet)
            if self.peek().kind == "op" and self.peek().text == ":":
                self.take()
                end_tok = self.take()
                if end_tok.kind != "ref":
                    raise FormulaError("expected range endpoint", end_tok.pos)
                end = self._mk_ref(end_tok, default_sheet=start.target.sheet)
                if end.target.sheet != start.target.sheet:
                    raise FormulaError("range endpoints on different sheets", end_tok.pos)
                node = _normalize_range(start, end)
                self.ranges.append((id(node), node, tok.pos))
                return node
            return start
        if tok.kind == "ident":
            self.expect_op("(")
            args = [self.cmp()]
            while self.peek().kind == "op" and self.peek().text == ",":
                self.take()
                args.append(self.cmp())
            self.expect_op(")")
            return Call(tok.text.upper(), tuple(args))
        if tok.kind == "op" and tok.text == "(":
            e = self.cmp()
            self.expect_op(")")
            return e
        raise FormulaError(f"unexpected {tok.text or 'end of formula'!r}", tok.pos)

    def _mk_ref(self, tok: _Token, default_sheet: str) -> Ref:
        g = tok.groups or {}
        sheet = g.get("qsheet") or g.get("sheet")
        row = int(g["row"])
        if row < 1:
            raise FormulaError("row numbers are 1-based", tok.pos)
        target = Address(sheet or default_sheet, letters_to_col(g["col"]), row)
        return Ref(
            target,
            col_abs=g["cabs"] == "$",
            row_abs=g["rabs"] == "$",
            sheet_explicit=target.sheet != self.host.sheet,
        )

    def _check_ranges(self, root: Expr) -> None:
        """Ranges are legal only as call arguments or comparison operands."""
        if not self.ranges:
            return
        legal: set[int] = set()

        def walk(e: Expr) -> None:
            if isinstance(e, Call):
                for a in e.args:
                    if isinstance(a, RangeRef):
                        legal.add(id(a))
                    walk(a)
            elif isinstance(e, BinOp):
                for side in (e.left, e.right):
                    if isinstance(side, RangeRef) and e.op in COMPARISONS:
                        legal.add(id(side))
                    walk(side)
            elif isinstance(e, Neg):
                walk(e.operand)
            elif isinstance(e, RangeRef):
                pass
            # leaves: nothing to do

        walk(root)
        for node_id, node, pos in self.ranges:
            if node_id not in legal:
                raise FormulaError(
                    f"range {_render(node, False)} is only allowed as a call "
                    "argument or comparison operand",
                    pos,
                )


def _normalize_range(start: Ref, end: Ref) -> RangeRef:
    (c1, ca1), (c2, ca2) = (start.target.col, start.col_abs), (end.target.col, end.col_abs)
    (r1, ra1), (r2, ra2) = (start.target.row, start.row_abs), (end.target.row, end.row_abs)
    if c1 > c2:
        (c1, ca1), (c2, ca2) = (c2, ca2), (c1, ca1)
    if r1 > r2:
        (r1, ra1), (r2, ra2) = (r2, ra2), (r1, ra1)
    sheet = start.target.sheet
    return RangeRef(
        Ref(Address(sheet, c1, r1), ca1, ra1, start.sheet_explicit),
        Ref(Address(sheet, c2, r2), ca2, ra2, end.sheet_explicit),
    )


def parse_formula(source: str, host: Address) -> Expr:
    """Parse formula ``source`` (starting with ``=``) as entered at ``host``."""
    if not source.startswith("="):
        raise FormulaError("formula must start with '='", 0)
    return _Parser(_tokenize(source[1:], 1), host).parse()


# === printing =========================================================

_SHEET_BARE_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _sheet_prefix(sheet: str) -> str:
    if _SHEET_BARE_RE.match(sheet):
        return f"{sheet}!"
    return f"'{sheet}'!"


def _render_ref(e: Ref) -> str:
    prefix = _sheet_prefix(e.target.sheet) if e.sheet_explicit else ""
    return (
        f"{prefix}{'$' if e.col_abs else ''}{col_to_letters(e.target.col)}"
        f"{'$' if e.row_abs else ''}{e.target.row}"
    )


def _render_index(ix: IndexExpr) -> str:
    if isinstance(ix, ConstIndex):
        return str(ix.value)
    if isinstance(ix, ParamIndex):
        if ix.offset == 0:
            return "t"
        return f"t+{ix.offset}" if ix.offset > 0 else f"t-{-ix.offset}"
    if isinstance(ix, EnumIndex):
        return ix.label
    raise TypeError(f"unknown index {ix!r}")


def _level_of(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _BINARY_LEVEL[e.op]
    if isinstance(e, Neg):
        return _NEG_LEVEL
    return _ATOM_LEVEL


def _render(e: Expr, spaced: bool) -> str:
    pad = " " if spaced else ""

    def go(e: Expr) -> str:
        if isinstance(e, Num):
            return format_number(e.value)
        if isinstance(e, Str):
            return '"' + e.value.replace('"', '""') + '"'
        if isinstance(e, Ref):
            return _render_ref(e)
        if isinstance(e, RangeRef):
            return f"{_render_ref(e.start)}:{_render_ref(e.end)}"
        if isinstance(e, OffsetRef):
            col = f"${e.col}" if e.col_abs else f"[{e.col:+d}]"
            row = f"${e.row}" if e.row_abs else f"[{e.row:+d}]"
            sheet = f"{e.sheet}!" if e.sheet else ""
            return f"{sheet}C{col}R{row}"
        if isinstance(e, AttrRef):
            return f"{e.attr}[{_render_index(e.index)}]"
        if isinstance(e, AttrRange):
            return f"{e.attr}[{e.lo}..{e.hi}]"
        if isinstance(e, Call):
            return f"{e.name}({(',' + pad).join(go(a) for a in e.args)})"
        if isinstance(e, Neg):
            inner = go(e.operand)
            if _level_of(e.operand) < _NEG_LEVEL:
                inner = f"({inner})"
            return f"-{inner}"
        if isinstance(e, BinOp):
            lvl = _BINARY_LEVEL[e.op]
            right_assoc = e.op == "^"
            left = go(e.left)
            left_lvl = _level_of(e.left)
            if left_lvl < lvl or (left_lvl == lvl and right_assoc):
                left = f"({left})"
            right = go(e.right)
            right_lvl = _level_of(e.right)
            if right_lvl < lvl or (right_lvl == lvl and not right_assoc):
                right = f"({right})"
            return f"{left}{pad}{e.op}{pad}{right}"
        raise TypeError(f"cannot print {e!r}")

    return go(e)


def print_formula(e: Expr) -> str:
    """Render an expression as compact formula source, ``=`` included."""
    return "=" + _render(e, spaced=False)


def render_expr(e: Expr, spaced: bool = True) -> str:
    """Render an expression body without the ``=`` prefix (listing style)."""
    return _render(e, spaced)


# === structural walks =================================================

def _map_exprs(e: Expr, fn: Callable[[Expr], Expr | None]) -> Expr:
    """Bottom-up rebuild; ``fn`` may replace any node (None keeps it)."""
    if isinstance(e, BinOp):
        e = BinOp(e.op, _map_exprs(e.left, fn), _map_exprs(e.right, fn))
    elif isinstance(e, Neg):
        e = Neg(_map_exprs(e.operand, fn))
    elif isinstance(e, Call):
        e = Call(e.name, tuple(_map_exprs(a, fn) for a in e.args))
    out = fn(e)
    return e if out is None else out


def expand_range(rr: RangeRef) -> list[Address]:
    """Every address inside the range, rows outer, columns inner."""
    sheet = rr.start.target.sheet
    return [
        Address(sheet, col, row)
        for row in range(rr.start.target.row, rr.end.target.row + 1)
        for col in range(rr.start.target.col, rr.end.target.col + 1)
    ]


def refs_of(e: Expr) -> list[Address]:
    """Cell addresses referenced by ``e``, first-occurrence order, deduplicated.

    Ranges contribute every enclosed address.
    """
    seen: dict[Address, None] = {}

    def walk(e: Expr) -> None:
        if isinstance(e, Ref):
            seen.setdefault(e.target)
        elif isinstance(e, RangeRef):
            for addr in expand_range(e):
                seen.setdefault(addr)
        elif isinstance(e, BinOp):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Neg):
            walk(e.operand)
        elif isinstance(e, Call):
            for a in e.args:
                walk(a)

    walk(e)
    return list(seen)


def rewrite_refs(e: Expr, subst: Mapping[Address, Expr]) -> Expr:
    """Replace plain references per ``subst`` (no cascading into values).

    A range whose members all map to consecutive indices of one attribute
    collapses to an :class:`AttrRange`; a range that overlaps the domain
    only partially (or maps non-consecutively) is an error.  AttrRef
    substitutes inherit the absolute markers of the reference they replace.
    """

    def fn(node: Expr) -> Expr | None:
        if isinstance(node, Ref):
            repl = subst.get(node.target)
            if repl is None:
                return None
            if isinstance(repl, AttrRef):
                return replace(repl, col_abs=node.col_abs, row_abs=node.row_abs)
            return repl
        if isinstance(node, RangeRef):
            members = expand_range(node)
            mapped = [m for m in members if m in subst]
            if not mapped:
                return None
            if len(mapped) != len(members):
                raise FormulaError(
                    f"range {_render(node, False)} partially overlaps the "
                    "rewritten cells"
                )
            repls = [subst[m] for m in members]
            if not all(
                isinstance(r, AttrRef) and isinstance(r.index, ConstIndex)
                for r in repls
            ):
                raise FormulaError(
                    f"range {_render(node, False)} does not map onto one attribute"
                )
            attr_names = {r.attr for r in repls}  # type: ignore[union-attr]
            indices = [r.index.value for r in repls]  # type: ignore[union-attr]
            if len(attr_names) != 1 or indices != list(
                range(indices[0], indices[0] + len(indices))
            ):
                raise FormulaError(
                    f"range {_render(node, False)} does not map to consecutive "
                    "indices of one attribute"
                )
            return AttrRange(
                attr_names.pop(),
                indices[0],
                indices[-1],
                (node.start.col_abs, node.start.row_abs),
                (node.end.col_abs, node.end.row_abs),
            )
        return None

    return _map_exprs(e, fn)


# === offset normal form ===============================================

def to_offset_form(e: Expr, host: Address) -> Expr:
    """Rewrite every reference relative to ``host`` (R1C1-style).

    Two formulas are copies of one another exactly when their offset forms
    are equal.  Sheets stay absolute; same-sheet references drop the name
    so copies across sheets compare equal.
    """

    def fn(node: Expr) -> Expr | None:
        if isinstance(node, Ref):
            t = node.target
            return OffsetRef(
                sheet=None if t.sheet == host.sheet else t.sheet,
                col_abs=node.col_abs,
                col=t.col if node.col_abs else t.col - host.col,
                row_abs=node.row_abs,
                row=t.row if node.row_abs else t.row - host.row,
            )
        if isinstance(node, RangeRef):
            return RangeRef(fn(node.start), fn(node.end))  # type: ignore[arg-type]
        return None

    return _map_exprs(e, fn)


def from_offset_form(e: Expr, host: Address) -> Expr:
    """Inverse of :func:`to_offset_form` at the same host."""

    def back(node: OffsetRef) -> Ref:
        sheet = node.sheet or host.sheet
        col = node.col if node.col_abs else host.col + node.col
        row = node.row if node.row_abs else host.row + node.row
        if col < 1 or row < 1:
            raise FormulaError(f"offset reference escapes the grid at {host!r}")
        return Ref(
            Address(sheet, col, row),
            col_abs=node.col_abs,
            row_abs=node.row_abs,
            sheet_explicit=sheet != host.sheet,
        )

    def fn(node: Expr) -> Expr | None:
        if isinstance(node, OffsetRef):
            return back(node)
        if isinstance(node, RangeRef) and isinstance(node.start, OffsetRef):
            return RangeRef(back(node.start), back(node.end))  # type: ignore[arg-type]
        return None

    return _map_exprs(e, fn)
