"""Workbook model and ingestion.

A workbook is a finite mapping from addresses to cell contents; empty cells
are simply absent.  Two interchange formats are supported:

* fact files -- one cell per line, tab separated::

      sheet <TAB> column-letters <TAB> row <TAB> kind <TAB> payload

  ``kind`` is one of ``num``, ``str`` or ``formula``.  String payloads
  escape tab, newline and backslash as ``\\t``, ``\\n`` and ``\\\\``.
  Blank lines and lines starting with ``#`` are ignored, and line order
  carries no meaning.

* CSV grids -- RFC 4180 text for a single sheet.  A field starting with
  ``=`` is a formula, a field that parses as a decimal number is a number,
  an empty field is an absent cell, anything else is text.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

__all__ = [
    "Address",
    "CellContent",
    "Number",
    "Text",
    "Formula",
    "Workbook",
    "FactFileError",
    "col_to_letters",
    "letters_to_col",
    "parse_address",
    "format_number",
    "cell_at",
    "load_facts",
    "load_csv_grid",
    "dump_facts",
]


class FactFileError(ValueError):
    """Raised when a fact file or CSV grid cannot be understood."""


@dataclass(frozen=True)
class Address:
    """Absolute position of one cell: sheet name plus 1-based column/row."""

    sheet: str
    col: int
    row: int

    def __post_init__(self) -> None:
        if self.col < 1 or self.row < 1:
            raise ValueError(f"address coordinates are 1-based: {self!r}")

    @property
    def sort_key(self) -> tuple[str, int, int]:
        """Canonical (sheet, row, col) ordering used everywhere."""
        return (self.sheet, self.row, self.col)

    @property
    def a1(self) -> str:
        return f"{col_to_letters(self.col)}{self.row}"

    def __repr__(self) -> str:  # keeps test output readable
        return f"{self.sheet}!{self.a1}"


class CellContent:
    """Base class for the three kinds of cell content."""

    __slots__ = ()


@dataclass(frozen=True)
class Number(CellContent):
    value: float


@dataclass(frozen=True)
class Text(CellContent):
    value: str


@dataclass(frozen=True)
class Formula(CellContent):
    """A formula cell: the source (starting with ``=``) and its parse."""

    source: str
    ast: object  # formula.Expr; typed loosely to avoid an import cycle


@dataclass(frozen=True, eq=False)
class Workbook:
    """Immutable mapping of addresses to non-empty cell contents.

    ``sheets`` preserves first-appearance order for display; equality treats
    it as a set, so two workbooks are equal when their cells agree.
    """

    cells: dict[Address, CellContent]
    sheets: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.sheets:
            seen: dict[str, None] = {}
            for addr in self.cells:
                seen.setdefault(addr.sheet, None)
            object.__setattr__(self, "sheets", tuple(seen))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Workbook):
            return NotImplemented
        return self.cells == other.cells and set(self.sheets) == set(other.sheets)

    def __hash__(self) -> int:  # pragma: no cover - not used as a dict key
        return hash(frozenset(self.cells))

    def bounds(self, sheet: str) -> tuple[int, int]:
        """(max col, max row) over non-empty cells; (0, 0) for empty sheets."""
        max_col = max_row = 0
        for addr in self.cells:
            if addr.sheet == sheet:
                max_col = max(max_col, addr.col)
                max_row = max(max_row, addr.row)
        return (max_col, max_row)


def cell_at(wb: Workbook, addr: Address) -> CellContent | None:
    """Content at ``addr``, or None when the cell is empty."""
    return wb.cells.get(addr)


# === column letters ===================================================

_LETTERS_RE = re.compile(r"[A-Z]+\Z")


def col_to_letters(col: int) -> str:
    """1 -> A, 26 -> Z, 27 -> AA (bijective base 26)."""
    if col < 1:
        raise ValueError(f"column numbers are 1-based, got {col}")
    out = []
    while col:
        col, rem = divmod(col - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def letters_to_col(letters: str) -> int:
    """Inverse of :func:`col_to_letters`; accepts lowercase."""
    s = letters.upper()
    if not _LETTERS_RE.match(s):
        raise ValueError(f"not a column: {letters!r}")
    col = 0
    for ch in s:
        col = col * 26 + (ord(ch) - ord("A") + 1)
    return col


_ADDRESS_RE = re.compile(
    r"(?:(?:'(?P<qsheet>[^']+)'|(?P<sheet>[A-Za-z_][A-Za-z0-9_]*))!)?"
    r"(?P<cabs>\$?)(?P<col>[A-Za-z]+)(?P<rabs>\$?)(?P<row>[0-9]+)\Z"
)


def parse_address(text: str, default_sheet: str) -> Address:
    """Parse ``A1`` / ``Sheet1!B2`` / ``'My Sheet'!C3`` into an Address.

    ``$`` markers are permitted and ignored; they matter only inside
    formulas.  Addresses without a sheet prefix land on ``default_sheet``.
    """
    m = _ADDRESS_RE.match(text.strip())
    if not m:
        raise ValueError(f"not a cell address: {text!r}")
    sheet = m.group("qsheet") or m.group("sheet") or default_sheet
    row = int(m.group("row"))
    if row < 1:
        raise ValueError(f"row numbers are 1-based: {text!r}")
    return Address(sheet, letters_to_col(m.group("col")), row)


# === number formatting ================================================

def format_number(value: float) -> str:
    """Shortest decimal text that round-trips the value.

    Integral values print without a fractional part so spreadsheet-typical
    numbers look like ``42`` rather than ``42.0``.
    """
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


_NUMBER_RE = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\Z")


def _parse_number(text: str) -> float | None:
    if _NUMBER_RE.match(text):
        return float(text)
    return None


# === fact files =======================================================

_KINDS = ("num", "str", "formula")


def _escape_text(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape_text(s: str, lineno: int) -> str:
    out = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\":
            if i + 1 >= len(s):
                raise FactFileError(f"line {lineno}: dangling escape in str payload")
            nxt = s[i + 1]
            if nxt == "t":
                out.append("\t")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "\\":
                out.append("\\")
            else:
                raise FactFileError(f"line {lineno}: bad escape \\{nxt}")
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def load_facts(text: str) -> Workbook:
    """Parse fact-file text into a Workbook.

    Duplicate addresses and malformed lines raise :class:`FactFileError`
    with the offending line number; formula payloads that do not parse
    report the cell address.
    """
    from .formula import FormulaError, parse_formula  # cycle: formulas hold Addresses

    cells: dict[Address, CellContent] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 5:
            raise FactFileError(
                f"line {lineno}: expected 5 tab-separated fields, got {len(parts)}"
            )
        sheet, letters, row_text, kind, payload = parts
        if not sheet:
            raise FactFileError(f"line {lineno}: empty sheet name")
        try:
            col = letters_to_col(letters)
        except ValueError as exc:
            raise FactFileError(f"line {lineno}: {exc}") from exc
        if not row_text.isdigit() or int(row_text) < 1:
            raise FactFileError(f"line {lineno}: bad row {row_text!r}")
        addr = Address(sheet, col, int(row_text))
        if addr in cells:
            raise FactFileError(f"line {lineno}: duplicate cell {addr!r}")

        if kind == "num":
            value = _parse_number(payload)
            if value is None:
                raise FactFileError(f"line {lineno}: bad number {payload!r}")
            cells[addr] = Number(value)
        elif kind == "str":
            cells[addr] = Text(_unescape_text(payload, lineno))
        elif kind == "formula":
            try:
                ast = parse_formula(payload, addr)
            except FormulaError as exc:
                raise FactFileError(f"line {lineno}: {addr!r}: {exc}") from exc
            cells[addr] = Formula(payload, ast)
        else:
            raise FactFileError(
                f"line {lineno}: kind must be one of {_KINDS}, got {kind!r}"
            )
    return Workbook(cells)


def dump_facts(wb: Workbook) -> str:
    """Serialize a Workbook back to canonical fact-file text.

    Lines are sorted by (sheet, row, col) so the output is deterministic
    and ``load_facts(dump_facts(wb)) == wb``.
    """
    lines = []
    for addr in sorted(wb.cells, key=lambda a: a.sort_key):
        content = wb.cells[addr]
        if isinstance(content, Number):
            kind, payload = "num", format_number(content.value)
        elif isinstance(content, Text):
            kind, payload = "str", _escape_text(content.value)
        elif isinstance(content, Formula):
            kind, payload = "formula", content.source
        else:  # pragma: no cover - contents are a closed set
            raise TypeError(f"unknown cell content {content!r}")
        lines.append(
            f"{addr.sheet}\t{col_to_letters(addr.col)}\t{addr.row}\t{kind}\t{payload}"
        )
    return "".join(line + "\n" for line in lines)


# === CSV grids ========================================================

def load_csv_grid(text: str, sheet: str) -> Workbook:
    """Parse an RFC 4180 CSV grid into a single-sheet Workbook.

    Row 1 of the CSV is spreadsheet row 1, column 1 is column A.  The sheet
    name is supplied by the caller since CSV carries none.
    """
    from .formula import FormulaError, parse_formula

    cells: dict[Address, CellContent] = {}
    reader = csv.reader(io.StringIO(text))
    for row_idx, record in enumerate(reader, start=1):
        for col_idx, fld in enumerate(record, start=1):
            if fld == "":
                continue
            addr = Address(sheet, col_idx, row_idx)
            if fld.startswith("="):
                try:
                    cells[addr] = Formula(fld, parse_formula(fld, addr))
                except FormulaError as exc:
                    raise FactFileError(f"{addr!r}: {exc}") from exc
            else:
                value = _parse_number(fld)
                cells[addr] = Text(fld) if value is None else Number(value)
    return Workbook(cells)
