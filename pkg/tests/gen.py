"""Seeded random generators shared by the property tests.

Everything takes an explicit ``random.Random`` so test runs are
reproducible from a seed; no module-level state.
"""

from __future__ import annotations

import random

from sheetstruct.arrows import Group, NameFromLabel, Rename, Ungroup
from sheetstruct.cells import Address, Formula, Number, Text, Workbook, parse_address
from sheetstruct.formula import (
    BinOp,
    Call,
    Expr,
    Neg,
    Num,
    RangeRef,
    Ref,
    Str,
    print_formula,
)
from sheetstruct.grammar import (
    ALONG,
    DOWN,
    Alt,
    And,
    Grammar,
    Move,
    Opt,
    Pattern,
    Repeat,
    RuleRef,
    Seq,
    Terminal,
    _contains_progress,
)

FUNCS = ("SUM", "MIN", "MAX", "COUNT", "IF")
COMPARE_OPS = ("=", "<", ">", "<=", ">=", "<>")
ARITH_OPS = ("+", "-", "*", "/", "^")
TEXT_SAMPLES = (
    "alpha",
    "Total",
    "x y",
    "tab\there",
    "line\nbreak",
    'say "hi"',
    "back\\slash",
    "",
)
PREDICATES = ("label", "cell", "empty", "number", "text", "formula")


# === workbooks ========================================================

def wb_from(sheet: str, entries: dict[str, object]) -> Workbook:
    """Literal workbook builder: ``{"A1": "Income", "B2": 7, "C2": "=B2*2"}``."""
    from sheetstruct.formula import parse_formula

    cells = {}
    for a1, content in entries.items():
        addr = parse_address(a1, sheet)
        if isinstance(content, (int, float)):
            cells[addr] = Number(float(content))
        elif isinstance(content, str) and content.startswith("="):
            cells[addr] = Formula(content, parse_formula(content, addr))
        else:
            cells[addr] = Text(str(content))
    return Workbook(cells)


def gen_address(rng: random.Random, sheets, max_col=20, max_row=20) -> Address:
    return Address(
        rng.choice(sheets), rng.randint(1, max_col), rng.randint(1, max_row)
    )


def _gen_ref(rng: random.Random, sheets, host: Address, max_col, max_row) -> Ref:
    target = gen_address(rng, sheets, max_col, max_row)
    return Ref(
        target,
        col_abs=rng.random() < 0.2,
        row_abs=rng.random() < 0.2,
        sheet_explicit=target.sheet != host.sheet,
    )


def _gen_range(rng: random.Random, sheets, host: Address, max_col, max_row) -> RangeRef:
    sheet = rng.choice(sheets)
    c1, c2 = sorted(rng.randint(1, max_col) for _ in range(2))
    r1, r2 = sorted(rng.randint(1, max_row) for _ in range(2))
    explicit = sheet != host.sheet
    flags = lambda: (rng.random() < 0.2, rng.random() < 0.2)
    f1, f2 = flags(), flags()
    return RangeRef(
        Ref(Address(sheet, c1, r1), f1[0], f1[1], explicit),
        Ref(Address(sheet, c2, r2), f2[0], f2[1], explicit),
    )


def _gen_term(rng, sheets, host, depth, max_col, max_row) -> Expr:
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        if roll < 0.12:
            return Num(float(rng.randint(0, 99)) if rng.random() < 0.8 else 2.5)
        if roll < 0.2:
            return Str(rng.choice(("a", "hi there", "x")))
        return _gen_ref(rng, sheets, host, max_col, max_row)
    if roll < 0.5:
        op = rng.choice(ARITH_OPS)
        return BinOp(
            op,
            _gen_term(rng, sheets, host, depth - 1, max_col, max_row),
            _gen_term(rng, sheets, host, depth - 1, max_col, max_row),
        )
    if roll < 0.6:
        return Neg(_gen_term(rng, sheets, host, depth - 1, max_col, max_row))
    if roll < 0.75:
        op = rng.choice(COMPARE_OPS)
        left = (
            _gen_range(rng, sheets, host, max_col, max_row)
            if rng.random() < 0.3
            else _gen_term(rng, sheets, host, depth - 1, max_col, max_row)
        )
        return BinOp(op, left, _gen_term(rng, sheets, host, depth - 1, max_col, max_row))
    name = rng.choice(FUNCS)
    args = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.35:
            args.append(_gen_range(rng, sheets, host, max_col, max_row))
        else:
            args.append(_gen_term(rng, sheets, host, depth - 1, max_col, max_row))
    return Call(name, tuple(args))


def gen_formula_ast(rng, sheets, host, max_col=20, max_row=20) -> Expr:
    """A formula expression whose top node is compound and that uses a ref.

    Bare-literal formulas (``=7``) are avoided: they would compile back to
    data cells, which is the intended normal form, not a round-trip bug.
    """
    while True:
        ref = _gen_ref(rng, sheets, host, max_col, max_row)
        other = _gen_term(rng, sheets, host, rng.randint(0, 2), max_col, max_row)
        roll = rng.random()
        if roll < 0.6:
            pair = (ref, other) if rng.random() < 0.5 else (other, ref)
            return BinOp(rng.choice(ARITH_OPS), *pair)
        if roll < 0.75:
            return Neg(ref)
        if roll < 0.9:
            return Call(rng.choice(FUNCS), (ref, other) if rng.random() < 0.5 else (ref,))
        return BinOp(rng.choice(COMPARE_OPS), ref, other)


def gen_workbook(
    rng: random.Random,
    max_col=20,
    max_row=20,
    n_cells=(5, 30),
    multi_sheet_chance=0.3,
) -> Workbook:
    sheets = ["Sheet1"]
    if rng.random() < multi_sheet_chance:
        sheets.append(rng.choice(("Data", "My Data", "_aux")))
    cells = {}
    for _ in range(rng.randint(*n_cells)):
        addr = gen_address(rng, sheets, max_col, max_row)
        if addr in cells:
            continue
        roll = rng.random()
        if roll < 0.4:
            value = float(rng.randint(-50, 999))
            if rng.random() < 0.3:
                value += 0.25
            cells[addr] = Number(value)
        elif roll < 0.65:
            cells[addr] = Text(rng.choice(TEXT_SAMPLES))
        else:
            ast = gen_formula_ast(rng, sheets, addr, max_col, max_row)
            cells[addr] = Formula(print_formula(ast), ast)
    return Workbook(cells)


def gen_copy_heavy_workbook(rng: random.Random, size=8) -> Workbook:
    """A grid where formulas are stamped from a few shared templates.

    Copies of one template differ only by their host position, so the
    copy-detection relation has plenty of positive pairs to exercise.
    """
    sheets = ["S"]
    cells: dict[Address, object] = {}
    templates = []
    for _ in range(rng.randint(1, 3)):
        dc, dr = rng.randint(-2, 2), rng.randint(-2, 2)
        abs_flags = (rng.random() < 0.3, rng.random() < 0.3)
        templates.append((dc, dr, abs_flags, rng.choice(("+", "-", "*"))))
    for col in range(1, size + 1):
        for row in range(1, size + 1):
            roll = rng.random()
            if roll < 0.35:
                continue
            addr = Address("S", col, row)
            if roll < 0.55:
                cells[addr] = Number(float(rng.randint(0, 9)))
            elif roll < 0.62:
                cells[addr] = Text("note")
            else:
                dc, dr, (ca, ra), op = rng.choice(templates)
                tc = col + dc if not ca else rng.randint(1, size)
                tr = row + dr if not ra else rng.randint(1, size)
                if tc < 1 or tr < 1:
                    cells[addr] = Number(0.0)
                    continue
                ast = BinOp(op, Ref(Address("S", tc, tr), ca, ra), Num(1.0))
                cells[addr] = Formula(print_formula(ast), ast)
    return Workbook(cells)  # type: ignore[arg-type]


# === structural edits ==================================================

def random_transform(rng: random.Random, m, counter: int):
    """Propose one random structural edit of model ``m`` (or None).

    Proposals may still be rejected by the transform itself (name taken,
    no label nearby, ...); callers skip those.
    """
    kind = rng.choice(("group", "group", "rename", "ungroup", "label"))
    attrs = m.attributes
    if kind == "group":
        singles = [a.first_cell() for a in attrs if a.size == 1]
        if len(singles) < 2:
            return None
        sheet = rng.choice(sorted({c.sheet for c in singles}))
        pool = [c for c in singles if c.sheet == sheet]
        if len(pool) < 2:
            return None
        k = rng.randint(2, min(4, len(pool)))
        cells = tuple(rng.sample(pool, k))
        labels = None
        if rng.random() < 0.3:
            labels = tuple(f"k{counter}_{i}" for i in range(k))
        return Group(cells, f"g{counter}", labels)
    if not attrs:
        return None
    if kind == "rename":
        return Rename(rng.choice(attrs).name, f"r{counter}")
    if kind == "ungroup":
        multi = [a for a in attrs if a.size > 1] or list(attrs)
        return Ungroup(rng.choice(multi).name)
    return NameFromLabel(rng.choice(attrs).name)


# === matcher-comparison grids and grammars ============================

def gen_grid(rng: random.Random, size=5) -> Workbook:
    """Small grid over three content kinds (number, text, formula)."""
    cells = {}
    for col in range(1, size + 1):
        for row in range(1, size + 1):
            roll = rng.random()
            if roll < 0.4:
                continue
            addr = Address("S", col, row)
            if roll < 0.65:
                cells[addr] = Number(float(rng.randint(1, 9)))
            elif roll < 0.85:
                cells[addr] = Text(rng.choice(("lbl", "txt")))
            else:
                target = Address("S", rng.randint(1, size), rng.randint(1, size))
                ast = BinOp("+", Ref(target), Num(1.0))
                cells[addr] = Formula(print_formula(ast), ast)
    return Workbook(cells)


def _gen_pattern(rng: random.Random, depth: int, later_rules: tuple[str, ...]) -> Pattern:
    def terminal() -> Pattern:
        return Terminal(rng.choice(PREDICATES))

    def move() -> Pattern:
        return Move(rng.choice((DOWN, ALONG)), rng.randint(1, 2))

    if depth <= 0:
        return terminal() if rng.random() < 0.7 else move()
    roll = rng.random()
    if roll < 0.2:
        return terminal()
    if roll < 0.3:
        return move()
    if roll < 0.5:
        return Seq(
            tuple(
                _gen_pattern(rng, depth - 1, later_rules)
                for _ in range(rng.randint(2, 3))
            )
        )
    if roll < 0.62:
        return Alt(
            (
                _gen_pattern(rng, depth - 1, later_rules),
                _gen_pattern(rng, depth - 1, later_rules),
            )
        )
    if roll < 0.72:
        return Opt(_gen_pattern(rng, depth - 1, later_rules))
    if roll < 0.82:
        inner = _gen_pattern(rng, depth - 1, later_rules)
        if rng.random() < 0.5:
            return Repeat(inner, rng.randint(1, 2))
        if not _contains_progress(inner, {}):
            inner = Seq((inner, move()))
        return Repeat(inner, None)
    if roll < 0.92:
        return And(
            _gen_pattern(rng, depth - 1, later_rules),
            _gen_pattern(rng, depth - 1, later_rules),
        )
    if later_rules:
        return RuleRef(rng.choice(later_rules))
    return terminal()


def gen_grammar(rng: random.Random, max_depth=3) -> Grammar:
    """A small acyclic grammar; rule r0 is the entry point."""
    names = ["r0", "r1", "r2"][: rng.randint(1, 3)]
    rules = {}
    for i, name in enumerate(names):
        later = tuple(names[i + 1 :])
        rules[name] = _gen_pattern(rng, rng.randint(1, max_depth), later)
    return Grammar(rules)


def recursive_grammars() -> list[Grammar]:
    """Hand-built recursive grammars exercising the re-entry guards."""
    cell, label = Terminal("cell"), Terminal("label")
    down, along = Move(DOWN, 1), Move(ALONG, 1)
    return [
        # walk down while there are cells
        Grammar({"r0": Seq((cell, Opt(Seq((down, RuleRef("r0"))))))}),
        # walk along, at least one cell
        Grammar({"r0": Alt((Seq((cell, along, RuleRef("r0"))), cell))}),
        # immediate re-entry at the same cursor is cut off
        Grammar({"r0": Seq((Opt(RuleRef("r0")), cell))}),
        # diagonal recursion via a starred rule reference
        Grammar({"r0": Seq((cell, Repeat(Seq((down, along, RuleRef("r1"))), None))),
                 "r1": Alt((label, cell))}),
        # mutual recursion marching down
        Grammar({"r0": Seq((cell, Opt(Seq((down, RuleRef("r1")))))),
                 "r1": Seq((Opt(RuleRef("r0")), Terminal("empty")))}),
    ]
