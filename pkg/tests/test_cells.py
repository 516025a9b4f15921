"""Addresses, cell content, fact files, and CSV ingestion."""

from __future__ import annotations

import random

import pytest

from sheetstruct.cells import (
    Address,
    FactFileError,
    Formula,
    Number,
    Text,
    Workbook,
    col_to_letters,
    dump_facts,
    format_number,
    letters_to_col,
    load_csv_grid,
    load_facts,
    parse_address,
)

from gen import gen_workbook


# === column letters ===================================================

@pytest.mark.parametrize(
    "col, letters",
    [(1, "A"), (2, "B"), (26, "Z"), (27, "AA"), (28, "AB"), (52, "AZ"),
     (53, "BA"), (702, "ZZ"), (703, "AAA"), (18278, "ZZZ")],
)
def test_column_letters_pins(col, letters):
    assert col_to_letters(col) == letters
    assert letters_to_col(letters) == col


def test_column_letters_roundtrip_first_thousand():
    for col in range(1, 1001):
        assert letters_to_col(col_to_letters(col)) == col


def test_column_letters_case_insensitive():
    assert letters_to_col("aa") == 27


# === addresses ========================================================

def test_parse_address_forms():
    assert parse_address("B12", "Sheet1") == Address("Sheet1", 2, 12)
    assert parse_address("Data!C3", "Sheet1") == Address("Data", 3, 3)
    assert parse_address("'My Data'!A1", "Sheet1") == Address("My Data", 1, 1)
    assert parse_address("$B$2", "S") == Address("S", 2, 2)


def test_address_ordering_is_row_major():
    addrs = [Address("S", 2, 1), Address("S", 1, 2), Address("S", 1, 1)]
    ordered = sorted(addrs, key=lambda a: a.sort_key)
    assert [a.a1 for a in ordered] == ["A1", "B1", "A2"]


def test_address_a1_and_repr():
    a = Address("My Data", 28, 9)
    assert a.a1 == "AB9"
    assert "AB9" in repr(a)


# === number formatting ================================================

def test_format_number_drops_integral_suffix():
    assert format_number(7.0) == "7"
    assert format_number(-3.0) == "-3"
    assert format_number(2.5) == "2.5"
    assert format_number(0.0) == "0"


def test_format_number_large_magnitudes_stay_exact():
    big = 1e16
    assert format_number(big) == repr(big)
    assert float(format_number(big)) == big


# === fact files =======================================================

def _facts(*lines: str) -> str:
    return "\n".join(lines) + "\n"


def test_load_facts_smallest_workbook():
    wb = load_facts(_facts("Sheet1\tA\t1\tnum\t7"))
    assert wb.cells == {Address("Sheet1", 1, 1): Number(7.0)}
    assert wb.sheets == ("Sheet1",)


def test_load_facts_ignores_comments_blank_lines_and_order():
    base = [
        "Sheet1\tA\t1\tstr\tIncome",
        "Sheet1\tB\t2\tnum\t3.5",
        "Sheet1\tC\t2\tformula\t=A1+B2",
    ]
    shuffled = _facts("# header comment", base[2], "", base[0], "  ", base[1])
    assert load_facts(shuffled) == load_facts(_facts(*base))


def test_str_payload_escapes_roundtrip():
    wb = Workbook({
        Address("S", 1, 1): Text("tab\there"),
        Address("S", 1, 2): Text("line\nbreak"),
        Address("S", 1, 3): Text("back\\slash"),
        Address("S", 1, 4): Text(""),
    })
    assert load_facts(dump_facts(wb)) == wb


def test_dump_facts_orders_rows_major_and_is_a_fixed_point():
    rng = random.Random(5)
    for _ in range(25):
        wb = gen_workbook(rng)
        text = dump_facts(wb)
        assert load_facts(text) == wb
        assert dump_facts(load_facts(text)) == text
        rows = [line for line in text.splitlines() if line and not line.startswith("#")]
        keys = []
        for line in rows:
            sheet, col, row, _, _ = line.split("\t", 4)
            keys.append((sheet, int(row), letters_to_col(col)))
        assert keys == sorted(keys)


def test_formula_cells_keep_source_verbatim_but_normalize_the_tree():
    wb = load_facts(_facts("S\tB\t2\tformula\t=SUM(B2:A1)"))
    cell = wb.cells[Address("S", 2, 2)]
    assert isinstance(cell, Formula)
    assert cell.source == "=SUM(B2:A1)"
    corners = cell.ast.args[0]
    assert (corners.start.target.a1, corners.end.target.a1) == ("A1", "B2")


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("S\tA\t1\tnum", "5 tab-separated fields"),
        ("S\tA\t1\tnum\t7\textra", "5 tab-separated fields"),
        ("S\tA\t1\tbool\t1", "kind"),
        ("S\tA\t1\tnum\tseven", "number"),
        ("S\tA\t0\tnum\t7", "row"),
        ("S\t!\t1\tnum\t7", "column"),
        ("S\tA\t1\tformula\tA1+1", "formula"),
    ],
)
def test_load_facts_rejects_malformed_lines(line, fragment):
    with pytest.raises(FactFileError) as err:
        load_facts(_facts("# comment", line))
    assert "line 2" in str(err.value)
    assert fragment in str(err.value)


def test_load_facts_rejects_duplicate_cells():
    text = _facts("S\tA\t1\tnum\t1", "S\tA\t1\tnum\t2")
    with pytest.raises(FactFileError) as err:
        load_facts(text)
    assert "line 2" in str(err.value)


# === workbook equality and bounds =====================================

def test_workbook_equality_tracks_cells_and_sheet_set():
    a = Workbook({Address("S", 1, 1): Number(1.0)})
    b = Workbook({Address("S", 1, 1): Number(1.0)})
    c = Workbook({Address("S", 1, 1): Number(2.0)})
    assert a == b
    assert a != c


def test_workbook_bounds_cover_the_populated_rectangle():
    wb = Workbook({
        Address("S", 2, 5): Number(1.0),
        Address("S", 4, 1): Number(2.0),
    })
    assert wb.bounds("S") == (4, 5)
    assert wb.bounds("Other") == (0, 0)


# === csv ingestion ====================================================

def test_load_csv_grid_detects_kinds():
    text = 'Income,7,\n"quoted, comma",=A1+1,2.5\n'
    wb = load_csv_grid(text, "Budget")
    assert wb.cells[Address("Budget", 1, 1)] == Text("Income")
    assert wb.cells[Address("Budget", 2, 1)] == Number(7.0)
    assert Address("Budget", 3, 1) not in wb.cells
    assert wb.cells[Address("Budget", 1, 2)] == Text("quoted, comma")
    formula = wb.cells[Address("Budget", 2, 2)]
    assert isinstance(formula, Formula)
    assert formula.source == "=A1+1"
    assert wb.cells[Address("Budget", 3, 2)] == Number(2.5)


def test_load_csv_grid_roundtrips_through_facts():
    wb = load_csv_grid("a,1\n,=B1*2\n", "S")
    assert load_facts(dump_facts(wb)) == wb
