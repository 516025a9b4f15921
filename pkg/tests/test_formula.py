"""Formula parsing, printing, reference rewriting, and offset form."""

from __future__ import annotations

import random

import pytest

from sheetstruct.cells import Address
from sheetstruct.formula import (
    AttrRange,
    AttrRef,
    BinOp,
    ConstIndex,
    FormulaError,
    Neg,
    Num,
    Ref,
    expand_range,
    from_offset_form,
    parse_formula,
    print_formula,
    refs_of,
    rewrite_refs,
    to_offset_form,
)

from gen import gen_formula_ast

HOST = Address("S", 3, 3)


def roundtrip(src: str) -> str:
    return print_formula(parse_formula(src, HOST))


# === parsing and printing =============================================

@pytest.mark.parametrize(
    "src, printed",
    [
        ("=1+2*3", "=1+2*3"),
        ("=(1+2)*3", "=(1+2)*3"),
        ("=1-2-3", "=1-2-3"),
        ("=1-(2-3)", "=1-(2-3)"),
        ("=2^3^2", "=2^3^2"),
        ("=(2^3)^2", "=(2^3)^2"),
        ("=-2^2", "=-2^2"),
        ("=(-2)^2", "=-2^2"),
        ("=-(2^2)", "=-(2^2)"),
        ("=--A1", "=--A1"),
        ("=-(1+2)", "=-(1+2)"),
        ("=A1<=B1", "=A1<=B1"),
        ("=IF(A1<B1,1,0)", "=IF(A1<B1,1,0)"),
        ("=SUM(B2:A1)", "=SUM(A1:B2)"),
        ("=sum(a1)", "=SUM(A1)"),
        ("=A1:B2=C1:C9", "=A1:B2=C1:C9"),
        ('="a""b"', '="a""b"'),
        ("=3.50", "=3.5"),
        ("=1e3", "=1000"),
        ("=$B$2+B$2+$B2", "=$B$2+B$2+$B2"),
        ("='My Data'!A1+Data!A1", "='My Data'!A1+Data!A1"),
    ],
)
def test_print_pins(src, printed):
    assert roundtrip(src) == printed


def test_unary_minus_binds_tighter_than_power():
    ast = parse_formula("=-2^2", HOST)
    assert ast == BinOp("^", Neg(Num(2.0)), Num(2.0))


def test_same_sheet_prefix_is_dropped():
    ast = parse_formula("=S!A1", HOST)
    assert ast == Ref(Address("S", 1, 1))
    assert print_formula(ast) == "=A1"


def test_print_then_parse_is_identity_on_random_trees():
    rng = random.Random(13)
    sheets = ["S", "Other"]
    for _ in range(300):
        ast = gen_formula_ast(rng, sheets, HOST)
        text = print_formula(ast)
        again = parse_formula(text, HOST)
        assert again == ast, text
        assert print_formula(again) == text


@pytest.mark.parametrize(
    "src",
    ["=A1:B2+1", "=1+", "=SUM(", "=A1:", "=A1:B2:C3", "=foo bar", "=)",
     "A1+1", "=", "=1 2", '="unterminated'],
)
def test_malformed_formulas_are_rejected(src):
    with pytest.raises(FormulaError):
        parse_formula(src, HOST)


def test_parse_errors_carry_an_offset():
    with pytest.raises(FormulaError) as err:
        parse_formula("=1+", HOST)
    assert "offset" in str(err.value)


# === structural helpers ===============================================

def test_refs_of_dedupes_in_first_occurrence_order():
    ast = parse_formula("=B1+A1*B1+SUM(A1:A2)", HOST)
    assert [a.a1 for a in refs_of(ast)] == ["B1", "A1", "A2"]


def test_expand_range_walks_rows_outer():
    ast = parse_formula("=SUM(A1:B2)", HOST)
    assert [a.a1 for a in expand_range(ast.args[0])] == ["A1", "B1", "A2", "B2"]


def test_rewrite_refs_substitutes_and_keeps_flags():
    ast = parse_formula("=$A$1+A2", HOST)
    subst = {
        Address("S", 1, 1): AttrRef("income", ConstIndex(1)),
        Address("S", 1, 2): AttrRef("income", ConstIndex(2)),
    }
    out = rewrite_refs(ast, subst)
    assert out == BinOp(
        "+",
        AttrRef("income", ConstIndex(1), col_abs=True, row_abs=True),
        AttrRef("income", ConstIndex(2)),
    )


def test_rewrite_refs_turns_fully_covered_ranges_into_attribute_ranges():
    ast = parse_formula("=SUM(A1:A3)", HOST)
    subst = {Address("S", 1, r): AttrRef("xs", ConstIndex(r)) for r in (1, 2, 3)}
    out = rewrite_refs(ast, subst)
    assert out.args[0] == AttrRange(
        "xs", 1, 3, start_flags=(False, False), end_flags=(False, False)
    )


def test_rewrite_refs_rejects_partially_covered_ranges():
    ast = parse_formula("=SUM(A1:A3)", HOST)
    subst = {Address("S", 1, 1): AttrRef("xs", ConstIndex(1))}
    with pytest.raises(FormulaError):
        rewrite_refs(ast, subst)


def test_rewrite_refs_leaves_untouched_cells_alone():
    ast = parse_formula("=A1+B1", HOST)
    out = rewrite_refs(ast, {Address("S", 1, 1): AttrRef("xs", ConstIndex(1))})
    assert out == BinOp("+", AttrRef("xs", ConstIndex(1)), Ref(Address("S", 2, 1)))


# === offset normal form ===============================================

def test_offset_form_roundtrips_at_the_same_host():
    rng = random.Random(17)
    for _ in range(200):
        ast = gen_formula_ast(rng, ["S", "Other"], HOST)
        assert from_offset_form(to_offset_form(ast, HOST), HOST) == ast


def test_offset_form_identifies_stamped_copies():
    a = parse_formula("=A1+$D$9", Address("S", 2, 2))
    b = parse_formula("=B3+$D$9", Address("S", 3, 4))
    assert to_offset_form(a, Address("S", 2, 2)) == to_offset_form(
        b, Address("S", 3, 4)
    )


def test_offset_form_rejects_rehosting_off_the_grid():
    ast = parse_formula("=A1", Address("S", 2, 2))  # one left, one up
    off = to_offset_form(ast, Address("S", 2, 2))
    with pytest.raises(FormulaError):
        from_offset_form(off, Address("S", 1, 1))
