"""Grammar parsing, static validation, and the grid matcher."""

from __future__ import annotations

import random

import pytest

from sheetstruct.cells import parse_address
from sheetstruct.factbase import PredicateRegistry, build
from sheetstruct.grammar import (
    ALONG,
    Alt,
    And,
    DOWN,
    Grammar,
    GrammarError,
    Move,
    Opt,
    Repeat,
    RuleRef,
    Seq,
    Terminal,
    match_all,
    match_at,
    parse_grammar,
    select_cover,
    validate_grammar,
)

from gen import gen_grammar, gen_grid, recursive_grammars, wb_from
from oracles import oracle_match_set


def addr(a1: str, sheet: str = "S"):
    return parse_address(a1, sheet)


def fb_from(entries: dict[str, object]):
    return build(wb_from("S", entries))


# === parsing ===========================================================

def test_adjacent_items_get_an_implicit_sideways_move():
    g = parse_grammar("a --> cell cell\n")
    assert g.rules["a"] == Seq(
        (Terminal("cell"), Move(ALONG, 1), Terminal("cell"))
    )


def test_no_implicit_move_next_to_an_explicit_one():
    g = parse_grammar("a --> cell DOWN cell\n")
    assert g.rules["a"] == Seq((Terminal("cell"), Move(DOWN, 1), Terminal("cell")))


def test_move_distances_and_counted_repetition():
    g = parse_grammar("a --> (cell ALONG(2))*3\n")
    assert g.rules["a"] == Repeat(Seq((Terminal("cell"), Move(ALONG, 2))), 3)


def test_star_and_option_and_alternatives():
    g = parse_grammar("a --> label (DOWN cell)* | label?\n")
    assert g.rules["a"] == Alt(
        (
            Seq(
                (
                    Terminal("label"),
                    Repeat(Seq((Move(DOWN, 1), Terminal("cell"))), None),
                )
            ),
            Opt(Terminal("label")),
        )
    )


def test_alternation_binds_looser_than_overlay_which_binds_looser_than_sequence():
    g = parse_grammar("a --> cell AND label | empty\n")
    assert g.rules["a"] == Alt(
        (And(Terminal("cell"), Terminal("label")), Terminal("empty"))
    )


def test_group_bounded_by_moves_suppresses_implicit_moves():
    left = parse_grammar("a --> (DOWN cell) cell\n").rules["a"]
    right = parse_grammar("a --> cell (DOWN cell)\n").rules["a"]
    assert left == Seq(
        (
            Seq((Move(DOWN, 1), Terminal("cell"))),
            Move(ALONG, 1),
            Terminal("cell"),
        )
    )
    assert right == Seq(
        (Terminal("cell"), Seq((Move(DOWN, 1), Terminal("cell"))))
    )


def test_identifiers_resolve_to_rules_when_defined_anywhere_in_the_file():
    g = parse_grammar("a --> b b\nb --> cell\n")
    assert g.rules["a"] == Seq((RuleRef("b"), Move(ALONG, 1), RuleRef("b")))


def test_logical_lines_continue_while_parens_are_open():
    g = parse_grammar("a --> cell (cell |\n  label) cell  # trailing note\n")
    assert g.rules["a"] == Seq(
        (
            Terminal("cell"),
            Move(ALONG, 1),
            Alt((Terminal("cell"), Terminal("label"))),
            Move(ALONG, 1),
            Terminal("cell"),
        )
    )


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("a --> cell\na --> label\n", "duplicate rule 'a'"),
        ("a --> DOWN(0)\n", "move distance"),
        ("a -> cell\n", "-->"),
        ("a --> (cell\n", "unbalanced"),
        ("a --> *\n", "unexpected '*'"),
        ("a --> cell)\n", "')'"),
    ],
)
def test_parse_errors_carry_line_numbers(text, fragment):
    with pytest.raises(GrammarError) as err:
        parse_grammar(text)
    assert "line" in str(err.value)
    assert fragment in str(err.value)


# === validation ========================================================

def test_validation_accepts_the_shipped_idioms():
    reg = PredicateRegistry()
    g = parse_grammar("column --> label (DOWN cell)*\n")
    assert validate_grammar(g, reg) == []
    g = parse_grammar("r0 --> cell (DOWN r0)?\n")
    assert validate_grammar(g, reg) == []


def test_validation_flags_unknown_predicates():
    g = parse_grammar("a --> shiny\n")
    diags = validate_grammar(g, PredicateRegistry())
    assert diags == ["rule 'a': unknown predicate 'shiny'"]


def test_validation_allows_stars_whose_body_can_bind_without_moving():
    # An iteration that binds but stays put simply ends the expansion, so
    # this is matchable and must not be flagged.
    g = Grammar({"a": Repeat(Opt(Terminal("cell")), None)})
    assert validate_grammar(g, PredicateRegistry()) == []


def test_validation_flags_stars_that_cannot_advance():
    g = Grammar({"a": Repeat(RuleRef("b"), None), "b": Opt(RuleRef("b"))})
    diags = validate_grammar(g, PredicateRegistry())
    assert "rule 'a': '*' over a pattern with no terminal and no move" in diags
    assert "rule 'b': recursive with no intervening cell or move" in diags


def test_validation_flags_recursion_with_no_progress():
    g = parse_grammar("r0 --> (r0)? cell\n")
    diags = validate_grammar(g, PredicateRegistry())
    assert diags == ["rule 'r0': recursive with no intervening cell or move"]


# === matching ==========================================================

def test_terminal_binds_the_anchor_without_moving():
    fb = fb_from({"A1": 7})
    g = parse_grammar("a --> cell\n")
    (m,) = match_at(g, "a", fb, addr("A1"))
    assert m.bound_cells == (addr("A1"),)
    assert m.end == addr("A1")
    assert match_at(g, "a", fb, addr("B1")) == []


def test_star_is_greedy_longest_expansion_first():
    fb = fb_from({"A1": 1, "B1": 2, "C1": 3})
    g = parse_grammar("a --> (cell ALONG)*\n")
    matches = match_at(g, "a", fb, addr("A1"))
    assert [len(m.bound_cells) for m in matches] == [3, 2, 1, 0]
    assert [m.end.a1 for m in matches] == ["D1", "C1", "B1", "A1"]


def test_alternatives_yield_in_source_order():
    fb = fb_from({"A1": 1, "B1": 2})
    g = parse_grammar("a --> cell cell | cell\n")
    matches = match_at(g, "a", fb, addr("A1"))
    assert [len(m.bound_cells) for m in matches] == [2, 1]


def test_option_prefers_taking_the_inner_pattern():
    fb = fb_from({"A1": 1, "B1": 2})
    g = parse_grammar("a --> cell cell?\n")
    matches = match_at(g, "a", fb, addr("A1"))
    assert [len(m.bound_cells) for m in matches] == [2, 1]


def test_rule_calls_restore_the_cursor():
    fb = fb_from({"A1": 1, "A2": 2, "B1": 3})
    g = parse_grammar("a --> b cell\nb --> cell DOWN cell\n")
    (m,) = match_at(g, "a", fb, addr("A1"))
    # b consumed A1 and A2 walking down; the call rewound to A1, so the
    # implicit sideways move lands on B1.
    assert m.bound_cells == (addr("B1"), addr("A1"), addr("A2"))
    assert m.end == addr("B1")
    assert m.bindings == (
        ("a", (addr("B1"),)),
        ("b", (addr("A1"), addr("A2"))),
    )


def test_overlay_matches_both_operands_from_one_spot_and_stays_put():
    fb = fb_from({"A1": 7})
    g = parse_grammar("a --> cell AND number\n")
    (m,) = match_at(g, "a", fb, addr("A1"))
    assert m.end == addr("A1")
    assert m.bound_cells == (addr("A1"),)
    assert match_at(g, "a", fb, addr("A1"))[0].bindings == (
        ("a", (addr("A1"), addr("A1"))),
    )


def test_recursive_descent_walks_a_column():
    fb = fb_from({"A1": 1, "A2": 2})
    g = parse_grammar("r0 --> cell (DOWN r0)?\n")
    matches = match_at(g, "r0", fb, addr("A1"))
    assert [[a.a1 for a in m.bound_cells] for m in matches] == [["A1", "A2"], ["A1"]]
    # the call cursor sits where the move left it; only the callee rewinds
    assert [m.end.a1 for m in matches] == ["A2", "A1"]


def test_self_call_at_the_same_spot_is_cut_off():
    fb = fb_from({"A1": 1})
    g = Grammar({"r0": Seq((Opt(RuleRef("r0")), Terminal("cell")))})
    (m,) = match_at(g, "r0", fb, addr("A1"))
    assert m.bound_cells == (addr("A1"),)


def test_matching_an_unknown_rule_raises():
    fb = fb_from({"A1": 1})
    with pytest.raises(GrammarError):
        match_at(parse_grammar("a --> cell\n"), "b", fb, addr("A1"))


def test_match_all_anchors_at_every_populated_cell_in_reading_order():
    fb = fb_from({"B2": 1, "A1": 2, "A2": 3})
    g = parse_grammar("a --> cell\n")
    anchors = [m.anchor.a1 for m in match_all(g, "a", fb)]
    assert anchors == ["A1", "A2", "B2"]


def test_match_results_are_deterministic_and_duplicate_free():
    rng = random.Random(41)
    for _ in range(10):
        fb = build(gen_grid(rng))
        g = gen_grammar(rng)
        first = match_all(g, "r0", fb)
        second = match_all(g, "r0", fb)
        assert first == second
        keys = [(m.anchor, m.bindings, m.end) for m in first]
        assert len(keys) == len(set(keys))


def test_cover_prefers_bigger_matches_then_earlier_anchors():
    fb = fb_from({"A1": 1, "B1": 2, "C1": 3})
    g = parse_grammar("pair --> cell cell\nrun --> (cell ALONG)* cell\n")
    pairs = match_all(g, "pair", fb)
    cover = select_cover(pairs)
    assert [[a.a1 for a in m.bound_cells] for m in cover] == [["A1", "B1"]]
    runs = select_cover(match_all(g, "run", fb))
    assert [[a.a1 for a in m.bound_cells] for m in runs] == [["A1", "B1", "C1"]]


def test_cover_output_is_pairwise_disjoint():
    rng = random.Random(43)
    for _ in range(15):
        fb = build(gen_grid(rng))
        g = gen_grammar(rng)
        used = set()
        for m in select_cover(match_all(g, "r0", fb)):
            cells = set(m.bound_cells)
            assert not (cells & used)
            used |= cells


def test_matcher_agrees_with_the_exhaustive_oracle():
    rng = random.Random(47)
    grammars = [gen_grammar(rng) for _ in range(30)] + recursive_grammars()
    for trial in range(8):
        fb = build(gen_grid(rng))
        for g in grammars:
            for anchor in sorted(fb.wb.cells, key=lambda a: a.sort_key):
                got = {(m.bindings, m.end) for m in match_at(g, "r0", fb, anchor)}
                assert got == oracle_match_set(g, "r0", fb, anchor)
