"""Two-dimensional structure grammars and their backtracking matcher.

Grammar files hold one rule per line (continuations allowed while
parentheses are unbalanced), ``#`` starts a comment::

    column --> label (DOWN cell)*
    block  --> label DOWN (mortgage ALONG(2) other_costs) DOWN rent

Lowercase identifiers name rules when defined in the same file and
predicate terminals otherwise.  ``DOWN``/``ALONG`` move the cursor (an
optional argument gives the distance), ``|`` separates alternatives,
``AND`` superimposes two patterns at the same spot, ``?`` makes a pattern
optional, ``*`` repeats greedily and ``*3`` exactly three times.
Precedence, loosest first: ``|``, ``AND``, juxtaposition, postfix.

Between two adjacent cell-consuming items of a sequence an implicit
``ALONG(1)`` is inserted; writing an explicit move (or starting/ending
the neighbour with one) suppresses it.

Matching semantics
------------------

* A terminal tests its predicate at the cursor, binds that address and
  does not move.
* Sequences thread the cursor left to right; alternatives are tried in
  source order; ``?`` prefers the non-empty branch; repetition is greedy
  with full backtracking, longest expansion first.
* ``a AND b`` matches both operands from the same starting cursor and
  restores that cursor afterwards.
* A rule reference matches the rule's body anchored at the current
  cursor, records one bindings entry under the rule's name, and restores
  the cursor -- rules describe shapes at a point, so a repetition such as
  ``(block ALONG(12))*3`` steps block anchors twelve columns apart.
* Moves beyond the populated bounds of a sheet are allowed (terminals
  out there match only ``empty``).  To keep unbounded wandering finite, a
  repetition stops extending once an iteration ends where it started or
  ends beyond the populated bounds, and a rule may not be re-entered at
  the cursor where it is already being matched (nor anywhere beyond the
  populated bounds while it is active).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .cells import Address
from .factbase import FactBase, PredicateRegistry, eval_predicate

__all__ = [
    "Pattern",
    "Terminal",
    "Move",
    "Seq",
    "Alt",
    "Opt",
    "Repeat",
    "And",
    "RuleRef",
    "Grammar",
    "Match",
    "GrammarError",
    "parse_grammar",
    "validate_grammar",
    "match_at",
    "match_all",
    "select_cover",
]

DOWN = "down"
ALONG = "along"


class GrammarError(ValueError):
    """Grammar text that cannot be parsed; message carries the line number."""


class Pattern:
    __slots__ = ()


@dataclass(frozen=True)
class Terminal(Pattern):
    pred: str


@dataclass(frozen=True)
class Move(Pattern):
    axis: str  # DOWN or ALONG
    n: int


@dataclass(frozen=True)
class Seq(Pattern):
    items: tuple[Pattern, ...]


@dataclass(frozen=True)
class Alt(Pattern):
    options: tuple[Pattern, ...]


@dataclass(frozen=True)
class Opt(Pattern):
    inner: Pattern


@dataclass(frozen=True)
class Repeat(Pattern):
    inner: Pattern
    count: int | None  # None means star


@dataclass(frozen=True)
class And(Pattern):
    left: Pattern
    right: Pattern


@dataclass(frozen=True)
class RuleRef(Pattern):
    name: str


@dataclass(frozen=True)
class _Name(Pattern):
    """Unresolved identifier; becomes RuleRef or Terminal after the file is read."""

    name: str


@dataclass(frozen=True)
class Grammar:
    rules: dict[str, Pattern]


# === parser ===========================================================

_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")
_RULE_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_KEYWORDS = ("DOWN", "ALONG", "AND")


def _tokenize_rule(body: str, lineno: int) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "|?*()":
            tokens.append((ch, ch))
            i += 1
            continue
        m = _INT_RE.match(body, i)
        if m:
            tokens.append(("int", m.group(0)))
            i = m.end()
            continue
        m = _WORD_RE.match(body, i)
        if m:
            word = m.group(0)
            if word in _KEYWORDS:
                tokens.append((word, word))
            elif _RULE_NAME_RE.match(word):
                tokens.append(("ident", word))
            else:
                raise GrammarError(f"line {lineno}: bad identifier {word!r}")
            i = m.end()
            continue
        raise GrammarError(f"line {lineno}: unexpected character {ch!r}")
    tokens.append(("end", ""))
    return tokens


def _starts_with_move(p: Pattern) -> bool:
    if isinstance(p, Move):
        return True
    if isinstance(p, Seq):
        return _starts_with_move(p.items[0])
    if isinstance(p, (Repeat, Opt)):
        return _starts_with_move(p.inner)
    if isinstance(p, Alt):
        return all(_starts_with_move(o) for o in p.options)
    if isinstance(p, And):
        return _starts_with_move(p.left) and _starts_with_move(p.right)
    return False


def _ends_with_move(p: Pattern) -> bool:
    if isinstance(p, Move):
        return True
    if isinstance(p, Seq):
        return _ends_with_move(p.items[-1])
    if isinstance(p, (Repeat, Opt)):
        return _ends_with_move(p.inner)
    if isinstance(p, Alt):
        return all(_ends_with_move(o) for o in p.options)
    # And restores the cursor, so it can never end on a move.
    return False


def _make_seq(items: list[Pattern]) -> Pattern:
    """Sequence items, inserting the implicit ALONG(1) between neighbours."""
    out: list[Pattern] = []
    for item in items:
        if out and not _ends_with_move(out[-1]) and not _starts_with_move(item):
            out.append(Move(ALONG, 1))
        out.append(item)
    return out[0] if len(out) == 1 else Seq(tuple(out))


class _RuleParser:
    def __init__(self, tokens: list[tuple[str, str]], lineno: int):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno

    def peek(self, ahead: int = 0) -> tuple[str, str]:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def take(self) -> tuple[str, str]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, msg: str):
        raise GrammarError(f"line {self.lineno}: {msg}")

    def parse(self) -> Pattern:
        body = self.alts()
        kind, text = self.peek()
        if kind != "end":
            self.fail(f"unexpected {text!r}")
        return body

    def alts(self) -> Pattern:
        options = [self.ands()]
        while self.peek()[0] == "|":
            self.take()
            options.append(self.ands())
        return options[0] if len(options) == 1 else Alt(tuple(options))

    def ands(self) -> Pattern:
        e = self.seq()
        while self.peek()[0] == "AND":
            self.take()
            e = And(e, self.seq())
        return e

    def seq(self) -> Pattern:
        items = [self.postfix()]
        while self.peek()[0] in ("ident", "DOWN", "ALONG", "("):
            items.append(self.postfix())
        return _make_seq(items)

    def postfix(self) -> Pattern:
        e = self.atom()
        while True:
            kind = self.peek()[0]
            if kind == "*":
                self.take()
                if self.peek()[0] == "int":
                    n = int(self.take()[1])
                    if n < 1:
                        self.fail("repetition count must be >= 1")
                    e = Repeat(e, n)
                else:
                    e = Repeat(e, None)
            elif kind == "?":
                self.take()
                e = Opt(e)
            else:
                return e

    def atom(self) -> Pattern:
        kind, text = self.take()
        if kind == "ident":
            return _Name(text)
        if kind in ("DOWN", "ALONG"):
            n = 1
            if (
                self.peek()[0] == "("
                and self.peek(1)[0] == "int"
                and self.peek(2)[0] == ")"
            ):
                self.take()
                n = int(self.take()[1])
                self.take()
                if n < 1:
                    self.fail("move distance must be >= 1")
            return Move(DOWN if kind == "DOWN" else ALONG, n)
        if kind == "(":
            e = self.alts()
            if self.peek()[0] != ")":
                self.fail("missing ')'")
            self.take()
            return e
        self.fail(f"unexpected {text or 'end of rule'!r}")
        raise AssertionError  # unreachable


def _resolve(p: Pattern, rule_names: frozenset[str]) -> Pattern:
    if isinstance(p, _Name):
        return RuleRef(p.name) if p.name in rule_names else Terminal(p.name)
    if isinstance(p, Seq):
        return Seq(tuple(_resolve(i, rule_names) for i in p.items))
    if isinstance(p, Alt):
        return Alt(tuple(_resolve(o, rule_names) for o in p.options))
    if isinstance(p, Opt):
        return Opt(_resolve(p.inner, rule_names))
    if isinstance(p, Repeat):
        return Repeat(_resolve(p.inner, rule_names), p.count)
    if isinstance(p, And):
        return And(_resolve(p.left, rule_names), _resolve(p.right, rule_names))
    return p


def parse_grammar(text: str) -> Grammar:
    """Parse grammar text; identifiers resolve against the whole file."""
    raw_rules: dict[str, Pattern] = {}
    pending = ""
    pending_line = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        if not pending and not line.strip():
            continue
        if not pending:
            pending_line = lineno
        pending += line + " "
        balance = pending.count("(") - pending.count(")")
        if balance > 0:
            continue
        if balance < 0:
            raise GrammarError(f"line {lineno}: unbalanced ')'")
        logical, pending = pending.strip(), ""
        if not logical:
            continue
        if "-->" not in logical:
            raise GrammarError(f"line {pending_line}: expected 'name --> body'")
        name_part, body_part = logical.split("-->", 1)
        name = name_part.strip()
        if not _RULE_NAME_RE.match(name):
            raise GrammarError(f"line {pending_line}: bad rule name {name!r}")
        if name in raw_rules:
            raise GrammarError(f"line {pending_line}: duplicate rule {name!r}")
        tokens = _tokenize_rule(body_part, pending_line)
        if tokens[0][0] == "end":
            raise GrammarError(f"line {pending_line}: empty rule body")
        raw_rules[name] = _RuleParser(tokens, pending_line).parse()
    if pending.strip():
        raise GrammarError(f"line {pending_line}: unbalanced '(' at end of file")
    names = frozenset(raw_rules)
    return Grammar({name: _resolve(body, names) for name, body in raw_rules.items()})


# === validation =======================================================

def _contains_progress(p: Pattern, env: dict[str, bool]) -> bool:
    """Does the pattern contain at least one terminal or move?"""
    if isinstance(p, (Terminal, Move)):
        return True
    if isinstance(p, RuleRef):
        return env.get(p.name, False)
    if isinstance(p, Seq):
        return any(_contains_progress(i, env) for i in p.items)
    if isinstance(p, Alt):
        return all(_contains_progress(o, env) for o in p.options)
    if isinstance(p, (Opt, Repeat)):
        return _contains_progress(p.inner, env)
    if isinstance(p, And):
        return _contains_progress(p.left, env) or _contains_progress(p.right, env)
    return False


def _nullable_quiet(p: Pattern, env: dict[str, bool]) -> bool:
    """Can the pattern succeed while consuming nothing and moving nothing?"""
    if isinstance(p, (Terminal, Move)):
        return False
    if isinstance(p, RuleRef):
        return env.get(p.name, False)
    if isinstance(p, Seq):
        return all(_nullable_quiet(i, env) for i in p.items)
    if isinstance(p, Alt):
        return any(_nullable_quiet(o, env) for o in p.options)
    if isinstance(p, Opt):
        return True
    if isinstance(p, Repeat):
        return True if p.count is None else _nullable_quiet(p.inner, env)
    if isinstance(p, And):
        return _nullable_quiet(p.left, env) and _nullable_quiet(p.right, env)
    return False


def _first_refs(p: Pattern, nullable: dict[str, bool]) -> set[str]:
    """Rules invocable before any cell is consumed or any move made."""
    if isinstance(p, RuleRef):
        return {p.name}
    if isinstance(p, Seq):
        out: set[str] = set()
        for item in p.items:
            out |= _first_refs(item, nullable)
            if not _nullable_quiet(item, nullable):
                break
        return out
    if isinstance(p, Alt):
        out = set()
        for o in p.options:
            out |= _first_refs(o, nullable)
        return out
    if isinstance(p, (Opt, Repeat)):
        return _first_refs(p.inner, nullable)
    if isinstance(p, And):
        return _first_refs(p.left, nullable) | _first_refs(p.right, nullable)
    return set()


def _fixpoint(g: Grammar, fn) -> dict[str, bool]:
    env = {name: False for name in g.rules}
    changed = True
    while changed:
        changed = False
        for name, body in g.rules.items():
            val = fn(body, env)
            if val and not env[name]:
                env[name] = True
                changed = True
    return env


def validate_grammar(g: Grammar, registry: PredicateRegistry) -> list[str]:
    """Static checks; a non-empty result means the grammar cannot be matched."""
    diagnostics: list[str] = []

    def walk_terminals(name: str, p: Pattern) -> None:
        if isinstance(p, Terminal):
            if not registry.knows(p.pred):
                diagnostics.append(f"rule {name!r}: unknown predicate {p.pred!r}")
        elif isinstance(p, Seq):
            for i in p.items:
                walk_terminals(name, i)
        elif isinstance(p, Alt):
            for o in p.options:
                walk_terminals(name, o)
        elif isinstance(p, (Opt, Repeat)):
            walk_terminals(name, p.inner)
        elif isinstance(p, And):
            walk_terminals(name, p.left)
            walk_terminals(name, p.right)

    for name, body in g.rules.items():
        walk_terminals(name, body)

    progress_env = _fixpoint(g, _contains_progress)

    def walk_stars(name: str, p: Pattern) -> None:
        if isinstance(p, Repeat):
            if p.count is None and not _contains_progress(p.inner, progress_env):
                diagnostics.append(
                    f"rule {name!r}: '*' over a pattern with no terminal and no move"
                )
            walk_stars(name, p.inner)
        elif isinstance(p, Seq):
            for i in p.items:
                walk_stars(name, i)
        elif isinstance(p, Alt):
            for o in p.options:
                walk_stars(name, o)
        elif isinstance(p, Opt):
            walk_stars(name, p.inner)
        elif isinstance(p, And):
            walk_stars(name, p.left)
            walk_stars(name, p.right)

    for name, body in g.rules.items():
        walk_stars(name, body)

    nullable_env = _fixpoint(g, _nullable_quiet)
    graph = {name: _first_refs(body, nullable_env) for name, body in g.rules.items()}
    flagged: set[str] = set()
    for start in graph:
        if start in flagged:
            continue
        stack, seen = [start], set()
        while stack:
            cur = stack.pop()
            for nxt in graph.get(cur, ()):
                if nxt == start:
                    flagged.add(start)
                    stack = []
                    break
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    for name in sorted(flagged):
        diagnostics.append(
            f"rule {name!r}: recursive with no intervening cell or move"
        )

    return diagnostics


# === matching =========================================================

@dataclass(frozen=True)
class Match:
    """One successful anchored match.

    ``bindings`` holds one entry per rule instance in match (pre-)order:
    the rule's name and the addresses its own terminals bound, in
    cursor-visit order.
    """

    rule: str
    anchor: Address
    bindings: tuple[tuple[str, tuple[Address, ...]], ...]
    end: Address

    @property
    def bound_cells(self) -> tuple[Address, ...]:
        seen: dict[Address, None] = {}
        for _, addrs in self.bindings:
            for a in addrs:
                seen.setdefault(a)
        return tuple(seen)


@dataclass(frozen=True)
class _State:
    cursor: Address
    entries: tuple[tuple[str, tuple[Address, ...]], ...]
    open_stack: tuple[int, ...]
    active: frozenset

    def bind(self, addr: Address) -> "_State":
        idx = self.open_stack[-1]
        name, addrs = self.entries[idx]
        entries = (
            self.entries[:idx] + ((name, addrs + (addr,)),) + self.entries[idx + 1 :]
        )
        return replace(self, entries=entries)

    def at(self, cursor: Address) -> "_State":
        return replace(self, cursor=cursor)


class _Matcher:
    def __init__(self, g: Grammar, fb: FactBase, registry: PredicateRegistry):
        self.g = g
        self.fb = fb
        self.registry = registry

    def beyond(self, addr: Address) -> bool:
        max_col, max_row = self.fb.bounds.get(addr.sheet, (0, 0))
        return addr.col > max_col or addr.row > max_row

    def match(self, p: Pattern, st: _State):
        if isinstance(p, Terminal):
            if eval_predicate(self.registry, p.pred, self.fb, st.cursor):
                yield st.bind(st.cursor)
        elif isinstance(p, Move):
            c = st.cursor
            col = c.col + (p.n if p.axis == ALONG else 0)
            row = c.row + (p.n if p.axis == DOWN else 0)
            if col >= 1 and row >= 1:  # moves are forward-only, kept for safety
                yield st.at(Address(c.sheet, col, row))
        elif isinstance(p, Seq):
            yield from self._seq(p.items, 0, st)
        elif isinstance(p, Alt):
            for option in p.options:
                yield from self.match(option, st)
        elif isinstance(p, Opt):
            yield from self.match(p.inner, st)
            yield st
        elif isinstance(p, Repeat):
            if p.count is None:
                yield from self._star(p.inner, st)
            else:
                yield from self._exactly(p.inner, p.count, st)
        elif isinstance(p, And):
            start = st.cursor
            for s1 in self.match(p.left, st):
                yield from (
                    s2.at(start) for s2 in self.match(p.right, s1.at(start))
                )
        elif isinstance(p, RuleRef):
            yield from self._rule(p.name, st)
        else:  # pragma: no cover
            raise TypeError(f"cannot match {p!r}")

    def _seq(self, items: tuple[Pattern, ...], i: int, st: _State):
        if i == len(items):
            yield st
            return
        for s in self.match(items[i], st):
            yield from self._seq(items, i + 1, s)

    def _exactly(self, inner: Pattern, count: int, st: _State):
        if count == 0:
            yield st
            return
        for s in self.match(inner, st):
            yield from self._exactly(inner, count - 1, s)

    def _star(self, inner: Pattern, st: _State):
        # Greedy: longer expansions first, then this length; an iteration
        # that goes nowhere (or wanders beyond the populated bounds) ends
        # the expansion at its length.
        start = st.cursor
        for s in self.match(inner, st):
            if s.cursor != start and not self.beyond(s.cursor):
                yield from self._star(inner, s)
            else:
                yield s
        yield st

    def _rule(self, name: str, st: _State):
        body = self.g.rules.get(name)
        if body is None:  # pragma: no cover - resolution guarantees this
            raise GrammarError(f"unknown rule {name!r}")
        key = (name, st.cursor)
        if key in st.active:
            return
        if self.beyond(st.cursor) and any(n == name for n, _ in st.active):
            return
        opened = replace(
            st,
            entries=st.entries + ((name, ()),),
            open_stack=st.open_stack + (len(st.entries),),
            active=st.active | {key},
        )
        for s in self.match(body, opened):
            yield replace(
                s,
                cursor=st.cursor,
                open_stack=s.open_stack[:-1],
                active=s.active - {key},
            )


def match_at(
    g: Grammar,
    rule: str,
    fb: FactBase,
    anchor: Address,
    registry: PredicateRegistry | None = None,
) -> list[Match]:
    """All distinct matches of ``rule`` anchored at ``anchor``, greedy first."""
    if rule not in g.rules:
        raise GrammarError(f"unknown rule {rule!r}")
    matcher = _Matcher(g, fb, registry or PredicateRegistry())
    init = _State(
        cursor=anchor,
        entries=((rule, ()),),
        open_stack=(0,),
        active=frozenset({(rule, anchor)}),
    )
    out: list[Match] = []
    seen: set = set()
    for s in matcher.match(g.rules[rule], init):
        key = (s.entries, s.cursor)
        if key not in seen:
            seen.add(key)
            out.append(Match(rule, anchor, s.entries, s.cursor))
    return out


def match_all(
    g: Grammar,
    rule: str,
    fb: FactBase,
    registry: PredicateRegistry | None = None,
) -> list[Match]:
    """Matches anchored at every non-empty cell, in (sheet, row, col) order."""
    out: list[Match] = []
    for anchor in sorted(fb.wb.cells, key=lambda a: a.sort_key):
        out.extend(match_at(g, rule, fb, anchor, registry))
    return out


def select_cover(matches: list[Match]) -> list[Match]:
    """Greedy non-overlapping subset: biggest first, then earliest anchor,
    then earliest backtracking order; a match is kept only when its bound
    addresses are disjoint from everything already kept."""
    ranked = sorted(
        enumerate(matches),
        key=lambda pair: (
            -len(pair[1].bound_cells),
            pair[1].anchor.sort_key,
            pair[0],
        ),
    )
    chosen: list[Match] = []
    used: set[Address] = set()
    for _, m in ranked:
        cells = set(m.bound_cells)
        if cells & used:
            continue
        used |= cells
        chosen.append(m)
    return chosen
