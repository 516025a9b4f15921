"""Line-oriented interactive session.

Verbs (one per line)::

    load facts PATH | load csv PATH [SHEET]
    grammar NAME PATH          define a grammar from a file
    match GRAMMAR RULE         show suggested groupings
    accept all | accept N...   apply suggestions by number
    group NAME CELL...         merge cells (A1 or Sheet!A1)
    rename OLD NEW
    name ATTR                  rename from the neighbouring label
    generalize ATTR            try to quantify the attribute's equations
    show [mm|grid|attrs|matches]
    undo
    export mm|facts|json [PATH]
    quit

Errors never end the loop; they print as ``error: ...``.
"""

from __future__ import annotations

import shlex
import sys
from pathlib import Path

from .arrows import Group, NameFromLabel, Rename
from .cells import parse_address
from .session import (
    AcceptSuggestions,
    ApplyTransform,
    Export,
    Generalize,
    Load,
    LoadGrammar,
    MatchRule,
    Session,
    SessionError,
    Undo,
    create_session,
    execute,
    grid_cells,
    match_payload,
)

__all__ = ["run_repl"]

_EMPTY_FACTS = ""


def _print_matches(out, payload: list[dict]) -> None:
    if not payload:
        print("no matches", file=out)
        return
    for m in payload:
        cells = " ".join(m["cells"])
        print(f"[{m['index']}] {m['rule']} at {m['anchor']}: {cells}", file=out)


def _show(s: Session, what: str, out) -> None:
    if what == "mm":
        out.write(s.mm)
    elif what == "grid":
        for cell in grid_cells(s):
            print(
                f"{cell['sheet']}!{cell['a1']}\t{cell['kind']}\t{cell['display']}",
                file=out,
            )
    elif what == "attrs":
        for a in s.model.attributes:
            print(f"{a.name}\t{len(a.indices)} cell(s)", file=out)
    elif what == "matches":
        _print_matches(out, match_payload(s.pending_matches))
    else:
        raise SessionError(f"cannot show {what!r}", kind="malformed")


def _dispatch(s: Session, words: list[str], out) -> Session:
    verb, rest = words[0], words[1:]
    if verb == "load":
        if len(rest) < 2 or rest[0] not in ("facts", "csv"):
            raise SessionError("usage: load facts PATH | load csv PATH [SHEET]",
                               kind="malformed")
        text = Path(rest[1]).read_text(encoding="utf-8")
        if rest[0] == "facts":
            command = Load(facts=text)
        else:
            sheet = rest[2] if len(rest) > 2 else Path(rest[1]).stem
            command = Load(csv=text, sheet=sheet)
        s, payload = execute(s, command)
        out.write(payload["mm"])
        return s
    if verb == "grammar":
        if len(rest) != 2:
            raise SessionError("usage: grammar NAME PATH", kind="malformed")
        text = Path(rest[1]).read_text(encoding="utf-8")
        s, payload = execute(s, LoadGrammar(rest[0], text))
        for diag in payload["diagnostics"]:
            print(f"diagnostic: {diag}", file=out)
        if not payload["diagnostics"]:
            print(f"grammar {rest[0]} loaded", file=out)
        return s
    if verb == "match":
        if len(rest) != 2:
            raise SessionError("usage: match GRAMMAR RULE", kind="malformed")
        s, payload = execute(s, MatchRule(rest[0], rest[1]))
        _print_matches(out, payload["matches"])
        return s
    if verb == "accept":
        if not rest:
            raise SessionError("usage: accept all | accept N...", kind="malformed")
        if rest == ["all"]:
            indices = tuple(range(len(s.pending_matches)))
        else:
            try:
                indices = tuple(int(w) for w in rest)
            except ValueError as e:
                raise SessionError("accept wants match numbers", kind="malformed") from e
        s, payload = execute(s, AcceptSuggestions(indices))
        out.write(payload["mm"])
        return s
    if verb == "group":
        if len(rest) < 2:
            raise SessionError("usage: group NAME CELL...", kind="malformed")
        default_sheet = s.wb.sheets[0] if s.wb.sheets else "Sheet1"
        cells = tuple(parse_address(w, default_sheet) for w in rest[1:])
        s, payload = execute(s, ApplyTransform(Group(cells, rest[0])))
        out.write(payload["mm"])
        return s
    if verb == "rename":
        if len(rest) != 2:
            raise SessionError("usage: rename OLD NEW", kind="malformed")
        s, payload = execute(s, ApplyTransform(Rename(rest[0], rest[1])))
        out.write(payload["mm"])
        return s
    if verb == "name":
        if len(rest) != 1:
            raise SessionError("usage: name ATTR", kind="malformed")
        s, payload = execute(s, ApplyTransform(NameFromLabel(rest[0])))
        for diag in payload.get("diagnostics", ()):
            print(f"diagnostic: {diag}", file=out)
        out.write(payload["mm"])
        return s
    if verb == "generalize":
        if len(rest) != 1:
            raise SessionError("usage: generalize ATTR", kind="malformed")
        s, payload = execute(s, Generalize(rest[0]))
        print(payload["equation"] or "no common template", file=out)
        return s
    if verb == "show":
        _show(s, rest[0] if rest else "mm", out)
        return s
    if verb == "undo":
        s, payload = execute(s, Undo())
        print(f"undone: {payload['undone']}", file=out)
        out.write(payload["mm"])
        return s
    if verb == "export":
        if not rest:
            raise SessionError("usage: export mm|facts|json [PATH]", kind="malformed")
        _, payload = execute(s, Export(rest[0]))
        if len(rest) > 1:
            Path(rest[1]).write_text(payload["content"], encoding="utf-8")
            print(f"wrote {rest[1]}", file=out)
        else:
            out.write(payload["content"])
        return s
    raise SessionError(f"unknown command {verb!r}", kind="malformed")


def run_repl(
    facts_path: str | None = None,
    grammar_path: str | None = None,
    stdin=None,
    stdout=None,
) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    out = stdout if stdout is not None else sys.stdout
    s = create_session(facts=_EMPTY_FACTS)
    if facts_path:
        s, payload = execute(s, Load(facts=Path(facts_path).read_text("utf-8")))
        out.write(payload["mm"])
    if grammar_path:
        text = Path(grammar_path).read_text("utf-8")
        s, _ = execute(s, LoadGrammar(Path(grammar_path).stem, text))
    interactive = stdin is sys.stdin and sys.stdin.isatty()
    while True:
        if interactive:
            out.write("mm> ")
            out.flush()
        line = stdin.readline()
        if not line:
            return 0
        words = shlex.split(line, comments=True)
        if not words:
            continue
        if words[0] in ("quit", "exit"):
            return 0
        try:
            s = _dispatch(s, words, out)
        except (SessionError, OSError, ValueError) as e:
            print(f"error: {e}", file=out)
