"""Command-line entry points.

* ``sheetstruct discover`` — non-interactive pipeline: load a workbook,
  match every grammar rule (or one), keep a disjoint cover of the
  matches, group and name the bound cells, and print the MM program.
* ``sheetstruct repl`` — interactive session on stdin/stdout.
* ``sheetstruct serve`` — the HTTP service (optionally serving the web
  UI's static files).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .arrows import model_summary
from .session import SessionError, discover

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheetstruct",
        description="Recover the implicit structure of spreadsheets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("discover", help="one-shot structure discovery")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("--facts", metavar="PATH", help="fact file to load")
    src.add_argument("--csv", metavar="PATH", help="CSV grid to load")
    d.add_argument("--sheet", help="sheet name for --csv (default: file stem)")
    d.add_argument("--grammar", metavar="PATH", required=True, help="grammar file")
    d.add_argument("--rule", help="match only this rule (default: all rules)")
    d.add_argument("--emit", choices=("mm", "json"), default="mm")
    d.add_argument("--out", metavar="PATH", help="write here instead of stdout")

    r = sub.add_parser("repl", help="interactive session")
    r.add_argument("--facts", metavar="PATH", help="fact file to preload")
    r.add_argument("--grammar", metavar="PATH", help="grammar file to preload")

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--static", metavar="DIR", help="also serve these files at /")
    s.add_argument(
        "--idle-timeout", type=float, metavar="SECONDS",
        help="drop sessions idle for this long (default: never)",
    )
    return parser


def _run_discover(args: argparse.Namespace) -> int:
    try:
        if args.facts is not None:
            source = Path(args.facts).read_text(encoding="utf-8")
            is_csv, sheet = False, None
        else:
            source = Path(args.csv).read_text(encoding="utf-8")
            is_csv = True
            sheet = args.sheet or Path(args.csv).stem
        grammar_text = Path(args.grammar).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        mm, model = discover(
            source, grammar_text, is_csv=is_csv, sheet=sheet, rule=args.rule
        )
    except SessionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.emit == "mm":
        output = mm
    else:
        output = json.dumps(model_summary(model), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "discover":
        return _run_discover(args)
    if args.command == "repl":
        from .repl import run_repl

        return run_repl(facts_path=args.facts, grammar_path=args.grammar)
    if args.command == "serve":
        from .server import serve

        serve(
            args.port,
            static_dir=args.static,
            host=args.host,
            idle_timeout=args.idle_timeout,
        )
        return 0
    raise AssertionError(args.command)  # argparse enforces the choices


if __name__ == "__main__":
    raise SystemExit(main())
