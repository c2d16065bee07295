"""Command-line entry points.

transform   batch derivation under an oracle, writes code + JSON report
lower       skeleton-annotation lowering only
matches     list applicable rules as JSON
serve       start the local session service

Rules come from --rules (repeatable), else every *.stml in $STML_RULE_PATH,
else the packaged default library.  Errors leave a JSON object on stderr
and exit 1; budget exhaustion exits 2.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .engine import Session
from .errors import BudgetExceeded, FileError, RuleSyntaxError, StmlError
from .parser import parse_c
from .printer import print_c
from .rules import Rule, load_rules, parse_rules
from .semantics import PropertyStore, ingest_properties, lower_polca


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as err:
        raise FileError(f"cannot read {path}: {err.strerror}") from err


def load_rule_set(paths: list[str]) -> list[Rule]:
    """Resolve the active rule library; duplicate names are rejected."""
    if not paths:
        env = os.environ.get("STML_RULE_PATH")
        if env:
            paths = sorted(str(p) for p in Path(env).glob("*.stml"))
            if not paths:
                raise FileError(f"no *.stml files under {env}")
        else:
            text = (
                importlib.resources.files("stml") / "rules" / "default.stml"
            ).read_text()
            return parse_rules(text, "default.stml")
    rules: list[Rule] = []
    seen: set[str] = set()
    for p in paths:
        for rule in load_rules(p):
            if rule.name in seen:
                raise RuleSyntaxError(f"duplicate rule {rule.name} in {p}")
            seen.add(rule.name)
            rules.append(rule)
    return rules


def _build_oracle(spec: str):
    from . import oracles

    if spec == "greedy":
        return oracles.GreedyOracle()
    if spec == "lookahead":
        return oracles.LookaheadOracle()
    if spec.startswith("lookahead:"):
        return oracles.LookaheadOracle(int(spec.split(":", 1)[1]))
    if spec.startswith("scripted:"):
        path = spec.split(":", 1)[1]
        lines = [ln.strip() for ln in _read(path).splitlines() if ln.strip()]
        return oracles.ScriptedOracle(lines)
    if spec.startswith(("http://", "https://")):
        return oracles.HttpOracle(spec)
    raise StmlError(f"unknown oracle spec {spec!r}")


def _load_input(args) -> tuple:
    ast = parse_c(_read(args.input), args.input)
    warnings: list[dict] = []
    store = PropertyStore(ast, warnings)
    lower_polca(ast, store)
    if getattr(args, "properties", None):
        ingest_properties(ast, _read(args.properties), store)
    return ast, store, warnings


def _emit_code(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_transform(args) -> int:
    ast, _, warnings = _load_input(args)
    rules = load_rule_set(args.rules)
    oracle = _build_oracle(args.oracle)

    from .oracles import run_derivation

    try:
        final, records = run_derivation(ast, rules, oracle, args.budget)
        status = "final"
        code = 0
    except BudgetExceeded as err:
        final, records = err.partial
        status = "budget-exhausted"
        code = 2
    _emit_code(print_c(final), args.out)
    report = {
        "status": status,
        "steps": [r.to_json() for r in records],
        "warnings": warnings,
    }
    if args.out:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return code


def cmd_lower(args) -> int:
    ast, _, _ = _load_input(args)
    _emit_code(print_c(ast), args.out)
    return 0


def cmd_matches(args) -> int:
    from .service import _SessionHandle, match_json

    ast, store, _ = _load_input(args)
    rules = load_rule_set(args.rules)
    session = Session(ast, rules)
    session.store = store
    handle = _SessionHandle("cli", session, [])
    out = [
        match_json(handle, m, ast, rules) for m in session.matches()
    ]
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_serve(args) -> int:
    from .service import make_server

    rules = load_rule_set(args.rules)
    server = make_server(args.port, rules)
    # report the bound port, so --port 0 picks a free one usably
    print(f"serving on http://127.0.0.1:{server.server_address[1]}",
          file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="stml",
        description="rule-based source-to-source transformation",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, with_rules=True):
        p.add_argument("input", help="C source file")
        if with_rules:
            p.add_argument("--rules", action="append", default=[],
                           metavar="FILE", help="rule file (repeatable)")
        p.add_argument("--properties", metavar="SIDECAR",
                       help="extra STML facts keyed by line anchors")
        p.add_argument("--out", metavar="FILE",
                       help="output path (default stdout)")

    t = sub.add_parser("transform", help="run an oracle-driven derivation")
    common(t)
    t.add_argument("--oracle", default="greedy",
                   help="scripted:<file> | greedy | lookahead:<d> | <url>")
    t.add_argument("--budget", type=int, default=1000,
                   help="max applied steps")
    t.set_defaults(fn=cmd_transform)

    lo = sub.add_parser("lower", help="lower skeleton annotations only")
    common(lo, with_rules=False)
    lo.set_defaults(fn=cmd_lower)

    m = sub.add_parser("matches", help="list applicable rules as JSON")
    common(m)
    m.set_defaults(fn=cmd_matches)

    s = sub.add_parser("serve", help="start the local session service")
    s.add_argument("--rules", action="append", default=[], metavar="FILE")
    s.add_argument("--port", type=int, default=8750)
    s.set_defaults(fn=cmd_serve)
    return top


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except StmlError as err:
        json.dump({"error": type(err).__name__, "message": str(err)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
