"""Rule-selection oracles and the derivation driver.

The driver repeatedly builds the candidate set {trans(c, m) | m proven},
pairs each candidate with the rule names applicable to it, and asks the
oracle to pick one candidate plus the rule for the following step.  The
first round is unrestricted; afterwards only the previously named rule may
fire, so a recorded derivation carries its own conformance evidence.

Built-in oracles: scripted replay, greedy metric descent, bounded-depth
lookahead, callback delegation, and an HTTP client for out-of-process
selection policies.
"""

from __future__ import annotations

import json
import urllib.request
from dataclasses import dataclass
from typing import Callable, Optional

from .cast import ARITH_OPS, AnnotatedAst, iter_nodes
from .engine import (
    PROVEN,
    Match,
    StepRecord,
    _store_for,
    app_rules,
    make_record,
    trans,
)
from .errors import BudgetExceeded, NoViableCandidate
from .printer import print_c
from .rules import Rule

_COUNTED_STMTS = frozenset(
    {"Decl", "ExprStmt", "Assign", "AugAssign", "For", "While", "If"}
)
_INCDEC = frozenset({"++", "--", "p++", "p--", "+", "-"})


def metric(ast: AnnotatedAst) -> int:
    """10 * loops + statements + arithmetic operators, lower is better.

    Blocks are not statements, so bracing style never moves the score; an
    augmented assignment counts as one statement and one operator.
    """
    loops = stmts = ops = 0
    for n in iter_nodes(ast.root):
        if n.kind in ("For", "While"):
            loops += 1
        if n.kind in _COUNTED_STMTS:
            stmts += 1
        if n.kind == "BinOp" and n.op in ARITH_OPS:
            ops += 1
        elif n.kind == "AugAssign":
            ops += 1
        elif n.kind == "UnaryOp" and n.op in _INCDEC:
            ops += 1
    return 10 * loops + stmts + ops


@dataclass(frozen=True)
class Candidate:
    """One possible next code, the rules applicable to it, and the match
    that produced it."""

    code: AnnotatedAst
    rules: tuple[str, ...]
    match: Match


@dataclass(frozen=True)
class OracleDecision:
    chosen_code: int
    next_rule: Optional[str]


class Expander:
    """Digest-memoized one-step expansion of an AST under a rule set."""

    def __init__(self, rules: list[Rule]):
        self.rules = rules
        self._steps: dict[
            str, list[tuple[Match, AnnotatedAst, list[dict]]]
        ] = {}

    def proven_steps(
        self, ast: AnnotatedAst
    ) -> list[tuple[Match, AnnotatedAst, list[dict]]]:
        key = ast.digest()
        hit = self._steps.get(key)
        if hit is not None:
            return hit
        store = _store_for(ast)
        out = []
        for m in app_rules(ast, self.rules, store):
            if m.certainty != PROVEN:
                continue
            code, warnings = trans(ast, m, self.rules, store)
            _store_for(code)
            out.append((m, code, warnings))
        self._steps[key] = out
        return out

    def candidates(self, ast: AnnotatedAst,
                   allowed: Optional[frozenset[str]]) -> list[Candidate]:
        out = []
        for m, code, _ in self.proven_steps(ast):
            if allowed is not None and m.rule not in allowed:
                continue
            names = tuple(dict.fromkeys(
                mm.rule for mm, _, _ in self.proven_steps(code)
            ))
            out.append(Candidate(code, names, m))
        return out

    def warnings_for(self, ast: AnnotatedAst, match: Match) -> list[dict]:
        for m, _, w in self.proven_steps(ast):
            if m.match_id == match.match_id:
                return w
        return []


class Oracle:
    """SelectRule/IsFinal pair; bind() hands over the driver's expander."""

    def bind(self, expander: Expander) -> None:
        self.expander = expander

    def select_rule(self, candidates: list[Candidate]) -> OracleDecision:
        raise NotImplementedError

    def is_final(self, ast: AnnotatedAst) -> bool:
        raise NotImplementedError


class ScriptedOracle(Oracle):
    """Replays a fixed rule sequence; `@k` picks among same-rule matches."""

    def __init__(self, script: list[str]):
        self.script = [_parse_script_line(s) for s in script]
        self.step = 0

    def is_final(self, ast: AnnotatedAst) -> bool:
        return self.step >= len(self.script)

    def select_rule(self, candidates: list[Candidate]) -> OracleDecision:
        rule, ordinal = self.script[self.step]
        picks = [i for i, c in enumerate(candidates) if c.match.rule == rule]
        if ordinal >= len(picks):
            raise NoViableCandidate(
                f"script step {self.step}: no candidate #{ordinal} for {rule}"
            )
        self.step += 1
        nxt = self.script[self.step][0] if self.step < len(self.script) else None
        return OracleDecision(picks[ordinal], nxt)


def _parse_script_line(line: str) -> tuple[str, int]:
    name, _, ordinal = line.strip().partition("@")
    return name.strip(), int(ordinal) if ordinal else 0


class GreedyOracle(Oracle):
    """Takes the single step that most improves the metric, stops when
    no step strictly improves it."""

    def __init__(self, score: Callable[[AnnotatedAst], int] = metric):
        self.score = score

    def is_final(self, ast: AnnotatedAst) -> bool:
        cur = self.score(ast)
        return all(
            self.score(code) >= cur
            for _, code, _ in self.expander.proven_steps(ast)
        )

    def select_rule(self, candidates: list[Candidate]) -> OracleDecision:
        scored = [(self.score(c.code), i) for i, c in enumerate(candidates)]
        _, idx = min(scored)
        chosen = candidates[idx]
        nxt = None
        follow = [
            (self.score(code), k, m.rule)
            for k, (m, code, _) in enumerate(
                self.expander.proven_steps(chosen.code))
        ]
        if follow:
            fbest, _, frule = min(follow)
            if fbest < self.score(chosen.code):
                nxt = frule
        return OracleDecision(idx, nxt)


class LookaheadOracle(Oracle):
    """Scores a move by the best metric reachable within depth steps."""

    def __init__(self, depth: int = 2,
                 score: Callable[[AnnotatedAst], int] = metric):
        if depth < 1:
            raise ValueError("lookahead depth must be >= 1")
        self.depth = depth
        self.score = score
        self._best: dict[tuple[str, int], int] = {}

    def best_within(self, ast: AnnotatedAst, depth: int) -> int:
        cur = self.score(ast)
        if depth == 0:
            return cur
        key = (ast.digest(), depth)
        hit = self._best.get(key)
        if hit is not None:
            return hit
        best = cur
        for _, code, _ in self.expander.proven_steps(ast):
            best = min(best, self.best_within(code, depth - 1))
        self._best[key] = best
        return best

    def is_final(self, ast: AnnotatedAst) -> bool:
        return self.best_within(ast, self.depth) >= self.score(ast)

    def select_rule(self, candidates: list[Candidate]) -> OracleDecision:
        scored = [
            (self.best_within(c.code, self.depth - 1), i)
            for i, c in enumerate(candidates)
        ]
        _, idx = min(scored)
        chosen = candidates[idx]
        follow = [
            (self.best_within(code, self.depth - 1), k, m.rule)
            for k, (m, code, _) in enumerate(
                self.expander.proven_steps(chosen.code))
        ]
        nxt = None
        if follow:
            fbest, _, frule = min(follow)
            if fbest < self.score(chosen.code):
                nxt = frule
        return OracleDecision(idx, nxt)


class CallbackOracle(Oracle):
    """Delegates both protocol functions, e.g. to an interactive session."""

    def __init__(self, select: Callable[[list[Candidate]], OracleDecision],
                 final: Callable[[AnnotatedAst], bool]):
        self._select = select
        self._final = final

    def select_rule(self, candidates: list[Candidate]) -> OracleDecision:
        return self._select(candidates)

    def is_final(self, ast: AnnotatedAst) -> bool:
        return self._final(ast)


class HttpOracle(Oracle):
    """Forwards select_rule/is_final to an external process as JSON."""

    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _post(self, path: str, payload: dict) -> dict:
        req = urllib.request.Request(
            self.base_url + path,
            data=json.dumps(payload).encode(),
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            return json.loads(resp.read().decode())

    def is_final(self, ast: AnnotatedAst) -> bool:
        return bool(self._post("/is_final", {"code": print_c(ast)})["final"])

    def select_rule(self, candidates: list[Candidate]) -> OracleDecision:
        payload = {
            "candidates": [
                {
                    "index": i,
                    "code": print_c(c.code),
                    "rules": list(c.rules),
                    "produced_by": {"rule": c.match.rule, "pos": c.match.pos},
                }
                for i, c in enumerate(candidates)
            ]
        }
        out = self._post("/select_rule", payload)
        return OracleDecision(int(out["chosen_code"]), out.get("next_rule"))


def new_code(ast: AnnotatedAst, rules: Optional[set[str]], oracle: Oracle,
             expander: Optional[Expander] = None
             ) -> tuple[AnnotatedAst, Optional[str], Match]:
    """One protocol round: candidates, selection, successor.

    rules=None means all rules are allowed (the first round).
    """
    if expander is None:
        expander = oracle.expander
    allowed = frozenset(rules) if rules is not None else None
    candidates = expander.candidates(ast, allowed)
    if not candidates:
        raise NoViableCandidate("no applicable rule")
    decision = oracle.select_rule(candidates)
    chosen = candidates[decision.chosen_code]
    return chosen.code, decision.next_rule, chosen.match


def run_derivation(ast: AnnotatedAst, rules: list[Rule], oracle: Oracle,
                   budget: int = 1000
                   ) -> tuple[AnnotatedAst, list[StepRecord]]:
    """Drive the oracle protocol until is_final or the budget runs out.

    The first round offers every rule; each later round offers only the
    rule named by the previous decision.  BudgetExceeded carries the
    partial history in .partial.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    expander = Expander(rules)
    oracle.bind(expander)
    _store_for(ast)
    current = ast
    allowed: Optional[set[str]] = None
    records: list[StepRecord] = []
    for _ in range(budget):
        if oracle.is_final(current):
            return current, records
        allowed_fs = frozenset(allowed) if allowed is not None else None
        if not expander.candidates(current, allowed_fs):
            return current, records
        code, nxt, match = new_code(current, allowed, oracle, expander)
        records.append(make_record(
            len(records), match, current, current.node_table[match.pos],
            code, expander.warnings_for(current, match), nxt,
        ))
        current = code
        allowed = {nxt} if nxt is not None else None
    if oracle.is_final(current):
        return current, records
    err = BudgetExceeded(f"derivation still open after {budget} steps")
    err.partial = (current, records)
    raise err
