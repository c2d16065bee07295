"""Rule files: parsing and compilation to matchable templates.

A rule file holds any number of rules:

    rule JoinAssignments {
      pattern: {
        cstmts(s1);
        cexpr(l) = cexpr(e1);
        cstmts(s2);
        cexpr(l) = cexpr(e2);
        cstmts(s3);
      }
      condition: {
        pure(l);
        pure(e1);
        no_write(s2, {l, e1});
        no_read(s2, l);
      }
      generate: {
        cstmts(s1);
        cstmts(s2);
        cexpr(l) = subs(cexpr(e2), cexpr(l), cexpr(e1));
        cstmts(s3);
      }
    }

Sections come in that order; condition and assert are optional.  A braced
pattern is a statement rule: with sequence metavariables (or several
statements) it matches the entire child list of a block, with exactly one
plain statement it matches that statement anywhere.  An unbraced pattern is
an expression followed by `;` and matches expression nodes.  generate may be
`gen_list { ... }` to offer alternative rewrites, each reported as its own
match.  assert holds semantic facts (pragma bodies without the `#pragma stml`
prefix) attached to the rewritten code.  `//` comments are allowed anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cast import Node, iter_nodes, make
from .errors import RuleSyntaxError
from .parser import META_CONSTRUCTS, META_TAGS, Parser, Token, tokenize
from .properties import Property, parse_stml

_SECTION_ORDER = ("pattern", "condition", "generate", "assert")
_GENERATORS = ("occurs_in", "fresh_var")  # may bind their free metavariable


@dataclass(frozen=True)
class Condition:
    name: str
    # each arg: ("expr", template) | ("set", [templates]) | ("writes", template)
    args: tuple = ()

    def __repr__(self) -> str:  # pragma: no cover
        return f"Condition({self.name}/{len(self.args)})"


@dataclass
class Rule:
    name: str
    kind: str                      # "seq" | "stmt" | "expr"
    pattern: object                # list of templates (seq) or one template
    conditions: list[Condition]
    alternatives: list             # generate templates, one per alternative
    asserts: list[Property]
    pattern_vars: set[str] = field(default_factory=set)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Rule({self.name}, {self.kind})"


def _meta_names(template) -> set[str]:
    out: set[str] = set()
    items = template if isinstance(template, (list, tuple)) else [template]
    for t in items:
        for n in iter_nodes(t):
            if n.kind in ("MVar", "MBinOp"):
                out.add(n.name)
    return out


def _tag_arg_name(call: Node, rule: str) -> str:
    if len(call.children) != 1 or call.children[0].kind != "Var":
        raise RuleSyntaxError(
            f"rule {rule}: {call.name}(...) takes a single metavariable name"
        )
    return call.children[0].name


def compile_template(node: Node, rule: str, where: str) -> Node:
    """Rewrite metavariable tags parsed as calls into matcher nodes."""
    k = node.kind
    if k == "Call" and node.name in META_TAGS:
        if node.name in ("cexpr", "cstmt", "cstmts"):
            sort = {"cexpr": "expr", "cstmt": "stmt", "cstmts": "stmts"}[node.name]
            return make("MVar", name=_tag_arg_name(node, rule), op=sort)
        if node.name == "bin_oper":
            if len(node.children) != 3:
                raise RuleSyntaxError(f"rule {rule}: bin_oper takes 3 arguments")
            op = node.children[0]
            if op.kind != "Var":
                raise RuleSyntaxError(
                    f"rule {rule}: bin_oper operator slot takes a metavariable"
                )
            l = compile_template(node.children[1], rule, where)
            r = compile_template(node.children[2], rule, where)
            return make("MBinOp", l, r, name=op.name)
        if node.name == "subs":
            if where != "generate":
                raise RuleSyntaxError(f"rule {rule}: subs is generate-only")
            if len(node.children) != 3:
                raise RuleSyntaxError(f"rule {rule}: subs takes 3 arguments")
            return make(
                "MSubs", *(compile_template(c, rule, where) for c in node.children)
            )
    if k in ("MetaIfThen", "MetaIfThenElse"):
        if where != "generate":
            raise RuleSyntaxError(f"rule {rule}: {k} is generate-only")
        cond = node.children[0]
        if cond.kind != "Call":
            raise RuleSyntaxError(f"rule {rule}: template condition must be a predicate")
        new_cond = make(
            "Call", *(compile_template(c, rule, where) for c in cond.children),
            name=cond.name,
        )
        rest = tuple(compile_template(c, rule, where) for c in node.children[1:])
        return make(k, new_cond, *rest)
    if k == "ExprStmt" and node.children[0].kind == "Call" and \
            node.children[0].name in ("cstmt", "cstmts", "subs",
                                      "if_then", "if_then_else"):
        return compile_template(node.children[0], rule, where)
    if not node.children:
        return node
    return make(
        k, *(compile_template(c, rule, where) for c in node.children),
        name=node.name, op=node.op, value=node.value,
        ctype=node.ctype, ndims=node.ndims, line=node.line, col=node.col,
    )


class _RuleCursor:
    def __init__(self, toks: list[Token], src: str):
        self.toks = toks
        self.pos = 0
        self.src = src

    def at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def peek(self) -> Optional[Token]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self) -> Token:
        if self.at_end():
            raise RuleSyntaxError("unexpected end of rule file")
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.take()
        if t.text != text:
            raise RuleSyntaxError(
                f"line {t.line}: expected {text!r}, got {t.text!r}"
            )
        return t

    def balanced(self) -> list[Token]:
        """Consume a `{ ... }` region, returning the inner tokens."""
        self.expect("{")
        depth = 1
        out: list[Token] = []
        while True:
            t = self.take()
            if t.kind == "op" and t.text == "{":
                depth += 1
            elif t.kind == "op" and t.text == "}":
                depth -= 1
                if depth == 0:
                    return out
            out.append(t)

    def until_semi(self) -> list[Token]:
        out: list[Token] = []
        while True:
            t = self.take()
            if t.kind == "op" and t.text == ";":
                return out
            out.append(t)


def _parse_stmt_templates(tokens: list[Token], rule: str, where: str) -> list[Node]:
    p = Parser(tokens, meta=True)
    out: list[Node] = []
    while not p.at_end():
        out.extend(p.parse_stmt())
    return [compile_template(s, rule, where) for s in out]


def _parse_expr_template(tokens: list[Token], rule: str, where: str) -> Node:
    p = Parser(tokens, meta=True)
    e = p.parse_expr()
    if not p.at_end():
        t = p.peek()
        raise RuleSyntaxError(f"rule {rule}: trailing tokens at line {t.line}")
    return compile_template(e, rule, where)


def _parse_condition(tokens: list[Token], rule: str) -> Condition:
    p = Parser(tokens, meta=True)
    head = p.take()
    if head.kind != "ident":
        raise RuleSyntaxError(f"rule {rule}: malformed condition")
    p.expect("(")
    args: list[tuple] = []
    if p.peek() and p.peek().text != ")":
        while True:
            args.append(_parse_condition_arg(p, rule))
            if p.peek() and p.peek().text == ",":
                p.take()
                continue
            break
    p.expect(")")
    if not p.at_end():
        raise RuleSyntaxError(f"rule {rule}: trailing tokens in condition")
    return Condition(head.text, tuple(args))


def _vars_to_meta(node: Node) -> Node:
    """In condition arguments bare identifiers name metavariables."""
    if node.kind == "Var":
        return make("MVar", name=node.name, op="any")
    if not node.children:
        return node
    return make(
        node.kind, *(_vars_to_meta(c) for c in node.children),
        name=node.name, op=node.op, value=node.value,
        ctype=node.ctype, ndims=node.ndims,
    )


def _condition_template(p: Parser, rule: str) -> Node:
    return _vars_to_meta(compile_template(p.parse_expr(), rule, "condition"))


def _parse_condition_arg(p: Parser, rule: str) -> tuple:
    t = p.peek()
    if t and t.kind == "op" and t.text == "{":
        p.take()
        items = []
        while True:
            items.append(_condition_template(p, rule))
            if p.peek() and p.peek().text == ",":
                p.take()
                continue
            break
        p.expect("}")
        return ("set", items)
    if t and t.kind == "ident" and t.text == "writes":
        nxt = p.peek(1)
        if nxt and nxt.text == "(":
            p.take()
            p.take()
            inner = _condition_template(p, rule)
            p.expect(")")
            return ("writes", inner)
    return ("expr", _condition_template(p, rule))


def _parse_generate(cur: _RuleCursor, rule: str, seq_rule: bool) -> list:
    t = cur.peek()
    if t and t.kind == "ident" and t.text == "gen_list":
        cur.take()
        if cur.peek() and cur.peek().text == ":":
            cur.take()
        body = cur.balanced()
        return _parse_gen_list(body, rule, seq_rule)
    if t and t.kind == "op" and t.text == "{":
        return [_parse_stmt_templates(cur.balanced(), rule, "generate")]
    return [_parse_expr_template(cur.until_semi(), rule, "generate")]


def _parse_gen_list(tokens: list[Token], rule: str, seq_rule: bool) -> list:
    cur = _RuleCursor(tokens, "")
    alts: list = []
    if seq_rule or (tokens and tokens[0].text == "{"):
        while not cur.at_end():
            alts.append(_parse_stmt_templates(cur.balanced(), rule, "generate"))
    else:
        while not cur.at_end():
            alts.append(_parse_expr_template(cur.until_semi(), rule, "generate"))
    if not alts:
        raise RuleSyntaxError(f"rule {rule}: empty gen_list")
    return alts


def _parse_asserts(tokens: list[Token], rule: str) -> list[Property]:
    cur = _RuleCursor(tokens, "")
    out: list[Property] = []
    while not cur.at_end():
        item = cur.until_semi()
        text = " ".join(t.text for t in item)
        try:
            out.append(parse_stml(text, provenance="rule-assert"))
        except Exception as exc:
            raise RuleSyntaxError(f"rule {rule}: bad assert {text!r}: {exc}") from None
    return out


def parse_rules(text: str, source_name: str = "<rules>") -> list[Rule]:
    """Parse a rule file into compiled rules, in declaration order."""
    toks = tokenize(text, source_name)
    cur = _RuleCursor(toks, text)
    rules: list[Rule] = []
    while not cur.at_end():
        kw = cur.take()
        if kw.kind != "ident" or kw.text != "rule":
            raise RuleSyntaxError(f"line {kw.line}: expected 'rule'")
        name = _rule_name(cur)
        cur.expect("{")
        rule = _parse_rule_body(cur, name)
        rules.append(rule)
    seen: set[str] = set()
    for r in rules:
        if r.name in seen:
            raise RuleSyntaxError(f"duplicate rule name {r.name}")
        seen.add(r.name)
    return rules


def _rule_name(cur: _RuleCursor) -> str:
    parts: list[str] = []
    while True:
        t = cur.peek()
        if t is None:
            raise RuleSyntaxError("unexpected end of rule file")
        if t.kind == "op" and t.text == "{":
            break
        if t.kind in ("ident", "int") or (t.kind == "op" and t.text == "-"):
            parts.append(cur.take().text)
            continue
        raise RuleSyntaxError(f"line {t.line}: bad rule name token {t.text!r}")
    if not parts:
        raise RuleSyntaxError("rule needs a name")
    return "".join(parts)


def _parse_rule_body(cur: _RuleCursor, name: str) -> Rule:
    def section(expected: str, optional: bool = False) -> bool:
        t = cur.peek()
        if t and t.kind == "ident" and t.text == expected:
            cur.take()
            cur.expect(":")
            return True
        if optional:
            return False
        raise RuleSyntaxError(
            f"rule {name}: expected section {expected!r}"
            + (f", got {t.text!r}" if t else "")
        )

    section("pattern")
    t = cur.peek()
    if t and t.kind == "op" and t.text == "{":
        stmt_templates = _parse_stmt_templates(cur.balanced(), name, "pattern")
        if not stmt_templates:
            raise RuleSyntaxError(f"rule {name}: empty pattern")
        has_seq = any(
            s.kind == "MVar" and s.op == "stmts" for s in stmt_templates
        )
        if len(stmt_templates) == 1 and not has_seq:
            kind, pattern = "stmt", stmt_templates[0]
        else:
            kind, pattern = "seq", stmt_templates
    else:
        kind = "expr"
        pattern = _parse_expr_template(cur.until_semi(), name, "pattern")

    conditions: list[Condition] = []
    if section("condition", optional=True):
        body = _RuleCursor(cur.balanced(), "")
        while not body.at_end():
            conditions.append(_parse_condition(body.until_semi(), name))

    section("generate")
    alternatives = _parse_generate(cur, name, seq_rule=(kind != "expr"))

    asserts: list[Property] = []
    if section("assert", optional=True):
        asserts = _parse_asserts(cur.balanced(), name)

    cur.expect("}")

    rule = Rule(name, kind, pattern, conditions, alternatives, asserts)
    rule.pattern_vars = _meta_names(pattern)
    _check_bindings(rule)
    return rule


def _binder_slots(cond: Condition) -> tuple[int, ...]:
    """Argument positions a condition may bind rather than consume."""
    if cond.name in _GENERATORS:
        return (0,)
    if cond.name == "is_assignment" and len(cond.args) == 3:
        return (1, 2)
    return ()


def _check_bindings(rule: Rule) -> None:
    bound = set(rule.pattern_vars)
    for cond in rule.conditions:
        free = _condition_vars(cond) - bound
        for slot in _binder_slots(cond):
            tag, payload = cond.args[slot]
            if tag == "expr" and payload.kind == "MVar" and payload.name in free:
                free.discard(payload.name)
                bound.add(payload.name)
        if free:
            raise RuleSyntaxError(
                f"rule {rule.name}: condition {cond.name} uses unbound "
                f"metavariables {sorted(free)}"
            )
    for alt in rule.alternatives:
        free = _meta_names(alt) - bound
        if free:
            raise RuleSyntaxError(
                f"rule {rule.name}: generate uses unbound metavariables "
                f"{sorted(free)}"
            )


def _condition_vars(cond: Condition) -> set[str]:
    out: set[str] = set()
    for tag, payload in cond.args:
        items = payload if isinstance(payload, list) else [payload]
        for t in items:
            out |= _meta_names(t)
    return out


def load_rules(path: str) -> list[Rule]:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read(), path)
