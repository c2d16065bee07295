"""Pattern matching and template instantiation for rewrite rules.

Templates are ordinary AST nodes plus three meta kinds produced by the rule
compiler: MVar (a metavariable with a sort: expr, stmt, stmts, or op inside
MBinOp), MBinOp (bin_oper with a metavariable operator), and MSubs (deferred
substitution, generate-side only).  MetaIfThen / MetaIfThenElse survive from
the parser and are resolved during instantiation.

Bindings map metavariable names to a Node (expr/stmt), a tuple of Nodes
(stmts), or a string (operator).  Sequence metavariables enumerate splits
shortest-first at the leftmost unbound position, which fixes the order in
which app_rules reports bindings.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .cast import EXPR_KINDS, Node, STMT_KINDS, clone, make, struct_eq
from .errors import InstantiationError, UnboundMetavariable

Binding = dict


def _values_eq(a, b) -> bool:
    if isinstance(a, str) or isinstance(b, str):
        return a == b
    if isinstance(a, tuple) or isinstance(b, tuple):
        if not (isinstance(a, tuple) and isinstance(b, tuple)) or len(a) != len(b):
            return False
        return all(struct_eq(x, y) for x, y in zip(a, b))
    return struct_eq(a, b)


def _bind(binding: Binding, name: str, value) -> Optional[Binding]:
    if name in binding:
        return binding if _values_eq(binding[name], value) else None
    out = dict(binding)
    out[name] = value
    return out


_PAYLOAD = ("kind", "name", "op", "ctype", "ndims", "value")


def match_node(pat: Node, node: Node, binding: Binding) -> Iterator[Binding]:
    if pat.kind == "MVar":
        sort = pat.op
        if sort == "expr":
            if node.kind not in EXPR_KINDS:
                return
        elif sort == "stmt":
            if node.kind not in STMT_KINDS:
                return
        else:
            return  # a stmts metavariable is only legal in sequence position
        b = _bind(binding, pat.name, node)
        if b is not None:
            yield b
        return
    if pat.kind == "MBinOp":
        if node.kind != "BinOp":
            return
        b = _bind(binding, pat.name, node.op)
        if b is None:
            return
        yield from _match_children(pat.children, node.children, b)
        return
    if pat.kind == "Block" and node.kind != "Block":
        # brace-free loop and branch bodies match as singleton sequences
        if node.kind in STMT_KINDS:
            yield from match_seq(pat.children, (node,), binding)
        return
    for f in _PAYLOAD:
        if getattr(pat, f) != getattr(node, f):
            return
    if pat.kind in ("Block", "TranslationUnit"):
        yield from match_seq(pat.children, node.children, binding)
        return
    yield from _match_children(pat.children, node.children, binding)


def _match_children(pats: tuple, nodes: tuple, binding: Binding) -> Iterator[Binding]:
    if len(pats) != len(nodes):
        return
    if not pats:
        yield binding
        return

    def go(i: int, b: Binding) -> Iterator[Binding]:
        if i == len(pats):
            yield b
            return
        for b2 in match_node(pats[i], nodes[i], b):
            yield from go(i + 1, b2)

    yield from go(0, binding)


def match_seq(pats, stmts, binding: Binding) -> Iterator[Binding]:
    """Match a pattern list against an exact statement sequence."""
    pats = tuple(pats)
    stmts = tuple(stmts)
    if not pats:
        if not stmts:
            yield binding
        return
    head = pats[0]
    if head.kind == "MVar" and head.op == "stmts":
        if head.name in binding:
            want = binding[head.name]
            if not isinstance(want, tuple) or len(want) > len(stmts):
                return
            if all(struct_eq(w, s) for w, s in zip(want, stmts)):
                yield from match_seq(pats[1:], stmts[len(want):], binding)
            return
        for k in range(len(stmts) + 1):  # shortest split first
            b = dict(binding)
            b[head.name] = stmts[:k]
            yield from match_seq(pats[1:], stmts[k:], b)
        return
    if not stmts:
        return
    for b in match_node(head, stmts[0], binding):
        yield from match_seq(pats[1:], stmts[1:], b)


def match_pattern(pattern, target, binding: Optional[Binding] = None) -> Iterator[Binding]:
    """Match a compiled pattern against a node or statement sequence.

    pattern is either a single template node (expression and statement rules)
    or a list of statement templates (sequence rules, matched against the
    entire child list of a block).
    """
    binding = binding or {}
    if isinstance(pattern, (list, tuple)):
        seq = target.children if isinstance(target, Node) else tuple(target)
        yield from match_seq(pattern, seq, binding)
    else:
        yield from match_node(pattern, target, binding)


# ---------------------------------------------------------------------------
# substitution and instantiation


def subs(x, ef: Node, et: Node):
    """Replace every subtree structurally equal to ef with (a copy of) et."""
    if isinstance(x, tuple):
        return tuple(subs(s, ef, et) for s in x)
    if struct_eq(x, ef):
        return clone(et)
    if not x.children:
        return x
    new_children = tuple(subs(c, ef, et) for c in x.children)
    if all(a is b for a, b in zip(new_children, x.children)):
        return x
    return make(x.kind, *new_children, name=x.name, op=x.op, value=x.value,
                ctype=x.ctype, ndims=x.ndims, line=x.line, col=x.col)


class InstantiationContext:
    """Hook for resolving template-level conditions (if_then and friends).

    eval_condition receives the predicate call node and the binding and must
    return a semantics.Tri.
    """

    def eval_condition(self, call: Node, binding: Binding):
        raise InstantiationError(
            "template conditions need an evaluation context"
        )


def instantiate(template, binding: Binding,
                ctx: Optional[InstantiationContext] = None):
    """Fill a compiled template.  Returns a Node, or a tuple of statements
    when the template is a list or a sequence metavariable."""
    if isinstance(template, (list, tuple)):
        out: list[Node] = []
        for t in template:
            v = instantiate(t, binding, ctx)
            if isinstance(v, tuple):
                out.extend(v)
            else:
                out.append(v)
        return tuple(out)
    return _inst_node(template, binding, ctx)


def _inst_node(t: Node, binding: Binding, ctx):
    k = t.kind
    if k == "MVar":
        if t.name not in binding:
            raise UnboundMetavariable(t.name)
        v = binding[t.name]
        if isinstance(v, tuple):
            return tuple(clone(s) for s in v)
        if isinstance(v, str):
            raise InstantiationError(
                f"operator metavariable {t.name} used outside bin_oper"
            )
        return clone(v)
    if k == "MBinOp":
        op = binding.get(t.name)
        if op is None:
            raise UnboundMetavariable(t.name)
        if not isinstance(op, str):
            raise InstantiationError(f"{t.name} is not bound to an operator")
        l = _inst_node(t.children[0], binding, ctx)
        r = _inst_node(t.children[1], binding, ctx)
        return make("BinOp", l, r, op=op)
    if k == "MSubs":
        inner = instantiate(t.children[0], binding, ctx)
        ef = _inst_node(t.children[1], binding, ctx)
        et = _inst_node(t.children[2], binding, ctx)
        return subs(inner, ef, et)
    if k in ("MetaIfThen", "MetaIfThenElse"):
        if ctx is None:
            raise InstantiationError("template conditions need an evaluation context")
        verdict = ctx.eval_condition(t.children[0], binding)
        name = getattr(verdict, "name", str(verdict))
        if name == "UNKNOWN":
            raise InstantiationError(
                "condition inside generate section is undecided"
            )
        if k == "MetaIfThen":
            if name == "TRUE":
                return instantiate(tuple(t.children[1:]), binding, ctx)
            return ()
        branch = t.children[1] if name == "TRUE" else t.children[2]
        v = _inst_node(branch, binding, ctx)
        return v
    if not t.children:
        return clone(t)
    parts = [_inst_node(c, binding, ctx) for c in t.children]
    if k in ("Block", "TranslationUnit"):
        flat: list[Node] = []
        for p in parts:
            if isinstance(p, tuple):
                flat.extend(p)
            else:
                flat.append(p)
        return make(k, *flat, name=t.name, op=t.op, value=t.value,
                    ctype=t.ctype, ndims=t.ndims)
    fixed = []
    for p in parts:
        if isinstance(p, tuple):
            if len(p) != 1:
                raise InstantiationError(
                    "statement sequence spliced into a single-node slot"
                )
            p = p[0]
        fixed.append(p)
    return make(k, *fixed, name=t.name, op=t.op, value=t.value,
                ctype=t.ctype, ndims=t.ndims)
