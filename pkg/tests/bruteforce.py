"""Exhaustive reference enumerator for pattern bindings.

Deliberately naive: it enumerates every sequence split and every child
pairing, collects (name, value) observations as flat lists, and only at
the end checks that repeated metavariables saw equal values.  The engine
threads bindings and prunes early; agreement between the two is what the
completeness tests assert.
"""

from stml.cast import EXPR_KINDS, Node, STMT_KINDS


def canon(value):
    """Hashable canonical form of a binding value."""
    if isinstance(value, str):
        return value
    if isinstance(value, tuple):
        return tuple(canon(v) for v in value)
    return (
        value.kind, value.name, value.op, value.ctype, value.ndims,
        value.value, tuple(canon(c) for c in value.children),
    )


def canon_binding(binding: dict) -> frozenset:
    return frozenset((k, canon(v)) for k, v in binding.items())


def _node_obs(pat: Node, node: Node):
    """Yield flat observation lists for one pattern node vs one tree node."""
    if pat.kind == "MVar":
        if pat.op == "expr" and node.kind in EXPR_KINDS:
            yield [(pat.name, node)]
        elif pat.op == "stmt" and node.kind in STMT_KINDS:
            yield [(pat.name, node)]
        return
    if pat.kind == "MBinOp":
        if node.kind != "BinOp":
            return
        for left in _node_obs(pat.children[0], node.children[0]):
            for right in _node_obs(pat.children[1], node.children[1]):
                yield [(pat.name, node.op)] + left + right
        return
    if pat.kind == "Block" and node.kind != "Block":
        if node.kind in STMT_KINDS:
            yield from _seq_obs(pat.children, (node,))
        return
    for field in ("kind", "name", "op", "ctype", "ndims", "value"):
        if getattr(pat, field) != getattr(node, field):
            return
    if pat.kind in ("Block", "TranslationUnit"):
        yield from _seq_obs(pat.children, node.children)
        return
    yield from _prod(pat.children, node.children)


def _prod(pats, nodes):
    if len(pats) != len(nodes):
        return
    if not pats:
        yield []
        return
    for head in _node_obs(pats[0], nodes[0]):
        for tail in _prod(pats[1:], nodes[1:]):
            yield head + tail


def _seq_obs(pats, stmts):
    pats = tuple(pats)
    stmts = tuple(stmts)
    if not pats:
        if not stmts:
            yield []
        return
    head = pats[0]
    if head.kind == "MVar" and head.op == "stmts":
        for k in range(len(stmts) + 1):
            for tail in _seq_obs(pats[1:], stmts[k:]):
                yield [(head.name, stmts[:k])] + tail
        return
    if not stmts:
        return
    for first in _node_obs(head, stmts[0]):
        for tail in _seq_obs(pats[1:], stmts[1:]):
            yield first + tail


def _to_binding(observations):
    """None when the same metavariable saw two different values."""
    binding = {}
    for name, value in observations:
        c = canon(value)
        if name in binding:
            if canon(binding[name]) != c:
                return None
        else:
            binding[name] = value
    return binding


def enumerate_bindings(pattern, target) -> list:
    """All consistent bindings of a compiled pattern (set semantics)."""
    if isinstance(pattern, (list, tuple)):
        seq = target.children if isinstance(target, Node) else tuple(target)
        raw = _seq_obs(tuple(pattern), tuple(seq))
    else:
        raw = _node_obs(pattern, target)
    seen = set()
    out = []
    for obs in raw:
        binding = _to_binding(obs)
        if binding is None:
            continue
        key = canon_binding(binding)
        if key not in seen:
            seen.add(key)
            out.append(binding)
    return out
