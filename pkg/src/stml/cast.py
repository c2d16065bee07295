"""AST for the supported C subset.

Nodes are immutable and compared by identity; use struct_eq for structural
comparison.  Node ids are preorder indices assigned by renumber(), so they are
only meaningful relative to one AnnotatedAst snapshot.  Every rewrite builds a
fresh tree and renumbers it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

STMT_KINDS = frozenset(
    {"Decl", "For", "While", "If", "Block", "ExprStmt", "Assign", "AugAssign"}
)
EXPR_KINDS = frozenset(
    {"BinOp", "UnaryOp", "Call", "Index", "Var", "IntLit", "FloatLit"}
)
BLOCK_LIKE = frozenset({"TranslationUnit", "Block"})

ARITH_OPS = frozenset({"+", "-", "*", "/", "%"})


@dataclass(frozen=True, eq=False)
class Node:
    kind: str
    children: tuple["Node", ...] = ()
    name: Optional[str] = None
    op: Optional[str] = None
    value: object = None
    ctype: Optional[str] = None
    ndims: Optional[int] = None
    nid: int = -1
    line: int = 0
    col: int = 0

    @property
    def payload(self) -> str:
        """Kind-specific literal/operator/identifier text."""
        if self.name is not None:
            if self.ctype is not None:
                return f"{self.ctype} {self.name}"
            return self.name
        if self.op is not None:
            return self.op
        if self.value is not None:
            return repr(self.value)
        return ""

    def __repr__(self) -> str:  # pragma: no cover
        return f"Node({self.kind}, {self.payload!r}, nid={self.nid})"


def make(kind: str, *children: Node, **fields) -> Node:
    return Node(kind, tuple(children), **fields)


def iter_nodes(root: Node) -> Iterator[Node]:
    """Preorder traversal."""
    stack = [root]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def renumber(root: Node) -> tuple[Node, dict[int, Node]]:
    """Rebuild the tree with preorder nids.

    Returns the new root and a mapping from id(old node) to its rebuilt
    counterpart, used to transport attached properties across rewrites.
    """
    counter = 0
    mapping: dict[int, Node] = {}

    def rebuild(node: Node) -> Node:
        nonlocal counter
        my_id = counter
        counter += 1
        new_children = tuple(rebuild(c) for c in node.children)
        new = replace(node, nid=my_id, children=new_children)
        mapping[id(node)] = new
        return new

    return rebuild(root), mapping


def clone(node: Node) -> Node:
    """Deep copy with fresh identities (nids reset by the next renumber)."""
    return replace(node, children=tuple(clone(c) for c in node.children))


_PAYLOAD_FIELDS = ("kind", "name", "op", "ctype", "ndims")


def struct_eq(a: Node, b: Node) -> bool:
    if a is b:
        return True
    for f in _PAYLOAD_FIELDS:
        if getattr(a, f) != getattr(b, f):
            return False
    if a.value is not None or b.value is not None:
        if type(a.value) is not type(b.value) or a.value != b.value:
            return False
    if len(a.children) != len(b.children):
        return False
    return all(struct_eq(x, y) for x, y in zip(a.children, b.children))


def _sexpr(node: Node, out: list[str]) -> None:
    out.append("(")
    out.append(node.kind)
    for f in ("name", "op", "ctype"):
        v = getattr(node, f)
        if v is not None:
            out.append(f"{f}={v}")
    if node.ndims is not None:
        out.append(f"ndims={node.ndims}")
    if node.value is not None:
        out.append(f"value={type(node.value).__name__}:{node.value!r}")
    for c in node.children:
        _sexpr(c, out)
    out.append(")")


def node_sexpr(node: Node) -> str:
    out: list[str] = []
    _sexpr(node, out)
    return " ".join(out)


def node_digest(node: Node) -> str:
    return hashlib.sha256(node_sexpr(node).encode()).hexdigest()


class AnnotatedAst:
    """A renumbered tree plus the properties attached to its nodes.

    properties maps nid -> ordered list of Property (see properties module).
    The node_table maps nid -> Node for every node reachable from root.
    """

    def __init__(self, root: Node, properties: Optional[dict[int, list]] = None,
                 source_name: str = "<input>"):
        if root.nid != 0:
            root, _ = renumber(root)
        self.root = root
        self.properties: dict[int, list] = properties or {}
        self.source_name = source_name
        self.node_table: dict[int, Node] = {n.nid: n for n in iter_nodes(root)}
        for nid in self.properties:
            if nid not in self.node_table:
                raise ValueError(f"property attached to unknown node {nid}")

    def node(self, nid: int) -> Node:
        return self.node_table[nid]

    def props(self, nid: int) -> list:
        return self.properties.get(nid, [])

    def digest(self) -> str:
        h = hashlib.sha256(node_sexpr(self.root).encode())
        for nid in sorted(self.properties):
            for p in self.properties[nid]:
                h.update(f"|{nid}:{p.ns}:{p.canonical()}".encode())
        return h.hexdigest()

    def identifiers(self) -> set[str]:
        out = set()
        for n in iter_nodes(self.root):
            if n.name is not None:
                out.add(n.name)
        return out

    def declared_arrays(self) -> dict[str, int]:
        """Declared array names mapped to rank."""
        out = {}
        for n in iter_nodes(self.root):
            if n.kind == "Decl" and (n.ndims or 0) > 0:
                out[n.name] = n.ndims
        return out

    def declared_vars(self) -> dict[str, str]:
        """All declared names mapped to their base C type."""
        return {
            n.name: n.ctype
            for n in iter_nodes(self.root)
            if n.kind == "Decl"
        }


def parent_map(root: Node) -> dict[int, Node]:
    """nid of child -> parent Node."""
    out: dict[int, Node] = {}
    for n in iter_nodes(root):
        for c in n.children:
            out[c.nid] = n
    return out
