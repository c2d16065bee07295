"""Pretty-printer for the C subset and unified diffs.

Output is canonical: one statement per line, four-space indent, pragmas
re-emitted on their own lines immediately above the statement they annotate.
Adjacent declarations of the same base type collapse back into one line so a
parse/print cycle keeps multi-declarator lines stable.
"""

from __future__ import annotations

import difflib

from .cast import AnnotatedAst, Node

_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, ">": 4, "<=": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7


def _expr(node: Node, parent_prec: int = 0) -> str:
    k = node.kind
    if k == "IntLit":
        return str(node.value)
    if k == "FloatLit":
        return repr(node.value)
    if k == "Var":
        return node.name
    if k == "Call":
        args = ", ".join(_expr(a) for a in node.children)
        return f"{node.name}({args})"
    if k == "Index":
        base = _expr(node.children[0], _UNARY_PREC + 1)
        return f"{base}[{_expr(node.children[1])}]"
    if k == "UnaryOp":
        inner = _expr(node.children[0], _UNARY_PREC)
        if node.op.startswith("p"):
            return f"{inner}{node.op[1:]}"
        if inner.startswith(node.op[0]):
            inner = f"({inner})"
        return f"{node.op}{inner}"
    if k == "BinOp":
        prec = _PREC[node.op]
        lhs = _expr(node.children[0], prec)
        rhs = _expr(node.children[1], prec + 1)
        text = f"{lhs} {node.op} {rhs}"
        if prec < parent_prec:
            return f"({text})"
        return text
    if k in ("Assign", "AugAssign"):
        op = "=" if k == "Assign" else node.op
        return f"{_expr(node.children[0])} {op} {_expr(node.children[1])}"
    raise ValueError(f"cannot print {k} as an expression")


def print_expr(node: Node) -> str:
    return _expr(node)


def _declarator(node: Node) -> str:
    ndims = node.ndims or 0
    dims = node.children[:ndims]
    rest = node.children[ndims:]
    text = node.name + "".join(f"[{_expr(d)}]" for d in dims)
    if rest:
        text += f" = {_expr(rest[0])}"
    return text


class _Printer:
    def __init__(self, properties: dict[int, list] | None = None):
        self.properties = properties or {}
        self.lines: list[str] = []

    def emit(self, indent: int, text: str) -> None:
        self.lines.append("    " * indent + text)

    def pragmas(self, node: Node, indent: int) -> None:
        for prop in self.properties.get(node.nid, []):
            self.emit(indent, prop.pragma_line())

    def stmt_seq(self, stmts: tuple[Node, ...], indent: int) -> None:
        i = 0
        while i < len(stmts):
            node = stmts[i]
            if node.kind == "Decl":
                group = [node]
                j = i + 1
                while (
                    j < len(stmts)
                    and stmts[j].kind == "Decl"
                    and stmts[j].ctype == node.ctype
                    and not self.properties.get(stmts[j].nid)
                ):
                    group.append(stmts[j])
                    j += 1
                self.pragmas(node, indent)
                decls = ", ".join(_declarator(d) for d in group)
                self.emit(indent, f"{node.ctype} {decls};")
                i = j
            else:
                self.stmt(node, indent)
                i += 1

    def stmt(self, node: Node, indent: int) -> None:
        self.pragmas(node, indent)
        k = node.kind
        if k == "Decl":
            self.emit(indent, f"{node.ctype} {_declarator(node)};")
        elif k == "ExprStmt":
            self.emit(indent, f"{_expr(node.children[0])};")
        elif k in ("Assign", "AugAssign"):
            self.emit(indent, f"{_expr(node)};")
        elif k == "Block":
            self.emit(indent, "{")
            self.stmt_seq(node.children, indent + 1)
            self.emit(indent, "}")
        elif k == "For":
            init, cond, step, body = node.children
            init_text = (
                f"{init.ctype} {_declarator(init)}"
                if init.kind == "Decl"
                else _expr(init.children[0] if init.kind == "ExprStmt" else init)
            )
            head = f"for ({init_text}; {_expr(cond)}; {_expr(step)})"
            self.head_with_body(head, body, indent)
        elif k == "While":
            cond, body = node.children
            self.head_with_body(f"while ({_expr(cond)})", body, indent)
        elif k == "If":
            cond = node.children[0]
            self.head_with_body(f"if ({_expr(cond)})", node.children[1], indent)
            if len(node.children) == 3:
                self.head_with_body("else", node.children[2], indent)
        elif k == "FuncDef":
            params = ", ".join(
                f"{p.ctype} {_declarator(p)}" for p in node.children[:-1]
            )
            self.emit(indent, f"{node.ctype} {node.name}({params})")
            self.stmt(node.children[-1], indent)
        else:
            raise ValueError(f"cannot print {k} as a statement")

    def head_with_body(self, head: str, body: Node, indent: int) -> None:
        if body.kind == "Block" and not self.properties.get(body.nid):
            self.emit(indent, head + " {")
            self.stmt_seq(body.children, indent + 1)
            self.emit(indent, "}")
        else:
            self.emit(indent, head)
            self.stmt(body, indent + 1)


def print_c(ast: AnnotatedAst) -> str:
    """Render an annotated AST back to source text."""
    p = _Printer(ast.properties)
    p.stmt_seq(ast.root.children, 0)
    return "\n".join(p.lines) + ("\n" if p.lines else "")


def print_node(node: Node | tuple[Node, ...],
               properties: dict[int, list] | None = None) -> str:
    """Render a bare statement, statement sequence, or expression."""
    if isinstance(node, tuple):
        p = _Printer(properties)
        p.stmt_seq(node, 0)
        return "\n".join(p.lines)
    if node.kind in ("TranslationUnit", "Block") and properties is None:
        p = _Printer()
        p.stmt_seq(node.children, 0)
        return "\n".join(p.lines)
    from .cast import EXPR_KINDS

    if node.kind in EXPR_KINDS:
        return _expr(node)
    p = _Printer(properties)
    p.stmt(node, 0)
    return "\n".join(p.lines)


def diff(before, after, fromfile: str = "before", tofile: str = "after") -> str:
    """Unified diff between two programs (AnnotatedAst or source text)."""
    a = before if isinstance(before, str) else print_c(before)
    b = after if isinstance(after, str) else print_c(after)
    return "".join(
        difflib.unified_diff(
            a.splitlines(keepends=True), b.splitlines(keepends=True),
            fromfile=fromfile, tofile=tofile,
        )
    )
