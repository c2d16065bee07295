"""Tokenizer and recursive-descent parser for the C subset.

parse_c handles ordinary programs.  Rule templates reuse the same grammar with
meta=True, which additionally accepts metavariable calls in binding positions
(assignment left-hand sides, for-loop inits) and the template-only constructs
if_then / if_then_else / gen_list, parsed into Meta* nodes that only the rule
compiler consumes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cast import AnnotatedAst, Node, make, renumber
from .errors import PragmaError, SourceSyntaxError, UnsupportedFeature

TYPE_KEYWORDS = ("int", "float", "double")
UNSUPPORTED_KEYWORDS = frozenset(
    {
        "goto", "switch", "do", "return", "break", "continue", "struct",
        "union", "enum", "char", "long", "short", "unsigned", "signed",
        "static", "const", "extern", "typedef", "sizeof", "case", "default",
    }
)
META_TAGS = frozenset({"cexpr", "cstmt", "cstmts", "bin_oper", "subs"})
META_CONSTRUCTS = frozenset({"if_then", "if_then_else", "gen_list"})

_OPS = [
    "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "++", "--",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "(", ")", "[", "]", "{",
    "}", ";", ",", ":", "@",
]
_TOKEN_RE = re.compile(
    r"""
    (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<op>%s)
    """
    % "|".join(re.escape(o) for o in _OPS),
    re.VERBOSE,
)

_BINOP_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, ">": 4, "<=": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | float | op | pragma
    text: str
    line: int
    col: int


def _strip_comments(source: str) -> str:
    out = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
        elif ch == "/" and i + 1 < n and source[i + 1] == "*":
            i += 2
            while i + 1 < n and not (source[i] == "*" and source[i + 1] == "/"):
                out.append("\n" if source[i] == "\n" else " ")
                i += 1
            i += 2
            out.append("  ")
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(source: str, name: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    for lineno, line in enumerate(_strip_comments(source).split("\n"), start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            if stripped.startswith("#pragma"):
                toks.append(
                    Token("pragma", stripped[len("#pragma"):].strip(), lineno, 1)
                )
                continue
            raise UnsupportedFeature(
                f"{name}:{lineno}: preprocessor directives other than "
                f"#pragma are not supported"
            )
        pos = 0
        while pos < len(line):
            ch = line[pos]
            if ch in " \t\r":
                pos += 1
                continue
            m = _TOKEN_RE.match(line, pos)
            if not m:
                raise SourceSyntaxError(
                    f"unexpected character {ch!r}", lineno, pos + 1
                )
            kind = m.lastgroup
            toks.append(Token(kind, m.group(), lineno, pos + 1))
            pos = m.end()
    return toks


class Parser:
    """Token cursor with the full grammar; also usable as a bare
    expression cursor (the pragma parser does this)."""

    def __init__(self, tokens: list[Token], pos: int = 0, meta: bool = False):
        self.toks = tokens
        self.pos = pos
        self.meta = meta
        # identity-keyed pragma attachments collected during statement parsing
        self.attached: list[tuple[Node, list]] = []

    # -- cursor primitives ------------------------------------------------

    def at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def peek(self, ahead: int = 0) -> Token | None:
        i = self.pos + ahead
        return self.toks[i] if i < len(self.toks) else None

    def peek_ident(self) -> str | None:
        t = self.peek()
        return t.text if t and t.kind == "ident" else None

    def take(self) -> Token:
        if self.at_end():
            last = self.toks[-1] if self.toks else None
            raise SourceSyntaxError(
                "unexpected end of input",
                last.line if last else 0,
                last.col if last else 0,
            )
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.take()
        if t.text != text or t.kind == "pragma":
            raise SourceSyntaxError(f"expected {text!r}, got {t.text!r}", t.line, t.col)
        return t

    def expect_end(self) -> None:
        if not self.at_end():
            t = self.peek()
            raise PragmaError(f"trailing tokens starting at {t.text!r}")

    def _err(self, msg: str) -> SourceSyntaxError:
        t = self.peek() or (self.toks[-1] if self.toks else None)
        return SourceSyntaxError(msg, t.line if t else 0, t.col if t else 0)

    # -- expressions -------------------------------------------------------

    def parse_expr(self, min_prec: int = 1) -> Node:
        left = self.parse_unary()
        while True:
            t = self.peek()
            if t is None or t.kind != "op":
                return left
            prec = _BINOP_PREC.get(t.text)
            if prec is None or prec < min_prec:
                return left
            self.take()
            right = self.parse_expr(prec + 1)
            left = make("BinOp", left, right, op=t.text, line=t.line, col=t.col)

    def parse_unary(self) -> Node:
        t = self.peek()
        if t and t.kind == "op" and t.text in ("-", "!", "++", "--"):
            self.take()
            operand = self.parse_unary()
            return make("UnaryOp", operand, op=t.text, line=t.line, col=t.col)
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        node = self.parse_primary()
        while True:
            t = self.peek()
            if t is None or t.kind != "op":
                return node
            if t.text == "[":
                self.take()
                idx = self.parse_expr()
                self.expect("]")
                node = make("Index", node, idx, line=t.line, col=t.col)
            elif t.text == "(":
                if node.kind != "Var":
                    raise UnsupportedFeature(
                        f"line {t.line}: calls through non-identifier expressions"
                    )
                self.take()
                args = []
                if self.peek() and self.peek().text != ")":
                    args.append(self.parse_expr())
                    while self.peek() and self.peek().text == ",":
                        self.take()
                        args.append(self.parse_expr())
                self.expect(")")
                node = make("Call", *args, name=node.name, line=node.line, col=node.col)
            elif t.text in ("++", "--"):
                self.take()
                node = make("UnaryOp", node, op="p" + t.text, line=t.line, col=t.col)
            else:
                return node

    def parse_primary(self) -> Node:
        t = self.take()
        if t.kind == "int":
            return make("IntLit", value=int(t.text), line=t.line, col=t.col)
        if t.kind == "float":
            return make("FloatLit", value=float(t.text), line=t.line, col=t.col)
        if t.kind == "ident":
            if t.text in UNSUPPORTED_KEYWORDS:
                raise UnsupportedFeature(f"line {t.line}: {t.text!r} is not supported")
            return make("Var", name=t.text, line=t.line, col=t.col)
        if t.text == "(":
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise SourceSyntaxError(f"unexpected token {t.text!r}", t.line, t.col)

    def parse_assign_expr(self) -> Node:
        """Expression or (augmented) assignment, for write(...) queries and
        for-loop step positions."""
        lhs = self.parse_expr()
        t = self.peek()
        if t and t.kind == "op" and t.text == "=":
            self.take()
            self._check_lvalue(lhs, t)
            return make("Assign", lhs, self.parse_expr(), line=t.line, col=t.col)
        if t and t.kind == "op" and t.text in ("+=", "-=", "*=", "/="):
            self.take()
            self._check_lvalue(lhs, t)
            return make(
                "AugAssign", lhs, self.parse_expr(), op=t.text, line=t.line, col=t.col
            )
        return lhs

    def _check_lvalue(self, lhs: Node, t: Token) -> None:
        if lhs.kind in ("Var", "Index"):
            return
        if self.meta and lhs.kind == "Call" and lhs.name in META_TAGS:
            return
        raise SourceSyntaxError("invalid assignment target", t.line, t.col)

    # -- pragma helper grammars ---------------------------------------------

    def parse_op_arg(self) -> str:
        t = self.take()
        if t.kind == "ident" or (t.kind == "op" and t.text in _BINOP_PREC):
            return t.text
        raise PragmaError(f"expected operator, got {t.text!r}")

    def parse_offset_list(self) -> list[int]:
        self.expect("{")
        out = [self._signed_int()]
        while self.peek() and self.peek().text == ",":
            self.take()
            out.append(self._signed_int())
        self.expect("}")
        return out

    def _signed_int(self) -> int:
        t = self.take()
        sign = 1
        if t.kind == "op" and t.text in ("+", "-"):
            sign = -1 if t.text == "-" else 1
            t = self.take()
        if t.kind != "int":
            raise PragmaError(f"expected integer offset, got {t.text!r}")
        return sign * int(t.text)

    def parse_location_set(self) -> list[Node]:
        self.expect("{")
        out = [self._location()]
        while self.peek() and self.peek().text == ",":
            self.take()
            out.append(self._location())
        self.expect("}")
        return out

    def _location(self) -> Node:
        e = self.parse_expr()
        probe = e
        while probe.kind == "Index":
            probe = probe.children[0]
        if probe.kind != "Var":
            raise PragmaError("locations must be variables or array cells")
        return e

    # -- statements ----------------------------------------------------------

    def _take_pending(self) -> list[Token]:
        """Collect pragma tokens immediately ahead.  The caller holds them
        while the next statement is parsed so pragmas scope to their own
        nesting level."""
        out: list[Token] = []
        while not self.at_end() and self.peek().kind == "pragma":
            out.append(self.take())
        return out

    def _attach(self, node: Node, pending: list[Token]) -> Node:
        if pending:
            from .properties import parse_pragma

            props = []
            for tok in pending:
                try:
                    props.append(parse_pragma(tok.text))
                except PragmaError as exc:
                    raise PragmaError(f"line {tok.line}: {exc}") from None
            self.attached.append((node, props))
        return node

    def parse_stmt_with_pragmas(self) -> list[Node]:
        pending = self._take_pending()
        if self.at_end() or (self.peek().text == "}" and self.peek().kind == "op"):
            if pending:
                tok = pending[0]
                raise PragmaError(f"line {tok.line}: pragma has no following statement")
        stmts = self.parse_stmt()
        self._attach(stmts[0], pending)
        return stmts

    def parse_stmt(self) -> list[Node]:
        """Returns one or more statements (a multi-declarator line yields one
        Decl per declarator)."""
        t = self.peek()
        if t is None:
            raise self._err("expected statement")
        if t.kind == "ident":
            if t.text in TYPE_KEYWORDS:
                return self.parse_decl_line()
            if t.text in UNSUPPORTED_KEYWORDS:
                raise UnsupportedFeature(f"line {t.line}: {t.text!r} is not supported")
            if t.text == "for":
                return [self.parse_for()]
            if t.text == "while":
                return [self.parse_while()]
            if t.text == "if":
                return [self.parse_if()]
            if t.text == "else":
                raise SourceSyntaxError("unmatched else", t.line, t.col)
            if self.meta and t.text in META_CONSTRUCTS:
                return [self.parse_meta_construct()]
        if t.text == "{":
            return [self.parse_block()]
        stmt = self.parse_simple_stmt()
        self.expect(";")
        return [stmt]

    def parse_simple_stmt(self) -> Node:
        node = self.parse_assign_expr()
        if node.kind in ("Assign", "AugAssign"):
            return node
        return make("ExprStmt", node, line=node.line, col=node.col)

    def parse_decl_line(self) -> list[Node]:
        t = self.take()
        ctype = t.text
        decls = [self.parse_declarator(ctype)]
        while self.peek() and self.peek().text == ",":
            self.take()
            decls.append(self.parse_declarator(ctype))
        self.expect(";")
        return decls

    def parse_declarator(self, ctype: str) -> Node:
        t = self.take()
        if t.kind != "ident":
            if t.text == "*":
                raise UnsupportedFeature(f"line {t.line}: pointers are not supported")
            raise SourceSyntaxError("expected identifier", t.line, t.col)
        dims: list[Node] = []
        while self.peek() and self.peek().text == "[":
            self.take()
            dims.append(self.parse_expr())
            self.expect("]")
        if len(dims) > 2:
            raise UnsupportedFeature(
                f"line {t.line}: arrays of rank > 2 are not supported"
            )
        children = list(dims)
        if self.peek() and self.peek().text == "=":
            eq = self.take()
            if self.peek() and self.peek().text == "{":
                raise UnsupportedFeature(
                    f"line {eq.line}: initializer lists are not supported"
                )
            children.append(self.parse_expr())
        return make(
            "Decl", *children, name=t.text, ctype=ctype, ndims=len(dims),
            line=t.line, col=t.col,
        )

    def parse_for(self) -> Node:
        kw = self.expect("for")
        self.expect("(")
        t = self.peek()
        if t and t.kind == "op" and t.text in (";", ")"):
            raise UnsupportedFeature(
                f"line {kw.line}: for loops must have init, condition and step"
            )
        if t and t.kind == "ident" and t.text in TYPE_KEYWORDS:
            self.take()
            init = self.parse_declarator(t.text)
            if self.peek() and self.peek().text == ",":
                raise UnsupportedFeature(
                    f"line {t.line}: multiple declarators in a for initializer"
                )
        else:
            init = self.parse_simple_stmt()
        self.expect(";")
        if self.peek() and self.peek().text == ";":
            raise UnsupportedFeature(
                f"line {kw.line}: for loops must have init, condition and step"
            )
        cond = self.parse_expr()
        self.expect(";")
        if self.peek() and self.peek().text == ")":
            raise UnsupportedFeature(
                f"line {kw.line}: for loops must have init, condition and step"
            )
        step = self.parse_assign_expr()
        self.expect(")")
        body = self.parse_body()
        return make("For", init, cond, step, body, line=kw.line, col=kw.col)

    def parse_while(self) -> Node:
        kw = self.expect("while")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        return make("While", cond, self.parse_body(), line=kw.line, col=kw.col)

    def parse_if(self) -> Node:
        kw = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_body()
        if self.peek() and self.peek().kind == "ident" and self.peek().text == "else":
            self.take()
            return make("If", cond, then, self.parse_body(), line=kw.line, col=kw.col)
        return make("If", cond, then, line=kw.line, col=kw.col)

    def parse_body(self) -> Node:
        """A loop or branch body: one statement, possibly preceded by pragmas."""
        stmts = self.parse_stmt_with_pragmas()
        if len(stmts) != 1:
            raise SourceSyntaxError(
                "multi-declarator line cannot be a loop body",
                stmts[0].line, stmts[0].col,
            )
        return stmts[0]

    def parse_block(self) -> Node:
        brace = self.expect("{")
        children: list[Node] = []
        while True:
            pending = self._take_pending()
            t = self.peek()
            if t is None:
                raise SourceSyntaxError("unterminated block", brace.line, brace.col)
            if t.text == "}" and t.kind == "op":
                if pending:
                    tok = pending[0]
                    raise PragmaError(
                        f"line {tok.line}: pragma has no following statement"
                    )
                self.take()
                return make("Block", *children, line=brace.line, col=brace.col)
            stmts = self.parse_stmt()
            self._attach(stmts[0], pending)
            children.extend(stmts)

    # -- template-only constructs ---------------------------------------------

    def parse_meta_construct(self) -> Node:
        head = self.take()
        self.expect(":")
        self.expect("{")
        cond = self.parse_expr()
        self.expect(";")
        if head.text == "gen_list":
            raise SourceSyntaxError(
                "gen_list is only allowed at the top of a generate section",
                head.line, head.col,
            )
        branches: list[Node] = []
        while self.peek() and self.peek().text != "}":
            stmts = self.parse_stmt()
            branches.extend(stmts)
        self.expect("}")
        kind = "MetaIfThen" if head.text == "if_then" else "MetaIfThenElse"
        if kind == "MetaIfThenElse" and len(branches) != 2:
            raise SourceSyntaxError(
                "if_then_else expects exactly two branch statements",
                head.line, head.col,
            )
        return make(kind, cond, *branches, line=head.line, col=head.col)

    # -- top level -------------------------------------------------------------

    def parse_translation_unit(self) -> Node:
        items: list[Node] = []
        while True:
            pending = self._take_pending()
            if self.at_end():
                if pending:
                    tok = pending[0]
                    raise PragmaError(
                        f"line {tok.line}: pragma has no following statement"
                    )
                break
            if self._at_funcdef():
                fn = self.parse_funcdef()
                self._attach(fn, pending)
                items.append(fn)
            else:
                stmts = self.parse_stmt()
                self._attach(stmts[0], pending)
                items.extend(stmts)
        return make("TranslationUnit", *items)

    def _at_funcdef(self) -> bool:
        t = self.peek()
        if not (t and t.kind == "ident" and t.text in TYPE_KEYWORDS + ("void",)):
            return False
        t1, t2 = self.peek(1), self.peek(2)
        return bool(t1 and t1.kind == "ident" and t2 and t2.text == "(")

    def parse_funcdef(self) -> Node:
        rtype = self.take().text
        name = self.take()
        self.expect("(")
        params: list[Node] = []
        if self.peek() and self.peek().text != ")":
            if self.peek().kind == "ident" and self.peek().text == "void":
                self.take()
            else:
                params.append(self._parse_param())
                while self.peek() and self.peek().text == ",":
                    self.take()
                    params.append(self._parse_param())
        self.expect(")")
        body = self.parse_block()
        return make(
            "FuncDef", *params, body, name=name.text, ctype=rtype,
            line=name.line, col=name.col,
        )

    def _parse_param(self) -> Node:
        t = self.take()
        if t.kind != "ident" or t.text not in TYPE_KEYWORDS:
            raise SourceSyntaxError("expected parameter type", t.line, t.col)
        ctype = t.text
        name = self.take()
        if name.kind != "ident":
            raise SourceSyntaxError("expected parameter name", name.line, name.col)
        dims: list[Node] = []
        while self.peek() and self.peek().text == "[":
            br = self.take()
            if self.peek() and self.peek().text == "]":
                raise UnsupportedFeature(
                    f"line {br.line}: array parameters need an explicit size"
                )
            dims.append(self.parse_expr())
            self.expect("]")
        if len(dims) > 2:
            raise UnsupportedFeature(
                f"line {t.line}: arrays of rank > 2 are not supported"
            )
        return make(
            "Decl", *dims, name=name.text, ctype=ctype, ndims=len(dims),
            line=name.line, col=name.col,
        )


def _validate(ast: AnnotatedAst) -> None:
    arrays = ast.declared_arrays()
    scalars = {
        n for n, t in ast.declared_vars().items() if n not in arrays
    }
    from .cast import iter_nodes

    inner_bases = {
        id(n.children[0])
        for n in iter_nodes(ast.root)
        if n.kind == "Index" and n.children[0].kind == "Index"
    }
    for node in iter_nodes(ast.root):
        if node.kind != "Index" or id(node) in inner_bases:
            continue
        depth = 1
        base = node.children[0]
        while base.kind == "Index":
            depth += 1
            base = base.children[0]
        if base.kind != "Var":
            raise SourceSyntaxError(
                "array access through a non-identifier base", node.line, node.col
            )
        if depth > 2:
            raise UnsupportedFeature(
                f"line {node.line}: arrays of rank > 2 are not supported"
            )
        if base.name in scalars:
            raise SourceSyntaxError(
                f"{base.name} is declared scalar but indexed", node.line, node.col
            )
        if base.name in arrays and arrays[base.name] != depth:
            raise SourceSyntaxError(
                f"{base.name} has rank {arrays[base.name]}, accessed with "
                f"{depth} indices", node.line, node.col,
            )


def parse_c(source: str, source_name: str = "<input>") -> AnnotatedAst:
    """Parse C-subset source into an annotated AST.

    Pragma blocks attach to the immediately following statement.
    """
    tokens = tokenize(source, source_name)
    p = Parser(tokens)
    root = p.parse_translation_unit()
    root, mapping = renumber(root)
    properties: dict[int, list] = {}
    for node, props in p.attached:
        nid = mapping[id(node)].nid
        properties.setdefault(nid, []).extend(props)
    ast = AnnotatedAst(root, properties, source_name)
    _validate(ast)
    return ast


def parse_expression(text: str) -> Node:
    p = Parser(tokenize(text))
    e = p.parse_expr()
    if not p.at_end():
        t = p.peek()
        raise SourceSyntaxError(f"trailing tokens after expression: {t.text!r}",
                                t.line, t.col)
    return e


# The pragma grammar shares this cursor.
ExprCursor = Parser
