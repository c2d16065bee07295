"""Parser / pretty-printer round trips and pragma attachment."""

import pytest
from hypothesis import given, settings, strategies as st

from stml.cast import struct_eq
from stml.errors import SourceSyntaxError
from stml.parser import parse_c, parse_expression
from stml.printer import print_c, print_expr

from conftest import EVAL_PROGRAMS, STEPS, read


@pytest.mark.parametrize("path", STEPS + EVAL_PROGRAMS,
                         ids=lambda p: p.name)
def test_corpus_round_trip(path):
    ast = parse_c(read(path), str(path))
    again = parse_c(print_c(ast))
    assert struct_eq(ast.root, again.root)


@pytest.mark.parametrize("path", STEPS + EVAL_PROGRAMS,
                         ids=lambda p: p.name)
def test_print_is_fixpoint(path):
    # printing is canonical: print(parse(print(x))) == print(x)
    text = print_c(parse_c(read(path)))
    assert print_c(parse_c(text)) == text


def test_decl_grouping():
    ast = parse_c("float a, b, c[N];\n")
    decls = [n for n in ast.root.children if n.kind == "Decl"]
    assert [d.name for d in decls] == ["a", "b", "c"]
    assert print_c(ast) == "float a, b, c[N];\n"


def test_precedence_round_trip():
    for text in ["(a + b) * c", "a + b * c", "a - (b - c)", "-a * b",
                 "a % (b + 1)", "(a + b) / (c + d)"]:
        node = parse_expression(text)
        assert struct_eq(node, parse_expression(print_expr(node)))


def test_unbraced_bodies_match_braced():
    braced = parse_c("for (int i = 0; i < N; i++) {\n    x = x + 1;\n}\n")
    bare = parse_c("for (int i = 0; i < N; i++)\n    x = x + 1;\n")
    # bodies differ(Block vs bare stmt) but both parse and print cleanly
    assert print_c(parse_c(print_c(bare))) == print_c(bare)
    assert braced.root.children[0].kind == bare.root.children[0].kind == "For"


def test_pragma_attaches_to_next_statement():
    ast = parse_c(
        "float v[N];\n"
        "#pragma stml pure F\n"
        "for (int i = 0; i < N; i++) {\n"
        "    v[i] = 0;\n"
        "}\n"
    )
    loop = next(n for n in ast.root.children if n.kind == "For")
    props = ast.properties.get(loop.nid, [])
    assert [p.keyword for p in props] == ["pure"]


def test_pragma_inside_unbraced_loop_body():
    ast = parse_c(
        "#pragma polca map F v w\n"
        "for (int i = 0; i < N; i++)\n"
        "#pragma polca def F\n"
        "    w[i] = v[i];\n"
    )
    loop = ast.root.children[0]
    body_prop_nodes = [nid for nid in ast.properties if nid != loop.nid]
    assert len(body_prop_nodes) == 1


def test_pragma_lines_survive_round_trip():
    source = (
        "#pragma polca map F v w\n"
        "#pragma stml pure F\n"
        "for (int i = 0; i < N; i++) {\n"
        "    w[i] = 2 * v[i];\n"
        "}\n"
    )
    printed = print_c(parse_c(source))
    assert "#pragma polca map F v w" in printed
    assert "#pragma stml pure F" in printed
    assert struct_eq(parse_c(printed).root, parse_c(source).root)


@pytest.mark.parametrize("bad", [
    "for (int i = 0; i < N) x = 1;",
    "float a",
    "x = ;",
    "if (a > b { x = 1; }",
    "x = a +* b;",
])
def test_syntax_errors(bad):
    with pytest.raises(SourceSyntaxError):
        parse_c(bad)


# -- generated programs ------------------------------------------------------

_names = st.sampled_from(["a", "b", "x", "y", "s"])
_arrays = st.sampled_from(["u", "v", "w"])


def _exprs(depth):
    leaf = st.one_of(
        _names.map(lambda n: n),
        st.integers(0, 9).map(str),
        _arrays.map(lambda a: f"{a}[i]"),
    )
    if depth == 0:
        return leaf
    sub = _exprs(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(sub, st.sampled_from("+-*"), sub).map(
            lambda t: f"({t[0]} {t[1]} {t[2]})"
        ),
        sub.map(lambda e: f"(-{e})"),
    )


_stmt = st.one_of(
    st.tuples(_names, _exprs(2)).map(lambda t: f"{t[0]} = {t[1]};"),
    st.tuples(_arrays, _exprs(2)).map(lambda t: f"{t[0]}[i] = {t[1]};"),
    st.tuples(_names, _exprs(1)).map(lambda t: f"{t[0]} += {t[1]};"),
)


@st.composite
def _programs(draw):
    body = draw(st.lists(_stmt, min_size=1, max_size=4))
    stmts = ["int u[N], v[N], w[N];", "int a, b, x, y, s;"]
    if draw(st.booleans()):
        inner = "\n    ".join(body)
        stmts.append(
            f"for (int i = 0; i < N; i++) {{\n    {inner}\n}}"
        )
    else:
        stmts.extend(body)
    return "\n".join(stmts) + "\n"


@given(_programs())
@settings(max_examples=60, deadline=None)
def test_generated_round_trip(source):
    ast = parse_c(source)
    text = print_c(ast)
    assert struct_eq(ast.root, parse_c(text).root)
    assert print_c(parse_c(text)) == text
