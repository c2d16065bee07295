"""STML and POLCA pragma facts.

A Property is one parsed `#pragma stml ...` or `#pragma polca ...` fact.
Canonical rendering is what print_c re-emits, so parsing the canonical text
again must produce an equal Property.

Beyond the published grammar this parser accepts `not <code_prop>` (stml
namespace only) so external tools can supply negative evidence such as
`not pure F`; the negative form refutes the positive fact in predicate
evaluation and triggers the user-preference conflict rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .cast import Node, struct_eq
from .errors import PragmaError

OP_PROPS = frozenset({"commutative", "associative", "distributes_over"})
EXP_PROPS = frozenset({"appears", "pure", "is_identity"})
MEM_ACCESS = frozenset({"reads", "writes", "rw"})
POLCA_HEADS = frozenset({"map", "zipWith", "fold", "scanl", "def", "input", "output"})

PROVENANCES = ("user", "lowered", "external-tool", "rule-assert")


@dataclass(frozen=True, eq=False)
class Property:
    ns: str
    keyword: str
    args: tuple = ()
    offsets: Optional[tuple[int, ...]] = None
    locations: Optional[tuple[Node, ...]] = None
    negated: bool = False
    provenance: str = "user"

    def canonical(self) -> str:
        from .printer import print_expr

        def arg_text(a) -> str:
            return a if isinstance(a, str) else print_expr(a)

        parts: list[str]
        if self.keyword == "iteration_independent":
            parts = ["iteration_independent"]
        elif self.keyword == "distributes_over":
            parts = [arg_text(self.args[0]), "distributes_over", arg_text(self.args[1])]
        elif self.keyword in ("commutative", "associative"):
            parts = [self.keyword, arg_text(self.args[0])]
        elif self.keyword == "write":
            locs = ",".join(arg_text(l) for l in self.locations or ())
            parts = [f"write({arg_text(self.args[0])}) = {{{locs}}}"]
        elif self.keyword in MEM_ACCESS and self.offsets is not None:
            offs = ",".join(str(k) for k in self.offsets)
            parts = [self.keyword, arg_text(self.args[0]), "in", f"{{{offs}}}"]
        elif self.keyword == "output" and self.ns == "stml":
            parts = [f"output({arg_text(self.args[0])})"]
        else:
            parts = [self.keyword] + [arg_text(a) for a in self.args]
        text = " ".join(parts)
        return f"not {text}" if self.negated else text

    def pragma_line(self) -> str:
        return f"#pragma {self.ns} {self.canonical()}"

    def same_fact(self, other: "Property") -> bool:
        return (
            self.ns == other.ns
            and self.keyword == other.keyword
            and self.negated == other.negated
            and self.offsets == other.offsets
            and _args_eq(self.args, other.args)
            and _args_eq(self.locations or (), other.locations or ())
        )

    def subject(self) -> tuple:
        """Identity key for contradiction detection.

        Facts sharing a subject describe the same single-valued claim; a
        differing remainder is a contradiction.  Multi-valued keywords
        (same_length, the POLCA skeletons, operator algebra) only conflict
        through explicit negation, so their subject includes all arguments.
        """
        from .printer import print_expr

        def t(a):
            return a if isinstance(a, str) else print_expr(a)

        if self.ns == "polca":
            return ("polca", self.keyword) + tuple(t(a) for a in self.args)
        if self.keyword in MEM_ACCESS:
            return (self.keyword, t(self.args[0]))
        if self.keyword == "iteration_space":
            return ("iteration_space",)
        if self.keyword == "write":
            return ("write", t(self.args[0]))
        if self.keyword == "same_length":
            return ("same_length",) + tuple(sorted(t(a) for a in self.args))
        return (self.keyword,) + tuple(t(a) for a in self.args)

    def conflicts_with(self, other: "Property") -> bool:
        if self.subject() != other.subject():
            return False
        if self.negated != other.negated:
            return True
        if self.keyword in MEM_ACCESS and self.offsets != other.offsets:
            return True
        if self.keyword == "iteration_space" and not _args_eq(self.args, other.args):
            return True
        if self.keyword == "write" and not _args_eq(
            self.locations or (), other.locations or ()
        ):
            return True
        return False

    def with_provenance(self, provenance: str) -> "Property":
        return replace(self, provenance=provenance)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Property({self.pragma_line()!r}, {self.provenance})"


def _args_eq(a: tuple, b: tuple) -> bool:
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if isinstance(x, str) or isinstance(y, str):
            if x != y:
                return False
        elif not struct_eq(x, y):
            return False
    return True


def parse_pragma(text: str, provenance: str = "user") -> Property:
    """Parse the part after `#pragma `, e.g. `stml reads v in {0}`."""
    stripped = text.strip()
    ns, _, rest = stripped.partition(" ")
    rest = rest.strip()
    if ns == "stml":
        return parse_stml(rest, provenance)
    if ns == "polca":
        return parse_polca(rest, provenance)
    raise PragmaError(f"unknown pragma namespace {ns!r}")


def parse_polca(text: str, provenance: str = "user") -> Property:
    from .parser import tokenize, ExprCursor

    toks = tokenize(text, "<pragma>")
    if not toks or toks[0].kind != "ident":
        raise PragmaError(f"malformed polca pragma {text!r}")
    head = toks[0].text
    if head not in POLCA_HEADS:
        raise PragmaError(f"unknown polca keyword {head!r}")
    cur = ExprCursor(toks, 1)
    args = []
    while not cur.at_end():
        args.append(cur.parse_expr())
    return Property("polca", head, tuple(args), provenance=provenance)


def parse_stml(text: str, provenance: str = "user") -> Property:
    from .parser import tokenize, ExprCursor

    toks = tokenize(text, "<pragma>")
    if not toks:
        raise PragmaError("empty stml pragma")

    negated = False
    if toks[0].kind == "ident" and toks[0].text == "not":
        negated = True
        toks = toks[1:]
        if not toks:
            raise PragmaError("dangling `not` in stml pragma")

    def done(p: Property) -> Property:
        return replace(p, negated=negated, provenance=provenance)

    # Leading-operator form: `* distributes_over +`
    if len(toks) >= 2 and toks[1].kind == "ident" and toks[1].text in OP_PROPS:
        if toks[1].text != "distributes_over":
            raise PragmaError(f"{toks[1].text} takes a single operator")
        if len(toks) != 3:
            raise PragmaError("distributes_over expects `<op> distributes_over <op>`")
        return done(
            Property("stml", "distributes_over", (_op_text(toks[0]), _op_text(toks[2])))
        )

    head = toks[0]
    if head.kind != "ident":
        raise PragmaError(f"malformed stml pragma {text!r}")
    kw = head.text
    cur = ExprCursor(toks, 1)

    if kw == "iteration_independent":
        if not cur.at_end():
            raise PragmaError("iteration_independent takes no arguments")
        return done(Property("stml", "iteration_independent"))
    if kw == "iteration_space":
        lo = cur.parse_expr()
        hi = cur.parse_expr()
        cur.expect_end()
        return done(Property("stml", "iteration_space", (lo, hi)))
    if kw in ("commutative", "associative"):
        op = cur.parse_op_arg()
        cur.expect_end()
        return done(Property("stml", kw, (op,)))
    if kw == "same_length":
        a = cur.parse_expr()
        b = cur.parse_expr()
        cur.expect_end()
        return done(Property("stml", "same_length", (a, b)))
    if kw in EXP_PROPS:
        e = cur.parse_expr()
        cur.expect_end()
        return done(Property("stml", kw, (e,)))
    if kw == "output":
        cur.expect("(")
        e = cur.parse_expr()
        cur.expect(")")
        cur.expect_end()
        return done(Property("stml", "output", (e,)))
    if kw == "write":
        cur.expect("(")
        e = cur.parse_assign_expr()
        cur.expect(")")
        cur.expect("=")
        locs = cur.parse_location_set()
        cur.expect_end()
        return done(Property("stml", "write", (e,), locations=tuple(locs)))
    if kw in MEM_ACCESS:
        e = cur.parse_expr()
        offsets = None
        if not cur.at_end() and cur.peek_ident() == "in":
            cur.take()
            offsets = tuple(sorted(set(cur.parse_offset_list())))
            if not offsets:
                raise PragmaError("empty offset list")
        cur.expect_end()
        return done(Property("stml", kw, (e,), offsets=offsets))
    raise PragmaError(f"unknown stml keyword {kw!r}")


def _op_text(tok) -> str:
    if tok.kind in ("op", "ident"):
        return tok.text
    raise PragmaError(f"expected operator, got {tok.text!r}")
