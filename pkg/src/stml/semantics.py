"""Fact storage, skeleton lowering, access analysis, predicate evaluation.

Predicates are three-valued.  True means proven for every execution of the
matched fragment in its iteration context; False means refuted, possibly
conservatively; Unknown means the analysis cannot decide.  Rules only fire on
all-True conditions, so soundness rests on the True verdicts alone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .cast import (
    AnnotatedAst,
    ARITH_OPS,
    Node,
    STMT_KINDS,
    iter_nodes,
    make,
    struct_eq,
)
from .errors import AnchorError, LoweringError, PredicateArityError
from .printer import print_expr
from .properties import Property, parse_pragma


class Tri(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    def __bool__(self) -> bool:
        return self is Tri.TRUE


def tri(b: bool) -> Tri:
    return Tri.TRUE if b else Tri.FALSE


def tri_all(values: Iterable[Tri]) -> Tri:
    out = Tri.TRUE
    for v in values:
        if v is Tri.FALSE:
            return Tri.FALSE
        if v is Tri.UNKNOWN:
            out = Tri.UNKNOWN
    return out


def tri_not(v: Tri) -> Tri:
    if v is Tri.TRUE:
        return Tri.FALSE
    if v is Tri.FALSE:
        return Tri.TRUE
    return Tri.UNKNOWN


Fragment = Union[Node, tuple]  # a node, or a tuple of statement nodes


# ---------------------------------------------------------------------------
# access analysis


@dataclass(frozen=True)
class MemLocation:
    base: str
    index: tuple[str, ...] = ()  # canonical index texts; () for scalars

    def __str__(self) -> str:
        if not self.index:
            return self.base
        return self.base + "".join(f"[{t}]" for t in self.index)


@dataclass
class AccessSet:
    reads: set[MemLocation] = field(default_factory=set)
    writes: set[MemLocation] = field(default_factory=set)
    # (mode, base, index texts, index nodes) for every array access
    entries: list[tuple[str, str, tuple[str, ...], tuple[Node, ...]]] = field(
        default_factory=list
    )
    unknown: bool = False

    def written_scalars(self) -> set[str]:
        return {w.base for w in self.writes if not w.index}

    def array_bases(self, mode: str) -> set[str]:
        return {e[1] for e in self.entries if e[0] == mode}

    def array_offsets(self, base: str, mode: str, loop_var: str) -> Optional[set[int]]:
        """Literal offsets of 1-D accesses to base relative to loop_var.
        None when some access does not have the loop_var+-k shape."""
        out: set[int] = set()
        for m, b, _texts, nodes in self.entries:
            if m != mode or b != base:
                continue
            if len(nodes) != 1:
                return None
            off = offset_of(nodes[0], loop_var)
            if off is None:
                return None
            out.add(off)
        return out


def offset_of(idx: Node, loop_var: str) -> Optional[int]:
    if idx.kind == "Var":
        return 0 if idx.name == loop_var else None
    if idx.kind == "BinOp" and idx.op in ("+", "-"):
        a, b = idx.children
        if a.kind == "Var" and a.name == loop_var and b.kind == "IntLit":
            return b.value if idx.op == "+" else -b.value
        if idx.op == "+" and b.kind == "Var" and b.name == loop_var and a.kind == "IntLit":
            return a.value
    return None


def _loc_index(idx: Node) -> Node:
    """Index expression as seen by the store: i++ stores at i, ++i at i + 1."""
    if idx.kind == "UnaryOp" and idx.op in ("p++", "p--"):
        return idx.children[0]
    if idx.kind == "UnaryOp" and idx.op in ("++", "--"):
        op = "+" if idx.op == "++" else "-"
        return make("BinOp", idx.children[0], make("IntLit", value=1), op=op)
    return idx


class _Collector:
    def __init__(self) -> None:
        self.acc = AccessSet()

    def location(self, node: Node) -> MemLocation:
        idxs: list[Node] = []
        base = node
        while base.kind == "Index":
            idxs.append(base.children[1])
            base = base.children[0]
        idxs.reverse()
        norm = tuple(_loc_index(i) for i in idxs)
        return MemLocation(base.name, tuple(print_expr(n) for n in norm)), norm

    def touch(self, node: Node, mode: str) -> None:
        if node.kind == "Var":
            loc = MemLocation(node.name)
            (self.acc.writes if mode == "w" else self.acc.reads).add(loc)
            return
        if node.kind == "Index":
            loc, norm = self.location(node)
            (self.acc.writes if mode == "w" else self.acc.reads).add(loc)
            self.acc.entries.append((mode, loc.base, loc.index, norm))
            for idx in _index_chain(node):
                self.read_expr(idx)
            return
        raise PredicateArityError(f"not an lvalue: {node.kind}")

    def read_expr(self, node: Node) -> None:
        k = node.kind
        if k == "Var":
            self.touch(node, "r")
        elif k == "Index":
            self.touch(node, "r")
        elif k == "UnaryOp" and node.op in ("++", "--", "p++", "p--"):
            self.touch(node.children[0], "r")
            self.touch(node.children[0], "w")
        elif k == "Call":
            self.acc.unknown = True
            for a in node.children:
                self.read_expr(a)
        elif k in ("IntLit", "FloatLit"):
            pass
        else:
            for c in node.children:
                self.read_expr(c)

    def stmt(self, node: Node) -> None:
        k = node.kind
        if k == "Assign":
            self.touch(node.children[0], "w")
            self.read_expr(node.children[1])
        elif k == "AugAssign":
            self.touch(node.children[0], "r")
            self.touch(node.children[0], "w")
            self.read_expr(node.children[1])
        elif k == "Decl":
            ndims = node.ndims or 0
            for d in node.children[:ndims]:
                self.read_expr(d)
            rest = node.children[ndims:]
            if not ndims:
                self.acc.writes.add(MemLocation(node.name))
            if rest:
                self.read_expr(rest[0])
        elif k == "ExprStmt":
            self.read_expr(node.children[0])
        elif k in ("Block", "TranslationUnit"):
            for c in node.children:
                self.stmt(c)
        elif k == "For":
            init, cond, step, body = node.children
            self.stmt(init)
            self.read_expr(cond)
            if step.kind in ("Assign", "AugAssign"):
                self.stmt(step)
            else:
                self.read_expr(step)
            self.stmt(body)
        elif k == "While":
            self.read_expr(node.children[0])
            self.stmt(node.children[1])
        elif k == "If":
            self.read_expr(node.children[0])
            for c in node.children[1:]:
                self.stmt(c)
        elif k == "FuncDef":
            self.stmt(node.children[-1])
        else:
            self.read_expr(node)


def _index_chain(node: Node) -> Iterator[Node]:
    base = node
    while base.kind == "Index":
        yield base.children[1]
        base = base.children[0]


def access_set(target, at: Optional[int] = None) -> AccessSet:
    """Read/write locations of a node, statement sequence, or whole program.

    target may be an AnnotatedAst (optionally narrowed to node nid=at), a
    Node, or a tuple/list of statement nodes.
    """
    if isinstance(target, AnnotatedAst):
        node = target.root if at is None else target.node(at)
        items: Iterable[Node] = (node,)
    elif isinstance(target, Node):
        items = (target,)
    else:
        items = tuple(target)
    c = _Collector()
    for n in items:
        if n.kind in STMT_KINDS or n.kind in ("TranslationUnit", "FuncDef"):
            c.stmt(n)
        else:
            c.read_expr(n)
    return c.acc


def _pair_overlap(w: MemLocation, r: MemLocation,
                  written_vars: set[str]) -> Tri:
    """Can these two locations denote the same storage at evaluation time?

    False verdicts must be airtight (they justify True predicate results);
    True verdicts may be conservative.
    """
    if w.base != r.base:
        return Tri.FALSE
    if not w.index and not r.index:
        return Tri.TRUE
    if bool(w.index) != bool(r.index):
        return Tri.TRUE  # whole-object vs cell of the same name
    if len(w.index) != len(r.index):
        return Tri.UNKNOWN
    verdicts = []
    for tw, tr in zip(w.index, r.index):
        verdicts.append(_index_overlap(tw, tr, written_vars))
    agg = tri_all(verdicts)
    if agg is Tri.TRUE:
        return Tri.TRUE  # every component provably equal
    if any(v is Tri.FALSE for v in verdicts):
        return Tri.FALSE  # some component provably differs
    return Tri.UNKNOWN


def _index_overlap(tw: str, tr: str, written_vars: set[str]) -> Tri:
    if tw == tr:
        return Tri.TRUE
    from .parser import parse_expression

    try:
        ew, er = parse_expression(tw), parse_expression(tr)
    except Exception:
        return Tri.UNKNOWN
    if ew.kind == "IntLit" and er.kind == "IntLit":
        return tri(ew.value == er.value)
    for var in _offset_vars(ew) & _offset_vars(er):
        ow, orr = offset_of(ew, var), offset_of(er, var)
        if ow is not None and orr is not None and ow != orr and var not in written_vars:
            return Tri.FALSE
    return Tri.UNKNOWN


def _offset_vars(e: Node) -> set[str]:
    return {n.name for n in iter_nodes(e) if n.kind == "Var"}


# ---------------------------------------------------------------------------
# property store


GLOBAL_KEYWORDS = frozenset(
    {"pure", "is_identity", "distributes_over", "commutative", "associative"}
)


class PropertyStore:
    """Facade over AnnotatedAst.properties with conflict handling.

    User-stated facts outrank lowered and external ones; every contradiction
    produces exactly one warning (a JSON-ready dict).
    """

    def __init__(self, ast: AnnotatedAst, warnings: Optional[list] = None):
        self.ast = ast
        self.warnings = warnings if warnings is not None else []

    def facts(self) -> Iterator[tuple[int, Property]]:
        for nid in sorted(self.ast.properties):
            for p in self.ast.properties[nid]:
                yield nid, p

    def _conflict_scope(self, nid: int, prop: Property):
        if prop.ns == "stml" and prop.keyword in GLOBAL_KEYWORDS:
            yield from self.facts()
        else:
            for p in self.ast.properties.get(nid, []):
                yield nid, p

    def add_fact(self, nid: int, prop: Property) -> bool:
        """Attach a fact; returns False when an existing fact suppressed it."""
        for old_nid, old in list(self._conflict_scope(nid, prop)):
            if old.same_fact(prop):
                return False  # duplicate, nothing to do
            if old.conflicts_with(prop):
                old_rank = 1 if old.provenance == "user" else 0
                new_rank = 1 if prop.provenance == "user" else 0
                if new_rank > old_rank:
                    self.ast.properties[old_nid].remove(old)
                    if not self.ast.properties[old_nid]:
                        del self.ast.properties[old_nid]
                    self.warnings.append(
                        {
                            "warning": "conflicting-fact",
                            "kept": prop.pragma_line(),
                            "kept_provenance": prop.provenance,
                            "dropped": old.pragma_line(),
                            "dropped_provenance": old.provenance,
                            "node": nid,
                        }
                    )
                    break  # fall through to insert
                self.warnings.append(
                    {
                        "warning": "conflicting-fact",
                        "kept": old.pragma_line(),
                        "kept_provenance": old.provenance,
                        "dropped": prop.pragma_line(),
                        "dropped_provenance": prop.provenance,
                        "node": old_nid,
                    }
                )
                return False
        self.ast.properties.setdefault(nid, []).append(prop)
        return True

    def global_tri(self, keyword: str, args: tuple[str, ...],
                   before_nid: Optional[int] = None) -> Tri:
        """Look up a global fact by canonical argument texts."""
        found = Tri.UNKNOWN
        for nid, p in self.facts():
            if p.ns != "stml" or p.keyword != keyword:
                continue
            texts = tuple(
                a if isinstance(a, str) else print_expr(a) for a in p.args
            )
            if texts != args:
                continue
            if keyword == "is_identity" and before_nid is not None and nid > before_nid:
                continue
            if p.negated:
                return Tri.FALSE
            found = Tri.TRUE
        return found

    def facts_at(self, nid: int, keyword: Optional[str] = None) -> list[Property]:
        out = self.ast.properties.get(nid, [])
        if keyword is None:
            return list(out)
        return [p for p in out if p.keyword == keyword]


# ---------------------------------------------------------------------------
# skeleton lowering

_SKELETON_ARITY = {
    "map": 3, "zipWith": 4, "fold": 4, "scanl": 4,
    "def": 1, "input": 1, "output": 1,
}


def _length_of(arr: Node) -> Node:
    from .cast import clone

    return make("Call", clone(arr), name="length")


def _mem(kw: str, arr: Node, offs: tuple[int, ...]) -> Property:
    from .cast import clone

    return Property("stml", kw, (clone(arr),), offsets=offs, provenance="lowered")


def _skeleton_facts(prop: Property) -> list[Property]:
    a = prop.args
    mk = lambda kw, args=(), **kv: Property(
        "stml", kw, tuple(args), provenance="lowered", **kv
    )
    if prop.keyword == "map":
        f, v, w = a
        return [
            _mem("reads", v, (0,)),
            _mem("writes", w, (0,)),
            mk("same_length", (v, w)),
            mk("pure", (f,)),
            mk("iteration_space", (make("IntLit", value=0), _length_of(v))),
            mk("iteration_independent"),
        ]
    if prop.keyword == "zipWith":
        f, v, w, z = a
        return [
            _mem("reads", v, (0,)),
            _mem("reads", w, (0,)),
            _mem("writes", z, (0,)),
            mk("same_length", (v, w)),
            mk("same_length", (v, z)),
            mk("pure", (f,)),
            mk("iteration_space", (make("IntLit", value=0), _length_of(v))),
            mk("iteration_independent"),
        ]
    if prop.keyword == "fold":
        f, ini, v, acc = a
        return [
            _mem("reads", v, (0,)),
            mk("reads", (make("Call", ini, name="output"),)),
            mk("writes", (acc,)),
            mk("pure", (f,)),
            mk("iteration_space", (make("IntLit", value=0), _length_of(v))),
        ]
    if prop.keyword == "scanl":
        f, ini, v, w = a
        return [
            mk("reads", (make("Call", ini, name="output"),)),
            _mem("reads", v, (0,)),
            _mem("reads", w, (0,)),
            _mem("writes", w, (1,)),
            mk("pure", (f,)),
            mk("iteration_space", (make("IntLit", value=0), _length_of(v))),
        ]
    return []  # def / input / output carry no derived facts


def lower_polca(ast: AnnotatedAst, store: Optional[PropertyStore] = None) -> AnnotatedAst:
    """Append the semantic facts implied by skeleton annotations.

    The skeleton pragmas stay in place; derived facts attach to the same
    statement, after whatever is already there.  Idempotent: facts that are
    already present are not duplicated.
    """
    store = store or PropertyStore(ast)
    for nid in sorted(ast.properties):
        for prop in list(ast.properties[nid]):
            if prop.ns != "polca":
                continue
            want = _SKELETON_ARITY.get(prop.keyword)
            if want is None:
                raise LoweringError(f"unknown skeleton {prop.keyword!r}")
            if len(prop.args) != want:
                raise LoweringError(
                    f"{prop.keyword} takes {want} arguments, got {len(prop.args)}"
                )
            for fact in _skeleton_facts(prop):
                store.add_fact(nid, fact)
    return ast


# ---------------------------------------------------------------------------
# sidecar ingestion


def ingest_properties(
    ast: AnnotatedAst,
    text: str,
    store: Optional[PropertyStore] = None,
    provenance: str = "external-tool",
) -> PropertyStore:
    """Attach facts from sidecar lines `<file>:<line>: #pragma stml <fact>`.

    Facts anchor to the statement that starts at the given line.
    """
    store = store or PropertyStore(ast)
    line_to_nid: dict[int, int] = {}
    for n in iter_nodes(ast.root):
        if (n.kind in STMT_KINDS or n.kind == "FuncDef") and n.line > 0:
            line_to_nid.setdefault(n.line, n.nid)
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition("#pragma")
        if not rest:
            raise AnchorError(f"sidecar line has no pragma: {raw!r}")
        head = head.strip()
        if not head.endswith(":"):
            raise AnchorError(f"sidecar line needs <file>:<line>: prefix: {raw!r}")
        fields = head[:-1].rsplit(":", 1)
        if len(fields) != 2 or not fields[1].isdigit():
            raise AnchorError(f"sidecar line needs <file>:<line>: prefix: {raw!r}")
        lineno = int(fields[1])
        if lineno not in line_to_nid:
            raise AnchorError(f"no statement starts at line {lineno}")
        prop = parse_pragma(rest.strip(), provenance=provenance)
        store.add_fact(line_to_nid[lineno], prop)
    return store


# ---------------------------------------------------------------------------
# predicates


def _as_fragment_access(x) -> AccessSet:
    return access_set(x)


def _reads_of_operand(x) -> tuple[set[MemLocation], bool]:
    """Read-set of a predicate operand.

    A bare lvalue contributes the location it denotes plus its index reads; a
    set literal (python list) is the union over its elements.
    """
    if isinstance(x, list):
        locs: set[MemLocation] = set()
        unknown = False
        for e in x:
            s, u = _reads_of_operand(e)
            locs |= s
            unknown |= u
        return locs, unknown
    if isinstance(x, Node) and x.kind in ("Var", "Index"):
        c = _Collector()
        c.touch(x, "r")
        return c.acc.reads, c.acc.unknown
    acc = _as_fragment_access(x)
    return acc.reads, acc.unknown


def _locs_of_operand(x) -> set[MemLocation]:
    if isinstance(x, list):
        out: set[MemLocation] = set()
        for e in x:
            out |= _locs_of_operand(e)
        return out
    if isinstance(x, Node) and x.kind == "Index":
        loc, _ = _Collector().location(x)
        return {loc}
    if isinstance(x, Node) and x.kind == "Var":
        return {MemLocation(x.name)}
    return _as_fragment_access(x).writes


def _disjoint(writes: set[MemLocation], reads: set[MemLocation],
              written_vars: set[str], unknown: bool) -> Tri:
    verdict = Tri.TRUE
    for w in writes:
        for r in reads:
            o = _pair_overlap(w, r, written_vars)
            if o is Tri.TRUE:
                return Tri.FALSE
            if o is Tri.UNKNOWN:
                verdict = Tri.UNKNOWN
    if unknown and verdict is Tri.TRUE:
        return Tri.UNKNOWN
    return verdict


def pred_no_write(x1, x2) -> Tri:
    a1 = _as_fragment_access(x1)
    reads, r_unknown = _reads_of_operand(x2)
    written = a1.written_scalars()
    return _disjoint(a1.writes, reads, written, a1.unknown or r_unknown)


def pred_no_read(x, y) -> Tri:
    a = _as_fragment_access(x)
    locs = _locs_of_operand(y)
    written = a.written_scalars()
    verdict = Tri.TRUE
    for r in a.reads:
        for t in locs:
            o = _pair_overlap(r, t, written)
            if o is Tri.TRUE:
                return Tri.FALSE
            if o is Tri.UNKNOWN:
                verdict = Tri.UNKNOWN
    if a.unknown and verdict is Tri.TRUE:
        return Tri.UNKNOWN
    return verdict


def _loop_var_name(e) -> str:
    if isinstance(e, str):
        return e
    if isinstance(e, Node) and e.kind == "Var":
        return e.name
    raise PredicateArityError("loop variable argument must be a variable")


def pred_no_write_except_arrays(x1, x2, e) -> Tri:
    lv = _loop_var_name(e)
    a1 = _as_fragment_access(x1)
    reads, r_unknown = _reads_of_operand(x2)
    written = a1.written_scalars()
    verdict = Tri.TRUE
    for w in a1.writes:
        for r in reads:
            if (
                w.base == r.base
                and len(w.index) == 1
                and len(r.index) == 1
            ):
                from .parser import parse_expression

                ow = offset_of(parse_expression(w.index[0]), lv)
                orr = offset_of(parse_expression(r.index[0]), lv)
                if ow is not None and orr is not None:
                    if ow == orr:
                        continue  # same position relative to the loop variable
                    return Tri.FALSE  # distinct offsets alias across iterations
            o = _pair_overlap(w, r, written)
            if o is Tri.TRUE:
                return Tri.FALSE
            if o is Tri.UNKNOWN:
                verdict = Tri.UNKNOWN
    if (a1.unknown or r_unknown) and verdict is Tri.TRUE:
        return Tri.UNKNOWN
    return verdict


def pred_no_write_prev_arrays(x1, x2, e) -> Tri:
    """True when, for every shared array, the smallest write offset of x1 is
    at least the largest read offset of x2 relative to the loop variable."""
    lv = _loop_var_name(e)
    a1 = _as_fragment_access(x1)
    a2 = _as_fragment_access(x2)
    if a1.unknown or a2.unknown:
        return Tri.UNKNOWN
    verdict = Tri.TRUE
    for base in a1.array_bases("w") & a2.array_bases("r"):
        w_off = a1.array_offsets(base, "w", lv)
        r_off = a2.array_offsets(base, "r", lv)
        if w_off is None or r_off is None:
            verdict = Tri.UNKNOWN
            continue
        if not w_off or not r_off:
            continue
        if min(w_off) < max(r_off):
            return Tri.FALSE
    return verdict


def pred_pure(x, store: Optional[PropertyStore] = None) -> Tri:
    if isinstance(x, str):
        return tri(x in ARITH_OPS or x in ("<", ">", "<=", ">=", "==", "!=", "&&", "||"))
    items = x if isinstance(x, tuple) else (x,)
    verdict = Tri.TRUE
    for item in items:
        for n in iter_nodes(item):
            if n.kind in ("Assign", "AugAssign", "Decl"):
                return Tri.FALSE
            if n.kind == "UnaryOp" and n.op in ("++", "--", "p++", "p--"):
                return Tri.FALSE
            if n.kind == "Call":
                if store is None:
                    verdict = Tri.UNKNOWN
                    continue
                fact = store.global_tri("pure", (n.name,))
                if fact is Tri.FALSE:
                    return Tri.FALSE
                if fact is Tri.UNKNOWN:
                    verdict = Tri.UNKNOWN
    return verdict


_SAMPLES = (-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 0.5, -1.5)


def _apply_op(op: str, a: float, b: float) -> float:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    raise ArithmeticError(op)


def pred_distributes_over(g, f, store: Optional[PropertyStore] = None) -> Tri:
    g = g if isinstance(g, str) else print_expr(g)
    f = f if isinstance(f, str) else print_expr(f)
    if store is not None:
        fact = store.global_tri("distributes_over", (g, f))
        if fact is not Tri.UNKNOWN:
            return fact
    if g == "*" and f == "+":
        return Tri.TRUE
    if g not in ARITH_OPS or f not in ARITH_OPS:
        return Tri.UNKNOWN
    for x in _SAMPLES:
        for y in _SAMPLES:
            for z in _SAMPLES:
                try:
                    lhs = _apply_op(g, _apply_op(f, x, y), z)
                    rhs = _apply_op(f, _apply_op(g, x, z), _apply_op(g, y, z))
                except ArithmeticError:
                    return Tri.UNKNOWN
                except ZeroDivisionError:
                    continue
                if lhs != rhs:
                    return Tri.FALSE
    return Tri.UNKNOWN


def pred_occurs_in(e: Node, x) -> Tri:
    items = x if isinstance(x, tuple) else (x,)
    for item in items:
        for n in iter_nodes(item):
            if struct_eq(n, e):
                return Tri.TRUE
    return Tri.FALSE


def pred_fresh_var(e, ast: AnnotatedAst) -> Tri:
    if isinstance(e, Node) and e.kind == "Var":
        return tri(e.name not in ast.identifiers())
    return Tri.FALSE


def fresh_name(ast: AnnotatedAst, taken: Iterable[str] = ()) -> str:
    used = ast.identifiers() | set(taken)
    k = 0
    while f"__stml_{k}" in used:
        k += 1
    return f"__stml_{k}"


def pred_is_identity(e, store: Optional[PropertyStore] = None,
                     before_nid: Optional[int] = None) -> Tri:
    if isinstance(e, Node) and e.kind == "IntLit" and e.value in (0, 1):
        return Tri.TRUE
    if store is not None:
        text = e if isinstance(e, str) else print_expr(e)
        fact = store.global_tri("is_identity", (text,), before_nid=before_nid)
        if fact is not Tri.UNKNOWN:
            return fact
    return Tri.UNKNOWN


def destructure_assignment(node: Node) -> Optional[tuple[Node, Node]]:
    """(lvalue, rhs) for plain assignments and initialized declarations."""
    if node.kind == "Assign":
        return node.children[0], node.children[1]
    if node.kind == "Decl":
        ndims = node.ndims or 0
        rest = node.children[ndims:]
        if rest and not ndims:
            return make("Var", name=node.name), rest[0]
    return None


def pred_is_assignment(x) -> Tri:
    if isinstance(x, tuple):
        if len(x) != 1:
            return Tri.FALSE
        x = x[0]
    return tri(isinstance(x, Node) and destructure_assignment(x) is not None)


def pred_is_subseteq(sub, sup) -> Tri:
    """sub: fragment whose writes are taken, or explicit location operand;
    sup: set-literal of lvalues."""
    if isinstance(sub, tuple) or (isinstance(sub, Node) and sub.kind in STMT_KINDS):
        acc = _as_fragment_access(sub)
        locs = acc.writes
        unknown = acc.unknown
    elif isinstance(sub, Node) and sub.kind in EXPR_WRITE_KINDS:
        acc = _as_fragment_access(sub)
        locs = acc.writes
        unknown = acc.unknown
    else:
        locs = _locs_of_operand(sub)
        unknown = False
    targets = _locs_of_operand(sup)
    verdict = Tri.TRUE
    for loc in locs:
        if any(t == loc for t in targets):
            continue
        overlaps = [_pair_overlap(loc, t, set()) for t in targets]
        if all(o is Tri.FALSE for o in overlaps):
            return Tri.FALSE
        verdict = Tri.UNKNOWN
    if unknown and verdict is Tri.TRUE:
        return Tri.UNKNOWN
    return verdict


EXPR_WRITE_KINDS = frozenset({"UnaryOp", "Call", "BinOp", "Index", "Var"})


_PREDICATES = {
    "no_write": (2, pred_no_write),
    "no_read": (2, pred_no_read),
    "no_write_except_arrays": (3, pred_no_write_except_arrays),
    "no_write_prev_arrays": (3, pred_no_write_prev_arrays),
    "occurs_in": (2, pred_occurs_in),
    "is_subseteq": (2, pred_is_subseteq),
}


def eval_predicate(ast: AnnotatedAst, name: str, *args,
                   store: Optional[PropertyStore] = None,
                   at: Optional[int] = None) -> Tri:
    """Evaluate one semantic condition to a three-valued verdict.

    Statement sequences are python tuples of nodes, set literals are python
    lists, operators are strings.
    """
    if name == "pure":
        _arity(name, args, 1)
        return pred_pure(args[0], store)
    if name == "distributes_over":
        _arity(name, args, 2)
        return pred_distributes_over(args[0], args[1], store)
    if name == "fresh_var":
        _arity(name, args, 1)
        return pred_fresh_var(args[0], ast)
    if name == "is_identity":
        _arity(name, args, 1)
        return pred_is_identity(args[0], store, before_nid=at)
    if name == "is_assignment":
        if len(args) not in (1, 3):
            raise PredicateArityError("is_assignment takes 1 or 3 arguments")
        return pred_is_assignment(args[0])
    if name == "writes":
        raise PredicateArityError("writes(X) only appears inside is_subseteq")
    entry = _PREDICATES.get(name)
    if entry is None:
        raise PredicateArityError(f"unknown predicate {name!r}")
    want, fn = entry
    _arity(name, args, want)
    return fn(*args)


def _arity(name: str, args: tuple, want: int) -> None:
    if len(args) != want:
        raise PredicateArityError(f"{name} takes {want} arguments, got {len(args)}")


def subexpressions(x, declared_arrays: Iterable[str] = ()) -> list[Node]:
    """Candidate subexpressions for hoisting, in preorder, deduplicated.

    Literals and bare array names are excluded; everything else qualifies.
    """
    declared = set(declared_arrays)
    items = x if isinstance(x, tuple) else (x,)
    seen: set[str] = set()
    out: list[Node] = []
    for item in items:
        for n in iter_nodes(item):
            if n.kind not in ("BinOp", "UnaryOp", "Call", "Index", "Var"):
                continue
            if n.kind == "Var" and n.name in declared:
                continue
            text = print_expr(n)
            if text in seen:
                continue
            seen.add(text)
            out.append(n)
    return out
