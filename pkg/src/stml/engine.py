"""Rule application: matching, condition checking, rewriting, sessions.

The cycle mirrors an interactive transformation tool: app_rules lists every
spot a rule could fire together with the verdict of its semantic conditions,
trans applies one selected match and returns the rewritten program, Session
keeps the history so steps can be undone.

A match is Proven when every condition evaluated to true.  Conditions that
could not be decided leave the match flagged Unknown-conditions; applying it
then requires an explicit override.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .cast import (
    EXPR_KINDS,
    STMT_KINDS,
    AnnotatedAst,
    Node,
    clone,
    make,
    renumber,
    struct_eq,
)
from .errors import (
    EmptyHistory,
    InstantiationError,
    StaleMatch,
    UnsafeApplication,
)
from .matching import (
    Binding,
    InstantiationContext,
    instantiate,
    match_pattern,
)
from .properties import Property
from .rules import Condition, Rule
from .semantics import (
    PropertyStore,
    Tri,
    destructure_assignment,
    eval_predicate,
    fresh_name,
    lower_polca,
    subexpressions,
)

PROVEN = "Proven"
UNKNOWN = "Unknown-conditions"


def _store_for(ast: AnnotatedAst) -> PropertyStore:
    store = PropertyStore(ast)
    lower_polca(ast, store)
    return store


@dataclass(frozen=True)
class Match:
    """One way a rule can fire on the current tree."""

    rule: str
    pos: int
    binding: Binding
    certainty: str
    unknown: tuple[str, ...]
    alt: int
    ast_digest: str
    match_id: str


@dataclass(frozen=True)
class StepRecord:
    """One applied rewrite: the (rule, old code, new code) triple plus
    hashes for replay checking and the rule the oracle named for the
    following step (None outside oracle-driven runs)."""

    index: int
    rule: str
    match_id: str
    pos: int
    before_hash: str
    after_hash: str
    old_code: str
    new_code: str
    diff: str
    next_rule: Optional[str] = None
    warnings: tuple = ()

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "rule": self.rule,
            "match_id": self.match_id,
            "pos": self.pos,
            "before_hash": self.before_hash,
            "after_hash": self.after_hash,
            "old_code": self.old_code,
            "new_code": self.new_code,
            "diff": self.diff,
            "next_rule": self.next_rule,
            "warnings": [dict(w) for w in self.warnings],
        }


def _resolve_template(tpl: Node, binding: Binding, ctx):
    if tpl.kind == "MVar":
        if tpl.name not in binding:
            raise InstantiationError(f"unbound metavariable {tpl.name}")
        return binding[tpl.name]
    return instantiate(tpl, binding, ctx)


def _resolve_arg(arg: tuple, binding: Binding, ctx):
    tag, payload = arg
    if tag == "set":
        return [_resolve_template(t, binding, ctx) for t in payload]
    return _resolve_template(payload, binding, ctx)


class _CondContext(InstantiationContext):
    """Evaluates predicate calls appearing inside generate templates."""

    def __init__(self, ast: AnnotatedAst, store: Optional[PropertyStore],
                 at: Optional[int]):
        self.ast = ast
        self.store = store
        self.at = at

    def eval_condition(self, call: Node, binding: Binding) -> Tri:
        args = [_resolve_template(c, binding, self) for c in call.children]
        return eval_predicate(self.ast, call.name, *args,
                              store=self.store, at=self.at)


def _eval_conditions(ast: AnnotatedAst, rule: Rule, binding: Binding,
                     store: Optional[PropertyStore], at: int,
                     ctx) -> list[tuple[Binding, tuple[str, ...]]]:
    """Run the condition list, forking on generator conditions.

    Returns the surviving (binding, undecided-condition-names) branches in
    deterministic order.
    """
    branches: list[tuple[Binding, tuple[str, ...]]] = [(dict(binding), ())]
    for cond in rule.conditions:
        nxt: list[tuple[Binding, tuple[str, ...]]] = []
        for bnd, unk in branches:
            nxt.extend(_eval_one(ast, cond, bnd, unk, store, at, ctx))
        branches = nxt
        if not branches:
            break
    return branches


def _unbound_mvar(arg: tuple, binding: Binding) -> Optional[str]:
    tag, payload = arg
    if tag == "expr" and payload.kind == "MVar" and payload.name not in binding:
        return payload.name
    return None


def _eval_one(ast: AnnotatedAst, cond: Condition, bnd: Binding,
              unk: tuple[str, ...], store, at: int, ctx):
    name = cond.name
    if name == "occurs_in":
        var = _unbound_mvar(cond.args[0], bnd)
        if var is not None:
            scope = _resolve_arg(cond.args[1], bnd, ctx)
            for cand in subexpressions(scope, ast.declared_arrays()):
                forked = dict(bnd)
                forked[var] = cand
                yield forked, unk
            return
    if name == "fresh_var":
        var = _unbound_mvar(cond.args[0], bnd)
        if var is not None:
            taken = [
                v.name for v in bnd.values()
                if isinstance(v, Node) and v.kind == "Var"
                and v.name.startswith("__stml_")
            ]
            forked = dict(bnd)
            forked[var] = make("Var", name=fresh_name(ast, taken))
            yield forked, unk
            return
    if name == "is_assignment" and len(cond.args) == 3:
        yield from _eval_destructure(cond, bnd, unk, ctx)
        return
    args = [_resolve_arg(a, bnd, ctx) for a in cond.args]
    verdict = eval_predicate(ast, name, *args, store=store, at=at)
    if verdict is Tri.TRUE:
        yield bnd, unk
    elif verdict is Tri.UNKNOWN:
        yield bnd, unk + (name,)


def _eval_destructure(cond: Condition, bnd: Binding, unk, ctx):
    """is_assignment(s, l, e): s must be an assignment; bind or check l/e."""
    target = _resolve_arg(cond.args[0], bnd, ctx)
    if isinstance(target, tuple):
        if len(target) != 1:
            return
        target = target[0]
    parts = destructure_assignment(target) if isinstance(target, Node) else None
    if parts is None:
        return
    out = dict(bnd)
    for arg, value in zip(cond.args[1:], parts):
        var = _unbound_mvar(arg, out)
        if var is not None:
            out[var] = value
            continue
        have = _resolve_arg(arg, out, ctx)
        if not (isinstance(have, Node) and struct_eq(have, value)):
            return
    yield out, unk


def _match_sites(rule: Rule, ast: AnnotatedAst) -> Iterable[tuple[int, Binding]]:
    if rule.kind == "seq":
        kinds = ("Block", "TranslationUnit")
    elif rule.kind == "stmt":
        kinds = tuple(STMT_KINDS)
    else:
        kinds = tuple(EXPR_KINDS)
    for nid in sorted(ast.node_table):
        node = ast.node_table[nid]
        if node.kind not in kinds:
            continue
        for binding in match_pattern(rule.pattern, node):
            yield nid, binding


def app_rules(ast: AnnotatedAst, rules: list[Rule],
              store: Optional[PropertyStore] = None) -> list[Match]:
    """Every admissible rule application on the tree, in a stable order:
    by position, then rule declaration order, then binding enumeration."""
    if store is None:
        store = _store_for(ast)
    digest = ast.digest()
    out: list[Match] = []
    sites: list[tuple[int, int, Binding]] = []
    for ridx, rule in enumerate(rules):
        for nid, binding in _match_sites(rule, ast):
            sites.append((nid, ridx, binding))
    sites.sort(key=lambda s: (s[0], s[1]))
    for nid, ridx, binding in sites:
        rule = rules[ridx]
        ctx = _CondContext(ast, store, nid)
        for bnd, unk in _eval_conditions(ast, rule, binding, store, nid, ctx):
            certainty = PROVEN if not unk else UNKNOWN
            for alt in range(len(rule.alternatives)):
                out.append(Match(
                    rule=rule.name, pos=nid, binding=bnd,
                    certainty=certainty, unknown=unk, alt=alt,
                    ast_digest=digest,
                    match_id=f"{digest[:12]}:{len(out)}",
                ))
    return out


_BODY_SLOTS = {("For", 3), ("While", 1), ("If", 1), ("If", 2)}


def _splice(ast: AnnotatedAst, target: Node,
            replacement) -> tuple[Node, dict[int, Node]]:
    """New raw root with target swapped for replacement (node or tuple).

    Also returns carried: id(old ancestor) -> its rebuilt copy, so pragmas
    on the unreplaced path survive the rewrite.
    """
    carried: dict[int, Node] = {}

    def rebuild(node: Node) -> Node:
        new_children = []
        for idx, child in enumerate(node.children):
            if child.nid != target.nid:
                if _contains(child, target.nid):
                    new_children.append(rebuild(child))
                else:
                    new_children.append(child)
                continue
            rep = replacement
            if isinstance(rep, Node):
                new_children.append(rep)
                continue
            if node.kind in ("Block", "TranslationUnit"):
                new_children.extend(rep)
            elif len(rep) == 1:
                new_children.append(rep[0])
            elif (node.kind, idx) in _BODY_SLOTS:
                new_children.append(make("Block", *rep))
            else:
                raise InstantiationError(
                    f"replacement of {len(rep)} statements does not fit "
                    f"a single {node.kind} slot"
                )
        new = make(
            node.kind, *new_children,
            name=node.name, op=node.op, value=node.value,
            ctype=node.ctype, ndims=node.ndims,
            line=node.line, col=node.col,
        )
        carried[id(node)] = new
        return new

    if target.nid == ast.root.nid:
        if isinstance(replacement, Node):
            return replacement, carried
        raise InstantiationError("cannot splice a sequence at the root")
    return rebuild(ast.root), carried


def _contains(node: Node, nid: int) -> bool:
    if node.nid == nid:
        return True
    return any(_contains(c, nid) for c in node.children)


def _replacement_for(rule: Rule, match: Match, ast: AnnotatedAst,
                     ctx) -> object:
    template = rule.alternatives[match.alt]
    new = instantiate(template, match.binding, ctx)
    if rule.kind == "seq":
        node = ast.node_table[match.pos]
        return make(
            node.kind, *new,
            name=node.name, op=node.op, value=node.value,
            ctype=node.ctype, ndims=node.ndims,
            line=node.line, col=node.col,
        )
    return new


def _transport_properties(
    ast: AnnotatedAst, raw_root: Node, carried: dict[int, Node]
) -> tuple[Node, dict, list, dict]:
    """Renumber the rewritten tree and carry properties across.

    Nodes shared with the old tree, plus rebuilt ancestors on the splice
    path (via carried), keep their pragmas.  Pragmas on replaced nodes are
    dropped with a warning; a rule re-states surviving facts via assert.
    """
    new_root, mapping = renumber(raw_root)
    new_props: dict[int, list] = {}
    warnings: list[dict] = []
    for nid in sorted(ast.properties):
        props = ast.properties[nid]
        old_node = ast.node_table[nid]
        raw = carried.get(id(old_node), old_node)
        hit = mapping.get(id(raw))
        if hit is not None:
            new_props.setdefault(hit.nid, []).extend(props)
            continue
        for p in props:
            warnings.append({
                "warning": "dropped-property",
                "pragma": p.pragma_line(),
                "node": nid,
            })
    return new_root, new_props, warnings, mapping


def _instantiate_property(prop: Property, binding: Binding) -> Property:
    def subst(arg):
        if isinstance(arg, str):
            v = binding.get(arg)
            return v if isinstance(v, str) else arg
        if isinstance(arg, Node):
            return _subst_vars(arg, binding)
        return arg

    new_args = tuple(subst(a) for a in prop.args)
    locations = prop.locations
    if locations is not None:
        locations = tuple(
            _subst_vars(l, binding) if isinstance(l, Node) else l
            for l in locations
        )
    return Property(
        ns=prop.ns, keyword=prop.keyword, args=new_args,
        offsets=prop.offsets, locations=locations,
        negated=prop.negated, provenance=prop.provenance,
    )


def _subst_vars(node: Node, binding: Binding) -> Node:
    if node.kind == "Var" and node.name in binding:
        v = binding[node.name]
        if isinstance(v, Node):
            return clone(v)
    if not node.children:
        return node
    return make(
        node.kind, *(_subst_vars(c, binding) for c in node.children),
        name=node.name, op=node.op, value=node.value,
        ctype=node.ctype, ndims=node.ndims,
    )


def make_record(index: int, match: Match, old_ast: AnnotatedAst,
                old_node: Node, new_ast: AnnotatedAst,
                warnings: list[dict],
                next_rule: Optional[str] = None) -> StepRecord:
    from .printer import diff, print_node

    # preorder nids before the rewrite site are unaffected, so the new
    # subtree's root takes the old position
    new_node = new_ast.node_table.get(match.pos)
    return StepRecord(
        index=index, rule=match.rule, match_id=match.match_id,
        pos=match.pos,
        before_hash=old_ast.digest(), after_hash=new_ast.digest(),
        old_code=print_node(old_node),
        new_code=print_node(new_node) if new_node is not None else "",
        diff=diff(old_ast, new_ast),
        next_rule=next_rule,
        warnings=tuple(tuple(sorted(w.items())) for w in warnings),
    )


def trans(ast: AnnotatedAst, match: Match, rules: list[Rule],
          store: Optional[PropertyStore] = None,
          override: bool = False) -> tuple[AnnotatedAst, list[dict]]:
    """Apply one match, returning the rewritten tree and any warnings.

    Raises StaleMatch when the match was computed on a different tree and
    UnsafeApplication when conditions are undecided and override is not set.
    """
    if match.ast_digest != ast.digest():
        raise StaleMatch(
            f"match {match.match_id} was computed on another version"
        )
    if match.certainty != PROVEN and not override:
        raise UnsafeApplication(
            "undecided conditions: " + ", ".join(match.unknown)
        )
    by_name = {r.name: r for r in rules}
    rule = by_name[match.rule]
    if store is None:
        store = _store_for(ast)
    ctx = _CondContext(ast, store, match.pos)
    replacement = _replacement_for(rule, match, ast, ctx)
    target = ast.node_table[match.pos]
    if target.nid == ast.root.nid:
        if not isinstance(replacement, Node):
            raise InstantiationError("cannot splice a sequence at the root")
        raw_root, carried = replacement, {}
    else:
        raw_root, carried = _splice(ast, target, replacement)
    if rule.kind == "seq" and isinstance(replacement, Node):
        # the anchor block itself survives; only its child list changed
        carried[id(target)] = replacement
    new_root, new_props, warnings, mapping = _transport_properties(
        ast, raw_root, carried
    )
    new_ast = AnnotatedAst(new_root, new_props, ast.source_name)
    if rule.asserts:
        anchor = _assert_anchor(replacement, mapping, new_ast)
        assert_store = PropertyStore(new_ast, warnings)
        for prop in rule.asserts:
            assert_store.add_fact(anchor, _instantiate_property(
                prop, match.binding
            ))
    return new_ast, warnings


def _assert_anchor(replacement, mapping: dict, new_ast: AnnotatedAst) -> int:
    """nid in the rewritten tree that rule asserts attach to."""
    probe = replacement if isinstance(replacement, Node) \
        else (replacement[0] if replacement else None)
    if probe is not None and id(probe) in mapping:
        return mapping[id(probe)].nid
    return new_ast.root.nid


class Session:
    """A transformation in progress: current tree, match list, history."""

    def __init__(self, ast: AnnotatedAst, rules: list[Rule]):
        self.rules = rules
        self.store = _store_for(ast)
        self.history: list[AnnotatedAst] = [ast]
        self.records: list[StepRecord] = []
        self._matches: Optional[list[Match]] = None

    @property
    def ast(self) -> AnnotatedAst:
        return self.history[-1]

    def matches(self) -> list[Match]:
        if self._matches is None or (
            self._matches and self._matches[0].ast_digest != self.ast.digest()
        ):
            self._matches = app_rules(self.ast, self.rules, self.store)
        return self._matches

    def find(self, match_id: str) -> Match:
        for m in self.matches():
            if m.match_id == match_id:
                return m
        raise StaleMatch(f"no live match {match_id}")

    def apply(self, match: Match, override: bool = False,
              next_rule: Optional[str] = None) -> list[dict]:
        old_ast = self.ast
        old_node = old_ast.node_table[match.pos]
        new_ast, warnings = trans(
            old_ast, match, self.rules, self.store, override
        )
        self.store = _store_for(new_ast)
        self.records.append(make_record(
            len(self.records), match, old_ast, old_node, new_ast,
            warnings, next_rule,
        ))
        self.history.append(new_ast)
        self._matches = None
        return warnings

    def undo(self) -> AnnotatedAst:
        if len(self.history) == 1:
            raise EmptyHistory("nothing to undo")
        self.history.pop()
        self.records.pop()
        self.store = _store_for(self.ast)
        self._matches = None
        return self.ast
