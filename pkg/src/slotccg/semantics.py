"""Composition of lexical semantics into ungrounded event graphs.

Every atomic position of a leaf category carries a head variable (see
:func:`slotccg.categories.coindex`). Combinators unify the variables of the
argument slot they saturate with the variables of the argument constituent,
and lexical templates attach graph facts (events, entities, edges) to those
variables. Once the whole derivation is processed, each variable class
resolves to a graph node.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .categories import (
    NOMINAL_ATOMS,
    PP,
    S,
    Category,
    CoindexedCategory,
    _is_verbal_modifier,
    coindex,
    split_vars,
)
from .lexicon import NOMINAL_TAGS, VERBAL_TAGS
from .parser import BA, BC, CONJ_RULE, FA, FC, Derivation, Leaf, Token


class CompositionError(ValueError):
    pass


class IncompleteSemanticsError(CompositionError):
    pass


@dataclass(frozen=True, order=True)
class GraphNode:
    kind: str  # event | entity | type | target | var
    name: str
    label: str = ""

    def __str__(self):
        if self.kind in ("event", "type"):
            return f"{self.name}:{self.label}"
        return self.name


TARGET = GraphNode("target", "TARGET")


class Edge(NamedTuple):
    src: GraphNode
    label: str
    dst: GraphNode

    def __str__(self):
        return f"{self.label}({self.src}, {self.dst})"


@dataclass(frozen=True)
class UngroundedGraph:
    nodes: frozenset
    edges: frozenset

    @property
    def events(self) -> list[GraphNode]:
        return sorted(n for n in self.nodes if n.kind == "event")

    @property
    def entities(self) -> list[GraphNode]:
        return sorted(n for n in self.nodes if n.kind == "entity")

    @property
    def target(self) -> Optional[GraphNode]:
        return TARGET if TARGET in self.nodes else None

    def edges_from(self, node: GraphNode) -> list[Edge]:
        return sorted((e for e in self.edges if e.src == node), key=str)

    @property
    def type_edges(self) -> list[Edge]:
        return sorted((e for e in self.edges if e.label == "type"), key=str)

    def serialize(self) -> str:
        """One ``label(src, dst)`` line per edge, sorted; isolated nodes as ``node(x)``."""
        lines = [str(e) for e in self.edges]
        touched = {e.src for e in self.edges} | {e.dst for e in self.edges}
        lines += [f"node({n})" for n in self.nodes if n not in touched]
        return "\n".join(sorted(lines))

    def __str__(self):
        return self.serialize()


@dataclass(frozen=True)
class SemanticExpr:
    """Lexical meaning of one token under one co-indexed category.

    ``facts`` reference local variables: those of the category atoms plus any
    extra ones up to ``n_vars``. Fact forms:

    ``("event", v, label)``, ``("entity", v, id)``, ``("target", v)``,
    ``("type", v, lemma)``, ``("edge", v_src, label, v_dst)``, ``("unify", a, b)``.
    """

    category: Category
    variables: tuple[int, ...]
    facts: tuple
    n_vars: int

    @property
    def open_arguments(self) -> int:
        return self.category.arity


def _arg_slots(c: Category, vs: tuple[int, ...]):
    """(slash, argument category, argument vars) outermost first."""
    out = []
    while not c.is_atomic:
        rv, av = split_vars(c, vs)
        out.append((c.slash, c.argument, av))
        c, vs = c.result, rv
    return out


def _no_template(tok: Token, c: Category):
    return CompositionError(f"no semantics for {tok.surface!r} ({tok.pos}) with category {c}")


def lexical_semantics(tok: Token, cc: CoindexedCategory) -> SemanticExpr:
    c = cc.category
    v = cc.variables
    n_vars = max(v) + 1

    def done(facts, extra=0):
        return SemanticExpr(c, v, tuple(facts), n_vars + extra)

    if tok.is_blank:
        if c in NOMINAL_ATOMS:
            return done([("target", v[0])])
        raise _no_template(tok, c)
    if tok.entity is not None:
        if c in NOMINAL_ATOMS:
            return done([("entity", v[0], tok.entity)])
        raise _no_template(tok, c)

    lemma = tok.lemma
    if tok.pos in NOMINAL_TAGS:
        if c in NOMINAL_ATOMS:
            return done([("type", v[0], lemma)])
        if c.is_modifier() and c.result in NOMINAL_ATOMS:
            return done([("type", v[0], lemma)])
        raise _no_template(tok, c)
    if tok.pos in VERBAL_TAGS:
        return done(_verb_facts(tok, c, v))
    facts, extra = _function_facts(tok, c, v, n_vars)
    return done(facts, extra)


def _verb_facts(tok: Token, c: Category, v: tuple[int, ...]) -> list:
    lemma = tok.lemma
    if c.is_atomic and c != S:
        raise _no_template(tok, c)
    if not c.is_atomic and c.is_modifier():
        if _is_verbal_modifier(c):
            # S_r N_r S_a N_a: shared S head means auxiliary, distinct means control
            if v[2] == v[0]:
                return []
            return [("event", v[0], lemma), ("edge", v[0], "arg1", v[1])]
        if c.root == S:
            return []
        raise _no_template(tok, c)
    if c.root != S:
        raise _no_template(tok, c)

    event = v[0]
    facts = [("event", event, lemma)]
    slots = _arg_slots(c, v)
    subject = None
    if slots and slots[-1][0] == "\\" and slots[-1][1] in NOMINAL_ATOMS:
        subject = slots.pop()
    passive = tok.pos == "VBN"
    if subject is not None:
        facts.append(("edge", event, "arg2" if passive else "arg1", subject[2][0]))
        index = 3 if passive else 2
    else:
        index = 1
    for _slash, arg, av in slots:
        if arg in NOMINAL_ATOMS:
            if index > 3:
                raise _no_template(tok, c)
            facts.append(("edge", event, f"arg{index}", av[0]))
            index += 1
        elif arg == PP:
            facts.append(("unify", av[0], event))
        elif arg == S:
            continue
        else:
            raise _no_template(tok, c)
    return facts


def _function_facts(tok: Token, c: Category, v: tuple[int, ...], n_vars: int):
    lemma = tok.lemma
    if c.is_atomic:
        if c in NOMINAL_ATOMS:
            return [("type", v[0], lemma)], 0
        if c.name in ("conj", "comma"):
            return [], 0
        raise _no_template(tok, c)
    if c.is_modifier():
        return [], 0
    rv, av = split_vars(c, v)
    res, arg = c.result, c.argument
    if not res.is_atomic and res.is_modifier():
        x = res.result
        if arg in NOMINAL_ATOMS:
            if x.root == S:
                return [("edge", rv[0], lemma, av[0])], 0
            if x in NOMINAL_ATOMS:
                p = n_vars
                return [("event", p, lemma), ("edge", p, "arg1", rv[0]), ("edge", p, "arg2", av[0])], 1
            raise _no_template(tok, c)
        if arg == S:
            return [], 0
        if not arg.is_atomic and arg.arity == 1 and arg.result == S and arg.argument in NOMINAL_ATOMS:
            gap = av[1]
            if x in NOMINAL_ATOMS:
                return [("unify", gap, rv[0])], 0
            if not x.is_atomic and x.arity == 1 and x.result == S and x.argument in NOMINAL_ATOMS:
                return [("unify", gap, rv[1])], 0
        raise _no_template(tok, c)
    if res == PP and arg in NOMINAL_ATOMS:
        return [("edge", rv[0], lemma, av[0])], 0
    if res in NOMINAL_ATOMS and arg in NOMINAL_ATOMS:
        return [("unify", rv[0], av[0])], 0
    raise _no_template(tok, c)


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller id wins so resolution order is deterministic
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _compose_one(d: Derivation, tokens: Sequence[Token], choice: dict[int, CoindexedCategory]) -> UngroundedGraph:
    uf = _UnionFind()
    facts = []  # (token index, fact with global vars)
    next_var = [0]

    def unify_all(xs, ys):
        if len(xs) != len(ys):
            raise CompositionError("slot arity mismatch during unification")
        for a, b in zip(xs, ys):
            uf.union(a, b)

    def fresh(k):
        start = next_var[0]
        next_var[0] += k
        return tuple(range(start, start + k))

    def walk(t) -> tuple[int, ...]:
        if isinstance(t, Leaf):
            sem = lexical_semantics(tokens[t.index], choice[t.index])
            base = next_var[0]
            next_var[0] += sem.n_vars
            for f in sem.facts:
                facts.append((t.index, _offset(f, base)))
            return tuple(base + x for x in sem.variables)
        lv = walk(t.left)
        rv = walk(t.right)
        lc, rc = t.left.category, t.right.category
        rule = t.combinator
        if rule == FA:
            xv, yv = split_vars(lc, lv)
            unify_all(yv, rv)
            out = xv
        elif rule == BA:
            xv, yv = split_vars(rc, rv)
            unify_all(yv, lv)
            out = xv
        elif rule == FC:
            xv, yv = split_vars(lc, lv)
            y2, zv = split_vars(rc, rv)
            unify_all(yv, y2)
            out = xv + zv
        elif rule == BC:
            y2, zv = split_vars(lc, lv)
            xv, yv = split_vars(rc, rv)
            unify_all(yv, y2)
            out = xv + zv
        elif rule == CONJ_RULE:
            # conj X => X\X whose result head is the left conjunct's head and
            # whose remaining positions are shared with the right conjunct
            a = fresh(len(rv))
            unify_all(a[1:], rv[1:])
            out = (a[0],) + rv[1:] + a
        else:
            raise CompositionError(f"unknown combinator {rule!r}")
        if len(out) != t.category.n_atoms:
            raise CompositionError("slot arity mismatch at derivation node")
        return out

    walk(d.tree)
    if not d.root.is_atomic:
        raise IncompleteSemanticsError(f"unsaturated arguments at root category {d.root}")

    for _, f in facts:
        if f[0] == "unify":
            uf.union(f[1], f[2])

    referent: dict[int, tuple] = {}
    first_token: dict[int, int] = {}
    for idx, f in facts:
        kind = f[0]
        if kind in ("event", "entity", "target"):
            cls = uf.find(f[1])
            ref = (kind,) + tuple(f[2:])
            if cls in referent and referent[cls] != ref:
                raise CompositionError(f"conflicting referents {referent[cls]} and {ref}")
            referent[cls] = ref
            first_token.setdefault(cls, idx)

    event_classes = sorted(
        (c for c, r in referent.items() if r[0] == "event"), key=lambda c: (first_token[c], referent[c][1], c)
    )
    names: dict[int, GraphNode] = {}
    for k, cls in enumerate(event_classes, 1):
        names[cls] = GraphNode("event", f"e{k}", referent[cls][1])
    for cls, ref in referent.items():
        if ref[0] == "entity":
            names[cls] = GraphNode("entity", ref[1], ref[1])
        elif ref[0] == "target":
            names[cls] = TARGET

    n_free = [0]

    def node(cls):
        if cls not in names:
            n_free[0] += 1
            names[cls] = GraphNode("var", f"v{n_free[0]}")
        return names[cls]

    edges = set()
    n_types = 0
    for idx, f in facts:
        if f[0] == "edge":
            src, dst = node(uf.find(f[1])), node(uf.find(f[3]))
            edges.add(Edge(src, f[2], dst))
        elif f[0] == "type":
            n_types += 1
            edges.add(Edge(node(uf.find(f[1])), "type", GraphNode("type", f"t{n_types}", f[2])))
    nodes = set(names.values()) | {e.dst for e in edges}
    return UngroundedGraph(frozenset(nodes), frozenset(edges))


def _offset(f: tuple, base: int) -> tuple:
    kind = f[0]
    if kind == "edge":
        return ("edge", f[1] + base, f[2], f[3] + base)
    if kind == "unify":
        return ("unify", f[1] + base, f[2] + base)
    return (kind, f[1] + base) + tuple(f[2:])


def compose(d: Derivation, tokens: Sequence[Token]) -> list[UngroundedGraph]:
    """Ungrounded graphs for a derivation, one per co-indexation combination.

    Alternative co-indexations are only tried for verbal tokens, the only
    ones whose templates read the auxiliary/control distinction. Duplicate
    graphs are dropped; order follows the co-indexation enumeration with the
    default reading first. Raises :class:`CompositionError` if no
    combination composes.
    """
    leaves = d.leaves()
    if len(leaves) != len(tokens):
        raise CompositionError("derivation does not cover the sentence")
    options = []
    for leaf in leaves:
        variants = coindex(leaf.category)
        if tokens[leaf.index].pos not in VERBAL_TAGS:
            variants = variants[:1]
        options.append([(leaf.index, v) for v in variants])
    graphs = []
    seen = set()
    error = None
    for combo in itertools.product(*options):
        try:
            g = _compose_one(d, tokens, dict(combo))
        except CompositionError as exc:
            error = exc
            continue
        key = g.serialize()
        if key not in seen:
            seen.add(key)
            graphs.append(g)
    if not graphs and error is not None:
        raise error
    return graphs


class Validation(NamedTuple):
    ok: bool
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok


def validate(g: UngroundedGraph) -> Validation:
    """Check the corpus constraints an ungrounded graph must meet before grounding."""
    events = [n for n in g.nodes if n.kind == "event"]
    if not events:
        return Validation(False, "no-event")
    if any(n.kind == "var" for n in g.nodes):
        return Validation(False, "variable-node")
    for e in g.edges:
        if e.label != "type" and e.src.kind != "event":
            return Validation(False, "non-event-edge")
        if e.label == "type" and e.src.kind not in ("entity", "target"):
            return Validation(False, "non-event-edge")
    attached = {e.dst for e in g.edges if e.src.kind == "event"}
    for n in g.nodes:
        if n.kind == "entity" and n not in attached:
            return Validation(False, "unreachable-entity")
    if TARGET in g.nodes and TARGET not in attached:
        return Validation(False, "isolated-target")
    # connectivity over event edges (type nodes hang off their entity)
    adj: dict[GraphNode, set] = {}
    for e in g.edges:
        adj.setdefault(e.src, set()).add(e.dst)
        adj.setdefault(e.dst, set()).add(e.src)
    start = min(events)
    seen = {start}
    stack = [start]
    while stack:
        for m in adj.get(stack.pop(), ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    if seen != set(g.nodes):
        return Validation(False, "disconnected")
    return Validation(True)


def compose_valid(d: Derivation, tokens: Sequence[Token]) -> list[UngroundedGraph]:
    """compose() filtered by validate(); composition failures yield no graphs."""
    try:
        graphs = compose(d, tokens)
    except CompositionError:
        return []
    return [g for g in graphs if validate(g)]
