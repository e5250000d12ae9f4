"""Independent brute-force reference implementations and random instance generators."""
from __future__ import annotations

import itertools
import random
from collections import Counter

from slotccg.kb import EventInstance, KnowledgeBase, make_grounded
from slotccg.parser import ROOT_CATEGORIES, Leaf, Node, apply_combinator, normal_form_ok
from slotccg.semantics import TARGET, Edge, GraphNode, UngroundedGraph


# --- parsing -----------------------------------------------------------------

def all_derivation_keys(candidates, max_depth=5) -> set[str]:
    """Every normal-form binary derivation over the candidate sets, rooted in S or NP.

    Enumerates each category assignment and each bracketing separately; no
    chart, no sharing.
    """
    out = set()
    for assignment in itertools.product(*[sorted(c, key=str) for c in candidates]):
        for tree in _bracketings([Leaf(i, c) for i, c in enumerate(assignment)], max_depth):
            if tree.category in ROOT_CATEGORIES:
                out.add(tree.key)
    return out


def _bracketings(leaves, max_depth):
    if len(leaves) == 1:
        return [leaves[0]]
    trees = []
    for k in range(1, len(leaves)):
        for left in _bracketings(leaves[:k], max_depth):
            for right in _bracketings(leaves[k:], max_depth):
                res = apply_combinator(left.category, right.category)
                if res is None or res[0].depth > max_depth:
                    continue
                if normal_form_ok(res[1], left, right):
                    trees.append(Node(res[1], res[0], left, right))
    return trees


# --- query execution ---------------------------------------------------------

def brute_execute(g, kb: KnowledgeBase) -> list[str]:
    """Enumerate every event-node -> KB event assignment and count TARGET bindings."""
    counts = _brute_counts(g, kb)
    return [e for e, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


def brute_holds(g, kb: KnowledgeBase) -> bool:
    """Closed query (no TARGET): does any assignment satisfy every constraint?"""
    return bool(_brute_counts(g, kb))


def _brute_counts(g, kb):
    closed = g.ungrounded.target is None
    u = g.ungrounded
    ev_types = g.event_type_map
    roles = g.role_map
    tmap = g.type_map
    nodes = u.events
    pools = [[ev for ev in kb.events if ev.type == ev_types[n]] for n in nodes]
    counts = Counter()
    for combo in itertools.product(*pools):
        chosen = dict(zip(nodes, combo))
        value = None
        ok = True
        for edge in u.edges:
            if edge.label == "type":
                continue
            filler = chosen[edge.src].roles.get(roles[edge])
            if filler is None:
                ok = False
                break
            if edge.dst == TARGET:
                if value is not None and value != filler:
                    ok = False
                    break
                value = filler
            elif filler != edge.dst.name:
                ok = False
                break
        if not ok or (value is None and not closed):
            continue
        if kb.strict_types:
            for edge in u.edges:
                if edge.label != "type":
                    continue
                subject = value if edge.src == TARGET else edge.src.name
                if tmap[edge.dst] not in kb.types_of(subject):
                    ok = False
                    break
        if ok:
            counts[value] += 1
    return counts


# --- grounding ---------------------------------------------------------------

def brute_ground(u: UngroundedGraph, kb: KnowledgeBase) -> dict[str, list[str]]:
    """serialisation -> answers for every labelling over the full schema with a non-empty answer.

    Closed graphs map each satisfiable labelling to an empty answer list.
    """
    events = u.events
    per_event = []
    for node in events:
        edges = u.edges_from(node)
        opts = []
        for etype in sorted(kb.schema):
            for roles in itertools.permutations(kb.schema[etype], len(edges)):
                opts.append((etype, roles))
        per_event.append((node, edges, opts))
    type_edges = u.type_edges
    out = {}
    for choice in itertools.product(*(o for _, _, o in per_event)):
        ev_types, role_map = {}, {}
        for (node, edges, _), (etype, roles) in zip(per_event, choice):
            ev_types[node] = etype
            role_map.update(zip(edges, roles))
        for tchoice in itertools.product(*[kb.type_names for _ in type_edges]):
            types = {e.dst: t for e, t in zip(type_edges, tchoice)}
            g = make_grounded(u, ev_types, role_map, types)
            if u.target is None:
                if brute_holds(g, kb):
                    out[g.serialize()] = []
                continue
            answers = brute_execute(g, kb)
            if answers:
                out[g.serialize()] = answers
    return out


# --- random instances --------------------------------------------------------

RANDOM_SCHEMA = {
    "t.acq": ("buyer", "bought", "when"),
    "t.found": ("org", "founder", "where"),
    "t.hq": ("org", "city"),
}
LEMMAS = ("arg1", "arg2", "in", "by")


def random_kb(rng: random.Random, n_events: int = None, n_entities: int = 10) -> KnowledgeBase:
    n_events = n_events or rng.randint(5, 50)
    ents = [f"x{i}" for i in range(n_entities)]
    kinds = ("ta", "tb")
    entity_types = {e: frozenset(rng.sample(kinds, rng.randint(1, 2))) for e in ents}
    events = []
    for i in range(n_events):
        etype = rng.choice(sorted(RANDOM_SCHEMA))
        roles = RANDOM_SCHEMA[etype]
        k = rng.randint(2, len(roles))
        fillers = dict(zip(rng.sample(roles, k), rng.sample(ents, k)))
        events.append(EventInstance(f"ev{i}", etype, tuple(sorted(fillers.items()))))
    return KnowledgeBase(dict(RANDOM_SCHEMA), entity_types, events)


def random_graph(rng: random.Random, kb: KnowledgeBase, max_edges: int = 4) -> UngroundedGraph:
    """A valid-shaped ungrounded graph; entities are often taken from one KB event.

    About one graph in ten is closed (no TARGET).
    """
    n_events = rng.choice((1, 1, 2))
    budget = max_edges
    closed = rng.random() < 0.1
    nodes = set() if closed else {TARGET}
    edges = set()
    target_attached = closed
    ents = sorted(kb.entities)
    for k in range(n_events):
        ev = GraphNode("event", f"e{k + 1}", rng.choice(("acquired", "founded")))
        nodes.add(ev)
        source = rng.choice(kb.events)
        pool = [f for _, f in source.fillers] if rng.random() < 0.7 else rng.sample(ents, 3)
        n_out = rng.randint(1, max(1, min(2, budget - (n_events - k - 1))))
        labels = rng.sample(LEMMAS, n_out)
        for j, label in enumerate(labels):
            if not target_attached and (j == n_out - 1 or rng.random() < 0.5):
                dst = TARGET
                target_attached = True
            else:
                dst = GraphNode("entity", rng.choice(pool))
                nodes.add(dst)
            edges.add(Edge(ev, label, dst))
        budget -= n_out
    if not target_attached:
        ev = min(n for n in nodes if n.kind == "event")
        edges.add(Edge(ev, "arg9", TARGET))
        budget -= 1
    if budget > 0 and rng.random() < 0.3:
        subject = rng.choice(sorted(n for n in nodes if n.kind in ("entity", "target")))
        t = GraphNode("type", "t1", "company")
        nodes.add(t)
        edges.add(Edge(subject, "type", t))
    return UngroundedGraph(frozenset(nodes), frozenset(edges))


def random_grounded(rng: random.Random, kb: KnowledgeBase):
    """A random labelling of a random graph (answers may well be empty)."""
    u = random_graph(rng, kb)
    ev_types, roles = {}, {}
    for node in u.events:
        edges = u.edges_from(node)
        etype = rng.choice([t for t in sorted(kb.schema) if len(kb.schema[t]) >= len(edges)])
        ev_types[node] = etype
        roles.update(zip(edges, rng.sample(kb.schema[etype], len(edges))))
    types = {e.dst: rng.choice(kb.type_names) for e in u.type_edges}
    return make_grounded(u, ev_types, roles, types)
