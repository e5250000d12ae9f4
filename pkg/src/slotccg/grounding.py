"""Grounding ungrounded graphs against the KB by structure-preserving relabelling."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .kb import GroundedGraph, KnowledgeBase, event_support, execute, filter_answers, join_support, make_grounded
from .semantics import TARGET, UngroundedGraph


@dataclass(frozen=True)
class GroundingConfig:
    max_candidates: int = 500


class Groundings(list):
    """List of grounded graphs with a ``truncated`` flag set when the cap was hit."""

    truncated: bool = False


def _assignments(edges, roles_available, fixed_ok):
    """Injective edge->role maps; ``fixed_ok(edge, role)`` vets each pairing."""
    out = []

    def rec(k, used, acc):
        if k == len(edges):
            out.append(tuple(acc))
            return
        for role in roles_available:
            if role in used or not fixed_ok(edges[k], role):
                continue
            used.add(role)
            acc.append(role)
            rec(k + 1, used, acc)
            acc.pop()
            used.discard(role)

    rec(0, set(), [])
    return out


def _event_options(u: UngroundedGraph, node, kb: KnowledgeBase):
    edges = [e for e in u.edges_from(node)]
    fixed = [e for e in edges if e.dst.kind == "entity"]
    options = set()
    if fixed:
        ents = [e.dst.name for e in fixed]
        if len(ents) >= 2:
            cands = kb.by_pair.get((ents[0], ents[1]), ())
        else:
            cands = kb.by_entity.get(ents[0], ())
        for i in cands:
            ev = kb.events[i]
            roles = ev.roles

            def ok(edge, role, roles=roles):
                filler = roles.get(role)
                if filler is None:
                    return False
                return edge.dst == TARGET or filler == edge.dst.name

            for assign in _assignments(edges, kb.schema[ev.type], ok):
                options.add((ev.type, assign))
    else:
        for etype in sorted(kb.schema):
            for assign in _assignments(edges, kb.schema[etype], lambda e, r: True):
                options.add((etype, assign))
    return edges, sorted(options)


def _option_support(kb: KnowledgeBase, etype: str, edges, assign):
    fixed, open_roles = [], []
    for edge, role in zip(edges, assign):
        if edge.dst == TARGET:
            open_roles.append(role)
        else:
            fixed.append((role, edge.dst.name))
    return event_support(kb, etype, tuple(fixed), tuple(open_roles))


def ground_with_answers(u: UngroundedGraph, kb: KnowledgeBase, cfg: GroundingConfig = GroundingConfig()):
    """Like :func:`ground` but pairs each candidate with its execution result.

    A graph without a TARGET node is a closed query: each labelling that some
    KB events satisfy is returned with an empty answer list.
    """
    per_event = []
    for node in u.events:
        edges, opts = _event_options(u, node, kb)
        if not opts:
            return Groundings()
        supports = [_option_support(kb, etype, edges, assign) for etype, assign in opts]
        per_event.append((node, edges, opts, supports))
    type_edges = u.type_edges
    type_opts = []
    for edge in type_edges:
        if edge.src.kind == "entity" and kb.strict_types:
            opts = sorted(kb.types_of(edge.src.name))
        else:
            opts = kb.type_names
        if not opts:
            return Groundings()
        type_opts.append(opts)

    out = Groundings()
    choice = [None] * len(per_event)
    closed = u.target is None

    def emit(counts):
        # the event part is shared by every type labelling: filter its counts per labelling
        ev_types, roles = {}, {}
        for (node, edges, opts, _), k in zip(per_event, choice):
            etype, assign = opts[k]
            ev_types[node] = etype
            roles.update(zip(edges, assign))
        for ty_choice in itertools.product(*type_opts):
            checks, target_types = [], []
            for edge, t in zip(type_edges, ty_choice):
                if edge.src == TARGET:
                    target_types.append(t)
                else:
                    checks.append((edge.src.name, t))
            if closed:
                # no TARGET: a satisfiable labelling is kept with an empty answer list
                answers = []
                keep = bool(filter_answers({"": 1}, checks, (), kb))
            else:
                answers = filter_answers(counts, checks, target_types, kb)
                keep = bool(answers)
            if keep:
                if len(out) >= cfg.max_candidates:
                    out.truncated = True
                    return False
                types = {edge.dst: t for edge, t in zip(type_edges, ty_choice)}
                out.append((make_grounded(u, ev_types, roles, types), answers))
        return True

    # backtracking over event labellings in lexicographic order, pruning as
    # soon as the partial join has no TARGET value left
    def rec(k, partial):
        if k == len(per_event):
            if closed:
                return emit(None) if math.prod(partial) else True
            counts = join_support(partial)
            return emit(counts) if counts else True
        for i, sup in enumerate(per_event[k][3]):
            nxt = partial + [sup]
            if not join_support(nxt) and _prunable(nxt):
                continue
            choice[k] = i
            if not rec(k + 1, nxt):
                return False
        return True

    rec(0, [])
    return out


def _prunable(supports) -> bool:
    """An empty partial join stays empty once a TARGET edge or a zero count has been seen."""
    return any(not isinstance(s, int) or s == 0 for s in supports)


def ground(u: UngroundedGraph, kb: KnowledgeBase, cfg: GroundingConfig = GroundingConfig()) -> Groundings:
    """All groundings of ``u`` that return at least one answer on ``kb``.

    Graphs without a TARGET node keep every labelling the KB satisfies.

    Event nodes are labelled with event types, edges with roles of that type
    (injectively per event) and type nodes with KB types. Labellings for
    events attached to entities come from the KB events those entities occur
    in; the joint labelling is then executed and kept if non-empty. Output is
    deterministic and capped at ``cfg.max_candidates``.
    """
    pairs = ground_with_answers(u, kb, cfg)
    out = Groundings(g for g, _ in pairs)
    out.truncated = pairs.truncated
    return out


@dataclass
class CandidateSet:
    candidates: list[GroundedGraph]
    positives: list[int] = field(default_factory=list)
    sentence_id: Optional[str] = None
    ungrounded: tuple[UngroundedGraph, ...] = ()
    truncated: bool = False


def filter_candidates(cands: Sequence[GroundedGraph], kb: KnowledgeBase, gold: str,
                      answers: Optional[Sequence[Sequence[str]]] = None, sentence_id: str = None) -> CandidateSet:
    """Mark candidates whose first answer is the gold entity as positives."""
    if answers is None:
        answers = [execute(c, kb) for c in cands]
    positives = [i for i, a in enumerate(answers) if a and a[0] == gold]
    ungrounded = tuple(dict.fromkeys(c.ungrounded for c in cands))
    return CandidateSet(list(cands), positives, sentence_id, ungrounded)
