"""In-memory knowledge base of reified events and conjunctive query execution."""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .semantics import TARGET, Edge, GraphNode, UngroundedGraph


class KBLoadError(ValueError):
    pass


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class EventInstance:
    id: str
    type: str
    fillers: tuple[tuple[str, str], ...]  # (role, entity) sorted by role

    @cached_property
    def roles(self) -> dict[str, str]:
        return dict(self.fillers)


@dataclass
class KnowledgeBase:
    schema: dict[str, tuple[str, ...]]
    entity_types: dict[str, frozenset[str]]
    events: list[EventInstance]
    strict_types: bool = True
    by_entity: dict[str, tuple[int, ...]] = field(init=False, repr=False)
    by_pair: dict[tuple[str, str], tuple[int, ...]] = field(init=False, repr=False)
    by_type: dict[str, tuple[int, ...]] = field(init=False, repr=False)
    by_role: dict[tuple[str, str, str], tuple[int, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        ids = set()
        for ev in self.events:
            if ev.id in ids:
                raise KBLoadError(f"duplicate event id {ev.id!r}")
            ids.add(ev.id)
            if ev.type not in self.schema:
                raise KBLoadError(f"event {ev.id!r} has unknown type {ev.type!r}")
            if not ev.fillers:
                raise KBLoadError(f"event {ev.id!r} has no fillers")
            for role, _ in ev.fillers:
                if role not in self.schema[ev.type]:
                    raise KBLoadError(f"event {ev.id!r}: role {role!r} not in schema of {ev.type}")
        self.by_entity, self.by_pair, self.by_type, self.by_role = self._build_indexes()
        self._type_names = sorted({t for ts in self.entity_types.values() for t in ts})

    def _build_indexes(self):
        by_entity = defaultdict(list)
        by_pair = defaultdict(list)
        by_type = defaultdict(list)
        by_role = defaultdict(list)
        for i, ev in enumerate(self.events):
            by_type[ev.type].append(i)
            for role, filler in ev.fillers:
                by_role[ev.type, role, filler].append(i)
            ents = sorted({e for _, e in ev.fillers})
            for e in ents:
                by_entity[e].append(i)
            for a in ents:
                for b in ents:
                    by_pair[a, b].append(i)
        freeze = lambda d: {k: tuple(v) for k, v in d.items()}
        return freeze(by_entity), freeze(by_pair), freeze(by_type), freeze(by_role)

    def audit_indexes(self) -> bool:
        """Rebuild the indexes from scratch and compare with the live ones."""
        return (self.by_entity, self.by_pair, self.by_type, self.by_role) == self._build_indexes()

    @property
    def entities(self) -> frozenset[str]:
        return frozenset(self.entity_types) | frozenset(self.by_entity)

    @property
    def type_names(self) -> list[str]:
        return self._type_names

    def types_of(self, entity: str) -> frozenset[str]:
        return self.entity_types.get(entity, frozenset())

    def __eq__(self, other):
        return (
            isinstance(other, KnowledgeBase)
            and self.schema == other.schema
            and self.entity_types == other.entity_types
            and self.events == other.events
        )


def load_kb(path: str | Path, strict_types: bool = True) -> KnowledgeBase:
    """Read a KB file with ``[schema]``, ``[types]`` and ``[events]`` sections."""
    with open(path, encoding="utf-8") as fh:
        return parse_kb(fh.read(), source=str(path), strict_types=strict_types)


def parse_kb(text: str, source: str = "<kb>", strict_types: bool = True) -> KnowledgeBase:
    schema: dict[str, tuple[str, ...]] = {}
    entity_types: dict[str, frozenset[str]] = {}
    events: list[EventInstance] = []
    seen_ids: set[str] = set()
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("schema", "types", "events"):
                raise KBLoadError(f"{where}: unknown section [{section}]")
            continue
        if section == "schema":
            name, sep, roles = line.partition(":")
            if not sep:
                raise KBLoadError(f"{where}: expected 'event_type: role, ...'")
            role_list = tuple(r.strip() for r in roles.split(",") if r.strip())
            if not role_list:
                raise KBLoadError(f"{where}: event type {name.strip()!r} has no roles")
            schema[name.strip()] = role_list
        elif section == "types":
            ent, sep, types = line.partition(":")
            if not sep:
                raise KBLoadError(f"{where}: expected 'entity: type, ...'")
            entity_types[ent.strip()] = frozenset(t.strip() for t in types.split(",") if t.strip())
        elif section == "events":
            parts = line.split("\t")
            if len(parts) != 3:
                raise KBLoadError(f"{where}: expected id<TAB>event_type<TAB>role=filler;...")
            eid, etype, fillers = (p.strip() for p in parts)
            if eid in seen_ids:
                raise KBLoadError(f"{where}: duplicate event id {eid!r}")
            if etype not in schema:
                raise KBLoadError(f"{where}: unknown event type {etype!r}")
            pairs = []
            for item in fillers.split(";"):
                if not item.strip():
                    continue
                role, sep, filler = item.partition("=")
                role, filler = role.strip(), filler.strip()
                if not sep or not filler:
                    raise KBLoadError(f"{where}: malformed filler {item!r}")
                if role not in schema[etype]:
                    raise KBLoadError(f"{where}: role {role!r} not in schema of {etype}")
                pairs.append((role, filler))
            if not pairs:
                raise KBLoadError(f"{where}: event {eid!r} has no fillers")
            if len({r for r, _ in pairs}) != len(pairs):
                raise KBLoadError(f"{where}: repeated role in event {eid!r}")
            seen_ids.add(eid)
            events.append(EventInstance(eid, etype, tuple(sorted(pairs))))
        else:
            raise KBLoadError(f"{where}: content outside a section")
    return KnowledgeBase(schema, entity_types, events, strict_types=strict_types)


def serialize_kb(kb: KnowledgeBase) -> str:
    lines = ["[schema]"]
    lines += [f"{t}: {', '.join(roles)}" for t, roles in kb.schema.items()]
    lines.append("[types]")
    lines += [f"{e}: {', '.join(sorted(ts))}" for e, ts in kb.entity_types.items()]
    lines.append("[events]")
    lines += [f"{ev.id}\t{ev.type}\t" + ";".join(f"{r}={f}" for r, f in ev.fillers) for ev in kb.events]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GroundedGraph:
    """An ungrounded graph relabelled with KB vocabulary.

    The maps are keyed by the ungrounded nodes and edges, which is what makes
    the back-mapping a bijection: every event node, edge and type node of
    ``ungrounded`` has exactly one KB label.
    """

    ungrounded: UngroundedGraph
    event_types: tuple[tuple[GraphNode, str], ...]
    roles: tuple[tuple[Edge, str], ...]
    types: tuple[tuple[GraphNode, str], ...] = ()

    @property
    def event_type_map(self) -> dict[GraphNode, str]:
        return dict(self.event_types)

    @property
    def role_map(self) -> dict[Edge, str]:
        return dict(self.roles)

    @property
    def type_map(self) -> dict[GraphNode, str]:
        return dict(self.types)

    def serialize(self) -> str:
        ev = self.event_type_map
        lines = []
        for edge, role in self.roles:
            lines.append(f"{ev[edge.src]}.{role}({edge.src.name}, {edge.dst})")
        for edge in self.ungrounded.type_edges:
            lines.append(f"type({edge.src}, {self.type_map[edge.dst]})")
        return "\n".join(sorted(lines))

    def __str__(self):
        return self.serialize()


def make_grounded(u: UngroundedGraph, event_types: Mapping[GraphNode, str], roles: Mapping[Edge, str],
                  types: Mapping[GraphNode, str] = None) -> GroundedGraph:
    types = types or {}
    return GroundedGraph(
        u,
        tuple(sorted(event_types.items())),
        tuple(sorted(roles.items(), key=lambda kv: str(kv[0]))),
        tuple(sorted(types.items())),
    )


class CompiledQuery:
    """A grounded graph compiled into per-event constraint lists."""

    def __init__(self, g: GroundedGraph):
        u = g.ungrounded
        if u.target is None:
            raise QueryError("grounded graph has no TARGET node")
        ev_types = g.event_type_map
        roles = g.role_map
        self.events = []
        for node in u.events:
            fixed = []
            open_roles = []
            for edge in u.edges_from(node):
                role = roles[edge]
                if edge.dst == TARGET:
                    open_roles.append(role)
                elif edge.dst.kind == "entity":
                    fixed.append((role, edge.dst.name))
                else:
                    raise QueryError(f"cannot execute edge to {edge.dst}")
            self.events.append((ev_types[node], tuple(fixed), tuple(open_roles)))
        tmap = g.type_map
        self.entity_type_checks = []
        self.target_types = []
        for edge in u.type_edges:
            kb_type = tmap[edge.dst]
            if edge.src == TARGET:
                self.target_types.append(kb_type)
            else:
                self.entity_type_checks.append((edge.src.name, kb_type))


def _event_matches(ev: EventInstance, etype: str, fixed, open_roles, binding: Optional[str]):
    """Return the target value this event forces (or binding), or False if it fails."""
    if ev.type != etype:
        return False
    roles = ev.roles
    for role, ent in fixed:
        if roles.get(role) != ent:
            return False
    value = binding
    for role in open_roles:
        filler = roles.get(role)
        if filler is None or (value is not None and filler != value):
            return False
        value = filler
    return value if value is not None else True


def execute(g: GroundedGraph, kb: KnowledgeBase) -> list[str]:
    """Answer entities for TARGET, best supported first.

    An answer is supported by every assignment of KB events to the graph's
    event nodes that satisfies all edges and type constraints at once. Answers
    are ordered by descending support count, then entity id.
    """
    q = CompiledQuery(g)
    return filter_answers(support_counts(q, kb), q.entity_type_checks, q.target_types, kb)


def filter_answers(counts: Mapping[str, int], entity_type_checks, target_types, kb: KnowledgeBase) -> list[str]:
    """Apply type constraints to untyped support counts and order the survivors."""
    if kb.strict_types:
        for ent, kb_type in entity_type_checks:
            if kb_type not in kb.types_of(ent):
                return []
        if target_types:
            counts = {x: n for x, n in counts.items() if all(t in kb.types_of(x) for t in target_types)}
    return [e for e, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


def _candidate_events(kb: KnowledgeBase, etype: str, fixed) -> tuple[int, ...]:
    if fixed:
        return min((kb.by_role.get((etype, role, ent), ()) for role, ent in fixed), key=len)
    return kb.by_type.get(etype, ())


def event_support(kb: KnowledgeBase, etype: str, fixed, open_roles):
    """Matches for a single event node.

    Returns a Counter of TARGET value -> number of matching KB events when the
    node has TARGET edges, otherwise the plain number of matching events.
    """
    cands = _candidate_events(kb, etype, fixed)
    if not open_roles:
        return sum(1 for i in cands if _event_matches(kb.events[i], etype, fixed, (), None) is not False)
    per_value: Counter = Counter()
    for i in cands:
        v = _event_matches(kb.events[i], etype, fixed, open_roles, None)
        if v is not False:
            per_value[v] += 1
    return per_value


def join_support(supports) -> Counter:
    """Combine per-event supports into per-answer counts.

    Event nodes only share constants and TARGET, so given a TARGET value the
    events match independently and the number of joint assignments is the
    product of the per-event numbers.
    """
    factor = 1
    counts = None
    for sup in supports:
        if isinstance(sup, int):
            factor *= sup
            if not factor:
                return Counter()
            continue
        if counts is None:
            counts = Counter(sup)
        else:
            counts = Counter({x: n * sup[x] for x, n in counts.items() if x in sup})
        if not counts:
            return Counter()
    if counts is None:
        return Counter()
    return Counter({x: n * factor for x, n in counts.items()})


def support_counts(q: CompiledQuery, kb: KnowledgeBase) -> Counter:
    """Support count per TARGET binding, ignoring type constraints."""
    return join_support(event_support(kb, etype, fixed, open_roles) for etype, fixed, open_roles in q.events)


def predicates_between(entities: Iterable[str], kb: KnowledgeBase) -> dict[tuple[str, str], set[tuple[str, str, str]]]:
    """For every ordered entity pair, the (event type, role_a, role_b) triples linking them."""
    ents = sorted(set(entities))
    out: dict[tuple[str, str], set] = {}
    for a in ents:
        for b in ents:
            found = set()
            for i in kb.by_pair.get((a, b), ()):
                ev = kb.events[i]
                for ra, fa in ev.fillers:
                    if fa != a:
                        continue
                    for rb, fb in ev.fillers:
                        if fb == b and rb != ra:
                            found.add((ev.type, ra, rb))
            if found:
                out[a, b] = found
    return out
