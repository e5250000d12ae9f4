"""Seeded synthetic world KB and cloze corpus with gold supertags.

The world holds companies, people, places, universities and years linked by
reified events. Sentences are realised from small templates, each tied to one
or two events, with one entity mention blanked out. Templates cover active
and passive clauses, prepositional arguments and adjuncts, relative clauses,
nominal prepositional modifiers, appositive nouns and coordination.
"""
from __future__ import annotations

import hashlib
import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .categories import Category, parse_category
from .corpus import BLANK, CorpusRecord, corpus_stats, write_corpus
from .kb import EventInstance, KnowledgeBase, serialize_kb
from .lexicon import write_lexicon_file
from .parser import Token

SCHEMA = {
    "business.acquisition": ("acquiring_company", "company_acquired", "date"),
    "organization.founding": ("organization", "founder", "place", "date"),
    "organization.headquarters": ("organization", "location"),
    "organization.leadership": ("organization", "leader", "start_date"),
    "people.birth": ("person", "place", "date"),
    "people.employment": ("employee", "employer", "start_date"),
    "people.education": ("student", "institution", "date"),
    "location.containment": ("container", "contained"),
}

KIND_TYPES = {
    "company": ("organization.company", "organization.organization"),
    "person": ("people.person",),
    "city": ("location.city", "location.location"),
    "country": ("location.country", "location.location"),
    "university": ("education.university", "organization.organization"),
    "year": ("type.datetime",),
}

_SYLLABLES = ("ka", "lo", "ren", "vi", "tor", "sa", "mi", "dex", "no", "ra", "qu", "bel", "fin", "zo",
              "ta", "ver", "mon", "ly", "cor", "pa", "gri", "sen", "hal", "ox")
_COMPANY_SUFFIX = ("Labs", "Systems", "Corp", "Group", "Works", "Networks", "Media", "Motors", "Bio", "Soft")
_FIRST = ("Ana", "Ben", "Chen", "Dara", "Eli", "Farah", "Gus", "Hana", "Ivo", "Jun", "Kemal", "Lena", "Milo",
          "Nia", "Omar", "Pia", "Raj", "Sofia", "Tomas", "Uma", "Vera", "Wen", "Yara", "Zane")
_CITY_SUFFIX = ("ville", "ford", "burg", "port", "dale", "field", "haven", "ton")


@dataclass(frozen=True)
class WorldConfig:
    companies: int = 220
    people: int = 220
    cities: int = 45
    countries: int = 10
    universities: int = 24
    first_year: int = 1950
    last_year: int = 2019
    acquisitions: int = 160
    # the entities used by the running examples, always present
    anchors: bool = True


def _name(rng: random.Random, parts: int) -> str:
    return "".join(rng.choice(_SYLLABLES) for _ in range(parts)).capitalize()


def _unique(rng, make, n, taken):
    out = []
    while len(out) < n:
        x = make()
        if x not in taken:
            taken.add(x)
            out.append(x)
    return out


def build_world(seed: int = 0, cfg: WorldConfig = WorldConfig()) -> KnowledgeBase:
    """A random but seeded KB; every entity kind has its own naming scheme."""
    rng = random.Random(seed)
    taken: set = set()
    anchors_c = ["Google", "Nest", "DeepMind"] if cfg.anchors else []
    anchors_l = ["Palo_Alto", "Menlo_Park", "Mountain_View"] if cfg.anchors else []
    taken.update(anchors_c + anchors_l)
    companies = anchors_c + _unique(rng, lambda: f"{_name(rng, 2)}_{rng.choice(_COMPANY_SUFFIX)}",
                                    cfg.companies - len(anchors_c), taken)
    people = _unique(rng, lambda: f"{rng.choice(_FIRST)}_{_name(rng, 2)}", cfg.people, taken)
    cities = anchors_l + _unique(rng, lambda: _name(rng, 2) + rng.choice(_CITY_SUFFIX),
                                 cfg.cities - len(anchors_l), taken)
    countries = _unique(rng, lambda: _name(rng, 2) + "ia", cfg.countries, taken)
    universities = _unique(rng, lambda: f"{_name(rng, 2)}_University", cfg.universities, taken)
    years = [str(y) for y in range(cfg.first_year, cfg.last_year + 1)]

    entity_types = {}
    for kind, names in (("company", companies), ("person", people), ("city", cities),
                        ("country", countries), ("university", universities), ("year", years)):
        for e in names:
            entity_types[e] = frozenset(KIND_TYPES[kind])

    events = []

    def add(etype, **fillers):
        events.append(EventInstance(f"m{len(events) + 1}", etype, tuple(sorted(fillers.items()))))

    year = lambda lo=cfg.first_year, hi=cfg.last_year: str(rng.randint(lo, hi))
    for city in cities:
        add("location.containment", container=rng.choice(countries), contained=city)
    founded_year = {}
    for c in companies:
        founded_year[c] = int(year(cfg.first_year, cfg.last_year - 15))
        add("organization.founding", organization=c, founder=rng.choice(people),
            place=rng.choice(cities), date=str(founded_year[c]))
        add("organization.headquarters", organization=c, location=rng.choice(cities))
        if rng.random() < 0.6:
            add("organization.leadership", organization=c, leader=rng.choice(people),
                start_date=year(founded_year[c], cfg.last_year))
    for u in universities:
        add("organization.headquarters", organization=u, location=rng.choice(cities))
    for p in people:
        add("people.birth", person=p, place=rng.choice(cities), date=year(cfg.first_year, 1990))
        for _ in range(rng.choice((1, 1, 2))):
            add("people.employment", employee=p, employer=rng.choice(companies), start_date=year(1975))
        add("people.education", student=p, institution=rng.choice(universities), date=year(1970))
    pairs = set()
    while len(pairs) < cfg.acquisitions:
        a, b = rng.sample(companies, 2)
        if (a, b) in pairs or (b, a) in pairs:
            continue
        pairs.add((a, b))
        add("business.acquisition", acquiring_company=a, company_acquired=b,
            date=year(max(founded_year[a], founded_year[b]) + 1, cfg.last_year))
    if cfg.anchors:
        # the running examples: Google bought Nest (founded in Palo Alto) and DeepMind in 2014
        add("business.acquisition", acquiring_company="Google", company_acquired="Nest", date="2014")
        add("business.acquisition", acquiring_company="Google", company_acquired="DeepMind", date="2014")
    return KnowledgeBase(dict(SCHEMA), entity_types, events)


def toy_kb() -> KnowledgeBase:
    """The small hand-built KB used by the worked examples."""
    from .kb import parse_kb

    return parse_kb(TOY_KB_TEXT, "<toy>")


TOY_KB_TEXT = """\
[schema]
business.acquisition: acquiring_company, company_acquired, date
organization.founding: organization, founder, place, date
organization.headquarters: organization, location
[types]
Google: organization.company, organization.organization
Nest: organization.company, organization.organization
DeepMind: organization.company, organization.organization
Palo_Alto: location.city, location.location
Menlo_Park: location.city, location.location
London: location.city, location.location
Mountain_View: location.city, location.location
2010: type.datetime
2014: type.datetime
1998: type.datetime
[events]
m1\tbusiness.acquisition\tacquiring_company=Google;company_acquired=Nest;date=2014
m2\tbusiness.acquisition\tacquiring_company=Google;company_acquired=DeepMind;date=2014
m3\torganization.founding\torganization=Nest;place=Palo_Alto;date=2010
m4\torganization.founding\torganization=Google;place=Menlo_Park;date=1998
m5\torganization.founding\torganization=DeepMind;place=London;date=2010
m6\torganization.headquarters\torganization=Google;location=Mountain_View
"""


# --- templates ---------------------------------------------------------------

ADJ = r"((S\NP)\(S\NP))/NP"
AUX = r"(S\NP)/(S\NP)"
TV = r"(S\NP)/NP"
PPV = r"(S\NP)/PP"
VP = r"S\NP"
REL = r"(NP\NP)/(S\NP)"

# word|POS|category literals and {event.role[:category]} slots
TEMPLATES = {
    "acq_active": ({"a": "business.acquisition"}, {},
                   f"{{a.acquiring_company}} $ACQ|VBD|{TV} {{a.company_acquired}}"),
    "acq_active_date": ({"a": "business.acquisition"}, {},
                        f"{{a.acquiring_company}} $ACQ|VBD|{TV} {{a.company_acquired}} in|IN|{ADJ} {{a.date}}"),
    "acq_passive": ({"a": "business.acquisition"}, {},
                    f"{{a.company_acquired}} was|VBD|{AUX} $ACQ|VBN|{VP} by|IN|{ADJ} {{a.acquiring_company}}"),
    "acq_passive_date": ({"a": "business.acquisition"}, {},
                         f"{{a.company_acquired}} was|VBD|{AUX} $ACQ|VBN|{VP} by|IN|{ADJ} "
                         f"{{a.acquiring_company}} in|IN|{ADJ} {{a.date}}"),
    "found_active": ({"f": "organization.founding"}, {},
                     f"{{f.founder}} $FOUND|VBD|{TV} {{f.organization}}"),
    "found_active_date": ({"f": "organization.founding"}, {},
                          f"{{f.founder}} $FOUND|VBD|{TV} {{f.organization}} in|IN|{ADJ} {{f.date}}"),
    "found_active_place_date": ({"f": "organization.founding"}, {},
                                f"{{f.founder}} $FOUND|VBD|{TV} {{f.organization}} in|IN|{ADJ} {{f.place}} "
                                f"in|IN|{ADJ} {{f.date}}"),
    "found_passive_by_place": ({"f": "organization.founding"}, {},
                               f"{{f.organization}} was|VBD|{AUX} $FOUND|VBN|{VP} by|IN|{ADJ} {{f.founder}} "
                               f"in|IN|{ADJ} {{f.place}}"),
    "found_passive_place_date": ({"f": "organization.founding"}, {},
                                 f"{{f.organization}} was|VBD|{AUX} $FOUND|VBN|{VP} in|IN|{ADJ} {{f.place}} "
                                 f"in|IN|{ADJ} {{f.date}}"),
    "found_passive_full": ({"f": "organization.founding"}, {},
                           f"{{f.organization}} was|VBD|{AUX} $FOUND|VBN|{VP} by|IN|{ADJ} {{f.founder}} "
                           f"in|IN|{ADJ} {{f.place}} in|IN|{ADJ} {{f.date}}"),
    "hq": ({"h": "organization.headquarters"}, {},
           f"{{h.organization}} is|VBZ|{AUX} $HQ|VBN|{VP} in|IN|{ADJ} {{h.location}}"),
    "birth": ({"b": "people.birth"}, {},
              f"{{b.person}} was|VBD|{AUX} born|VBN|{VP} in|IN|{ADJ} {{b.place}}"),
    "birth_date": ({"b": "people.birth"}, {},
                   f"{{b.person}} was|VBD|{AUX} born|VBN|{VP} in|IN|{ADJ} {{b.place}} in|IN|{ADJ} {{b.date}}"),
    "works": ({"w": "people.employment"}, {},
              f"{{w.employee}} works|VBZ|{PPV} for|IN|PP/NP {{w.employer}}"),
    "joined": ({"w": "people.employment"}, {},
               f"{{w.employee}} joined|VBD|{TV} {{w.employer}} in|IN|{ADJ} {{w.start_date}}"),
    "studied": ({"e": "people.education"}, {},
                f"{{e.student}} studied|VBD|{PPV} at|IN|PP/NP {{e.institution}}"),
    "graduated": ({"e": "people.education"}, {},
                  f"{{e.student}} graduated|VBD|{PPV} from|IN|PP/NP {{e.institution}} in|IN|{ADJ} {{e.date}}"),
    "leads": ({"l": "organization.leadership"}, {},
              f"{{l.leader}} $LEAD|VBZ|{TV} {{l.organization}}"),
    "appointed": ({"l": "organization.leadership"}, {},
                  f"{{l.organization}} appointed|VBD|{TV} {{l.leader}} in|IN|{ADJ} {{l.start_date}}"),
    "located": ({"c": "location.containment"}, {},
                f"{{c.contained}} is|VBZ|{AUX} located|VBN|{VP} in|IN|{ADJ} {{c.container}}"),
    # two-event templates
    "rel_founded_in": ({"a": "business.acquisition", "f": "organization.founding"},
                       {"f.organization": "a.company_acquired"},
                       f"{{a.acquiring_company}} $ACQ|VBD|{TV} {{a.company_acquired}} which|WDT|{REL} "
                       f"was|VBD|{AUX} $FOUND|VBN|{VP} in|IN|{ADJ} {{f.place}}"),
    "rel_founded_by": ({"a": "business.acquisition", "f": "organization.founding"},
                       {"f.organization": "a.company_acquired"},
                       f"{{a.acquiring_company}} $ACQ|VBD|{TV} {{a.company_acquired}} which|WDT|{REL} "
                       f"was|VBD|{AUX} $FOUND|VBN|{VP} by|IN|{ADJ} {{f.founder}}"),
    "rel_founded_by_date": ({"a": "business.acquisition", "f": "organization.founding"},
                            {"f.organization": "a.company_acquired"},
                            f"{{a.acquiring_company}} $ACQ|VBD|{TV} {{a.company_acquired}} which|WDT|{REL} "
                            f"was|VBD|{AUX} $FOUND|VBN|{VP} by|IN|{ADJ} {{f.founder}} in|IN|{ADJ} {{f.date}}"),
    "rel_based": ({"a": "business.acquisition", "h": "organization.headquarters"},
                  {"h.organization": "a.company_acquired"},
                  f"{{a.acquiring_company}} $ACQ|VBD|{TV} {{a.company_acquired}} which|WDT|{REL} "
                  f"is|VBZ|{AUX} $HQ|VBN|{VP} in|IN|{ADJ} {{h.location}}"),
    "rel_acquired": ({"f": "organization.founding", "a": "business.acquisition"},
                     {"a.company_acquired": "f.organization"},
                     f"{{f.founder}} $FOUND|VBD|{TV} {{f.organization}} which|WDT|{REL} was|VBD|{AUX} "
                     f"$ACQ|VBN|{VP} by|IN|{ADJ} {{a.acquiring_company}} in|IN|{ADJ} {{a.date}}"),
    "rel_born": ({"b": "people.birth", "f": "organization.founding"}, {"f.founder": "b.person"},
                 f"{{b.person}} who|WP|{REL} was|VBD|{AUX} born|VBN|{VP} in|IN|{ADJ} {{b.place}} "
                 f"$FOUND|VBD|{TV} {{f.organization}}"),
    "of_place": ({"a": "business.acquisition", "h": "organization.headquarters"},
                 {"h.organization": "a.acquiring_company"},
                 f"{{a.acquiring_company}} of|IN|(NP\\NP)/NP {{h.location}} $ACQ|VBD|{TV} "
                 f"{{a.company_acquired}} in|IN|{ADJ} {{a.date}}"),
    "appositive": ({"a": "business.acquisition"}, {},
                   f"{{a.acquiring_company}} $ACQ|VBD|{TV} the|DT|NP/N company|NN|N/N "
                   f"{{a.company_acquired:N}} in|IN|{ADJ} {{a.date}}"),
    "coordination": ({"f": "organization.founding", "w": "people.employment"},
                     {"w.employer": "f.organization"},
                     f"{{f.founder}} and|CC|conj {{w.employee}} worked|VBD|{PPV} for|IN|PP/NP {{f.organization}}"),
}

SYNONYMS = {
    "$ACQ": ("acquired", "bought", "purchased"),
    "$FOUND": ("founded", "established", "started"),
    "$HQ": ("headquartered", "based"),
    "$LEAD": ("leads", "runs", "heads"),
}

# relative frequency of each template
WEIGHTS = {
    "acq_active": 3, "acq_active_date": 4, "acq_passive": 2, "acq_passive_date": 2,
    "found_active": 3, "found_active_date": 3, "found_active_place_date": 2,
    "found_passive_by_place": 2, "found_passive_place_date": 2, "found_passive_full": 2,
    "hq": 3, "birth": 3, "birth_date": 3, "works": 3, "joined": 2, "studied": 2, "graduated": 2,
    "leads": 2, "appointed": 2, "located": 2,
    "rel_founded_in": 2, "rel_founded_by": 2, "rel_founded_by_date": 2, "rel_based": 2,
    "rel_acquired": 2, "rel_born": 2, "of_place": 2, "appositive": 2, "coordination": 1,
}


@dataclass(frozen=True)
class _Piece:
    word: Optional[str] = None
    pos: Optional[str] = None
    category: Optional[Category] = None
    slot: Optional[tuple[str, str]] = None


def _compile(pattern: str) -> list[_Piece]:
    pieces = []
    for item in pattern.split():
        if item.startswith("{"):
            ref, _, cat = item[1:-1].partition(":")
            ev, role = ref.split(".")
            pieces.append(_Piece(slot=(ev, role), category=parse_category(cat or "NP")))
        else:
            word, pos, cat = item.split("|")
            pieces.append(_Piece(word, pos, parse_category(cat)))
    return pieces


_COMPILED = {name: (evs, joins, _compile(pat)) for name, (evs, joins, pat) in TEMPLATES.items()}


def _slot_pos(entity: str) -> str:
    return "CD" if entity.isdigit() else "NNP"


class _Realiser:
    def __init__(self, kb: KnowledgeBase, rng: random.Random):
        self.kb = kb
        self.rng = rng
        self.by_type = defaultdict(list)
        for ev in kb.events:
            self.by_type[ev.type].append(ev)
        self.index = defaultdict(list)  # (type, role, filler) -> events
        for ev in kb.events:
            for role, filler in ev.fillers:
                self.index[ev.type, role, filler].append(ev)

    def instantiate(self, name: str):
        evs, joins, pieces = _COMPILED[name]
        needed = defaultdict(set)
        for p in pieces:
            if p.slot:
                needed[p.slot[0]].add(p.slot[1])
        chosen = {}
        for var, etype in evs.items():
            options = None
            for lhs, rhs in joins.items():
                lv, lrole = lhs.split(".")
                rv, rrole = rhs.split(".")
                if lv == var and rv in chosen:
                    value = chosen[rv].roles.get(rrole)
                    options = self.index.get((etype, lrole, value), [])
            if options is None:
                options = self.by_type[etype]
            options = [ev for ev in options if needed[var] <= ev.roles.keys()]
            if not options:
                return None
            chosen[var] = self.rng.choice(options)
        synonyms = {k: self.rng.choice(v) for k, v in SYNONYMS.items()}
        tokens, tags, mentions = [], [], []
        for p in pieces:
            if p.slot:
                ent = chosen[p.slot[0]].roles[p.slot[1]]
                mentions.append(len(tokens))
                tokens.append(Token(ent, _slot_pos(ent), ent))
            else:
                word = synonyms.get(p.word, p.word)
                tokens.append(Token(word, p.pos))
            tags.append(p.category)
        ents = [tokens[i].entity for i in mentions]
        if len(set(ents)) != len(ents):
            return None
        return tokens, tags, mentions


def generate_corpus(kb: KnowledgeBase, n: int, seed: int, prefix: str = "s") -> list[CorpusRecord]:
    rng = random.Random(seed)
    realiser = _Realiser(kb, rng)
    names = sorted(WEIGHTS)
    weights = [WEIGHTS[k] for k in names]
    out = []
    while len(out) < n:
        name = rng.choices(names, weights)[0]
        got = realiser.instantiate(name)
        if got is None:
            continue
        tokens, tags, mentions = got
        blank = rng.choice(mentions)
        answer = tokens[blank].entity
        tokens[blank] = Token(BLANK, tokens[blank].pos, None, True)
        out.append(CorpusRecord(f"{prefix}{len(out):05d}", tuple(tokens), blank, answer, tuple(tags),
                                len(mentions)))
    return out


def ranked_entries(records: Sequence[CorpusRecord], key: str = "word", coverage: float = 0.95):
    """Per-key category sets covering ``coverage`` of the key's occurrences, most frequent key first."""
    counts: dict = defaultdict(Counter)
    for r in records:
        for tok, cat in zip(r.tokens, r.supertags):
            if tok.is_blank:
                continue
            k = tok.surface.lower() if key == "word" else tok.pos
            counts[k][cat] += 1
    entries = []
    for k, cats in counts.items():
        total = sum(cats.values())
        kept, acc = [], 0
        for cat, c in sorted(cats.items(), key=lambda kv: (-kv[1], str(kv[0]))):
            kept.append(cat)
            acc += c
            if acc >= coverage * total:
                break
        entries.append((k, total, frozenset(kept)))
    entries.sort(key=lambda e: (-e[1], e[0]))
    return [(k, cats) for k, _, cats in entries]


SPLITS = {"train": 3000, "dev": 400, "test": 2000}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_bundle(out_dir: str | Path, seed: int = 0, splits: dict = None) -> dict:
    """Write KB, corpus splits, lexicons and a manifest; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits = splits or SPLITS
    kb = build_world(seed)
    (out / "kb.txt").write_text(serialize_kb(kb), encoding="utf-8")
    (out / "toy_kb.txt").write_text(TOY_KB_TEXT, encoding="utf-8")
    manifest = {"seed": seed, "splits": {}, "files": {}}
    corpora = {}
    for i, (name, n) in enumerate(splits.items()):
        records = generate_corpus(kb, n, seed * 1000 + i + 1, prefix=f"{name}-")
        corpora[name] = records
        write_corpus(out / f"{name}.jsonl", records)
        st = corpus_stats(records)
        manifest["splits"][name] = {"sentences": st.sentences, "tokens": st.tokens, "types": st.types,
                                    "entities": st.entities}
    write_lexicon_file(out / "lexicon_word.tsv", ranked_entries(corpora["train"], "word"),
                       "word-level categories covering 95% of training occurrences, most frequent first")
    write_lexicon_file(out / "lexicon_pos.tsv", ranked_entries(corpora["train"], "pos"),
                       "POS-level categories covering 95% of training occurrences, most frequent first")
    for f in sorted(out.iterdir()):
        if f.name != "manifest.json" and not f.name.startswith("expected") and f.is_file() and f.suffix in (".txt", ".jsonl", ".tsv"):
            manifest["files"][f.name] = _sha256(f)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
