"""Lexicons for the four supervision tiers and bounded category induction."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .categories import (
    DEFAULT_MAX_DEPTH,
    CONJ,
    FORWARD,
    N,
    NOMINAL_ATOMS,
    NP,
    PP,
    S,
    Category,
    CategoryParseError,
    back,
    fwd,
    parse_category_list,
)

log = logging.getLogger(__name__)

NOMINAL_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS", "CD", "PRP"})
VERBAL_TAGS = frozenset({"VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "MD"})
CONJ_TAGS = frozenset({"CC", ","})
PREP_TAGS = frozenset({"IN", "TO"})
FUNCTION_TAGS = frozenset({"DT", "WDT", "WP", "RB", "JJ", "POS", "IN", "TO", "CC", ",", ".", "PDT", "EX"})
TAGSET = NOMINAL_TAGS | VERBAL_TAGS | FUNCTION_TAGS

MODES = ("gold", "word_constrained", "pos_constrained", "induced")


class LexiconError(ValueError):
    pass


class LexiconCoverageError(LexiconError):
    """A token ended up with no candidate category."""


@dataclass(frozen=True)
class InductionConfig:
    rounds: int = 2
    max_depth: int = DEFAULT_MAX_DEPTH
    max_arity: int = 3
    # what to do with a tag outside TAGSET: "np" assigns {NP}, "error" raises
    unknown_pos: str = "np"


def _seed(tag: str) -> frozenset[Category]:
    if tag in NOMINAL_TAGS:
        return frozenset({N, NP})
    if tag in VERBAL_TAGS:
        return frozenset({S})
    if tag in CONJ_TAGS:
        return frozenset({CONJ})
    return frozenset()


def _argument_seed(tag: str | None) -> frozenset[Category]:
    # categories a neighbouring token can contribute as an argument
    if tag is None:
        return frozenset()
    if tag in NOMINAL_TAGS:
        return frozenset({N, NP})
    if tag in VERBAL_TAGS:
        return frozenset({S})
    if tag in PREP_TAGS:
        return frozenset({PP})
    return frozenset()


def _has_forward_args(c: Category) -> bool:
    return not c.is_atomic and c.slash == FORWARD


def _projection(c: Category) -> Category:
    while _has_forward_args(c):
        c = c.result
    return c


def _modifiable(c: Category) -> bool:
    # S, N, NP, or an intransitive verb phrase S\N / S\NP
    if c.is_atomic:
        return c in (S, N, NP)
    return c.arity == 1 and c.result == S and c.argument in NOMINAL_ATOMS and c.slash != FORWARD


def induce_categories(pos_tags: Sequence[str], cfg: InductionConfig = InductionConfig()) -> list[frozenset[Category]]:
    """Candidate categories per token from POS tags alone.

    Nominal tags are seeded with {N, NP}, verbal tags with {S}, coordinators
    with {conj}; everything else starts empty. Each round then lets

    * verbal tokens take an adjacent token's seed as a backward (left) or
      forward (right) argument, backward arguments inside forward ones;
    * function words become modifiers X\\X or X/X of any S, N, NP or
      intransitive verb-phrase category present in the sentence (after
      stripping forward arguments), optionally taking the right neighbour's
      nominal seed as an argument;
    * prepositions head PP/X for a nominal right neighbour, and determiners
      NP/N before a noun.

    Sets only ever grow from one round to the next.
    """
    tags = list(pos_tags)
    n = len(tags)
    for i, tag in enumerate(tags):
        if tag not in TAGSET:
            if cfg.unknown_pos == "error":
                raise LexiconError(f"unknown POS tag {tag!r} at token {i}")
            log.warning("unknown POS tag %r at token %d; assigning NP", tag, i)

    known = [t in TAGSET for t in tags]
    current = [_seed(t) if ok else frozenset({NP}) for t, ok in zip(tags, known)]

    def fits(c: Category) -> bool:
        return c.depth <= cfg.max_depth and c.arity <= cfg.max_arity

    for _ in range(cfg.rounds):
        projections = {
            p for cats in current for c in cats if _modifiable(p := _projection(c))
        }
        projections = sorted(projections, key=str)
        new = []
        for i, tag in enumerate(tags):
            cats = set(current[i])
            if not known[i]:
                new.append(frozenset(cats))
                continue
            left = _argument_seed(tags[i - 1]) if i > 0 else frozenset()
            right = _argument_seed(tags[i + 1]) if i + 1 < n else frozenset()
            if tag in VERBAL_TAGS:
                for h in current[i]:
                    if h.root != S:
                        continue
                    grown = []
                    if not _has_forward_args(h):
                        grown += [back(h, a) for a in left]
                    grown += [fwd(h, b) for b in right]
                    if not _has_forward_args(h):
                        grown += [fwd(back(h, a), b) for a in left for b in right]
                    cats.update(c for c in grown if fits(c))
            elif tag in FUNCTION_TAGS:
                nominal_right = right & NOMINAL_ATOMS
                for x in projections:
                    mods = []
                    if i > 0:
                        mods.append(back(x, x))
                    if i + 1 < n:
                        mods.append(fwd(x, x))
                    for m in mods:
                        if fits(m):
                            cats.add(m)
                        for b in nominal_right:
                            c = fwd(m, b)
                            if fits(c):
                                cats.add(c)
                if tag in PREP_TAGS:
                    cats.update(fwd(PP, b) for b in nominal_right)
                if N in right and tag not in CONJ_TAGS:
                    cats.add(fwd(NP, N))
            new.append(frozenset(cats))
        current = new
    return current


@dataclass(frozen=True)
class Lexicon:
    """Word- and POS-keyed category sets plus the mode that selects between them.

    Keys missing from the active table fall back to induced candidates.
    """

    word_entries: Mapping[str, frozenset[Category]] = field(default_factory=dict)
    pos_entries: Mapping[str, frozenset[Category]] = field(default_factory=dict)
    mode: str = "induced"
    induction: InductionConfig = InductionConfig()

    def __post_init__(self):
        if self.mode not in MODES:
            raise LexiconError(f"unknown lexicon mode {self.mode!r}")
        for table in (self.word_entries, self.pos_entries):
            for key, cats in table.items():
                if not cats:
                    raise LexiconError(f"empty category set for {key!r}")

    def candidates(self, words: Sequence[str], tags: Sequence[str]) -> list[frozenset[Category]]:
        if self.mode == "gold":
            raise LexiconError("gold mode takes supertags from the data, not the lexicon")
        induced = induce_categories(tags, self.induction)
        if self.mode == "induced":
            return induced
        out = []
        for word, tag, fallback in zip(words, tags, induced):
            if self.mode == "word_constrained":
                cats = self.word_entries.get(word.lower())
            else:
                cats = self.pos_entries.get(tag)
            out.append(cats if cats is not None else fallback)
        return out

    def with_mode(self, mode: str) -> "Lexicon":
        return Lexicon(self.word_entries, self.pos_entries, mode, self.induction)


def constrain_lexicon(lex: Lexicon, ranked_entries: Sequence[tuple[str, Iterable[Category]]], k: int,
                      level: str = "word") -> Lexicon:
    """Restrict the ``k`` most frequent keys to their listed categories.

    ``ranked_entries`` is sorted by key frequency, most frequent first. Keys
    beyond ``k`` keep falling back to induction; ``k`` larger than the list
    constrains everything available. ``k == 0`` returns ``lex`` itself.
    """
    if k < 0:
        raise ValueError(f"lexicon size must be non-negative, got {k}")
    if k == 0:
        return lex
    chosen = {key: frozenset(cats) for key, cats in ranked_entries[:k]}
    if level == "word":
        table = dict(lex.word_entries)
        table.update(chosen)
        return Lexicon(table, lex.pos_entries, "word_constrained", lex.induction)
    if level == "pos":
        table = dict(lex.pos_entries)
        table.update(chosen)
        return Lexicon(lex.word_entries, table, "pos_constrained", lex.induction)
    raise ValueError(f"unknown lexicon level {level!r}")


def read_lexicon_file(path: str | Path) -> list[tuple[str, frozenset[Category]]]:
    """Read ``key<TAB>cat,cat,...`` lines, keeping file order (frequency rank)."""
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise LexiconError(f"{path}:{lineno}: expected key<TAB>categories")
            key, cats = line.split("\t", 1)
            try:
                parsed = parse_category_list(cats)
            except CategoryParseError as exc:
                raise LexiconError(f"{path}:{lineno}: {exc}") from exc
            if not parsed:
                raise LexiconError(f"{path}:{lineno}: no categories for {key!r}")
            if key in seen:
                raise LexiconError(f"{path}:{lineno}: duplicate key {key!r}")
            seen.add(key)
            entries.append((key, frozenset(parsed)))
    return entries


def write_lexicon_file(path: str | Path, entries: Sequence[tuple[str, Iterable[Category]]], header: str = ""):
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for key, cats in entries:
            fh.write(key + "\t" + ",".join(sorted(str(c) for c in cats)) + "\n")
