"""Sentence-level pipeline: parse, compose, ground, featurize; tier setup."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corpus import CorpusRecord
from .grounding import CandidateSet, GroundingConfig, ground_with_answers
from .kb import GroundedGraph, KnowledgeBase
from .lexicon import Lexicon, LexiconCoverageError, constrain_lexicon
from .parser import Derivation, ParseConfig, candidate_sets, parse
from .ranker import PerceptronModel, featurize, rank, train_vectors
from .semantics import compose_valid

log = logging.getLogger(__name__)

TIERS = ("supervised", "semi-word", "semi-pos", "unsupervised")
MODES = TIERS + ("bow",)
SEMI_WORD_SIZE = 200


@dataclass(frozen=True)
class PipelineConfig:
    parse: ParseConfig = ParseConfig()
    grounding: GroundingConfig = GroundingConfig()
    epochs: int = 10
    seed: int = 0


@dataclass
class Prepared:
    """Everything the ranker needs for one sentence, computed once."""

    record: CorpusRecord
    derivations: list[Derivation] = field(default_factory=list)
    candidates: list[GroundedGraph] = field(default_factory=list)
    answers: list[list[str]] = field(default_factory=list)
    features: list = field(default_factory=list)
    source: list[int] = field(default_factory=list)  # derivation index per candidate
    n_graphs: int = 0
    truncated: bool = False
    error: Optional[str] = None

    def positives(self) -> list[int]:
        gold = self.record.answer
        return [i for i, a in enumerate(self.answers) if a and a[0] == gold]

    def candidate_set(self) -> CandidateSet:
        return CandidateSet(
            list(self.candidates), self.positives(), self.record.id,
            tuple(dict.fromkeys(c.ungrounded for c in self.candidates)), self.truncated,
        )


def record_candidates(record: CorpusRecord, lexicon: Lexicon) -> list[frozenset]:
    """Per-token candidate categories for ``record`` under ``lexicon``."""
    if lexicon.mode == "gold":
        if record.supertags is None:
            raise LexiconCoverageError(f"record {record.id} has no gold supertags")
        return candidate_sets(record.tokens, supertags=record.supertags)
    return candidate_sets(record.tokens, lexicon)


def prepare(record: CorpusRecord, lexicon: Lexicon, kb: KnowledgeBase,
            cfg: PipelineConfig = PipelineConfig(), candidates=None) -> Prepared:
    """Parse the top derivations and pool the groundings of all their graphs.

    Candidates are de-duplicated by serialisation and sorted by it, which is
    the tie-breaking order used at prediction time.
    """
    out = Prepared(record)
    try:
        if candidates is None:
            candidates = record_candidates(record, lexicon)
        out.derivations = parse(record.tokens, cfg=cfg.parse, candidates=candidates)
    except LexiconCoverageError as exc:
        out.error = str(exc)
        return out
    pool: dict[str, tuple] = {}
    seen_graphs = set()
    for di, d in enumerate(out.derivations):
        for g in compose_valid(d, record.tokens):
            if g.target is None:
                continue  # the blank was lost in composition: nothing to predict
            key = g.serialize()
            if key in seen_graphs:
                continue
            seen_graphs.add(key)
            grounded = ground_with_answers(g, kb, cfg.grounding)
            out.truncated |= grounded.truncated
            for cand, answers in grounded:
                ckey = cand.serialize()
                if ckey not in pool:
                    pool[ckey] = (cand, answers, di)
    out.n_graphs = len(seen_graphs)
    for key in sorted(pool):
        cand, answers, di = pool[key]
        out.candidates.append(cand)
        out.answers.append(answers)
        out.source.append(di)
        out.features.append(featurize(cand))
    return out


class PrepareCache:
    """Memoises :func:`prepare` on (record id, per-token candidate sets).

    Lexicons that agree on a sentence's candidate sets share its parse and
    groundings, which is what makes tier comparisons and lexicon sweeps cheap.
    Only valid for a fixed KB and pipeline configuration.
    """

    def __init__(self, kb: KnowledgeBase, cfg: PipelineConfig = PipelineConfig()):
        self.kb = kb
        self.cfg = cfg
        self._store: dict = {}
        self.hits = 0

    def get(self, record: CorpusRecord, lexicon: Lexicon) -> Prepared:
        try:
            cands = record_candidates(record, lexicon)
        except LexiconCoverageError:
            return prepare(record, lexicon, self.kb, self.cfg)
        key = (record.id, tuple(cands))
        hit = self._store.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        p = prepare(record, lexicon, self.kb, self.cfg, candidates=cands)
        self._store[key] = p
        return p


def predict_prepared(p: Prepared, model: PerceptronModel):
    """(first answer, grounded graph) of the top-ranked candidate, or None."""
    best = rank(p.candidates, model, p.features)
    if best is None:
        return None
    return p.answers[best][0], p.candidates[best]


def chosen_derivation(p: Prepared, model: PerceptronModel) -> Optional[Derivation]:
    best = rank(p.candidates, model, p.features)
    if best is not None:
        return p.derivations[p.source[best]]
    return p.derivations[0] if p.derivations else None


def train_prepared(prepared: Sequence[Prepared], epochs: int, seed: int) -> PerceptronModel:
    return train_vectors([(p.features, p.positives()) for p in prepared], epochs, seed)


def tier_lexicon(tier: str, word_entries=(), pos_entries=(), word_size: int = SEMI_WORD_SIZE) -> Lexicon:
    """The lexicon used by each supervision tier."""
    base = Lexicon()
    if tier == "supervised":
        return base.with_mode("gold")
    if tier == "unsupervised":
        return base
    if tier == "semi-word":
        return constrain_lexicon(base, list(word_entries), word_size, level="word")
    if tier == "semi-pos":
        return constrain_lexicon(base, list(pos_entries), len(pos_entries), level="pos")
    raise ValueError(f"unknown supervision tier {tier!r}")
