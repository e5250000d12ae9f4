"""End-to-end runs over a data bundle: supervision tiers, baseline, sweep."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .baseline import predict_bow, train_bow
from .corpus import CorpusRecord, load_corpus
from .evaluation import EvalReport, Prediction, SweepResult, evaluate, sweep_lexicon
from .kb import KnowledgeBase, load_kb
from .lexicon import read_lexicon_file
from .pipeline import (
    TIERS,
    PipelineConfig,
    PrepareCache,
    predict_prepared,
    tier_lexicon,
    train_prepared,
)
from .ranker import PerceptronModel

log = logging.getLogger(__name__)

SWEEP_SIZES = (0, 50, 100, 200, 500)


def bundled_data_dir() -> Path:
    return Path(str(resources.files("slotccg") / "data"))


@dataclass
class Bundle:
    kb: KnowledgeBase
    train: list[CorpusRecord]
    dev: list[CorpusRecord]
    test: list[CorpusRecord]
    word_entries: list
    pos_entries: list
    manifest: dict = field(default_factory=dict)
    path: Optional[Path] = None


def load_bundle(path: str | Path | None = None) -> Bundle:
    d = Path(path) if path else bundled_data_dir()
    manifest_path = d / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    return Bundle(
        load_kb(d / "kb.txt"),
        load_corpus(d / "train.jsonl"),
        load_corpus(d / "dev.jsonl"),
        load_corpus(d / "test.jsonl"),
        read_lexicon_file(d / "lexicon_word.tsv"),
        read_lexicon_file(d / "lexicon_pos.tsv"),
        manifest,
        d,
    )


@dataclass
class TierResult:
    name: str
    model: PerceptronModel
    report: EvalReport
    predictions: dict  # record id -> answer or None


def run_tier(tier: str, train: Sequence[CorpusRecord], test: Sequence[CorpusRecord], kb: KnowledgeBase,
             word_entries=(), pos_entries=(), cfg: PipelineConfig = PipelineConfig(),
             cache: Optional[PrepareCache] = None) -> TierResult:
    """Train the grounded ranker under one supervision tier and evaluate it."""
    cache = cache or PrepareCache(kb, cfg)
    lex = tier_lexicon(tier, word_entries, pos_entries)
    model = train_prepared([cache.get(r, lex) for r in train], cfg.epochs, cfg.seed)
    predictions = {}

    def system(r):
        p = cache.get(r, lex)
        out = predict_prepared(p, model)
        predictions[r.id] = out[0] if out else None
        return Prediction(predictions[r.id], p.truncated)

    report = evaluate(test, system, tier)
    return TierResult(tier, model, report, predictions)


def run_bow(train, test, kb, cfg: PipelineConfig = PipelineConfig()) -> TierResult:
    model = train_bow(train, kb, cfg.epochs, cfg.seed)
    predictions = {}

    def system(r):
        predictions[r.id] = predict_bow(r, kb, model)
        return predictions[r.id]

    return TierResult("bow", model, evaluate(test, system, "bow"), predictions)


def run_all(bundle: Bundle, cfg: PipelineConfig = PipelineConfig(), tiers: Sequence[str] = TIERS,
            bow: bool = True, cache: Optional[PrepareCache] = None) -> list[TierResult]:
    cache = cache or PrepareCache(bundle.kb, cfg)
    out = []
    for tier in tiers:
        out.append(run_tier(tier, bundle.train, bundle.test, bundle.kb, bundle.word_entries,
                            bundle.pos_entries, cfg, cache))
        log.info("%s: %.1f", tier, out[-1].report.overall)
    if bow:
        out.append(run_bow(bundle.train, bundle.test, bundle.kb, cfg))
    return out


def run_sweep(bundle: Bundle, sizes: Sequence[int] = SWEEP_SIZES, cfg: PipelineConfig = PipelineConfig(),
              cache: Optional[PrepareCache] = None, test: Optional[Sequence[CorpusRecord]] = None) -> SweepResult:
    return sweep_lexicon(bundle.train, bundle.test if test is None else test, bundle.kb, bundle.word_entries,
                         sizes, cfg, cache=cache or PrepareCache(bundle.kb, cfg))
