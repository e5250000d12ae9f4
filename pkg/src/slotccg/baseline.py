"""Bag-of-words relation classifier between the blank and each other entity.

Each (blank, entity) pair gets a KB relation or NULL from a multiclass
averaged perceptron over sentence words; the non-NULL predictions are joined
into one conjunctive query with TARGET in the blank's role.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .corpus import CorpusRecord
from .kb import KnowledgeBase, execute, make_grounded, predicates_between
from .ranker import PerceptronModel, TrainingError, _Averager
from .semantics import TARGET, Edge, GraphNode, UngroundedGraph

NULL = "NULL"
BOW_TAG = "bow"


def relation_label(etype: str, role_blank: str, role_other: str) -> str:
    return f"{etype}:{role_blank}:{role_other}"


def split_label(label: str) -> tuple[str, str, str]:
    etype, role_blank, role_other = label.split(":")
    return etype, role_blank, role_other


@dataclass(frozen=True)
class PairExample:
    sentence_id: str
    other: str
    features: Counter
    label: str = NULL


def pair_features(record: CorpusRecord, other_index: int) -> Counter:
    """Lowercased unigrams plus (word, side of the other entity) pairs; the blank is skipped."""
    fv = Counter()
    for i, tok in enumerate(record.tokens):
        if tok.is_blank or i == other_index:
            continue
        w = tok.surface.lower()
        fv["w", w] += 1
        fv["ws", w, "L" if i < other_index else "R"] += 1
    return fv


def pair_examples(record: CorpusRecord, kb: Optional[KnowledgeBase] = None) -> list[PairExample]:
    """One example per entity mention; labelled from the KB when ``kb`` is given.

    The label is the relation linking the gold answer (blank side) to the
    mention. If several link them, the smallest label is used so labelling
    stays deterministic.
    """
    out = []
    for i, tok in enumerate(record.tokens):
        if tok.entity is None:
            continue
        label = NULL
        if kb is not None:
            links = predicates_between([record.answer, tok.entity], kb).get((record.answer, tok.entity))
            if links:
                label = min(relation_label(*t) for t in links)
        out.append(PairExample(record.id, tok.entity, pair_features(record, i), label))
    return out


def _class_scores(fv, weights, classes) -> list[float]:
    return [sum(n * weights.get((c,) + k, 0.0) for k, n in fv.items()) for c in classes]


def _best(scores, classes) -> str:
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return classes[best]


def train_bow(corpus: Sequence[CorpusRecord], kb: KnowledgeBase, epochs: int = 10, seed: int = 0) -> PerceptronModel:
    """Multiclass averaged perceptron over all (blank, entity) pairs of the corpus."""
    examples = [ex for r in corpus for ex in pair_examples(r, kb)]
    if not examples:
        raise TrainingError("no training pairs")
    classes = (NULL,) + tuple(sorted({ex.label for ex in examples} - {NULL}))
    rng = random.Random(seed)
    avg = _Averager()
    order = list(range(len(examples)))
    errors_per_epoch = []
    updates = 0
    for _ in range(epochs):
        rng.shuffle(order)
        errors = 0
        for idx in order:
            ex = examples[idx]
            avg.step += 1
            pred = _best(_class_scores(ex.features, avg.w, classes), classes)
            if pred == ex.label:
                continue
            errors += 1
            updates += 1
            avg.add({(ex.label,) + k: n for k, n in ex.features.items()}, 1.0)
            avg.add({(pred,) + k: n for k, n in ex.features.items()}, -1.0)
        errors_per_epoch.append(errors)
    return PerceptronModel(
        dict(avg.w), avg.averaged(), epochs, seed, BOW_TAG,
        updates=updates, errors_per_epoch=errors_per_epoch, classes=classes,
    )


def predict_pairs(record: CorpusRecord, model: PerceptronModel) -> list[tuple[str, str]]:
    """(other entity, predicted label) for every entity mention."""
    classes = model.classes or (NULL,)
    return [
        (ex.other, _best(_class_scores(ex.features, model.averaged_weights, classes), classes))
        for ex in pair_examples(record)
    ]


def pair_query(predictions: Sequence[tuple[str, str]]):
    """Conjunctive query graph for the non-NULL pair predictions, or None."""
    nodes = {TARGET}
    edges = []
    event_types = {}
    roles = {}
    k = 0
    for other, label in predictions:
        if label == NULL:
            continue
        k += 1
        etype, role_blank, role_other = split_label(label)
        ev = GraphNode("event", f"e{k}", "pair")
        ent = GraphNode("entity", other)
        nodes |= {ev, ent}
        e_blank, e_other = Edge(ev, "blank", TARGET), Edge(ev, "other", ent)
        edges += [e_blank, e_other]
        event_types[ev] = etype
        roles[e_blank] = role_blank
        roles[e_other] = role_other
    if not k:
        return None
    return make_grounded(UngroundedGraph(frozenset(nodes), frozenset(edges)), event_types, roles)


def predict_bow(record: CorpusRecord, kb: KnowledgeBase, model: PerceptronModel) -> Optional[str]:
    query = pair_query(predict_pairs(record, model))
    if query is None:
        return None
    answers = execute(query, kb)
    return answers[0] if answers else None
