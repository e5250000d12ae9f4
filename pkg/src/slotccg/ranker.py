"""Averaged structured perceptron over predicate-alignment features."""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .kb import GroundedGraph

FeatureVector = Counter  # feature key (tuple of str) -> count
BIAS = ("bias",)
KEY_SEP = "|"


class TrainingError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


def featurize(c: GroundedGraph) -> FeatureVector:
    """Alignment features between ungrounded labels and their KB labels."""
    fv: FeatureVector = Counter({BIAS: 1})
    for node, etype in c.event_types:
        fv["event", node.label, etype] += 1
    for edge, role in c.roles:
        fv["edge", edge.label, role] += 1
        fv["event_edge", f"{edge.src.label}.{edge.label}", role] += 1
    for node, kb_type in c.types:
        fv["type", node.label, kb_type] += 1
    return fv


def dot(fv: Mapping, weights: Mapping) -> float:
    return sum(count * weights.get(k, 0.0) for k, count in fv.items())


@dataclass
class PerceptronModel:
    weights: dict = field(default_factory=dict)
    averaged_weights: dict = field(default_factory=dict)
    epochs_trained: int = 0
    rng_seed: int = 0
    tag: str = "perceptron"
    updates: int = 0
    skipped: int = 0
    errors_per_epoch: list = field(default_factory=list)
    classes: tuple = ()

    def score(self, fv: Mapping) -> float:
        return dot(fv, self.averaged_weights)

    def scaled(self, factor: float) -> "PerceptronModel":
        return PerceptronModel(
            {k: v * factor for k, v in self.weights.items()},
            {k: v * factor for k, v in self.averaged_weights.items()},
            self.epochs_trained, self.rng_seed, self.tag, classes=self.classes,
        )

    def to_text(self) -> str:
        lines = [f"# model\t{self.tag}", f"# epochs\t{self.epochs_trained}", f"# seed\t{self.rng_seed}"]
        if self.classes:
            lines.append("# classes\t" + " ".join(self.classes))
        for key in sorted(self.averaged_weights, key=_key_text):
            w = self.averaged_weights[key]
            if w != 0.0:
                lines.append(f"{_key_text(key)}\t{float(w)!r}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path):
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> "PerceptronModel":
        header = {}
        weights = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line:
                continue
            if line.startswith("# "):
                name, _, value = line[2:].partition("\t")
                header[name] = value
                continue
            key, sep, value = line.rpartition("\t")
            if not sep:
                raise ModelFormatError(f"line {lineno}: expected key<TAB>weight")
            try:
                weights[tuple(key.split(KEY_SEP))] = float(value)
            except ValueError as exc:
                raise ModelFormatError(f"line {lineno}: bad weight {value!r}") from exc
        if "model" not in header:
            raise ModelFormatError("missing '# model' header")
        return cls(
            dict(weights),
            weights,
            int(header.get("epochs", 0)),
            int(header.get("seed", 0)),
            header["model"],
            classes=tuple(header["classes"].split()) if header.get("classes") else (),
        )

    @classmethod
    def load(cls, path: str | Path) -> "PerceptronModel":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _key_text(key: tuple) -> str:
    return KEY_SEP.join(key)


class _Averager:
    """Running weights plus the step-weighted sum needed for averaging."""

    def __init__(self):
        self.w: dict = {}
        self.u: dict = {}
        self.step = 0

    def add(self, fv: Mapping, scale: float):
        # the update lands during step self.step (1-based) and counts for
        # every later step, so it is discounted by (step - 1) in the average
        for k, v in fv.items():
            delta = scale * v
            self.w[k] = self.w.get(k, 0.0) + delta
            self.u[k] = self.u.get(k, 0.0) + (self.step - 1) * delta

    def averaged(self) -> dict:
        if self.step == 0:
            return {}
        return {k: w - self.u[k] / self.step for k, w in self.w.items()}


def _argmax(scores: Sequence[float], among: Iterable[int]) -> int:
    best = None
    for i in among:
        if best is None or scores[i] > scores[best]:
            best = i
    return best


def train_vectors(examples: Sequence[tuple[Sequence[Mapping], Sequence[int]]], epochs: int = 10,
                  seed: int = 0) -> PerceptronModel:
    """Train on precomputed (candidate feature vectors, positive indices) pairs.

    Examples without a positive candidate are skipped. Each visit to a usable
    example is one averaging step; a mistake moves the weights towards the
    best-scoring positive and away from the predicted candidate.
    """
    usable = [(fvs, list(pos)) for fvs, pos in examples if fvs and pos]
    skipped = len(examples) - len(usable)
    if not usable:
        raise TrainingError("no training example has a correct candidate")
    rng = random.Random(seed)
    avg = _Averager()
    order = list(range(len(usable)))
    errors_per_epoch = []
    updates = 0
    for _ in range(epochs):
        rng.shuffle(order)
        errors = 0
        for idx in order:
            fvs, pos = usable[idx]
            avg.step += 1
            scores = [dot(fv, avg.w) for fv in fvs]
            pred = _argmax(scores, range(len(fvs)))
            if pred in pos:
                continue
            errors += 1
            updates += 1
            gold = _argmax(scores, pos)
            avg.add(fvs[gold], 1.0)
            avg.add(fvs[pred], -1.0)
        errors_per_epoch.append(errors)
    return PerceptronModel(
        dict(avg.w), avg.averaged(), epochs, seed,
        updates=updates, skipped=skipped, errors_per_epoch=errors_per_epoch,
    )


def train(corpus, epochs: int = 10, seed: int = 0) -> PerceptronModel:
    """Train a ranker on :class:`~slotccg.grounding.CandidateSet` objects."""
    examples = [([featurize(c) for c in cs.candidates], cs.positives) for cs in corpus]
    return train_vectors(examples, epochs, seed)


def rank(candidates: Sequence[GroundedGraph], model: PerceptronModel, features=None) -> int | None:
    """Index of the highest-scoring candidate; ties go to the earliest."""
    if not candidates:
        return None
    if features is None:
        features = [featurize(c) for c in candidates]
    scores = [model.score(fv) for fv in features]
    return _argmax(scores, range(len(candidates)))


def predict(record, lexicon, kb, model, cfg=None):
    """Predicted (answer, grounded graph) for one corpus record, or None."""
    from .pipeline import PipelineConfig, prepare, predict_prepared

    cfg = cfg or PipelineConfig()
    prepared = prepare(record, lexicon, kb, cfg)
    return predict_prepared(prepared, model)
