"""Slot-filling accuracy, entity-count breakdown, lexicon sweeps and syntactic F1."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

from .corpus import CorpusRecord
from .parser import BA, BC, CONJ_RULE, FA, FC, Derivation, Leaf

log = logging.getLogger(__name__)

BUCKETS = (2, 3, 4)


@dataclass(frozen=True)
class Prediction:
    answer: Optional[str]
    truncated: bool = False


def _pct(num: int, den: int) -> float:
    return 100.0 * num / den if den else 0.0


@dataclass
class EvalReport:
    name: str = ""
    total: int = 0
    correct: int = 0
    bucket_total: dict = field(default_factory=lambda: {b: 0 for b in BUCKETS})
    bucket_correct: dict = field(default_factory=lambda: {b: 0 for b in BUCKETS})
    unanswered: int = 0
    truncated: int = 0
    folded: int = 0  # sentences with more than four entities, counted in bucket 4

    @property
    def overall(self) -> float:
        return _pct(self.correct, self.total)

    @property
    def buckets(self) -> dict:
        return {b: _pct(self.bucket_correct[b], self.bucket_total[b]) for b in BUCKETS}

    def row(self) -> list:
        b = self.buckets
        return [self.name, *(round(b[k], 1) for k in BUCKETS), round(self.overall, 1),
                self.total, self.unanswered, self.truncated]


REPORT_COLUMNS = ["system", "2", "3", "4", "overall", "sentences", "unanswered", "truncated"]


def evaluate(corpus: Iterable[CorpusRecord], system: Callable, name: str = "") -> EvalReport:
    """Score ``system(record)`` against each gold answer.

    ``system`` may return an entity id, None (unanswered, counted wrong) or a
    :class:`Prediction`.
    """
    rep = EvalReport(name)
    for r in corpus:
        out = system(r)
        if not isinstance(out, Prediction):
            out = Prediction(out)
        b = r.bucket
        if r.entity_count > BUCKETS[-1]:
            rep.folded += 1
        rep.total += 1
        rep.bucket_total[b] += 1
        if out.truncated:
            rep.truncated += 1
        if out.answer is None:
            rep.unanswered += 1
        elif out.answer == r.answer:
            rep.correct += 1
            rep.bucket_correct[b] += 1
    if rep.folded:
        log.info("%d sentences with more than %d entities folded into the last bucket", rep.folded, BUCKETS[-1])
    return rep


def format_reports(reports: Sequence[EvalReport]) -> str:
    """Aligned text table, one row per system."""
    rows = [REPORT_COLUMNS] + [[str(x) if not isinstance(x, float) else f"{x:.1f}" for x in r.row()]
                               for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(REPORT_COLUMNS))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"


def reports_tsv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


# --- syntactic scoring -------------------------------------------------------

class Dependency(NamedTuple):
    head: int
    dependent: int
    label: str  # functor supertag of the head word
    slot: int   # argument slot filled (arity of the functor when it applied)


def dependencies(d: Derivation) -> set[Dependency]:
    """Head-dependent pairs read off the derivation by head percolation.

    At every binary step the functor's head takes the argument's head as a
    dependent. The result is headed by the functor, except when the functor
    is a modifier (X|X), in which case the head percolates from the argument.
    """
    supertags = {leaf.index: leaf.category for leaf in d.leaves()}
    deps: set[Dependency] = set()

    def walk(t) -> int:
        if isinstance(t, Leaf):
            return t.index
        lh, rh = walk(t.left), walk(t.right)
        if t.combinator in (FA, FC, CONJ_RULE):
            functor, fh, ah = t.left.category, lh, rh
        elif t.combinator in (BA, BC):
            functor, fh, ah = t.right.category, rh, lh
        else:
            raise ValueError(f"unknown combinator {t.combinator}")
        deps.add(Dependency(fh, ah, str(supertags[fh]), functor.arity))
        if t.combinator in (FA, BA) and functor.is_modifier():
            return ah
        return fh

    walk(d.tree)
    return deps


def undirected(deps: Iterable[Dependency]) -> set[frozenset]:
    return {frozenset((dep.head, dep.dependent)) for dep in deps}


class SyntaxScore(NamedTuple):
    labeled_f1: float
    unlabeled_f1: float
    empty: bool = False


def _f1(pred: set, ref: set) -> float:
    if not pred or not ref:
        return 0.0
    hit = len(pred & ref)
    if not hit:
        return 0.0
    p, r = hit / len(pred), hit / len(ref)
    return 100.0 * 2 * p * r / (p + r)


def score_syntax(predicted: Derivation, reference: Derivation | set) -> SyntaxScore:
    """Labeled F1 and undirected unlabeled F1 against a reference.

    ``reference`` is a derivation or an explicit set of :class:`Dependency`.
    Empty dependency sets on either side score 0.0 with ``empty`` set.
    """
    pred = dependencies(predicted)
    if isinstance(reference, Derivation):
        if len(reference) != len(predicted):
            raise ValueError("token counts differ")
        ref = dependencies(reference)
    else:
        ref = set(reference)
    if not pred or not ref:
        return SyntaxScore(0.0, 0.0, True)
    return SyntaxScore(_f1(pred, ref), _f1(undirected(pred), undirected(ref)))


@dataclass
class SyntaxTally:
    """Corpus-level micro counts for LF1/UF1."""

    matched_l: int = 0
    matched_u: int = 0
    predicted: int = 0
    reference: int = 0

    def add(self, predicted: Optional[Derivation], reference: Derivation):
        ref = dependencies(reference)
        self.reference += len(ref)
        if predicted is None:
            return
        pred = dependencies(predicted)
        self.predicted += len(pred)
        self.matched_l += len(pred & ref)
        self.matched_u += len(undirected(pred) & undirected(ref))

    def _f(self, hit):
        if not hit:
            return 0.0
        p, r = hit / self.predicted, hit / self.reference
        return 100.0 * 2 * p * r / (p + r)

    @property
    def labeled_f1(self) -> float:
        return self._f(self.matched_l)

    @property
    def unlabeled_f1(self) -> float:
        return self._f(self.matched_u)


# --- lexicon sweep -----------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    size: int
    labeled_f1: float
    unlabeled_f1: float
    accuracy: float
    coverage: float  # percent of test tokens whose word entry is constrained


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    partial: bool = False
    error: Optional[str] = None

    def tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["size", "lf1", "uf1", "accuracy", "coverage"])
        for r in self.rows:
            w.writerow([r.size, f"{r.labeled_f1:.2f}", f"{r.unlabeled_f1:.2f}", f"{r.accuracy:.2f}",
                        f"{r.coverage:.2f}"])
        return buf.getvalue()


def check_sizes(sizes: Sequence[int], n_entries: int):
    if len(set(sizes)) != len(sizes):
        raise ValueError("duplicate lexicon sizes")
    if list(sizes) != sorted(sizes):
        raise ValueError("lexicon sizes must be ascending")
    for k in sizes:
        if k < 0 or k > n_entries:
            raise ValueError(f"lexicon size {k} outside [0, {n_entries}]")


def sweep_lexicon(train: Sequence[CorpusRecord], test: Sequence[CorpusRecord], kb, ranked_entries,
                  sizes: Sequence[int], cfg=None, base_lexicon=None, progress=None, cache=None,
                  retrain: bool = True) -> SweepResult:
    """Constrain the top-k word entries, retrain the ranker, evaluate; one row per k.

    With ``retrain=False`` the ranker trained at the first size is reused for
    every later size. A training failure stops the sweep and returns the rows
    so far with ``partial`` set.
    """
    from .lexicon import Lexicon, constrain_lexicon
    from .pipeline import PipelineConfig, PrepareCache, chosen_derivation, predict_prepared, train_prepared
    from .parser import parse
    from .ranker import TrainingError

    cfg = cfg or PipelineConfig()
    cache = cache or PrepareCache(kb, cfg)
    ranked_entries = list(ranked_entries)
    check_sizes(sizes, len(ranked_entries))
    base = base_lexicon or Lexicon()
    references = {}
    for r in test:
        if r.supertags is not None:
            gold = parse(r.tokens, cfg=cfg.parse, supertags=r.supertags)
            if gold:
                references[r.id] = gold[0]
    n_tokens = sum(len(r.tokens) for r in test)
    result = SweepResult()
    model = None
    for k in sizes:
        lex = constrain_lexicon(base, ranked_entries, k, level="word")
        try:
            if retrain or model is None:
                model = train_prepared([cache.get(r, lex) for r in train], cfg.epochs, cfg.seed)
        except TrainingError as exc:
            log.error("sweep stopped at size %d: %s", k, exc)
            result.partial = True
            result.error = f"size {k}: {exc}"
            break
        tally = SyntaxTally()
        correct = 0
        for r in test:
            p = cache.get(r, lex)
            out = predict_prepared(p, model)
            if out is not None and out[0] == r.answer:
                correct += 1
            if r.id in references:
                tally.add(chosen_derivation(p, model), references[r.id])
        constrained = set(lex.word_entries)
        covered = sum(1 for r in test for t in r.tokens if t.surface.lower() in constrained)
        row = SweepRow(k, tally.labeled_f1, tally.unlabeled_f1, _pct(correct, len(test)), _pct(covered, n_tokens))
        result.rows.append(row)
        if progress:
            progress(row)
    return result
