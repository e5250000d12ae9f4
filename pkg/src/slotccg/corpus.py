"""Cloze corpus records: JSON-lines loading, validation and statistics."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .categories import Category, CategoryParseError, parse_category
from .parser import Token

log = logging.getLogger(__name__)

BLANK = "_blank_"
MAX_FAILURE_RATE = 0.01


class CorpusError(ValueError):
    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    tokens: tuple[Token, ...]
    blank: int
    answer: str
    supertags: Optional[tuple[Category, ...]] = None
    entity_count: int = 0

    @property
    def entities(self) -> list[str]:
        """Entities still mentioned in the sentence (the answer is removed)."""
        return [t.entity for t in self.tokens if t.entity is not None]

    @property
    def bucket(self) -> int:
        return min(max(self.entity_count, 2), 4)

    def to_json(self) -> str:
        data = {
            "id": self.id,
            "tokens": [[t.surface, t.pos, t.entity] for t in self.tokens],
            "blank": self.blank,
            "answer": self.answer,
            "entity_count": self.entity_count,
        }
        if self.supertags is not None:
            data["supertags"] = [str(c) for c in self.supertags]
        return json.dumps(data, ensure_ascii=False)


def record_from_json(data: dict) -> CorpusRecord:
    """Build and validate a record; raises ValueError describing the violation."""
    rid = data.get("id")
    if not isinstance(rid, str) or not rid:
        raise ValueError("missing id")
    raw_tokens = data.get("tokens")
    if not isinstance(raw_tokens, list) or not raw_tokens:
        raise ValueError("missing tokens")
    tokens = []
    for item in raw_tokens:
        if not isinstance(item, (list, tuple)) or len(item) not in (2, 3):
            raise ValueError(f"bad token {item!r}")
        surface, pos = item[0], item[1]
        entity = item[2] if len(item) == 3 else None
        blank = surface == BLANK
        tokens.append(Token(surface, pos, None if blank else entity, blank))
    blanks = [i for i, t in enumerate(tokens) if t.is_blank]
    if len(blanks) != 1:
        raise ValueError(f"expected exactly one blank, found {len(blanks)}")
    if data.get("blank") != blanks[0]:
        raise ValueError("blank index does not point at the blank token")
    answer = data.get("answer")
    if not isinstance(answer, str) or not answer:
        raise ValueError("missing answer")
    if answer in {t.entity for t in tokens if t.entity}:
        raise ValueError("answer is still mentioned in the sentence")
    supertags = data.get("supertags")
    if supertags is not None:
        if len(supertags) != len(tokens):
            raise ValueError("supertags do not cover every token")
        try:
            supertags = tuple(parse_category(s) for s in supertags)
        except CategoryParseError as exc:
            raise ValueError(f"bad supertag: {exc}") from exc
    n_entities = 1 + sum(1 for t in tokens if t.entity)
    entity_count = data.get("entity_count", n_entities)
    if entity_count != n_entities:
        raise ValueError(f"entity_count {entity_count} does not match {n_entities} mentions")
    return CorpusRecord(rid, tuple(tokens), blanks[0], answer, supertags, entity_count)


@dataclass(frozen=True)
class CorpusStats:
    sentences: int
    tokens: int
    types: int
    entities: int

    def row(self, name: str) -> str:
        return f"{name:<8}{self.sentences:>12,}{self.tokens:>12,}{self.types:>10,}{self.entities:>10,}"

    @staticmethod
    def header() -> str:
        return f"{'':<8}{'Sentences':>12}{'Tokens':>12}{'Types':>10}{'Entities':>10}"


def corpus_stats(records: Iterable[CorpusRecord]) -> CorpusStats:
    n = 0
    n_tokens = 0
    types = set()
    entities = set()
    for r in records:
        n += 1
        n_tokens += len(r.tokens)
        types.update(t.surface for t in r.tokens)
        entities.update(r.entities)
        entities.add(r.answer)
    return CorpusStats(n, n_tokens, len(types), len(entities))


def load_corpus(path: str | Path, max_failure_rate: float = MAX_FAILURE_RATE) -> list[CorpusRecord]:
    """Read a JSON-lines corpus, dropping invalid records.

    Failures are logged with their record ids. If more than
    ``max_failure_rate`` of the records fail, :class:`CorpusError` is raised.
    """
    records = []
    failures = []
    total = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            total += 1
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                failures.append((f"line {lineno}", f"invalid JSON: {exc}"))
                continue
            try:
                records.append(record_from_json(data))
            except ValueError as exc:
                failures.append((str(data.get("id", f"line {lineno}")), str(exc)))
    for rid, reason in failures:
        log.warning("rejected record %s: %s", rid, reason)
    if total and len(failures) / total > max_failure_rate:
        raise CorpusError(f"{len(failures)} of {total} records failed validation in {path}", failures)
    return records


def write_corpus(path: str | Path, records: Sequence[CorpusRecord]):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")
