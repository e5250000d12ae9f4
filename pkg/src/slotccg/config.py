"""Run configuration: flat ``key = value`` files plus command-line overrides."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .grounding import GroundingConfig
from .parser import ParseConfig
from .pipeline import MODES, PipelineConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str = "supervised"
    beam_width: int = 50
    top_n: int = 10
    max_category_depth: int = 5
    epochs: int = 10
    seed: int = 0
    max_candidates: int = 500
    strict_types: int = 1  # 0 lets entities of unknown type through type constraints
    sweep_retrain: int = 1  # 0 freezes the ranker trained at the first sweep size
    data_dir: Optional[str] = None
    kb: Optional[str] = None
    train: Optional[str] = None
    test: Optional[str] = None
    corpus: Optional[str] = None
    model: Optional[str] = None
    out: Optional[str] = None
    lexicon_word: Optional[str] = None
    lexicon_pos: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        for name in ("beam_width", "top_n", "max_category_depth", "max_candidates"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        # zero epochs is allowed: it writes an all-zero model
        if self.epochs < 0:
            raise ConfigError("epochs must not be negative")
        if self.seed < 0:
            raise ConfigError("seed must not be negative")
        for name in ("strict_types", "sweep_retrain"):
            if getattr(self, name) not in (0, 1):
                raise ConfigError(f"{name} must be 0 or 1")
        return self

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            ParseConfig(self.beam_width, self.top_n, self.max_category_depth),
            GroundingConfig(self.max_candidates),
            self.epochs,
            self.seed,
        )

    def override(self, **values) -> "RunConfig":
        return replace(self, **{k: v for k, v in values.items() if v is not None})


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_ALIASES = {"supervision_mode": "mode"}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = _ALIASES.get(key.strip(), key.strip()), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        if key not in _TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if _TYPES[key] == "int":
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: {key} must be an integer") from None
        else:
            values[key] = value
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), str(path))
