"""Command-line interface: parse, ground, train, predict, evaluate, sweep, stats, generate."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .baseline import BOW_TAG, predict_bow, train_bow
from .categories import CategoryParseError
from .config import ConfigError, RunConfig, load_config
from .corpus import CorpusError, CorpusStats, corpus_stats, load_corpus
from .evaluation import Prediction, evaluate, format_reports, reports_tsv, sweep_lexicon
from .experiments import SWEEP_SIZES, bundled_data_dir, run_bow, run_tier
from .kb import KBLoadError, load_kb
from .lexicon import Lexicon, LexiconError, constrain_lexicon, read_lexicon_file
from .parser import Token
from .pipeline import TIERS, PrepareCache, predict_prepared, prepare, tier_lexicon, train_prepared
from .ranker import ModelFormatError, PerceptronModel, TrainingError
from .semantics import compose_valid

log = logging.getLogger("slotccg")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_MISSING = 4
EXIT_FORMAT = 5
EXIT_PIPELINE = 6


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


# --- inputs ------------------------------------------------------------------

def _data_file(cfg: RunConfig, explicit, name: str) -> Path:
    if explicit:
        return Path(explicit)
    base = Path(cfg.data_dir) if cfg.data_dir else bundled_data_dir()
    return base / name


def _must_exist(path: Path) -> Path:
    if not path.exists():
        raise CliError(EXIT_MISSING, "missing-file", f"no such file: {path}")
    return path


def _kb(cfg):
    return load_kb(_must_exist(_data_file(cfg, cfg.kb, "kb.txt")), strict_types=bool(cfg.strict_types))


def _corpus(cfg, explicit, default_name):
    return load_corpus(_must_exist(_data_file(cfg, explicit, default_name)))


def _entries(cfg, level):
    explicit = cfg.lexicon_word if level == "word" else cfg.lexicon_pos
    return read_lexicon_file(_must_exist(_data_file(cfg, explicit, f"lexicon_{level}.tsv")))


def _tier_lexicon(cfg: RunConfig):
    word = _entries(cfg, "word") if cfg.mode == "semi-word" else ()
    pos = _entries(cfg, "pos") if cfg.mode == "semi-pos" else ()
    return tier_lexicon(cfg.mode, word, pos)


def parse_sentence(text: str) -> list[Token]:
    """Tokens written as ``word/POS`` or ``word/POS/entity``; ``_blank_`` marks the slot."""
    tokens = []
    for item in text.split():
        parts = item.split("/")
        if len(parts) not in (2, 3):
            raise CliError(EXIT_FORMAT, "format", f"bad token {item!r}; expected word/POS[/entity]")
        if parts[0] == "_blank_":
            tokens.append(Token(parts[0], parts[1], None, True))
        else:
            tokens.append(Token(parts[0], parts[1], parts[2] if len(parts) == 3 else None))
    return tokens


def _writer(cfg):
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        return open(cfg.out, "w", encoding="utf-8")
    return _Stdout()


class _Stdout:
    def write(self, s):
        sys.stdout.write(s)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        sys.stdout.flush()


# --- commands ----------------------------------------------------------------

def cmd_parse(cfg: RunConfig, args) -> int:
    """Derivations (and optionally ungrounded graphs) as one JSON object per sentence."""
    if args.sentence:
        items = [("sentence", parse_sentence(args.sentence), None)]
    else:
        items = [(r.id, list(r.tokens), r.supertags) for r in _corpus(cfg, cfg.corpus, "test.jsonl")]
    if args.lexicon:
        entries = read_lexicon_file(_must_exist(Path(args.lexicon)))
        lexicon = constrain_lexicon(Lexicon(), entries, len(entries), level="word")
    elif cfg.mode == "supervised":
        lexicon = None
    else:
        lexicon = _tier_lexicon(cfg)
    pcfg = cfg.pipeline().parse
    from .parser import parse

    with _writer(cfg) as out:
        for sid, tokens, gold in items:
            if lexicon is None:
                if gold is None:
                    raise CliError(EXIT_CONFIG, "config", f"{sid}: supervised parsing needs gold supertags "
                                   "(use --lexicon or another --mode)")
                derivs = parse(tokens, cfg=pcfg, supertags=gold)
            else:
                derivs = parse(tokens, lexicon, pcfg)
            entry = {"id": sid, "derivations": []}
            graphs: dict[str, int] = {}
            for d in derivs:
                row = {"derivation": d.key, "root": str(d.root), "score": round(d.score, 6),
                       "supertags": [str(c) for c in d.supertags]}
                if args.emit_ungrounded:
                    row["graphs"] = [graphs.setdefault(g.serialize(), len(graphs))
                                     for g in compose_valid(d, tokens)]
                entry["derivations"].append(row)
            if args.emit_ungrounded:
                entry["ungrounded"] = list(graphs)
            out.write(json.dumps(entry) + "\n")
    return EXIT_OK


def cmd_ground(cfg: RunConfig, args) -> int:
    """Candidate groundings per sentence with their answers and positive flags."""
    kb = _kb(cfg)
    records = _corpus(cfg, cfg.corpus, "test.jsonl")
    lexicon = _tier_lexicon(cfg)
    pcfg = cfg.pipeline()
    with _writer(cfg) as out:
        for r in records:
            _dump_candidates(out, prepare(r, lexicon, kb, pcfg))
    return EXIT_OK


def _dump_candidates(out, p, chosen=None):
    pos = set(p.positives())
    out.write(json.dumps({
        "id": p.record.id,
        "ungrounded": sorted({c.ungrounded.serialize() for c in p.candidates}),
        "candidates": [{"graph": c.serialize(), "answers": a[:5], "positive": i in pos, "chosen": i == chosen}
                       for i, (c, a) in enumerate(zip(p.candidates, p.answers))],
        "truncated": p.truncated,
    }) + "\n")


def cmd_train(cfg: RunConfig, args) -> int:
    if not cfg.model:
        raise CliError(EXIT_CONFIG, "config", "train needs --model for the output file")
    kb = _kb(cfg)
    records = _corpus(cfg, cfg.corpus or cfg.train, "train.jsonl")
    if cfg.mode == "bow":
        model = train_bow(records, kb, cfg.epochs, cfg.seed)
    else:
        lexicon = _tier_lexicon(cfg)
        pcfg = cfg.pipeline()
        model = train_prepared([prepare(r, lexicon, kb, pcfg) for r in records], cfg.epochs, cfg.seed)
        model.tag = cfg.mode
    model.save(cfg.model)
    log.info("trained %s model on %d sentences: %d updates, %d skipped", cfg.mode, len(records),
             model.updates, model.skipped)
    return EXIT_OK


def _load_model(cfg) -> PerceptronModel:
    if not cfg.model:
        raise CliError(EXIT_CONFIG, "config", "--model is required")
    return PerceptronModel.load(_must_exist(Path(cfg.model)))


def _system(cfg, model, kb, emit=None):
    if model.tag == BOW_TAG:
        return lambda r: predict_bow(r, kb, model)
    mode = model.tag if model.tag in TIERS else cfg.mode
    lexicon = _tier_lexicon(cfg.override(mode=mode))
    pcfg = cfg.pipeline()

    def system(r):
        p = prepare(r, lexicon, kb, pcfg)
        out = predict_prepared(p, model)
        if emit is not None:
            from .ranker import rank
            _dump_candidates(emit, p, rank(p.candidates, model, p.features))
        return Prediction(out[0] if out else None, p.truncated)

    return system


def cmd_predict(cfg: RunConfig, args) -> int:
    """Writes ``id<TAB>prediction<TAB>gold`` lines; empty prediction means unanswered."""
    model = _load_model(cfg)
    kb = _kb(cfg)
    records = _corpus(cfg, cfg.corpus or cfg.test, "test.jsonl")
    emit = open(args.emit_candidates, "w", encoding="utf-8") if args.emit_candidates else None
    try:
        system = _system(cfg, model, kb, emit)
        with _writer(cfg) as out:
            for r in records:
                pred = system(r)
                answer = pred.answer if isinstance(pred, Prediction) else pred
                out.write(f"{r.id}\t{answer or ''}\t{r.answer}\n")
    finally:
        if emit:
            emit.close()
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, args) -> int:
    """Accuracy table; trains on the train split unless --model is given.

    ``--mode all`` evaluates every tier plus the baseline in one table. A
    tab-separated copy is written next to ``--out``.
    """
    kb = _kb(cfg)
    test = _corpus(cfg, cfg.corpus or cfg.test, "test.jsonl")
    reports = []
    if cfg.model:
        model = _load_model(cfg)
        reports.append(evaluate(test, _system(cfg, model, kb), model.tag))
    else:
        train = _corpus(cfg, cfg.train, "train.jsonl")
        modes = TIERS + ("bow",) if args.all_modes else (cfg.mode,)
        pcfg = cfg.pipeline()
        cache = PrepareCache(kb, pcfg)
        word = pos = ()
        if any(m == "semi-word" for m in modes):
            word = _entries(cfg, "word")
        if any(m == "semi-pos" for m in modes):
            pos = _entries(cfg, "pos")
        for mode in modes:
            if mode == "bow":
                reports.append(run_bow(train, test, kb, pcfg).report)
            else:
                reports.append(run_tier(mode, train, test, kb, word, pos, pcfg, cache).report)
    table = format_reports(reports)
    with _writer(cfg) as out:
        out.write(table)
    if cfg.out:
        Path(cfg.out).with_suffix(".tsv").write_text(reports_tsv(reports), encoding="utf-8")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    """Lexicon-size sweep as a tab-separated table (size, lf1, uf1, accuracy, coverage)."""
    kb = _kb(cfg)
    train = _corpus(cfg, cfg.train, "train.jsonl")
    test = _corpus(cfg, cfg.corpus or cfg.test, "test.jsonl")
    entries = _entries(cfg, "word")
    try:
        sizes = [int(x) for x in args.sizes.split(",")] if args.sizes else list(SWEEP_SIZES)
    except ValueError:
        raise CliError(EXIT_CONFIG, "config", f"bad --sizes {args.sizes!r}") from None
    try:
        result = sweep_lexicon(train, test, kb, entries, sizes, cfg.pipeline(),
                               retrain=bool(cfg.sweep_retrain and not args.frozen))
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, "config", str(exc)) from None
    with _writer(cfg) as out:
        out.write(result.tsv())
    if result.partial:
        raise CliError(EXIT_PIPELINE, "sweep-partial", result.error)
    return EXIT_OK


def cmd_stats(cfg: RunConfig, args) -> int:
    """Corpus statistics in a sentences/tokens/types/entities table."""
    paths = args.files or [str(_data_file(cfg, None, f"{s}.jsonl")) for s in ("train", "dev", "test")]
    with _writer(cfg) as out:
        out.write(CorpusStats.header() + "\n")
        for p in paths:
            st = corpus_stats(load_corpus(_must_exist(Path(p))))
            out.write(st.row(Path(p).stem) + "\n")
    return EXIT_OK


def cmd_generate(cfg: RunConfig, args) -> int:
    from .synth import write_bundle

    if not cfg.out:
        raise CliError(EXIT_CONFIG, "config", "generate needs --out for the output directory")
    manifest = write_bundle(cfg.out, cfg.seed)
    print(json.dumps(manifest["splits"], sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "parse": cmd_parse,
    "ground": cmd_ground,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "stats": cmd_stats,
    "generate": cmd_generate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--mode", help="supervised, semi-word, semi-pos, unsupervised or bow")
    common.add_argument("--seed", type=int)
    common.add_argument("--kb")
    common.add_argument("--corpus", help="input corpus (JSON lines)")
    common.add_argument("--train", help="training split (default: train.jsonl in the data dir)")
    common.add_argument("--test", help="test split (default: test.jsonl in the data dir)")
    common.add_argument("--model")
    common.add_argument("--out")
    common.add_argument("--top-n", dest="top_n", type=int)
    common.add_argument("--beam", dest="beam_width", type=int)
    common.add_argument("--epochs", type=int)
    common.add_argument("--data-dir", dest="data_dir", help="directory holding kb.txt, splits and lexicons")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="slotccg", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", parents=[common], help="parse sentences and print derivations")
    p.add_argument("--sentence", help="tokens as word/POS[/entity]")
    p.add_argument("--lexicon", help="word lexicon file constraining every listed word")
    p.add_argument("--emit-ungrounded", action="store_true", help="also compose ungrounded graphs")
    sub.add_parser("ground", parents=[common], help="dump grounded candidates per sentence")
    sub.add_parser("train", parents=[common], help="train a ranker (or the bow baseline)")
    p = sub.add_parser("predict", parents=[common], help="predict blank entities")
    p.add_argument("--emit-candidates", metavar="PATH", help="write scored candidate dumps here")
    p = sub.add_parser("evaluate", parents=[common], help="accuracy report")
    p.add_argument("--all", dest="all_modes", action="store_true", help="every tier plus the baseline")
    p = sub.add_parser("sweep", parents=[common], help="lexicon-size sweep")
    p.add_argument("--sizes", help="comma-separated ascending sizes (default 0,50,100,200,500)")
    p.add_argument("--frozen", action="store_true", help="train once at the first size and reuse that ranker")
    p = sub.add_parser("stats", parents=[common], help="corpus statistics")
    p.add_argument("files", nargs="*")
    sub.add_parser("generate", parents=[common], help="write a synthetic KB and corpus bundle")
    return ap


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = cfg.override(mode=args.mode, seed=args.seed, kb=args.kb, corpus=args.corpus, model=args.model,
                       out=args.out, top_n=args.top_n, beam_width=args.beam_width, epochs=args.epochs,
                       data_dir=args.data_dir, train=args.train, test=args.test)
    return cfg.validate()


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config and not Path(args.config).exists():
            raise CliError(EXIT_MISSING, "missing-file", f"no such file: {args.config}")
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except CliError as exc:
        return _fail(exc.code, exc.kind, str(exc))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except FileNotFoundError as exc:
        return _fail(EXIT_MISSING, "missing-file", str(exc))
    except (KBLoadError, CorpusError, LexiconError, ModelFormatError, CategoryParseError,
            json.JSONDecodeError) as exc:
        return _fail(EXIT_FORMAT, "format", str(exc))
    except TrainingError as exc:
        return _fail(EXIT_PIPELINE, "training", str(exc))


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit": code}) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
