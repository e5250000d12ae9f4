import pytest
from hypothesis import given, strategies as st

from conftest import PPV, PREP, TV, VP_MOD, record
from slotccg.categories import parse_category as P
from slotccg.evaluation import (
    Dependency,
    Prediction,
    check_sizes,
    dependencies,
    evaluate,
    format_reports,
    reports_tsv,
    score_syntax,
    sweep_lexicon,
)
from slotccg.experiments import run_tier
from slotccg.parser import build_derivation
from slotccg.pipeline import PipelineConfig, PrepareCache

TWO = "Google/NNP/Google acquired/VBD _blank_/NNP"
THREE = "Google/NNP/Google acquired/VBD _blank_/NNP in/IN 2014/CD/2014"
FIVE = "A/NNP/A B/NNP/B C/NNP/C D/NNP/D _blank_/NNP"


def _system(answers):
    return lambda r: answers[r.id]


def test_overall_with_absent_prediction():
    corpus = [record(f"s{i}", TWO, "Nest") for i in range(3)]
    rep = evaluate(corpus, _system({"s0": "Nest", "s1": "DeepMind", "s2": None}))
    assert round(rep.overall, 1) == 33.3
    assert rep.unanswered == 1


def test_bucket_layout():
    corpus = [record("a", TWO, "Nest"), record("b", TWO, "Nest"), record("c", THREE, "Nest")]
    rep = evaluate(corpus, _system({"a": "Nest", "b": "X", "c": "Nest"}))
    assert rep.buckets == {2: 50.0, 3: 100.0, 4: 0.0}
    assert round(rep.overall, 1) == 66.7


def test_large_sentences_fold_into_last_bucket():
    rep = evaluate([record("f", FIVE, "E")], lambda r: Prediction("E", truncated=True))
    assert rep.bucket_total[4] == 1 and rep.folded == 1 and rep.truncated == 1


def test_report_formats():
    rep = evaluate([record("a", TWO, "Nest")], lambda r: "Nest", "supervised")
    text = format_reports([rep])
    assert text.splitlines()[0].split() == ["system", "2", "3", "4", "overall", "sentences", "unanswered",
                                            "truncated"]
    assert reports_tsv([rep]).splitlines()[1] == "supervised\t100.0\t0.0\t0.0\t100.0\t1\t0\t0"


outcomes = st.lists(st.tuples(st.sampled_from([TWO, THREE, FIVE]), st.sampled_from(["hit", "miss", "none"])),
                    min_size=1, max_size=12)


def _build(items):
    corpus, answers = [], {}
    for i, (text, outcome) in enumerate(items):
        gold = "E" if text == FIVE else "Nest"
        corpus.append(record(f"r{i}", text, gold))
        answers[f"r{i}"] = {"hit": gold, "miss": "Other", "none": None}[outcome]
    return corpus, answers


@given(outcomes, st.randoms(use_true_random=False))
def test_permutation_invariant_and_buckets_sum(items, rng):
    corpus, answers = _build(items)
    a = evaluate(corpus, _system(answers))
    shuffled = list(corpus)
    rng.shuffle(shuffled)
    b = evaluate(shuffled, _system(answers))
    assert a.row() == b.row()
    assert sum(a.bucket_correct.values()) == a.correct
    assert sum(a.bucket_total.values()) == a.total


# --- syntax -------------------------------------------------------------------

ANALYSIS_A = [P("NP"), [[P(TV), P("NP")], [P(VP_MOD), P("NP")]]]
ANALYSIS_C = [P("NP"), [[P(PPV), P("NP")], [P(PREP), P("NP")]]]


def test_identical_derivation_scores_100():
    d = build_derivation(ANALYSIS_A)
    assert score_syntax(d, d)[:2] == (100.0, 100.0)


def test_modifier_analysis_dependencies_by_hand():
    assert dependencies(build_derivation(ANALYSIS_A)) == {
        Dependency(1, 2, TV, 2), Dependency(3, 4, VP_MOD, 3), Dependency(3, 1, VP_MOD, 2), Dependency(1, 0, TV, 1),
    }


def test_empty_dependencies_flagged():
    d = build_derivation(P("NP"))
    assert score_syntax(d, d) == (0.0, 0.0, True)


def test_token_count_mismatch():
    with pytest.raises(ValueError):
        score_syntax(build_derivation(ANALYSIS_A), build_derivation([P("NP"), P(r"S\NP")]))


def test_explicit_reference_set():
    d = build_derivation(ANALYSIS_A)
    ref = set(list(dependencies(d))[:2])
    s = score_syntax(d, ref)
    assert s.labeled_f1 == pytest.approx(100 * 2 * 0.5 / 1.5)


@pytest.mark.parametrize("pair", [(ANALYSIS_A, ANALYSIS_C), (ANALYSIS_C, ANALYSIS_A)])
def test_f1_symmetry(pair):
    a, b = (build_derivation(x) for x in pair)
    assert score_syntax(a, b) == score_syntax(b, a)


# --- sweep --------------------------------------------------------------------

@pytest.mark.parametrize("sizes", [[0, 0], [50, 0], [-1], [10_000]])
def test_bad_sizes(sizes):
    with pytest.raises(ValueError):
        check_sizes(sizes, 600)


@pytest.fixture(scope="module")
def small(bundle):
    return bundle.train[:300], bundle.test[:120]


def test_sweep_rows_and_coverage(bundle, small):
    train, test = small
    res = sweep_lexicon(train, test, bundle.kb, bundle.word_entries, [0, 50, 200])
    assert [r.size for r in res.rows] == [0, 50, 200] and not res.partial
    cov = [r.coverage for r in res.rows]
    assert cov == sorted(cov)
    assert res.tsv().splitlines()[0] == "size\tlf1\tuf1\taccuracy\tcoverage"


def test_sweep_size_zero_equals_unconstrained(bundle, small):
    train, test = small
    cfg = PipelineConfig()
    cache = PrepareCache(bundle.kb, cfg)
    (row,) = sweep_lexicon(train, test, bundle.kb, bundle.word_entries, [0], cfg, cache=cache).rows
    tier = run_tier("unsupervised", train, test, bundle.kb, cfg=cfg, cache=cache)
    assert row.accuracy == pytest.approx(tier.report.overall)


def test_sweep_stops_on_training_failure(bundle):
    # a training set whose records have no groundable candidate
    lonely = [record("x", "_blank_/NNP slept/VBD", "Google")]
    res = sweep_lexicon(lonely, bundle.test[:5], bundle.kb, bundle.word_entries, [0, 50])
    assert res.partial and res.rows == [] and "size 0" in res.error


def test_frozen_sweep_trains_once(bundle, small, monkeypatch):
    import slotccg.pipeline as pipeline

    calls = []
    real = pipeline.train_prepared
    monkeypatch.setattr(pipeline, "train_prepared", lambda *a: calls.append(1) or real(*a))
    train, test = small
    res = sweep_lexicon(train, test, bundle.kb, bundle.word_entries, [0, 50, 200], retrain=False)
    assert len(calls) == 1 and len(res.rows) == 3
