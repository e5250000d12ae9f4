import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import PPV, PREP, S_MOD, TV, VP_MOD, cats
from oracles import all_derivation_keys
from slotccg.categories import NP, S, parse_category as P
from slotccg.lexicon import Lexicon, LexiconCoverageError
from slotccg.parser import (
    BA,
    FA,
    ParseConfig,
    Token,
    apply_combinator,
    build_derivation,
    candidate_sets,
    is_normal_form,
    parse,
    score_derivation,
    validate_derivation,
)

EXHAUSTIVE = ParseConfig(beam_width=None, top_n=None)


def test_forward_application():
    assert apply_combinator(P(TV), NP) == (P(r"S\NP"), FA)


def test_backward_application():
    assert apply_combinator(NP, P(r"S\NP")) == (S, BA)


def test_no_rule():
    assert apply_combinator(NP, NP) is None


def test_composition_and_conjunction():
    assert apply_combinator(P(r"(S\NP)/(S\NP)"), P(TV)) == (P(TV), "fc")
    assert apply_combinator(P(r"S\NP"), P(r"(S\NP)\(S\NP)")) == (P(r"S\NP"), "ba")
    assert apply_combinator(P(r"NP\NP"), P(r"S\NP")) == (P(r"S\NP"), "bc")
    assert apply_combinator(P("conj"), NP) == (P(r"NP\NP"), "conj")


def test_worked_three_analyses(worked_tokens, worked_candidates):
    ds = parse(worked_tokens, candidates=worked_candidates, cfg=EXHAUSTIVE)
    preps = {str(d.supertags[3]) for d in ds}
    assert {VP_MOD, S_MOD, PREP} <= preps
    assert len(ds) == 3
    assert all(d.root == S for d in ds)


def test_relclause_both_attachments(relclause_tokens, relclause_candidates):
    ds = parse(relclause_tokens, candidates=relclause_candidates, cfg=EXHAUSTIVE)
    rels = {str(d.supertags[3]) for d in ds}
    assert rels == {r"(NP\NP)/(S\NP)", r"((S\NP)\(S\NP))/(S\NP)"}


def test_single_token():
    (d,) = parse([Token("Google", "NNP", "Google")], candidates=[cats("NP")])
    assert d.root == NP and len(d) == 1
    assert score_derivation(d) == 0.0


def test_single_leaf_score_counts_depth():
    d = build_derivation(P(r"S\NP"))
    assert score_derivation(d) == pytest.approx(-0.1)


def test_worked_scores_by_hand():
    # (a) adjunct: fa + ba, leaf depths 0+2+0+3+0 -> -2 - 0.5
    a = build_derivation([P("NP"), [[P(TV), P("NP")], [P(VP_MOD), P("NP")]]])
    # (c) PP argument: fa + ba, leaf depths 0+3+0+1+0 -> -2 - 0.4
    c = build_derivation([P("NP"), [[P(PPV), P("NP")], [P(PREP), P("NP")]]])
    assert score_derivation(a) == pytest.approx(-2.5)
    assert score_derivation(c) == pytest.approx(-2.4)


def test_gold_supertags_single_application_derivation(worked_tokens):
    tags = [P("NP"), P(TV), P("NP"), P(VP_MOD), P("NP")]
    (d,) = parse(worked_tokens, supertags=tags, cfg=EXHAUSTIVE)
    assert d.tree.combinators <= {FA, BA}


def test_blank_forced_to_np(relclause_tokens):
    sets = candidate_sets(relclause_tokens, Lexicon())
    assert sets[2] == frozenset({NP})


def test_empty_candidate_set_names_token():
    with pytest.raises(LexiconCoverageError, match="'the'"):
        candidate_sets([Token("the", "DT")], Lexicon())


def test_empty_sentence_rejected():
    with pytest.raises(ValueError):
        parse([], candidates=[])


def test_no_full_analysis_is_empty():
    toks = [Token("Google", "NNP", "Google"), Token("Nest", "NNP", "Nest")]
    assert parse(toks, candidates=[cats("NP"), cats("NP")]) == []


def test_top_n_cap(relclause_tokens, relclause_candidates):
    assert len(parse(relclause_tokens, candidates=relclause_candidates, cfg=ParseConfig(top_n=2))) == 2


def test_ordering_is_total(relclause_tokens, relclause_candidates):
    ds = parse(relclause_tokens, candidates=relclause_candidates, cfg=EXHAUSTIVE)
    keys = [(-d.score, d.key) for d in ds]
    assert keys == sorted(keys)
    assert len({d.key for d in ds}) == len(ds)


# --- oracle equivalence ---------------------------------------------------------

POOL = [P(s) for s in ("NP", "N", r"S\NP", TV, PPV, VP_MOD, S_MOD, PREP, "PP", r"NP/N", r"NP\NP",
                         r"(S\NP)/(S\NP)", "conj", r"(NP\NP)/(S\NP)", r"S\S")]


SKELETONS = [
    ["NP", r"S\NP"],
    ["NP", TV, "NP"],
    ["NP", PPV, "NP", PREP, "NP"],
    [r"NP/N", "N", TV, "NP"],
    ["NP", r"(S\NP)/(S\NP)", TV, "NP"],
    ["NP", "conj", "NP", r"S\NP"],
    ["NP", TV, "NP", r"(NP\NP)/(S\NP)", r"S\NP"],
]


def _random_candidates(rng, n):
    """Random sets; when a skeleton of length n exists, seed them with it so parses exist."""
    fitting = [s for s in SKELETONS if len(s) == n]
    base = rng.choice(fitting) if fitting and rng.random() < 0.7 else [None] * n
    out = []
    for b in base:
        extra = set(rng.sample(POOL, rng.randint(0 if b else 1, 2)))
        if b:
            extra.add(P(b))
        out.append(frozenset(extra))
    return out


def test_chart_matches_bruteforce_enumeration():
    rng = random.Random(7)
    nonempty = 0
    for _ in range(150):
        n = rng.randint(1, 6)
        cands = _random_candidates(rng, n)
        toks = [Token(f"w{i}", "NN") for i in range(n)]
        got = {d.key for d in parse(toks, candidates=cands, cfg=EXHAUSTIVE)}
        assert got == all_derivation_keys(cands)
        nonempty += bool(got)
    assert nonempty > 60


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(2, 6))
def test_every_derivation_revalidates(rng, n):
    cands = _random_candidates(rng, n)
    toks = [Token(f"w{i}", "NN") for i in range(n)]
    first = parse(toks, candidates=cands)
    for d in first:
        assert validate_derivation(d)
        assert is_normal_form(d)
        assert len(d) == n
        assert d.root in (S, NP)
    assert [d.key for d in first] == [d.key for d in parse(toks, candidates=cands)]
