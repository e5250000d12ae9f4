import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import record
from slotccg.corpus import CorpusError, CorpusStats, corpus_stats, load_corpus, record_from_json, write_corpus


def _line(rid, tokens, blank, answer, **extra):
    return json.dumps({"id": rid, "tokens": tokens, "blank": blank, "answer": answer, **extra})


GOOD = [["Google", "NNP", "Google"], ["acquired", "VBD"], ["_blank_", "NNP"]]


def test_round_trip(tmp_path):
    recs = [record("a", "Google/NNP/Google acquired/VBD _blank_/NNP", "Nest", [r"NP", r"(S\NP)/NP", "NP"]),
            record("b", "_blank_/NNP was/VBD founded/VBN in/IN 2010/CD/2010", "Nest")]
    path = tmp_path / "c.jsonl"
    write_corpus(path, recs)
    assert load_corpus(path) == recs


def test_two_blanks_rejected_with_id(tmp_path, caplog):
    lines = [_line(f"ok{i}", GOOD, 2, "Nest") for i in range(200)]
    lines.append(_line("twice", GOOD + [["_blank_", "NNP"]], 2, "Nest"))
    path = tmp_path / "c.jsonl"
    path.write_text("\n".join(lines) + "\n")
    recs = load_corpus(path)
    assert len(recs) == 200
    assert "twice" in caplog.text and "exactly one blank" in caplog.text


def test_too_many_failures_abort(tmp_path):
    lines = [_line("ok", GOOD, 2, "Nest"), _line("bad", GOOD, 1, "Nest")]
    path = tmp_path / "c.jsonl"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorpusError) as info:
        load_corpus(path)
    assert info.value.failures[0][0] == "bad"


@pytest.mark.parametrize("data, message", [
    ({"id": "x", "tokens": GOOD, "blank": 2, "answer": "Google"}, "still mentioned"),
    ({"id": "x", "tokens": GOOD, "blank": 2, "answer": "Nest", "supertags": ["NP"]}, "supertags"),
    ({"id": "x", "tokens": GOOD, "blank": 2, "answer": "Nest", "entity_count": 3}, "entity_count"),
    ({"id": "x", "tokens": GOOD, "blank": 2, "answer": "Nest", "supertags": ["NP", "(S", "NP"]}, "bad supertag"),
])
def test_record_violations(data, message):
    with pytest.raises(ValueError, match=message):
        record_from_json(data)


def test_table_layout():
    st_ = CorpusStats(79247, 1, 2, 3)
    assert CorpusStats.header().split() == ["Sentences", "Tokens", "Types", "Entities"]
    assert st_.row("Train").split()[:2] == ["Train", "79,247"]


words = st.sampled_from(["acquired", "founded", "in", "the", "company", "was"])
ents = st.sampled_from(["Google", "Nest", "DeepMind", "London", "2014"])


@settings(max_examples=50)
@given(st.lists(st.lists(st.one_of(words, ents), max_size=6), min_size=1, max_size=8))
def test_stats_bounds(sentences):
    recs = []
    for i, toks in enumerate(sentences):
        parts = [f"{t}/NNP/{t}" if t[0].isupper() or t.isdigit() else f"{t}/VBD" for t in toks]
        recs.append(record(f"r{i}", " ".join(parts + ["_blank_/NNP"]), "Answer"))
    s = corpus_stats(recs)
    assert s.sentences == len(recs)
    assert s.types <= s.tokens
    assert s.entities <= s.tokens
