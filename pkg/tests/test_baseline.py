import pytest

from conftest import record
from slotccg.baseline import (
    NULL,
    pair_examples,
    pair_features,
    pair_query,
    predict_bow,
    predict_pairs,
    relation_label,
    train_bow,
)
from slotccg.kb import execute
from slotccg.ranker import TrainingError

ACQ_BLANK_ACQUIRED = relation_label("business.acquisition", "company_acquired", "acquiring_company")
ACQ_BLANK_BUYER = relation_label("business.acquisition", "acquiring_company", "company_acquired")
HQ = relation_label("organization.headquarters", "organization", "location")


def _train_corpus():
    return [
        record("a1", "Google/NNP/Google acquired/VBD _blank_/NNP", "Nest"),
        record("a2", "Google/NNP/Google acquired/VBD _blank_/NNP", "DeepMind"),
        record("a3", "_blank_/NNP acquired/VBD Nest/NNP/Nest", "Google"),
        record("h1", "_blank_/NNP is/VBZ based/VBN in/IN Mountain_View/NNP/Mountain_View", "Google"),
    ]


def test_pair_labels_from_kb(toy_kb):
    (ex,) = pair_examples(_train_corpus()[0], toy_kb)
    assert ex.other == "Google" and ex.label == ACQ_BLANK_ACQUIRED


def test_blank_and_entity_excluded_from_features():
    r = _train_corpus()[3]
    fv = pair_features(r, 4)
    assert ("w", "_blank_") not in fv and ("w", "mountain_view") not in fv
    assert fv["ws", "in", "L"] == 1


def test_learns_acquisition_relation(toy_kb):
    model = train_bow(_train_corpus(), toy_kb, epochs=5)
    held_out = record("t1", "Google/NNP/Google quietly/RB acquired/VBD _blank_/NNP", "Nest")
    assert predict_pairs(held_out, model) == [("Google", ACQ_BLANK_ACQUIRED)]


def test_all_null_training_predicts_null(toy_kb):
    corpus = [record("n1", "_blank_/NNP met/VBD London/NNP/London", "Google")]
    model = train_bow(corpus, toy_kb, epochs=3)
    assert model.classes == (NULL,)
    assert predict_pairs(corpus[0], model) == [("London", NULL)]
    assert predict_bow(corpus[0], toy_kb, model) is None


def test_same_seed_identical_model(toy_kb):
    a = train_bow(_train_corpus(), toy_kb, epochs=4, seed=3)
    b = train_bow(_train_corpus(), toy_kb, epochs=4, seed=3)
    assert a.to_text() == b.to_text()
    assert a.to_text().startswith("# model\tbow\n")


def test_empty_corpus_is_an_error(toy_kb):
    with pytest.raises(TrainingError):
        train_bow([], toy_kb)


def test_two_entity_sentence_answers(toy_kb):
    model = train_bow(_train_corpus(), toy_kb, epochs=5)
    r = record("t2", "_blank_/NNP acquired/VBD Nest/NNP/Nest", "Google")
    assert predict_bow(r, toy_kb, model) == "Google"


def test_one_wrong_relation_over_constrains(toy_kb):
    good = [("Google", ACQ_BLANK_ACQUIRED), ("2014", relation_label("business.acquisition", "company_acquired", "date"))]
    assert execute(pair_query(good), toy_kb) == ["DeepMind", "Nest"]
    bad = good + [("Mountain_View", HQ)]
    assert execute(pair_query(bad), toy_kb) == []


def test_all_null_query_is_absent():
    assert pair_query([("Google", NULL), ("Nest", NULL)]) is None


def test_oracle_label_equals_kb_lookup(toy_kb):
    q = pair_query([("Google", ACQ_BLANK_ACQUIRED)])
    direct = sorted(ev.roles["company_acquired"] for ev in toy_kb.events
                    if ev.type == "business.acquisition" and ev.roles.get("acquiring_company") == "Google")
    assert sorted(execute(q, toy_kb)) == direct


def test_null_distractor_does_not_change_query():
    base = [("Google", ACQ_BLANK_ACQUIRED)]
    assert pair_query(base + [("London", NULL)]).serialize() == pair_query(base).serialize()
