import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slotccg.categories import parse_category as P  # noqa: E402
from slotccg.parser import Token  # noqa: E402
from slotccg.synth import toy_kb as _toy_kb  # noqa: E402

TV = r"(S\NP)/NP"
PPV = r"((S\NP)/PP)/NP"
VP_MOD = r"((S\NP)\(S\NP))/NP"
S_MOD = r"(S\S)/NP"
PREP = "PP/NP"
REL_NP = r"(NP\NP)/(S\NP)"
REL_VP = r"((S\NP)\(S\NP))/(S\NP)"
AUX = r"(S\NP)/(S\NP)"


def cats(*specs):
    return frozenset(P(s) for s in specs)


@pytest.fixture(scope="session")
def toy_kb():
    return _toy_kb()


@pytest.fixture
def worked_tokens():
    return [Token("Google", "NNP", "Google"), Token("acquired", "VBD"), Token("Nest", "NNP", "Nest"),
            Token("in", "IN"), Token("2014", "CD", "2014")]


@pytest.fixture
def worked_candidates():
    return [cats("NP"), cats(TV, PPV), cats("NP"), cats(VP_MOD, S_MOD, PREP), cats("NP")]


@pytest.fixture
def relclause_tokens():
    return [Token("Google", "NNP", "Google"), Token("acquired", "VBD"), Token("_blank_", "NNP", None, True),
            Token("which", "WDT"), Token("was", "VBD"), Token("founded", "VBN"), Token("in", "IN"),
            Token("Palo_Alto", "NNP", "Palo_Alto")]


@pytest.fixture
def relclause_candidates():
    return [cats("NP"), cats(TV), cats("NP"), cats(REL_NP, REL_VP), cats(AUX), cats(r"S\NP"),
            cats(VP_MOD), cats("NP")]


@pytest.fixture(scope="session")
def bundle():
    from slotccg.experiments import load_bundle

    return load_bundle()


@pytest.fixture(scope="session")
def full_run(bundle):
    """Every tier, the baseline and the lexicon sweep on the bundled corpus, sharing one cache."""
    from slotccg.experiments import run_all, run_sweep
    from slotccg.pipeline import PipelineConfig, PrepareCache

    cfg = PipelineConfig()
    cache = PrepareCache(bundle.kb, cfg)
    t0 = time.perf_counter()
    results = run_all(bundle, cfg, cache=cache)
    t_tiers = time.perf_counter() - t0
    sweep = run_sweep(bundle, cfg=cfg, cache=cache)
    return {"results": {r.name: r for r in results}, "tier_seconds": t_tiers, "sweep": sweep}


def record(rid, text, answer, supertags=None):
    """Build a corpus record from ``word/POS[/entity]`` tokens; ``_blank_/NNP`` marks the slot."""
    from slotccg.corpus import record_from_json

    tokens = [t.split("/") for t in text.split()]
    blank = next(i for i, t in enumerate(tokens) if t[0] == "_blank_")
    data = {"id": rid, "tokens": tokens, "blank": blank, "answer": answer}
    if supertags is not None:
        data["supertags"] = supertags
    return record_from_json(data)
