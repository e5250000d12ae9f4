import pytest

from slotccg.config import ConfigError, RunConfig, load_config, parse_config_text


def test_parse_values_and_comments():
    cfg = parse_config_text("mode = semi-pos  # tier\n\nbeam_width = 20\nmodel = m.txt\n")
    assert (cfg.mode, cfg.beam_width, cfg.model, cfg.top_n) == ("semi-pos", 20, "m.txt", 10)


@pytest.mark.parametrize("text, message", [
    ("mode supervised", "expected key = value"),
    ("colour = red", "unknown key"),
    ("seed = 1\nseed = 2", "duplicate key"),
    ("epochs = ten", "must be an integer"),
])
def test_parse_errors_carry_line(text, message):
    with pytest.raises(ConfigError, match=message) as info:
        parse_config_text(text, "run.cfg")
    assert str(info.value).startswith("run.cfg:")


@pytest.mark.parametrize("values", [{"mode": "magic"}, {"beam_width": 0}, {"top_n": -1}, {"epochs": -1},
                                    {"seed": -3}, {"max_candidates": 0}])
def test_validate_rejects(values):
    with pytest.raises(ConfigError):
        RunConfig(**values).validate()


def test_zero_epochs_allowed():
    assert RunConfig(epochs=0).validate().pipeline().epochs == 0


def test_override_ignores_none():
    cfg = RunConfig(seed=4).override(seed=None, top_n=3)
    assert cfg.seed == 4 and cfg.top_n == 3


def test_pipeline_carries_settings():
    p = RunConfig(beam_width=7, top_n=2, max_candidates=9, seed=1).pipeline()
    assert p.parse.beam_width == 7 and p.parse.top_n == 2 and p.grounding.max_candidates == 9 and p.seed == 1


def test_load_from_file(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("mode = bow\n")
    assert load_config(path).mode == "bow"


def test_supervision_mode_alias():
    assert parse_config_text("supervision_mode = unsupervised").mode == "unsupervised"


@pytest.mark.parametrize("key", ["strict_types", "sweep_retrain"])
def test_switches_are_binary(key):
    with pytest.raises(ConfigError, match="0 or 1"):
        parse_config_text(f"{key} = 2").validate()
