import json
import logging

import pytest

from config_loader import ConfigLoader, ExperimentConfig
from errors import ConfigError
from solver_ensemble import SchemeConfig


def test_defaults():
    config = ExperimentConfig()
    assert config.case == "edney1"
    assert (config.mach, config.alpha1_deg, config.alpha2_deg) == (4.0, 20.0, 15.0)
    assert (config.nx, config.ny) == (100, 100)
    assert config.mask_margin == 3
    assert config.edney6_angle_convention == "absolute"
    assert len(config.schemes) == 7
    assert config.anchor == (0.0, 0.2)


def test_to_dict_round_trip():
    config = ExperimentConfig(case="oblique", mach=2.5, theta_deg=12.0)
    data = json.loads(json.dumps(config.to_dict()))
    again = ExperimentConfig(**data)
    assert again == config
    assert isinstance(again.schemes[0], SchemeConfig)


@pytest.mark.parametrize("changes", [
    {"case": "edney4"},
    {"mach": 0.9},
    {"gamma": 1.0},
    {"nx": 4},
    {"mask_margin": 2},
    {"mask_margin": 60},
    {"error_variables": "pressure"},
    {"edney6_angle_convention": "sideways"},
    {"schemes": [{"scheme_id": "cir1"}]},
    {"jobs": 0},
    {"mc_deltas": [1.5]},
    {"mc_dims": [1]},
])
def test_invalid_values(changes):
    with pytest.raises(ConfigError):
        ExperimentConfig().replace(**changes)


def test_load_with_overrides(tmp_path):
    loader = ConfigLoader(str(tmp_path))
    loader.save_config("exp.json", {"case": "oblique", "mach": 2.5, "theta_deg": 15.0, "nx": 40})
    config = loader.load_experiment_config("exp.json", {"output_dir": "elsewhere", "jobs": None})
    assert config.case == "oblique"
    assert config.nx == 40 and config.ny == 100
    assert config.output_dir == "elsewhere"
    assert config.jobs == 1


def test_unknown_keys_are_warned(tmp_path, caplog):
    loader = ConfigLoader(str(tmp_path))
    loader.save_config("exp.json", {"case": "oblique", "flux_limiter_mode": "x"})
    with caplog.at_level(logging.WARNING, logger="config_loader"):
        config = loader.load_experiment_config("exp.json")
    assert config.case == "oblique"
    assert "flux_limiter_mode" in caplog.text


def test_missing_and_broken_files(tmp_path):
    loader = ConfigLoader(str(tmp_path))
    with pytest.raises(ConfigError):
        loader.load_experiment_config("missing.json")
    (tmp_path / "broken.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        loader.load_experiment_config("broken.json")
    (tmp_path / "list.json").write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        loader.load_experiment_config("list.json")
    (tmp_path / "typed.json").write_text('{"nx": "many"}', encoding="utf-8")
    with pytest.raises(ConfigError):
        loader.load_experiment_config("typed.json")


def test_create_default_configs(tmp_path):
    loader = ConfigLoader(str(tmp_path / "config"))
    created = loader.create_default_configs()
    assert created == ["experiment_edney1.json", "experiment_edney6.json", "experiment_oblique.json"]
    edney6 = loader.load_experiment_config("experiment_edney6.json")
    assert edney6.case == "edney6"
    assert (edney6.mach, edney6.alpha1_deg, edney6.alpha2_deg) == (3.5, 15.0, 25.0)
    assert [s.label for s in edney6.schemes] == [s.label for s in ExperimentConfig().schemes]
