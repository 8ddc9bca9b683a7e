"""Tests for SolverConfig validation and loading."""

import json

import pytest

from marq.config import SolverConfig, load_config
from marq.exceptions import InvalidArgumentError


def test_defaults_match_benchmark_settings(default_config):
    cfg = default_config
    assert (cfg.eta1, cfg.eta2) == (0.1, 0.75)
    assert (cfg.gamma1, cfg.gamma2, cfg.gamma3) == (0.85, 0.5, 2.0)
    assert cfg.lambda0 == 0.05
    assert cfg.eps == 1e-7
    assert cfg.max_outer_iters == 1000
    assert cfg.max_coarse_iters == 50


@pytest.mark.parametrize(
    "overrides",
    [
        {"eta1": 0.8, "eta2": 0.5},
        {"eta2": 1.0},
        {"gamma1": 0.4, "gamma2": 0.5},
        {"gamma3": 1.0},
        {"lambda_min": 0.0},
        {"lambda0": 1e-9},
        {"theta": 0.0},
        {"eps": -1.0},
        {"eps_per_level": []},
        {"eps_per_level": [1e-7, 0.0]},
        {"kappa_H": 1.0},
        {"recursion_policy": "greedy"},
        {"descend_policy": "never"},
        {"max_coarse_iters": 0},
        {"max_wall_time": 0.0},
    ],
)
def test_invalid_values_are_rejected(overrides):
    with pytest.raises(InvalidArgumentError):
        SolverConfig(**overrides)


def test_eps_per_level_falls_back_to_last_entry():
    cfg = SolverConfig(eps_per_level=[1e-5, 1e-6])
    assert cfg.eps_for(1) == 1e-5
    assert cfg.eps_for(2) == 1e-6
    assert cfg.eps_for(4) == 1e-6
    assert SolverConfig().eps_for(3) == 1e-7


def test_replace_revalidates():
    cfg = SolverConfig()
    assert cfg.replace(theta=0.1).theta == 0.1
    with pytest.raises(InvalidArgumentError):
        cfg.replace(theta=-1.0)


def test_pred_floor_scales_with_f():
    cfg = SolverConfig(pred_floor_rel=1e-10)
    assert cfg.pred_floor(0.0) == pytest.approx(1e-10)
    assert cfg.pred_floor(-99.0) == pytest.approx(1e-8)


def test_from_dict_ignores_unknown_keys():
    cfg = SolverConfig.from_dict({"theta": 0.25, "colour": "red"})
    assert cfg.theta == 0.25
    assert cfg.get("colour", "none") == "none"


def test_to_dict_covers_every_field():
    data = SolverConfig().to_dict()
    assert set(data) == SolverConfig.known_fields()
    json.dumps(data)


def test_load_config(temp_dir):
    path = temp_dir / "marq.json"
    path.write_text(json.dumps({"kappa_H": 0.2, "descend_policy": "alternate"}))

    cfg = load_config(path)
    assert cfg.kappa_H == 0.2
    assert cfg.descend_policy == "alternate"


def test_load_config_errors(temp_dir):
    with pytest.raises(InvalidArgumentError):
        load_config(temp_dir / "missing.json")

    broken = temp_dir / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(InvalidArgumentError):
        load_config(broken)

    invalid = temp_dir / "invalid.json"
    invalid.write_text(json.dumps({"eta1": 2.0}))
    with pytest.raises(InvalidArgumentError):
        load_config(invalid)
