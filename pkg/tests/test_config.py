"""Configuration parsing, defaults, and eager validation."""

import pytest
import tomli as tomllib

from latticeym.runconfig import (
    ConfigError,
    default_config_dict,
    default_config_text,
    load_config,
    parse_config,
)


def test_default_text_parses_to_default_dict():
    assert tomllib.loads(default_config_text()) == default_config_dict()


def test_empty_config_gives_defaults():
    cfg = parse_config({})
    assert cfg.group.kind == "SO" and cfg.group.n == 3
    assert cfg.lattice.d == 2 and cfg.lattice.L == 4
    assert cfg.params.beta == 0.005
    assert cfg.kind == "langevin"
    assert cfg.seed == 0
    assert cfg.integrator["n_steps"] == 20000
    assert cfg.mcmc["thin"] == 32
    assert len(cfg.observables) == 1
    tag, loop = cfg.observables[0]
    assert tag == ("plaquette", (0, 0), (0, 1))
    assert len(list(loop)) == 4


def test_admissibility_is_echoed():
    cfg = parse_config({"model": {"beta": 0.005}})
    assert cfg.admissible
    assert cfg.raw["experiment"]["admissible"] is True
    assert cfg.raw["experiment"]["beta_threshold"] == pytest.approx(1.0 / 96.0)
    hot = parse_config({"model": {"beta": 0.02}})
    assert not hot.admissible
    assert hot.raw["experiment"]["admissible"] is False


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown configuration key: model.gruop"):
        parse_config({"model": {"gruop": "SO"}})
    with pytest.raises(ConfigError, match="unknown configuration key: extra"):
        parse_config({"extra": {}})
    with pytest.raises(ConfigError, match="model must be a table"):
        parse_config({"model": 5})


@pytest.mark.parametrize(
    "override, message",
    [
        ({"model": {"group": "SP"}}, "group must be SO or SU"),
        ({"model": {"n": 1}}, "model.n"),
        ({"model": {"d": 1}}, "model.d"),
        ({"model": {"L": 1}}, "model.L"),
        ({"model": {"beta": "hot"}}, "beta must be a number"),
        ({"experiment": {"kind": "anneal"}}, "experiment.kind"),
        ({"experiment": {"seed": -1}}, "seed"),
        ({"experiment": {"weight_a": 1.0}}, "weight_a must exceed 1"),
        ({"experiment": {"n_pairs": 1}}, "n_pairs"),
        ({"experiment": {"checkpoint_every": -5}}, "checkpoint_every"),
        ({"integrator": {"step_size": -0.1}}, "step_size"),
        ({"integrator": {"n_steps": 0}}, "n_steps"),
        ({"integrator": {"burn_in": 20000}}, "burn_in"),
        ({"integrator": {"thin": 0}}, "thin"),
        ({"integrator": {"measure_every": 0}}, "measure_every"),
        ({"mcmc": {"proposal_scale": 0.0}}, "proposal_scale"),
        ({"mcmc": {"proposal_scale": 3.15}}, "proposal_scale"),
        ({"mcmc": {"burn_in": 3600}}, "burn_in"),
    ],
)
def test_validation_errors(override, message):
    cfg = {k: dict(v) for k, v in override.items()}
    with pytest.raises(ConfigError, match=message):
        parse_config(cfg)


def test_observable_validation():
    with pytest.raises(ConfigError, match="kind must be plaquette or rectangle"):
        parse_config({"observables": [{"kind": "polyakov"}]})
    with pytest.raises(ConfigError, match="base must be 2 coordinates"):
        parse_config({"observables": [{"kind": "plaquette", "base": [0, 9]}]})
    with pytest.raises(ConfigError, match="two distinct axes"):
        parse_config({"observables": [{"kind": "plaquette", "axes": [1, 1]}]})
    with pytest.raises(ConfigError, match="extents"):
        parse_config(
            {"observables": [{"kind": "rectangle", "extents": [0, 2]}]}
        )
    with pytest.raises(ConfigError, match=r"observables\[0\] must be a table"):
        parse_config({"observables": [7]})


def test_axes_are_normalized_and_rectangles_build():
    cfg = parse_config(
        {
            "observables": [
                {"kind": "plaquette", "base": [1, 2], "axes": [1, 0]},
                {"kind": "rectangle", "base": [0, 0], "axes": [0, 1], "extents": [2, 1]},
            ]
        }
    )
    tag0, _ = cfg.observables[0]
    assert tag0 == ("plaquette", (1, 2), (0, 1))
    tag1, loop1 = cfg.observables[1]
    assert tag1 == ("rectangle", (0, 0), (0, 1), (2, 1))
    assert len(list(loop1)) == 6


def test_load_config_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        "[model]\nbeta = 0.01\nL = 6\n\n"
        '[experiment]\nkind = "gibbs"\nseed = 11\n'
    )
    cfg = load_config(str(path))
    assert cfg.params.beta == 0.01
    assert cfg.lattice.L == 6
    assert cfg.kind == "gibbs"
    assert cfg.seed == 11
    ### untouched sections keep their defaults
    assert cfg.integrator["thin"] == 10
    assert cfg.mcmc["sweeps"] == 3600


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[model\nbeta = 1")
    with pytest.raises(ConfigError, match="malformed TOML"):
        load_config(str(bad))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.toml"))
