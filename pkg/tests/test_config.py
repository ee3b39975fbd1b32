import numpy as np
import pytest

from holonomy_lab.config import (ConfigError, RunConfig, config_hash,
                                 default_config_text, parse_config)


def test_defaults_match_device_values():
    cfg = RunConfig()
    assert cfg.t1_ge_us == 18.9
    assert cfg.t2e_ge_us == 38.0
    assert cfg.chi_storage_ge_MHz == 2.87
    assert cfg.tau_sr_ns == 120.0
    assert cfg.omega_ge_GHz == 5.31


def test_parse_overrides_and_comments():
    cfg = parse_config("""
# comment line
t1_ge_us = 20.0   # inline comment
noise = true
seed = 7
scheme = nhqc
""")
    assert cfg.t1_ge_us == 20.0
    assert cfg.noise is True
    assert cfg.seed == 7
    assert cfg.scheme == "nhqc"
    # untouched keys keep defaults
    assert cfg.t1_ef_us == 12.7


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("t1_ge = 20.0")


def test_bad_values_rejected():
    with pytest.raises(ConfigError):
        parse_config("t1_ge_us = fast")
    with pytest.raises(ConfigError):
        parse_config("seed = 1.5")
    with pytest.raises(ConfigError):
        parse_config("noise = maybe")
    with pytest.raises(ConfigError):
        parse_config("just a line without equals")


def test_hash_tracks_physics_not_output_dir():
    a = RunConfig()
    b = parse_config("output_dir = elsewhere", base=a)
    c = parse_config("t1_ge_us = 21.0", base=a)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)


def test_default_config_text_round_trips():
    text = default_config_text()
    cfg = parse_config(text)
    assert cfg == RunConfig()


def test_noise_model_and_dispersive_helpers():
    cfg = RunConfig()
    n = cfg.noise_model(epsilon=0.05)
    assert np.isclose(n.gamma_ge, 1 / 18.9)
    assert n.epsilon == 0.05
    p = cfg.dispersive_params()
    assert np.isclose(p.chi_ge, 2.87 * 2 * np.pi * 1e-3)
    assert p.n_fock == 4
