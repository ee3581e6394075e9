import pytest

from survmix.config import (ConfigError, default_config, default_config_text,
                            parse_config)

MINIMAL = """
[truth.control]
weights = 0.5, 0.5
rates = 0.1, 0.5

[truth.research]
weights = 0.5, 0.5
rates = 0.05, 0.25
"""


def test_default_config_encodes_demo_scenario():
    cfg = default_config()
    assert cfg.truth.control.weights == (0.5, 0.5)
    assert cfg.truth.control.rates == (0.1, 0.5)
    assert cfg.truth.research.rates == (0.05, 0.25)
    assert cfg.trial.n_per_arm == 500
    assert cfg.trial.coupling == "comonotone"
    assert cfg.trial.censoring.kind == "none"
    assert (cfg.grid_min, cfg.grid_max, cfg.grid_points) == (0.0, 30.0, 601)
    assert cfg.landmark == 1.0 and cfg.rmst_horizon == 10.0
    assert cfg.sensitivity_replicates == 200


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.trial.n_per_arm == 500
    assert cfg.out_dir == "out"
    assert cfg.cutpoints == ()
    assert cfg.covariates == ("arm",)


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match=r"unknown section \[plotting\]"):
        parse_config(MINIMAL + "\n[plotting]\nstyle = dark\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key 'n_arms'"):
        parse_config(MINIMAL + "\n[trial]\nn_arms = 2\n")


def test_missing_truth_section_rejected():
    with pytest.raises(ConfigError, match=r"\[truth.research\]"):
        parse_config("[truth.control]\nweights = 1.0\nrates = 0.1\n")


def test_missing_rates_rejected():
    with pytest.raises(ConfigError, match="truth.control.rates"):
        parse_config("[truth.control]\nweights = 1.0\n"
                     "[truth.research]\nweights = 1.0\nrates = 0.05\n")


def test_bad_number_diagnostic_names_field():
    with pytest.raises(ConfigError, match="truth.control.rates"):
        parse_config(MINIMAL.replace("0.1, 0.5", "0.1, fast"))


def test_invalid_weights_reported_with_section():
    with pytest.raises(ConfigError, match=r"\[truth.control\].*sum to 1"):
        parse_config(MINIMAL.replace("0.5, 0.5\nrates = 0.1, 0.5", "0.5, 0.4\nrates = 0.1, 0.5"))


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "\n[trial]\nseed = 1\nseed = 2\n")


def test_censoring_section_builds_spec():
    cfg = parse_config(MINIMAL + "\n[censoring]\nkind = both\nadmin_time = 2.0\nrate = 0.1\n")
    assert cfg.trial.censoring.kind == "both"
    assert cfg.trial.censoring.admin_time == 2.0
    assert cfg.trial.censoring.rate == 0.1


def test_inconsistent_censoring_rejected():
    with pytest.raises(ConfigError, match=r"\[censoring\]"):
        parse_config(MINIMAL + "\n[censoring]\nkind = administrative\n")


def test_bad_coupling_rejected():
    with pytest.raises(ConfigError, match="coupling"):
        parse_config(MINIMAL + "\n[trial]\ncoupling = sideways\n")


def test_bad_grid_rejected():
    with pytest.raises(ConfigError, match=r"\[grid\]"):
        parse_config(MINIMAL + "\n[grid]\nmin = 5\nmax = 1\n")


def test_bad_cutpoints_rejected():
    with pytest.raises(ConfigError, match="cutpoints"):
        parse_config(MINIMAL + "\n[fit]\ncutpoints = 4, 2\n")


def test_bad_covariates_rejected():
    with pytest.raises(ConfigError, match="covariates"):
        parse_config(MINIMAL + "\n[fit]\ncovariates = arm, age\n")


def test_parse_error_carries_origin():
    with pytest.raises(ConfigError, match="myrun.cfg"):
        parse_config("not an ini file", origin="myrun.cfg")


def test_default_text_round_trips():
    assert parse_config(default_config_text()) == default_config()
