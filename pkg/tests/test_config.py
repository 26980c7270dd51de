import math

import pytest

from optosnspd import config as cfgmod
from optosnspd.config import (
    ConfigError,
    ScenarioConfig,
    parse_config,
    parse_config_text,
)


def test_defaults_from_preset():
    cfg = parse_config("", scenario="trace")
    assert cfg["drive.period_us"] == 35.0
    assert cfg["modulator.vpi_cold_V"] == 6.6
    assert cfg.preset_name == "paper-1K"
    assert cfg.seed == 0


def test_parse_sections_and_comments():
    text = """
    # a comment
    [drive]
    period_us = 40.0  ; trailing comment
    bias_power_uW = 7.5

    [modulator]
    vpi_cold_V = 7.0
    """
    values = parse_config_text(text)
    assert values == {
        "drive.period_us": 40.0,
        "drive.bias_power_uW": 7.5,
        "modulator.vpi_cold_V": 7.0,
    }


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("[drive]\nbogus_key = 1.0\n")


def test_out_of_range_value():
    with pytest.raises(ConfigError, match="must be >"):
        parse_config_text("[drive]\nperiod_us = -3\n")


def test_bad_syntax():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("[drive]\nperiod_us 35\n")
    with pytest.raises(ConfigError, match="empty section"):
        parse_config_text("[]\n")


def test_int_keys_reject_fractions():
    with pytest.raises(ConfigError):
        parse_config_text("[run]\nn_periods = 10.5\n")
    assert parse_config_text("[run]\nn_periods = 10\n")["run.n_periods"] == 10
    with pytest.raises(ConfigError):
        parse_config_text("[run]\nn_periods = 0\n")


def test_overrides_take_precedence():
    text = "[drive]\nperiod_us = 40.0\n"
    cfg = parse_config(
        text, scenario="trace", overrides={"drive.period_us": "45.0"}
    )
    assert cfg["drive.period_us"] == 45.0


def test_unknown_scenario_and_preset():
    with pytest.raises(ConfigError):
        parse_config("", scenario="nope")
    with pytest.raises(ConfigError):
        parse_config("", scenario="trace", preset_name="nope")


def test_builders_convert_units(cfg):
    nw = cfgmod.build_nanowire(cfg)
    assert nw.nominal_bias_current == pytest.approx(4e-6)
    mod = cfgmod.build_modulator(cfg)
    assert mod.capacitance == pytest.approx(800e-12)
    assert mod.electrode_length == pytest.approx(20e-3)
    drive = cfgmod.build_drive(cfg)
    assert drive.period == pytest.approx(35e-6)
    assert drive.bias_power == pytest.approx(6e-6)
    readout = cfgmod.build_readout(cfg, threshold_mv=0.5)
    assert readout.lowpass_cutoff == pytest.approx(1e6)
    assert readout.discriminator_threshold == 0.5


def test_build_drive_without_photon(cfg):
    assert cfgmod.build_drive(cfg, with_photon=False).signal_photon_times == ()
    assert len(cfgmod.build_drive(cfg).signal_photon_times) == 1


def test_build_source_mean_override(cfg):
    src = cfgmod.build_source(cfg)
    assert src.mean_photons_per_pulse == 1.17
    assert cfgmod.build_source(cfg, mean=0.0).mean_photons_per_pulse == 0.0


def test_auto_threshold_requires_computed_value(cfg):
    assert cfg["readout.discriminator_threshold_mV"] == 0.0
    with pytest.raises(ConfigError):
        cfgmod.build_readout(cfg)


def test_explicit_threshold_passthrough():
    cfg = parse_config(
        "[readout]\ndiscriminator_threshold_mV = 0.2\n", scenario="trace"
    )
    assert cfgmod.build_readout(cfg).discriminator_threshold == 0.2


def test_scenario_config_rejects_unknown_values():
    with pytest.raises(ConfigError):
        ScenarioConfig(scenario="trace", values={"no.such.key": 1.0})


def test_bias_phase_preset_is_quadrature(cfg):
    assert cfg["modulator.bias_phase_rad"] == pytest.approx(-math.pi / 2)
