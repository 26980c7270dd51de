"""Scenario configuration: schema, file parsing, overrides, bundle builders.

Config files are line-oriented `key = value` under `[section]` headers; the
flat key is "section.key".  Units are encoded in the key names (_uW, _V, _us,
...).  Unknown keys and out-of-range values are rejected with the offending
line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .circuit import OpticalDrive, ReadoutParams
from .modulator import ModulatorParams, OpticalBudget
from .photodiode import PhotodiodeParams
from .presets import PRESETS
from .snspd import NanowireParams
from .stats import PhotonSource

SCENARIOS = (
    "loadline",
    "powersweep",
    "vpisweep",
    "trace",
    "histogram",
    "budget",
    "fit-vpi",
    "fit-fp",
)


class ConfigError(ValueError):
    """Malformed config text, unknown key, or out-of-range value."""

    def __init__(self, message, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class _Key:
    kind: type  # float, int, or str
    low: Optional[float] = None  # inclusive lower bound
    high: Optional[float] = None  # inclusive upper bound
    exclusive_low: bool = False


def _pos(kind=float):
    return _Key(kind, low=0.0, exclusive_low=True)


def _nonneg(kind=float):
    return _Key(kind, low=0.0)


SCHEMA = {
    "photodiode.responsivity_A_per_W": _pos(),
    "photodiode.knee_voltage_V": _pos(),
    "photodiode.knee_sharpness_V": _pos(),
    "photodiode.dark_current_A": _nonneg(),
    "snspd.normal_resistance_ohm": _pos(),
    "snspd.resistance_per_length_ohm_per_m": _pos(),
    "snspd.heat_capacity_per_length_J_per_K_m": _pos(),
    "snspd.thermal_conductance_per_length_W_per_K_m": _pos(),
    "snspd.critical_temperature_offset_K": _pos(),
    "snspd.nominal_bias_current_uA": _pos(),
    "snspd.detection_plateau": _Key(float, low=0.0, high=1.0),
    "snspd.efficiency_sharpness": _pos(),
    "snspd.leak_conductance_S": _nonneg(),
    "snspd.seed_normal_fraction": _Key(float, low=0.0, high=1.0, exclusive_low=True),
    "modulator.vpi_cold_V": _pos(),
    "modulator.vpi_warm_V": _pos(),
    "modulator.bias_phase_rad": _Key(float),
    "modulator.fiber_to_fiber_efficiency": _Key(float, low=0.0, high=1.0, exclusive_low=True),
    "modulator.extinction_imbalance": _Key(float, low=0.0, high=0.999999),
    "modulator.capacitance_pF": _pos(),
    "modulator.electrode_length_mm": _pos(),
    "budget.mode_overlap_in": _Key(float, low=0.0, high=1.0, exclusive_low=True),
    "budget.mode_overlap_out": _Key(float, low=0.0, high=1.0, exclusive_low=True),
    "budget.interface_transmission": _Key(float, low=0.0, high=1.0, exclusive_low=True),
    "budget.propagation_loss_dB_per_cm": _nonneg(),
    "budget.path_length_one_way_cm": _pos(),
    "budget.mirror_reflectivity": _Key(float, low=0.0, high=1.0, exclusive_low=True),
    "readout.responsivity_mV_per_uW": _pos(),
    "readout.lowpass_cutoff_MHz": _pos(),
    "readout.discriminator_threshold_mV": _nonneg(),  # 0 selects auto threshold
    "readout.min_pulse_power_dBm": _Key(float),
    "drive.period_us": _pos(),
    "drive.bias_off_us": _pos(),
    "drive.bias_power_uW": _nonneg(),
    "drive.probe_power_uW": _nonneg(),
    "drive.photon_time_us": _nonneg(),
    "source.mean_photons_per_pulse": _nonneg(),
    "source.background_rate_per_s": _nonneg(),
    "run.n_periods": _Key(int, low=1),
    "run.trace_periods": _Key(int, low=1),
    "run.bin_width_us": _pos(),
    "run.time_step_ns": _pos(),
    "run.sample_period_ns": _pos(),
    "sweep.loadline_r_min_ohm": _pos(),
    "sweep.loadline_r_max_ohm": _pos(),
    "sweep.loadline_points": _Key(int, low=2),
    "sweep.power_min_uW": _pos(),
    "sweep.power_max_uW": _pos(),
    "sweep.power_points": _Key(int, low=2),
    "sweep.vpi_v_min_V": _Key(float),
    "sweep.vpi_v_max_V": _Key(float),
    "sweep.vpi_points": _Key(int, low=4),
    "sweep.vpi_temperature_K": _Key(float, low=0.0, high=350.0, exclusive_low=True),
    "mpp.r_min_ohm": _pos(),
    "mpp.r_max_ohm": _pos(),
    "fit.contrast": _Key(float, low=0.0, high=1.0),
    "fit.facet_reflectivity": _Key(float, low=0.0, high=1.0, exclusive_low=True),
    "fit.sample_length_cm": _pos(),
    "fit.input_csv": _Key(str),
    "fit.vpi_hint_V": _nonneg(),
    "stats.expected_peak_delay_us": _pos(),
    "stats.expected_fwhm_us": _pos(),
}


def _validate(key: str, raw, line: Optional[int] = None):
    if key not in SCHEMA:
        raise ConfigError(f"unknown key {key!r}", line)
    spec = SCHEMA[key]
    if spec.kind is str:
        return str(raw)
    try:
        if spec.kind is int:
            value = int(str(raw), 0) if isinstance(raw, str) else int(raw)
            if isinstance(raw, float) and raw != value:
                raise ValueError
        else:
            value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {raw!r} as {spec.kind.__name__}", line)
    if spec.low is not None:
        if spec.exclusive_low and not value > spec.low:
            raise ConfigError(f"{key}: must be > {spec.low}, got {value}", line)
        if not spec.exclusive_low and not value >= spec.low:
            raise ConfigError(f"{key}: must be >= {spec.low}, got {value}", line)
    if spec.high is not None and not value <= spec.high:
        raise ConfigError(f"{key}: must be <= {spec.high}, got {value}", line)
    return value


@dataclass
class ScenarioConfig:
    scenario: str
    preset_name: str = "paper-1K"
    seed: int = 0
    out_dir: str = "."
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}"
            )
        if self.preset_name not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset_name!r}")
        base = dict(PRESETS[self.preset_name])
        for key, raw in self.values.items():
            base[key] = _validate(key, raw)
        self.values = base

    def __getitem__(self, key):
        return self.values[key]


def parse_config_text(text: str) -> dict:
    """Parse line-oriented `key = value` text with `[section]` headers."""
    values = {}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError("empty section header", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line!r}", lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        flat = f"{section}.{key}" if section else key
        values[flat] = _validate(flat, raw_value, lineno)
    return values


def parse_config(
    text: str,
    scenario: str,
    preset_name: str = "paper-1K",
    seed: int = 0,
    out_dir: str = ".",
    overrides: Optional[dict] = None,
) -> ScenarioConfig:
    """File values first, then explicit overrides, on top of the preset."""
    values = parse_config_text(text)
    for key, raw in (overrides or {}).items():
        values[key] = _validate(key, raw)
    return ScenarioConfig(
        scenario=scenario,
        preset_name=preset_name,
        seed=seed,
        out_dir=out_dir,
        values=values,
    )


# ---------------------------------------------------------------------------
# Bundle builders: config values -> domain parameter objects (SI units).

def build_photodiode(cfg: ScenarioConfig) -> PhotodiodeParams:
    return PhotodiodeParams(
        responsivity=cfg["photodiode.responsivity_A_per_W"],
        knee_voltage=cfg["photodiode.knee_voltage_V"],
        knee_sharpness=cfg["photodiode.knee_sharpness_V"],
        dark_current=cfg["photodiode.dark_current_A"],
    )


def build_nanowire(cfg: ScenarioConfig) -> NanowireParams:
    return NanowireParams(
        normal_resistance=cfg["snspd.normal_resistance_ohm"],
        resistance_per_length=cfg["snspd.resistance_per_length_ohm_per_m"],
        heat_capacity_per_length=cfg["snspd.heat_capacity_per_length_J_per_K_m"],
        thermal_conductance_per_length=cfg["snspd.thermal_conductance_per_length_W_per_K_m"],
        critical_temperature_offset=cfg["snspd.critical_temperature_offset_K"],
        nominal_bias_current=cfg["snspd.nominal_bias_current_uA"] * 1e-6,
        detection_plateau=cfg["snspd.detection_plateau"],
        efficiency_sharpness=cfg["snspd.efficiency_sharpness"],
        leak_conductance=cfg["snspd.leak_conductance_S"],
        seed_normal_fraction=cfg["snspd.seed_normal_fraction"],
    )


def build_modulator(cfg: ScenarioConfig) -> ModulatorParams:
    return ModulatorParams(
        vpi_cold=cfg["modulator.vpi_cold_V"],
        vpi_warm=cfg["modulator.vpi_warm_V"],
        bias_phase=cfg["modulator.bias_phase_rad"],
        fiber_to_fiber_efficiency=cfg["modulator.fiber_to_fiber_efficiency"],
        extinction_imbalance=cfg["modulator.extinction_imbalance"],
        capacitance=cfg["modulator.capacitance_pF"] * 1e-12,
        electrode_length=cfg["modulator.electrode_length_mm"] * 1e-3,
    )


def build_budget(cfg: ScenarioConfig) -> OpticalBudget:
    return OpticalBudget(
        mode_overlap_in=cfg["budget.mode_overlap_in"],
        mode_overlap_out=cfg["budget.mode_overlap_out"],
        interface_transmission=cfg["budget.interface_transmission"],
        propagation_loss=cfg["budget.propagation_loss_dB_per_cm"],
        path_length_one_way=cfg["budget.path_length_one_way_cm"],
        mirror_reflectivity=cfg["budget.mirror_reflectivity"],
    )


def build_readout(cfg: ScenarioConfig, threshold_mv: Optional[float] = None) -> ReadoutParams:
    thr = cfg["readout.discriminator_threshold_mV"]
    if thr == 0.0:
        if threshold_mv is None:
            raise ConfigError(
                "readout.discriminator_threshold_mV is 0 (auto) but no computed "
                "threshold was supplied"
            )
        thr = threshold_mv
    return ReadoutParams(
        readout_responsivity=cfg["readout.responsivity_mV_per_uW"],
        lowpass_cutoff=cfg["readout.lowpass_cutoff_MHz"] * 1e6,
        discriminator_threshold=thr,
        min_pulse_power=cfg["readout.min_pulse_power_dBm"],
    )


def build_drive(cfg: ScenarioConfig, with_photon: bool = True) -> OpticalDrive:
    photons = (cfg["drive.photon_time_us"] * 1e-6,) if with_photon else ()
    return OpticalDrive(
        period=cfg["drive.period_us"] * 1e-6,
        bias_off_time=cfg["drive.bias_off_us"] * 1e-6,
        bias_power=cfg["drive.bias_power_uW"] * 1e-6,
        probe_power=cfg["drive.probe_power_uW"] * 1e-6,
        signal_photon_times=photons,
    )


def build_source(cfg: ScenarioConfig, mean: Optional[float] = None) -> PhotonSource:
    return PhotonSource(
        mean_photons_per_pulse=(
            cfg["source.mean_photons_per_pulse"] if mean is None else mean
        ),
        pulse_time_in_period=cfg["drive.photon_time_us"] * 1e-6,
        background_rate=cfg["source.background_rate_per_s"],
    )
