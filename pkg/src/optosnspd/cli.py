"""Scenario runner: binds all modules, emits CSV/JSON artifacts.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import circuit as cir
from . import config as cfgmod
from . import fitkit, modulator, photodiode, snspd, stats
from .errors import DomainError, FitFailureError, NumericalError

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


@dataclass(frozen=True)
class BudgetItem:
    name: str
    power: float  # W
    kind: str  # "active-optical" or "passive"


@dataclass(frozen=True)
class PowerBudget:
    items: tuple
    total: float
    notes: tuple = ()


def power_budget(items) -> PowerBudget:
    """Sum and classify line items; passive items are flagged as absent in the
    all-optical mode (fibers need no thermal anchoring)."""
    notes = []
    for item in items:
        if item.power < 0:
            raise DomainError(f"negative power for item {item.name!r}")
        if item.kind == "passive":
            notes.append(f"{item.name}: not present in all-optical mode")
    total = float(sum(item.power for item in items))
    return PowerBudget(items=tuple(items), total=total, notes=tuple(notes))


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join("%.17e" % x for x in row) + "\n")


def _scenario_loadline(cfg, out: Path, workers):
    pd = cfgmod.build_photodiode(cfg)
    p_opt = cfg["drive.bias_power_uW"] * 1e-6
    loads = np.geomspace(
        cfg["sweep.loadline_r_min_ohm"],
        cfg["sweep.loadline_r_max_ohm"],
        cfg["sweep.loadline_points"],
    )
    points = photodiode.load_sweep(p_opt, loads, pd)
    _write_csv(
        out / "loadline.csv",
        "load_ohm,voltage_V,current_A,power_W",
        ((r, p.voltage, p.current, p.electrical_power) for r, p in zip(loads, points)),
    )
    r_mpp, p_max = photodiode.max_power_point(
        p_opt, pd, (cfg["mpp.r_min_ohm"], cfg["mpp.r_max_ohm"])
    )
    return {
        "v_oc_V": photodiode.open_circuit_voltage(p_opt, pd),
        "r_mpp_ohm": r_mpp,
        "p_max_W": p_max,
    }, ["loadline.csv"]


def _scenario_powersweep(cfg, out: Path, workers):
    pd = cfgmod.build_photodiode(cfg)
    nw = cfgmod.build_nanowire(cfg)
    powers = np.geomspace(
        cfg["sweep.power_min_uW"] * 1e-6,
        cfg["sweep.power_max_uW"] * 1e-6,
        cfg["sweep.power_points"],
    )
    rows = []
    n_latched = 0
    v_last = 0.0
    for p in powers:
        eq = snspd.equilibrium_point(p, pd, nw)
        if eq.latched:
            n_latched += 1
            v_last = eq.operating_point.voltage
            rows.append((p, eq.operating_point.voltage, eq.hotspot.resistance, 1.0))
        else:
            rows.append((p, 0.0, 0.0, 0.0))
    _write_csv(out / "powersweep.csv", "power_W,voltage_V,resistance_ohm,latched", rows)
    return {"n_latched": n_latched, "v_at_max_power_V": v_last}, ["powersweep.csv"]


def _scenario_vpisweep(cfg, out: Path, workers):
    mod = cfgmod.build_modulator(cfg)
    temperature = cfg["sweep.vpi_temperature_K"]
    volts = np.linspace(
        cfg["sweep.vpi_v_min_V"], cfg["sweep.vpi_v_max_V"], cfg["sweep.vpi_points"]
    )
    trans = np.array([modulator.transmission(v, temperature, mod) for v in volts])
    normalized = trans / np.max(trans)
    _write_csv(
        out / "vpisweep.csv",
        "voltage_V,transmission,normalized",
        zip(volts, trans, normalized),
    )
    fit = fitkit.fit_sine_vpi(fitkit.SweepData(volts, normalized))
    return {
        "vpi_model_V": modulator.vpi_at_temperature(temperature, mod),
        "vpi_fit_V": fit.vpi,
        "fit_residual_rms": fit.residual_rms,
    }, ["vpisweep.csv"]


def _resolved_readout(cfg, pd, nw, mod, drive):
    if cfg["readout.discriminator_threshold_mV"] == 0.0:
        auto = cir.auto_threshold_mv(
            pd, nw, mod, cfgmod.build_readout(cfg, threshold_mv=1.0), drive
        )
        return cfgmod.build_readout(cfg, threshold_mv=auto)
    return cfgmod.build_readout(cfg)


def _scenario_trace(cfg, out: Path, workers):
    pd = cfgmod.build_photodiode(cfg)
    nw = cfgmod.build_nanowire(cfg)
    mod = cfgmod.build_modulator(cfg)
    drive = cfgmod.build_drive(cfg)
    readout = _resolved_readout(cfg, pd, nw, mod, drive)
    duration = cfg["run.trace_periods"] * drive.period
    trace = cir.run_trace(
        drive,
        pd,
        nw,
        mod,
        duration=duration,
        sample_period=cfg["run.sample_period_ns"] * 1e-9,
        rng_seed=cfg.seed,
        dt=cfg["run.time_step_ns"] * 1e-9,
    )
    result = cir.readout_chain(trace, readout)
    result.trace.to_csv(out / "trace.csv")
    metrics = cir.edge_metrics(result.trace, "p_out_W")
    summary = {
        "n_clicks": len(result.click_times),
        "click_times_s": result.click_times,
        "sub_sensitivity": result.sub_sensitivity,
        "repetition_rate_Hz": 1.0 / drive.period,
        "discriminator_threshold_mV": readout.discriminator_threshold,
    }
    if metrics is None:
        summary["pulse"] = "none"
    else:
        summary["rise_time_90_s"] = metrics.rise_time_90
        summary["fall_time_90_s"] = metrics.fall_time_90
    return summary, ["trace.csv"]


def _scenario_histogram(cfg, out: Path, workers):
    pd = cfgmod.build_photodiode(cfg)
    nw = cfgmod.build_nanowire(cfg)
    mod = cfgmod.build_modulator(cfg)
    drive = cfgmod.build_drive(cfg)
    readout = _resolved_readout(cfg, pd, nw, mod, drive)
    n_periods = cfg["run.n_periods"]
    dt = cfg["run.time_step_ns"] * 1e-9
    source = cfgmod.build_source(cfg)
    background_source = cfgmod.build_source(cfg, mean=0.0)

    signal_delays = stats.run_counting_experiment(
        drive, source, pd, nw, mod, readout, n_periods, cfg.seed, dt, workers
    )
    # The background run uses an offset master seed for an independent stream.
    background_delays = stats.run_counting_experiment(
        drive, background_source, pd, nw, mod, readout, n_periods, cfg.seed + 1, dt, workers
    )
    edges = np.arange(0.0, drive.period + 1e-15, cfg["run.bin_width_us"] * 1e-6)
    signal_hist = stats.build_histogram(signal_delays, edges, n_periods)
    background_hist = stats.build_histogram(background_delays, edges, n_periods)
    difference = stats.subtract_background(signal_hist, background_hist)
    signal_hist.to_csv(out / "histogram_signal.csv")
    background_hist.to_csv(out / "histogram_background.csv")
    difference.to_csv(out / "histogram_difference.csv")
    (out / "histogram_difference.json").write_text(
        difference.to_json(seed=cfg.seed, preset=cfg.preset_name)
    )
    peak = stats.peak_stats(difference)
    summary = {
        "n_signal_clicks": int(len(signal_delays)),
        "n_background_clicks": int(len(background_delays)),
        "n_periods": n_periods,
    }
    if peak is None:
        summary["peak"] = "none"
    else:
        summary["peak_delay_s"] = peak.peak_delay
        summary["fwhm_s"] = peak.fwhm
    return summary, [
        "histogram_signal.csv",
        "histogram_background.csv",
        "histogram_difference.csv",
        "histogram_difference.json",
    ]


def _scenario_budget(cfg, out: Path, workers):
    items = [
        BudgetItem("bias photodiode", cfg["drive.bias_power_uW"] * 1e-6, "active-optical"),
        BudgetItem("modulator probe", cfg["drive.probe_power_uW"] * 1e-6, "active-optical"),
    ]
    budget = power_budget(items)
    with open(out / "budget.csv", "w") as fh:
        fh.write("name,power_W,kind\n")
        for item in budget.items:
            fh.write("%s,%.17e,%s\n" % (item.name, item.power, item.kind))
    coupling = modulator.coupling_budget(cfgmod.build_budget(cfg))
    return {
        "total_W": budget.total,
        "paper_rounded_total_W": 75e-6,  # published value rounds the 74 uW sum
        "coupling_efficiency": coupling,
        "notes": list(budget.notes),
    }, ["budget.csv"]


def _scenario_fit_vpi(cfg, out: Path, workers):
    path = cfg["fit.input_csv"]
    if not path:
        raise cfgmod.ConfigError("fit-vpi requires fit.input_csv")
    data = fitkit.SweepData.from_csv(path)
    hint = cfg["fit.vpi_hint_V"] or None
    fit = fitkit.fit_sine_vpi(data, hint)
    (out / "fit_vpi.json").write_text(fit.to_json())
    return {
        "vpi_V": fit.vpi,
        "amplitude": fit.amplitude,
        "offset": fit.offset,
        "phase_rad": fit.phase,
        "residual_rms": fit.residual_rms,
    }, ["fit_vpi.json"]


def _scenario_fit_fp(cfg, out: Path, workers):
    loss = fitkit.fabry_perot_loss(
        cfg["fit.contrast"], cfg["fit.facet_reflectivity"], cfg["fit.sample_length_cm"]
    )
    result = {
        "loss_dB_per_cm": loss,
        "contrast": cfg["fit.contrast"],
        "facet_reflectivity": cfg["fit.facet_reflectivity"],
        "sample_length_cm": cfg["fit.sample_length_cm"],
    }
    (out / "fit_fp.json").write_text(json.dumps(result, indent=2, sort_keys=True))
    return result, ["fit_fp.json"]


_SCENARIO_RUNNERS = {
    "loadline": _scenario_loadline,
    "powersweep": _scenario_powersweep,
    "vpisweep": _scenario_vpisweep,
    "trace": _scenario_trace,
    "histogram": _scenario_histogram,
    "budget": _scenario_budget,
    "fit-vpi": _scenario_fit_vpi,
    "fit-fp": _scenario_fit_fp,
}


def run_scenario(cfg: cfgmod.ScenarioConfig, workers: int = 1) -> dict:
    """Execute one scenario; writes artifacts and summary.json into out_dir."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics, files = _SCENARIO_RUNNERS[cfg.scenario](cfg, out, workers)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.scenario,
        "preset": cfg.preset_name,
        "seed": cfg.seed,
        "files": files,
        "metrics": metrics,
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return summary


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise cfgmod.ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optosnspd",
        description="All-optically biased SNSPD co-simulator scenario runner.",
    )
    parser.add_argument("--scenario", required=True, choices=cfgmod.SCENARIOS)
    parser.add_argument("--config", default=None, help="config file path")
    parser.add_argument("--preset", default="paper-1K")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    parser.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config is not None:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                print(json.dumps({"error": "io", "detail": str(exc)}), file=sys.stderr)
                return EXIT_IO
        cfg = cfgmod.parse_config(
            text,
            scenario=args.scenario,
            preset_name=args.preset,
            seed=args.seed,
            out_dir=args.out,
            overrides=_parse_overrides(args.set),
        )
        run_scenario(cfg, workers=max(1, args.workers))
        return EXIT_OK
    except (cfgmod.ConfigError, DomainError) as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FitFailureError, FloatingPointError) as exc:
        print(json.dumps({"error": "numerical", "detail": str(exc)}), file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(json.dumps({"error": "io", "detail": str(exc)}), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
