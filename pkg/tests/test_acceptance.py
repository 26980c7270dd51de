"""End-to-end acceptance suite for the calibrated 1 K preset.

Each test prints a single pass/fail line (visible with -s, or via the
verbose test status) and checks one published anchor or parameter-free
property at its stated tolerance.
"""

import filecmp
import math

import numpy as np
import pytest

from optosnspd import cli
from optosnspd import config as cfgmod
from optosnspd.circuit import (
    CircuitState,
    OpticalDrive,
    edge_metrics,
    readout_chain,
    run_trace,
    step,
)
from optosnspd.fitkit import SweepData, fabry_perot_loss, fit_sine_vpi, fringe_contrast
from optosnspd.modulator import (
    OpticalBudget,
    coupling_budget,
    modulation_strength,
    small_signal_response,
)
from optosnspd.photodiode import (
    max_power_point,
    open_circuit_voltage,
    photocurrent,
)
from optosnspd.snspd import HotspotState, detection_efficiency, equilibrium_point
from optosnspd.stats import (
    PhotonSource,
    build_histogram,
    peak_stats,
    run_counting_experiment,
    subtract_background,
)


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_01_small_signal_response(mod):
    resp = small_signal_response(3.5e-3, 31e-3, 1.0, mod)
    got_uw = resp.linearized * 1e6
    report(
        "small-signal response",
        abs(got_uw - 7.0) / 7.0 <= 0.02,
        f"3.5 mW in, 31 mV step -> {got_uw:.3f} uW (target 7.0 +- 2%)",
    )


def test_criterion_02_readout_conversion():
    mv = 6.9 * 0.4
    report(
        "readout conversion",
        abs(mv - 2.76) <= math.ulp(2.76),
        f"6.9 uW x 0.4 mV/uW = {mv!r} mV (target 2.76, exact to one ulp)",
    )


def test_criterion_03_modulation_strength():
    vcm = modulation_strength(5.9, 20e-3, 2)
    report(
        "modulation strength",
        vcm == 23.6,
        f"5.9 V x 2 cm x 2 passes = {vcm} V*cm (target 23.6 exactly)",
    )


def test_criterion_04_coupling_budget(cfg):
    val = coupling_budget(cfgmod.build_budget(cfg))
    report(
        "coupling budget",
        0.50 <= val <= 0.52,
        f"factor composition = {val:.4f} (target 0.50-0.52)",
    )


def test_criterion_05_photodiode_preset(pd):
    v_oc = open_circuit_voltage(6e-6, pd)
    r6, _ = max_power_point(6e-6, pd, (10.0, 1e7))
    r60, _ = max_power_point(60e-6, pd, (10.0, 1e7))
    ok = abs(v_oc - 0.50) / 0.50 <= 0.10 and 50e3 <= r6 <= 200e3 and r60 < r6
    report(
        "photodiode preset",
        ok,
        f"V_oc(6uW)={v_oc:.4f} V, R_mpp(6uW)={r6 / 1e3:.1f} kOhm, "
        f"R_mpp(60uW)={r60 / 1e3:.1f} kOhm",
    )


def test_criterion_06_joint_equilibrium(pd, nw, mod):
    eq = equilibrium_point(6e-6, pd, nw)
    v_eq = eq.operating_point.voltage
    r_eq = eq.hotspot.resistance
    anchors_ok = abs(v_eq - 31e-3) / 31e-3 <= 0.10 and abs(r_eq - 40e3) / 40e3 <= 0.10

    # long-time limit of the time stepper from a fresh photon seed
    state = CircuitState(
        node_voltage=0.0,
        hotspot=HotspotState.from_fraction(nw.seed_normal_fraction, nw),
        time=0.0,
    )
    dt = 10e-9
    for _ in range(15000):  # 150 us of constant 6 uW illumination
        state = step(state, dt, 6e-6, pd, nw, mod)
    v_err = abs(state.node_voltage - v_eq) / v_eq
    r_err = abs(state.hotspot.resistance - r_eq) / r_eq
    report(
        "joint equilibrium",
        anchors_ok and v_err <= 1e-3 and r_err <= 1e-3,
        f"eq=({v_eq * 1e3:.2f} mV, {r_eq / 1e3:.1f} kOhm), "
        f"ode rel err v={v_err:.2e} r={r_err:.2e}",
    )


def test_criterion_07_trace_edges(drive, pd, nw, mod, readout):
    trace = run_trace(drive, pd, nw, mod, duration=3 * drive.period, rng_seed=7)
    result = readout_chain(trace, readout)
    m = edge_metrics(result.trace, "v_readout_mV")
    rise_ok = 0.8 * 11e-6 <= m.rise_time_90 <= 1.2 * 11e-6
    fall_ok = 0.8 * 11e-6 <= m.fall_time_90 <= 1.2 * 11e-6
    rate_ok = abs(m.repetition_rate - 1 / 35e-6) < 1.0
    report(
        "trace rise/fall and rate",
        rise_ok and fall_ok and rate_ok,
        f"rise={m.rise_time_90 * 1e6:.2f} us, fall={m.fall_time_90 * 1e6:.2f} us "
        f"(target 11 +- 20%), rate={m.repetition_rate:.1f} Hz (target 28571.4)",
    )


def test_criterion_08_counting_statistics(drive, pd, nw, mod, readout, cfg):
    mu = 1.17
    draws = np.random.default_rng(12345).poisson(mu, size=1_000_000)
    p_ge1 = float(np.mean(draws >= 1))
    analytic = 1.0 - math.exp(-mu)
    poisson_ok = abs(p_ge1 - 0.6896) <= 0.002 and abs(analytic - 0.6896) < 5e-4

    n = 100_000
    src = PhotonSource(
        mean_photons_per_pulse=mu,
        pulse_time_in_period=cfg["drive.photon_time_us"] * 1e-6,
        background_rate=0.0,
    )
    delays = run_counting_experiment(
        drive, src, pd, nw, mod, readout, n, rng_seed=21, workers=4
    )
    eta = detection_efficiency(photocurrent(drive.bias_power, pd), nw)
    p_click = 1.0 - math.exp(-mu * eta)
    sigma = math.sqrt(p_click * (1 - p_click) / n)
    click_ok = abs(len(delays) / n - p_click) <= 3 * sigma
    report(
        "counting statistics",
        poisson_ok and click_ok,
        f"P(>=1)={p_ge1:.4f} (target 0.6896 +- 0.002); "
        f"click rate {len(delays) / n:.4f} vs closed-form {p_click:.4f} "
        f"(3 sigma = {3 * sigma:.4f})",
    )


def test_criterion_09_histogram_shape(drive, pd, nw, mod, readout, cfg):
    n = 100_000
    bin_w = cfg["run.bin_width_us"] * 1e-6
    src = cfgmod.build_source(cfg)
    bg_src = cfgmod.build_source(cfg, mean=0.0)
    signal = run_counting_experiment(
        drive, src, pd, nw, mod, readout, n, rng_seed=0, workers=4
    )
    background = run_counting_experiment(
        drive, bg_src, pd, nw, mod, readout, n, rng_seed=1, workers=4
    )
    edges = np.arange(0.0, drive.period + 1e-15, bin_w)
    diff = subtract_background(
        build_histogram(signal, edges, n), build_histogram(background, edges, n)
    )
    peak = peak_stats(diff)
    expect_delay = cfg["stats.expected_peak_delay_us"] * 1e-6
    expect_fwhm = cfg["stats.expected_fwhm_us"] * 1e-6
    delay_ok = abs(peak.peak_delay - expect_delay) <= bin_w
    fwhm_ok = abs(peak.fwhm - expect_fwhm) <= 0.5 * expect_fwhm
    k = int(np.argmax(diff.counts))
    post = np.asarray(diff.counts, dtype=float)[k + 1 : k + 4]
    post_ok = len(post) == 3 and np.all(post < 0)
    report(
        "histogram shape",
        delay_ok and fwhm_ok and post_ok,
        f"peak={peak.peak_delay * 1e6:.2f} us (target {expect_delay * 1e6} +- "
        f"{bin_w * 1e6} us), fwhm={peak.fwhm * 1e6:.2f} us (target "
        f"{expect_fwhm * 1e6} +- 50%), post-peak bins={post.tolist()}",
    )


def test_criterion_10_fit_roundtrips(mod):
    errs = []
    for vpi in (6.6, 5.9):
        x = np.linspace(0.0, 15.0, 301)
        y = 0.135 + 0.135 * np.cos(np.pi * x / vpi - math.pi / 2)
        fit = fit_sine_vpi(SweepData(x, y))
        errs.append(abs(fit.vpi - vpi) / vpi)
    sine_ok = all(e <= 1e-3 for e in errs)
    k = fringe_contrast(0.1, 0.14, 5.6)
    fp_err = abs(fabry_perot_loss(k, 0.14, 5.6) - 0.1)
    report(
        "fit round-trips",
        sine_ok and fp_err <= 1e-6,
        f"sine rel errs={['%.1e' % e for e in errs]} (tol 1e-3), "
        f"loss abs err={fp_err:.1e} dB/cm (tol 1e-6)",
    )


def test_criterion_11_determinism(tmp_path):
    outs = {}
    for w in (1, 2, 8):
        out = tmp_path / f"w{w}"
        rc = cli.main(
            ["--scenario", "histogram", "--out", str(out),
             "--set", "run.n_periods=2000", "--seed", "42", "--workers", str(w)]
        )
        assert rc == 0
        outs[w] = out
    files = [
        "histogram_signal.csv",
        "histogram_background.csv",
        "histogram_difference.csv",
        "histogram_difference.json",
    ]
    identical = all(
        filecmp.cmp(outs[1] / f, outs[w] / f, shallow=False)
        for w in (2, 8)
        for f in files
    )
    report(
        "determinism",
        identical,
        "histogram artifacts byte-identical for 1, 2, and 8 workers",
    )
