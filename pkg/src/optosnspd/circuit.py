"""Time-domain co-simulation: source node, hotspot, modulator, readout chain."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal as sp_signal

from . import _kernels as K
from .errors import ContractError, DomainError, NumericalError
from .modulator import ModulatorParams, transmission, vpi_at_temperature
from .photodiode import PhotodiodeParams
from .snspd import (
    UNLATCH_FRACTION_RATIO,
    HotspotState,
    NanowireParams,
    equilibrium_point,
)

DEFAULT_TIME_STEP = 10e-9  # s
OPERATING_TEMPERATURE = 1.0  # K

TRACE_COLUMNS = ("time_s", "v_node_V", "r_wire_ohm", "p_out_W", "v_readout_mV", "click")


@dataclass(frozen=True)
class OpticalDrive:
    """Piecewise-constant bias waveform plus candidate photon times per period."""

    period: float  # s
    bias_off_time: float  # s, bias on during [0, bias_off_time)
    bias_power: float  # W
    probe_power: float  # W, continuous modulator throughput
    signal_photon_times: tuple = ()  # s, within [0, period)

    def __post_init__(self):
        if self.period <= 0:
            raise DomainError("period must be > 0")
        if not 0 < self.bias_off_time <= self.period:
            raise DomainError("bias_off_time must be in (0, period]")
        if self.bias_power < 0 or self.probe_power < 0:
            raise DomainError("powers must be >= 0")
        for t in self.signal_photon_times:
            if not 0 <= t < self.period:
                raise DomainError("photon times must lie within [0, period)")


@dataclass(frozen=True)
class CircuitState:
    node_voltage: float  # V
    hotspot: HotspotState
    time: float  # s

    def __post_init__(self):
        if self.node_voltage < 0:
            raise DomainError("node_voltage must be >= 0")


@dataclass
class TimeTrace:
    """Uniformly sampled multi-channel record."""

    sample_period: float
    channels: dict
    period: Optional[float] = None  # drive period, for per-period metrics

    def __post_init__(self):
        if self.sample_period <= 0:
            raise DomainError("sample_period must be > 0")
        lengths = {len(v) for v in self.channels.values()}
        if len(lengths) > 1:
            raise ContractError("all channels must have equal length")

    @property
    def times(self) -> np.ndarray:
        n = len(next(iter(self.channels.values())))
        return np.arange(n) * self.sample_period

    def to_csv(self, path) -> None:
        """Write the fixed trace schema at full round-trip precision."""
        missing = [c for c in TRACE_COLUMNS[1:] if c not in self.channels]
        if missing:
            raise ContractError(f"trace is missing channels: {missing}")
        cols = [self.times] + [np.asarray(self.channels[c], dtype=float) for c in TRACE_COLUMNS[1:]]
        data = np.column_stack(cols)
        with open(path, "w") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for row in data:
                fh.write(",".join("%.17e" % x for x in row) + "\n")


@dataclass(frozen=True)
class ReadoutParams:
    readout_responsivity: float = 0.4  # mV per uW
    lowpass_cutoff: float = 1e6  # Hz
    discriminator_threshold: float = 0.1  # mV above baseline
    min_pulse_power: float = -25.0  # dBm sensitivity floor

    def __post_init__(self):
        if self.readout_responsivity <= 0:
            raise DomainError("readout_responsivity must be > 0")
        if self.lowpass_cutoff <= 0:
            raise DomainError("lowpass_cutoff must be > 0")
        if self.discriminator_threshold <= 0:
            raise DomainError("discriminator_threshold must be > 0")

    @property
    def lowpass_tau(self) -> float:
        return 1.0 / (2.0 * math.pi * self.lowpass_cutoff)


def pack_params(
    pd: PhotodiodeParams,
    nw: NanowireParams,
    mod: ModulatorParams,
    readout: ReadoutParams,
    drive: OpticalDrive,
    temperature: float = OPERATING_TEMPERATURE,
) -> np.ndarray:
    """Flatten the parameter bundle for the jit kernels."""
    par = np.zeros(K.N_PAR)
    par[K.P_RESP] = pd.responsivity
    par[K.P_DARK] = pd.dark_current
    par[K.P_KNEE_V] = pd.knee_voltage
    par[K.P_KNEE_S] = pd.knee_sharpness
    par[K.P_RN] = nw.normal_resistance
    par[K.P_GLEAK] = nw.leak_conductance
    par[K.P_DISS] = nw.dissipation_scale
    par[K.P_ESCALE] = nw.thermal_energy_scale
    par[K.P_SEED_F] = nw.seed_normal_fraction
    par[K.P_UNLATCH_F] = nw.seed_normal_fraction * UNLATCH_FRACTION_RATIO
    par[K.P_INOM] = nw.nominal_bias_current
    par[K.P_PLATEAU] = nw.detection_plateau
    par[K.P_EFF_SHARP] = nw.efficiency_sharpness
    par[K.P_CAP] = mod.capacitance
    par[K.P_VPI] = vpi_at_temperature(temperature, mod)
    par[K.P_MDEPTH] = mod.modulation_depth
    par[K.P_ETA] = mod.fiber_to_fiber_efficiency
    par[K.P_PHASE] = mod.bias_phase
    par[K.P_PROBE] = drive.probe_power
    par[K.P_RESP_MVUW] = readout.readout_responsivity
    par[K.P_LP_TAU] = readout.lowpass_tau
    par[K.P_THR_MV] = readout.discriminator_threshold
    par[K.P_BIAS_P] = drive.bias_power
    par[K.P_TOFF] = drive.bias_off_time
    par[K.P_PERIOD] = drive.period
    return par


def auto_threshold_mv(
    pd: PhotodiodeParams,
    nw: NanowireParams,
    mod: ModulatorParams,
    readout: ReadoutParams,
    drive: OpticalDrive,
) -> float:
    """Half the steady click amplitude of the drive scenario, in mV."""
    eq = equilibrium_point(drive.bias_power, pd, nw)
    if not eq.latched:
        raise DomainError("bias power cannot sustain a hotspot; no click amplitude")
    v_click = eq.operating_point.voltage
    t = OPERATING_TEMPERATURE
    dp_w = drive.probe_power * (
        transmission(v_click, t, mod) - transmission(0.0, t, mod)
    )
    return 0.5 * abs(dp_w) * 1e6 * readout.readout_responsivity


def step(
    state: CircuitState,
    dt: float,
    drive_at_t: float,
    pd: PhotodiodeParams,
    nw: NanowireParams,
    mod: ModulatorParams,
) -> CircuitState:
    """Advance the coupled node/hotspot ODEs by one semi-implicit step."""
    if dt <= 0:
        raise DomainError("dt must be > 0")
    drive = OpticalDrive(
        period=1.0, bias_off_time=1.0, bias_power=max(drive_at_t, 0.0), probe_power=0.0
    )
    par = pack_params(pd, nw, mod, ReadoutParams(), drive)
    v, f = K.step(state.node_voltage, state.hotspot.normal_fraction, drive_at_t, dt, par)
    if not (math.isfinite(v) and math.isfinite(f)):
        raise NumericalError("integrator diverged", {"state": state})
    return CircuitState(
        node_voltage=v,
        hotspot=HotspotState.from_fraction(f, nw, state.hotspot.last_trigger_time),
        time=state.time + dt,
    )


def _photon_events(
    drive: OpticalDrive, n_periods: int, rng_seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Absolute candidate times and per-event uniform draws, one rng per period."""
    times = []
    draws = []
    per_period = sorted(drive.signal_photon_times)
    for idx in range(n_periods):
        if not per_period:
            continue
        rng = np.random.default_rng([rng_seed, idx])
        for t in per_period:
            times.append(idx * drive.period + t)
            draws.append(rng.uniform())
    return np.array(times, dtype=float), np.array(draws, dtype=float)


def run_trace(
    drive: OpticalDrive,
    pd: PhotodiodeParams,
    nw: NanowireParams,
    mod: ModulatorParams,
    duration: float,
    sample_period: float = DEFAULT_TIME_STEP,
    rng_seed: int = 0,
    dt: float = DEFAULT_TIME_STEP,
    readout: Optional[ReadoutParams] = None,
) -> TimeTrace:
    """Multi-period trace of node voltage, wire resistance, and optical output."""
    if duration < drive.period:
        raise DomainError("duration must cover at least one period")
    stride = max(1, round(sample_period / dt))
    sample_period = stride * dt
    n_periods = int(math.ceil(duration / drive.period))
    n_steps = int(round(duration / dt))
    n_steps = (n_steps // stride) * stride
    n_samples = n_steps // stride + 1

    par = pack_params(pd, nw, mod, readout or ReadoutParams(), drive)
    ev_times, ev_draws = _photon_events(drive, n_periods, rng_seed)
    out_v = np.empty(n_samples)
    out_f = np.empty(n_samples)
    out_p = np.empty(n_samples)
    K.simulate_trace(
        0.0, 0.0, 0.0, n_steps, dt, par, ev_times, ev_draws, stride, out_v, out_f, out_p
    )
    if not np.all(np.isfinite(out_v)):
        raise NumericalError("trace integration diverged")
    return TimeTrace(
        sample_period=sample_period,
        channels={
            "v_node_V": out_v,
            "r_wire_ohm": out_f * nw.normal_resistance,
            "p_out_W": out_p,
        },
        period=drive.period,
    )


@dataclass
class ReadoutResult:
    trace: TimeTrace  # input trace augmented with v_readout_mV and click channels
    click_times: list
    sub_sensitivity: bool  # pulse amplitude below the stated sensitivity floor


def readout_chain(trace: TimeTrace, readout: ReadoutParams) -> ReadoutResult:
    """Readout photodiode conversion, low-pass filtering, and discrimination."""
    if "p_out_W" not in trace.channels:
        raise ContractError("trace has no optical-output channel")
    p_out = np.asarray(trace.channels["p_out_W"], dtype=float)
    electrical = p_out * 1e6 * readout.readout_responsivity  # mV

    # Exact first-order exponential smoothing matched to the cutoff.
    decay = math.exp(-trace.sample_period / readout.lowpass_tau)
    a = 1.0 - decay
    filtered = sp_signal.lfilter([a], [1.0, -decay], electrical, zi=[decay * electrical[0]])[0]

    baseline = float(np.min(filtered))
    thr = baseline + readout.discriminator_threshold
    above = filtered >= thr
    crossings = np.flatnonzero(~above[:-1] & above[1:]) + 1

    times = trace.times
    click_channel = above.astype(float)
    click_times = []
    seen_periods = set()
    period = trace.period or np.inf
    for idx in crossings:
        p_idx = int(times[idx] // period)
        if p_idx in seen_periods:
            continue  # latching: at most one click per bias period
        seen_periods.add(p_idx)
        click_times.append(float(times[idx]))

    amplitude_w = float(np.max(p_out) - np.min(p_out))
    floor_w = 10.0 ** (readout.min_pulse_power / 10.0) * 1e-3
    sub_sensitivity = 0 < amplitude_w < floor_w

    augmented = TimeTrace(
        sample_period=trace.sample_period,
        channels={**trace.channels, "v_readout_mV": filtered, "click": click_channel},
        period=trace.period,
    )
    return ReadoutResult(
        trace=augmented, click_times=click_times, sub_sensitivity=sub_sensitivity
    )


@dataclass(frozen=True)
class EdgeMetrics:
    rise_time_90: float  # s, 10% -> 90%
    fall_time_90: float  # s, 90% -> 10%
    repetition_rate: float  # Hz


def _interp_crossing(times, values, i, level):
    # crossing between samples i-1 and i
    t0, t1 = times[i - 1], times[i]
    v0, v1 = values[i - 1], values[i]
    if v1 == v0:
        return t1
    return t0 + (t1 - t0) * (level - v0) / (v1 - v0)


def edge_metrics(trace: TimeTrace, channel: str) -> Optional[EdgeMetrics]:
    """10-90% rise and 90-10% fall times against per-period extrema.

    Returns None (no-pulse result) when no period contains a usable pulse.
    """
    if channel not in trace.channels:
        raise ContractError(f"no channel named {channel!r}")
    if trace.period is None:
        raise ContractError("trace carries no drive period")
    values = np.asarray(trace.channels[channel], dtype=float)
    times = trace.times
    n_periods = int(times[-1] // trace.period)
    rises, falls = [], []
    for p in range(n_periods + 1):
        mask = (times >= p * trace.period) & (times < (p + 1) * trace.period)
        if mask.sum() < 4:
            continue
        seg = values[mask]
        seg_t = times[mask]
        lo, hi = float(np.min(seg)), float(np.max(seg))
        swing = hi - lo
        if swing <= 1e-12 * max(1.0, abs(hi)):
            continue
        l10, l90 = lo + 0.1 * swing, lo + 0.9 * swing
        peak = int(np.argmax(seg))
        # Rise: last 10% crossing before the peak, first 90% crossing.
        up10 = np.flatnonzero((seg[1 : peak + 1] >= l10) & (seg[:peak] < l10)) + 1
        up90 = np.flatnonzero((seg[1 : peak + 1] >= l90) & (seg[:peak] < l90)) + 1
        if len(up10) and len(up90):
            t10 = _interp_crossing(seg_t, seg, up10[0], l10)
            t90 = _interp_crossing(seg_t, seg, up90[0], l90)
            if t90 > t10:
                rises.append(t90 - t10)
        # Fall: crossings after the peak.
        dn90 = np.flatnonzero((seg[peak + 1 :] <= l90) & (seg[peak:-1] > l90)) + peak + 1
        dn10 = np.flatnonzero((seg[peak + 1 :] <= l10) & (seg[peak:-1] > l10)) + peak + 1
        if len(dn90) and len(dn10):
            t90d = _interp_crossing(seg_t, seg, dn90[0], l90)
            t10d = _interp_crossing(seg_t, seg, dn10[0], l10)
            if t10d > t90d:
                falls.append(t10d - t90d)
    if not rises:
        return None
    return EdgeMetrics(
        rise_time_90=float(np.mean(rises)),
        fall_time_90=float(np.mean(falls)) if falls else math.nan,
        repetition_rate=1.0 / trace.period,
    )
