"""Numba kernels for the time-domain co-simulation.

The integrator is semi-implicit: backward Euler on the linear node-voltage
terms (stable for the superconducting branch where R -> 0) and explicit on the
slow hotspot fraction.  All parameters travel in a flat float64 vector so the
same compiled kernels serve the single-trace and Monte Carlo paths.
"""

import math

import numpy as np
from numba import njit

# Layout of the packed parameter vector.
(
    P_RESP,          # photodiode responsivity, A/W
    P_DARK,          # dark current, A
    P_KNEE_V,        # knee voltage scale, V
    P_KNEE_S,        # knee sharpness, V
    P_RN,            # wire normal resistance, Ohm
    P_GLEAK,         # leak conductance, S
    P_DISS,          # full-wire dissipation scale, W
    P_ESCALE,        # full-wire thermal energy scale, J
    P_SEED_F,        # seed normal fraction after a detection
    P_UNLATCH_F,     # fraction below which a shrinking hotspot collapses
    P_INOM,          # nominal bias current, A
    P_PLATEAU,       # detection-efficiency plateau
    P_EFF_SHARP,     # efficiency curve sharpness
    P_CAP,           # modulator capacitance, F
    P_VPI,           # half-wave voltage at the operating temperature, V
    P_MDEPTH,        # modulation depth (1 - extinction imbalance)
    P_ETA,           # fiber-to-fiber efficiency
    P_PHASE,         # interferometer bias phase, rad
    P_PROBE,         # modulator probe power, W
    P_RESP_MVUW,     # readout responsivity, mV/uW
    P_LP_TAU,        # low-pass time constant, s
    P_THR_MV,        # discriminator threshold above baseline, mV
    P_BIAS_P,        # bias optical power during the on window, W
    P_TOFF,          # bias-off edge time within the period, s
    P_PERIOD,        # drive period, s
) = range(25)
N_PAR = 25


@njit(cache=True, nogil=True)
def source_current(v, p_opt, par):
    i_ph = par[P_RESP] * p_opt + par[P_DARK]
    knee = math.exp((v - par[P_KNEE_V]) / par[P_KNEE_S]) - math.exp(
        -par[P_KNEE_V] / par[P_KNEE_S]
    )
    return i_ph - knee


@njit(cache=True, nogil=True)
def transmission(v, par):
    phase = math.pi * v / par[P_VPI] + par[P_PHASE]
    return par[P_ETA] * (1.0 + par[P_MDEPTH] * math.cos(phase)) / 2.0


@njit(cache=True, nogil=True)
def detection_efficiency(i_bias, par):
    a = par[P_EFF_SHARP]
    shape = (1.0 - math.exp(-a * i_bias / par[P_INOM])) / (1.0 - math.exp(-a))
    if shape > 1.0:
        shape = 1.0
    if shape < 0.0:
        shape = 0.0
    return par[P_PLATEAU] * shape


@njit(cache=True, nogil=True)
def bias_power(t, par):
    tm = t % par[P_PERIOD]
    if tm < par[P_TOFF]:
        return par[P_BIAS_P]
    return 0.0


@njit(cache=True, nogil=True)
def step(v, f, p_bias, dt, par):
    """One semi-implicit step; returns (v_new, f_new)."""
    if f <= 0.0:
        # Superconducting wire shorts the node.
        return 0.0, 0.0
    g_hs = 1.0 / (f * par[P_RN])
    c = par[P_CAP]
    v_new = (v + dt / c * source_current(v, p_bias, par)) / (
        1.0 + dt / c * (g_hs + par[P_GLEAK])
    )
    if v_new < 0.0:
        v_new = 0.0
    i_w = v_new * g_hs
    joule = v_new * i_w
    dissipated = par[P_DISS] * f
    f_new = f + dt * (joule - dissipated) / par[P_ESCALE]
    if f_new > 1.0:
        f_new = 1.0
    if f_new < par[P_UNLATCH_F] and f_new < f:
        f_new = 0.0  # hotspot collapse: wire superconducting again
        v_new = 0.0
    elif f_new < 0.0:
        f_new = 0.0
        v_new = 0.0
    return v_new, f_new


@njit(cache=True, nogil=True)
def simulate_trace(
    v0,
    f0,
    t0,
    n_steps,
    dt,
    par,
    event_times,
    event_draws,
    stride,
    out_v,
    out_f,
    out_p,
):
    """Integrate the coupled system, recording every `stride` steps.

    event_times are absolute candidate photon arrival times (sorted); a
    detection seeds the hotspot.  Returns the final (v, f).
    """
    v = v0
    f = f0
    t = t0
    k = 0
    n_events = event_times.shape[0]
    out_v[0] = v
    out_f[0] = f
    out_p[0] = par[P_PROBE] * transmission(v, par)
    rec = 1
    for i in range(n_steps):
        while k < n_events and event_times[k] < t + dt:
            if f <= 0.0:
                i_bias = source_current(0.0, bias_power(event_times[k], par), par)
                if i_bias > 0.0 and event_draws[k] < detection_efficiency(i_bias, par):
                    f = par[P_SEED_F]
            k += 1
        v, f = step(v, f, bias_power(t, par), dt, par)
        t = t0 + (i + 1) * dt
        if (i + 1) % stride == 0:
            out_v[rec] = v
            out_f[rec] = f
            out_p[rec] = par[P_PROBE] * transmission(v, par)
            rec += 1
    return v, f


@njit(cache=True, nogil=True)
def period_click_time(dt, n_steps, par, event_times, event_draws):
    """Simulate one bias period from rest; return the discriminator click
    delay relative to the period start, or -1.0 when no click occurs.

    The readout chain (responsivity + exact first-order low-pass + threshold
    above the zero-voltage baseline) runs inside the loop so the Monte Carlo
    path never materialises a trace.
    """
    v = 0.0
    f = 0.0
    t = 0.0
    k = 0
    n_events = event_times.shape[0]
    baseline = par[P_PROBE] * transmission(0.0, par) * 1e6 * par[P_RESP_MVUW]
    thr = baseline + par[P_THR_MV]
    y = baseline
    decay = math.exp(-dt / par[P_LP_TAU])
    for i in range(n_steps):
        while k < n_events and event_times[k] < t + dt:
            if f <= 0.0:
                i_bias = source_current(0.0, bias_power(event_times[k], par), par)
                if i_bias > 0.0 and event_draws[k] < detection_efficiency(i_bias, par):
                    f = par[P_SEED_F]
            k += 1
        v, f = step(v, f, bias_power(t, par), dt, par)
        t = (i + 1) * dt
        x = par[P_PROBE] * transmission(v, par) * 1e6 * par[P_RESP_MVUW]
        y_new = x + (y - x) * decay
        if y < thr and y_new >= thr:
            # Linear interpolation of the crossing instant.
            return t - dt * (1.0 - (thr - y) / (y_new - y))
        y = y_new
        if f <= 0.0 and k >= n_events and y - baseline < 0.25 * par[P_THR_MV]:
            break  # settled back to baseline with no events left
    return -1.0
