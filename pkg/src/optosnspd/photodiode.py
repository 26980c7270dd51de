"""Cryogenic photodiode model: nonlinear photocurrent source and load-line analysis.

The source follows I(V) = I_ph - knee(V) with an exponential forward-conduction
knee.  The knee is parameterised in voltage units only:

    knee(V) = exp((V - knee_voltage) / knee_sharpness) - exp(-knee_voltage / knee_sharpness)

which equals I_sat * (exp(V / knee_sharpness) - 1) with the saturation current
I_sat = exp(-knee_voltage / knee_sharpness) ampere.  knee_voltage is therefore a
pure scale parameter ("the voltage where the clamp term reaches 1 A"), calibrated
in the shipped preset so that the open-circuit voltage at the 6 uW operating
point is 0.50 V and the maximum power point falls near 100 kOhm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError, NumericalError


@dataclass(frozen=True)
class PhotodiodeParams:
    """Static parameters of the cryogenic bias photodiode."""

    responsivity: float  # A/W
    knee_voltage: float  # V, clamp scale (see module docstring)
    knee_sharpness: float  # V, exponential scale of the conduction knee
    dark_current: float = 0.0  # A

    def __post_init__(self):
        if self.responsivity <= 0:
            raise DomainError("responsivity must be > 0")
        if self.knee_voltage <= 0 or self.knee_sharpness <= 0:
            raise DomainError("knee parameters must be > 0")
        if self.dark_current < 0:
            raise DomainError("dark_current must be >= 0")

    @property
    def knee_saturation_current(self) -> float:
        """Saturation current of the exponential knee, in ampere."""
        return math.exp(-self.knee_voltage / self.knee_sharpness)


@dataclass(frozen=True)
class OperatingPoint:
    """A solved (V, I) point on a load line."""

    voltage: float  # V
    current: float  # A
    electrical_power: float  # W

    @classmethod
    def from_vi(cls, voltage: float, current: float) -> "OperatingPoint":
        return cls(voltage, current, voltage * current)


def photocurrent(optical_power: float, params: PhotodiodeParams) -> float:
    """Short-circuit current: responsivity * optical_power + dark_current."""
    if optical_power < 0:
        raise DomainError("optical_power must be >= 0")
    return params.responsivity * optical_power + params.dark_current


def _knee_term(v: float, params: PhotodiodeParams) -> float:
    # exp((v - kv)/ks) - exp(-kv/ks) == I_sat * expm1(v/ks), overflow-safe
    # for any voltage up to the open-circuit point.
    ks = params.knee_sharpness
    kv = params.knee_voltage
    return math.exp((v - kv) / ks) - math.exp(-kv / ks)


def source_current_at_voltage(
    v: float, optical_power: float, params: PhotodiodeParams
) -> float:
    """Terminal current of the photovoltaic source at node voltage v."""
    if v < 0:
        raise DomainError("voltage must be >= 0")
    return photocurrent(optical_power, params) - _knee_term(v, params)


def open_circuit_voltage(optical_power: float, params: PhotodiodeParams) -> float:
    """Voltage where the source current crosses zero (0 for a dark diode)."""
    i_ph = photocurrent(optical_power, params)
    if i_ph <= 0:
        return 0.0
    return params.knee_sharpness * math.log1p(i_ph / params.knee_saturation_current)


def solve_operating_point(
    optical_power: float, load_resistance: float, params: PhotodiodeParams
) -> OperatingPoint:
    """Solve source_current(V) = V / R for the unique node voltage.

    The source is strictly decreasing and the load line strictly increasing,
    so the root is bracketed by [0, V_oc] and found by Brent's method with a
    Newton polish.
    """
    if load_resistance <= 0:
        raise DomainError("load_resistance must be > 0")
    if optical_power < 0:
        raise DomainError("optical_power must be >= 0")

    i_ph = photocurrent(optical_power, params)
    if i_ph == 0.0:
        return OperatingPoint.from_vi(0.0, 0.0)

    v_oc = open_circuit_voltage(optical_power, params)

    def mismatch(v):
        return source_current_at_voltage(v, optical_power, params) - v / load_resistance

    v = optimize.brentq(mismatch, 0.0, v_oc, xtol=1e-15, rtol=8.9e-16)
    # A couple of Newton steps push the current residual to machine level.
    ks = params.knee_sharpness
    kv = params.knee_voltage
    for _ in range(3):
        r = mismatch(v)
        dr = -math.exp((v - kv) / ks) / ks - 1.0 / load_resistance
        v_new = v - r / dr
        if 0.0 <= v_new <= v_oc:
            v = v_new
    i = v / load_resistance
    residual = abs(mismatch(v))
    if residual > max(1e-12, 1e-9 * abs(i)):
        raise NumericalError(
            "load-line solve did not converge", {"v": v, "residual": residual}
        )
    return OperatingPoint.from_vi(v, i)


def load_sweep(
    optical_power: float, loads, params: PhotodiodeParams
) -> list[OperatingPoint]:
    """solve_operating_point for each load, reporting the offending index on error."""
    points = []
    for idx, r in enumerate(loads):
        try:
            points.append(solve_operating_point(optical_power, r, params))
        except (DomainError, NumericalError) as exc:
            raise type(exc)(f"load_sweep failed at index {idx} (R={r})") from exc
    return points


def max_power_point(
    optical_power: float,
    params: PhotodiodeParams,
    search_range: tuple[float, float] = (10.0, 1e7),
) -> tuple[float, float]:
    """Load resistance maximising V*I, searched on a log scale.

    Returns (R_opt, P_max).  Relative tolerance on R is 1e-4.
    """
    if optical_power <= 0:
        raise DomainError("no power to convert")
    r_lo, r_hi = search_range
    if not (0 < r_lo < r_hi):
        raise DomainError("invalid search range")

    def neg_power(log_r):
        return -solve_operating_point(optical_power, math.exp(log_r), params).electrical_power

    res = optimize.minimize_scalar(
        neg_power,
        bounds=(math.log(r_lo), math.log(r_hi)),
        method="bounded",
        options={"xatol": 5e-5},
    )
    r_opt = math.exp(res.x)
    return r_opt, -res.fun


def power_curve(optical_power: float, loads, params: PhotodiodeParams) -> np.ndarray:
    """Electrical power per load, convenience for sweeps and brute-force checks."""
    return np.array(
        [p.electrical_power for p in load_sweep(optical_power, loads, params)]
    )
