"""Shunt-free nanowire model: triggering, latched hotspot growth, equilibrium.

The normal domain is a single contiguous segment described by its fraction f of
the wire; resistance = f * normal_resistance.  The hotspot balance is lumped:

    Joule = I_wire^2 * f * R_n
    dissipation = thermal_conductance_per_length * (f * wire_length) * dT_c
    df/dt = (Joule - dissipation) / (heat_capacity_per_length * wire_length * dT_c)

At equilibrium the balance fixes the wire current at the sustaining value
I_sus = sqrt(G_th * L * dT_c / R_n) independent of the domain size; the node
equation (including the calibrated leak conductance) then selects f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy import optimize

from .errors import DomainError, NumericalError
from .photodiode import (
    OperatingPoint,
    PhotodiodeParams,
    open_circuit_voltage,
    photocurrent,
    source_current_at_voltage,
)

# A hotspot smaller than this fraction of the seed with negative growth is
# considered collapsed (the wire re-enters the superconducting state).
UNLATCH_FRACTION_RATIO = 0.25


@dataclass(frozen=True)
class NanowireParams:
    normal_resistance: float = 5.5e6  # Ohm, full wire at 10 K
    resistance_per_length: float = 5.5e9  # Ohm/m
    heat_capacity_per_length: float = 2.36e-9  # J/(K*m)
    thermal_conductance_per_length: float = 1.18e-3  # W/(K*m), coupling to substrate
    critical_temperature_offset: float = 2.8  # K, T_c - T_bath
    nominal_bias_current: float = 4e-6  # A
    detection_plateau: float = 0.83
    efficiency_sharpness: float = 5.0  # shape of the saturating efficiency curve
    leak_conductance: float = 1.008e-4  # S, effective parallel conductance
    seed_normal_fraction: float = 1.8181818e-4  # ~1 kOhm initial hotspot

    def __post_init__(self):
        if self.normal_resistance <= 0 or self.resistance_per_length <= 0:
            raise DomainError("resistances must be > 0")
        if (
            self.heat_capacity_per_length <= 0
            or self.thermal_conductance_per_length <= 0
            or self.critical_temperature_offset <= 0
        ):
            raise DomainError("thermal parameters must be > 0")
        if not 0 <= self.detection_plateau <= 1:
            raise DomainError("detection_plateau must be in [0, 1]")
        if self.efficiency_sharpness <= 0:
            raise DomainError("efficiency_sharpness must be > 0")
        if self.nominal_bias_current <= 0:
            raise DomainError("nominal_bias_current must be > 0")
        if self.leak_conductance < 0:
            raise DomainError("leak_conductance must be >= 0")
        if not 0 < self.seed_normal_fraction < 1:
            raise DomainError("seed_normal_fraction must be in (0, 1)")

    @property
    def wire_length(self) -> float:
        return self.normal_resistance / self.resistance_per_length

    @property
    def dissipation_scale(self) -> float:
        """Full-wire dissipated power G_th * L * dT_c (W); scales with f."""
        return (
            self.thermal_conductance_per_length
            * self.wire_length
            * self.critical_temperature_offset
        )

    @property
    def thermal_energy_scale(self) -> float:
        """Energy to normalise the full wire, C_th * L * dT_c (J)."""
        return (
            self.heat_capacity_per_length
            * self.wire_length
            * self.critical_temperature_offset
        )

    @property
    def sustaining_current(self) -> float:
        """Wire current at which Joule heating balances dissipation for any f."""
        return math.sqrt(self.dissipation_scale / self.normal_resistance)


@dataclass(frozen=True)
class HotspotState:
    resistance: float  # Ohm
    normal_fraction: float
    latched: bool
    last_trigger_time: Optional[float] = None  # s

    def __post_init__(self):
        if not 0 <= self.normal_fraction <= 1:
            raise DomainError("normal_fraction must be in [0, 1]")
        if self.latched != (self.normal_fraction > 0):
            raise DomainError("latched flag must match normal_fraction > 0")

    @classmethod
    def unlatched(cls) -> "HotspotState":
        return cls(resistance=0.0, normal_fraction=0.0, latched=False)

    @classmethod
    def from_fraction(
        cls, fraction: float, params: NanowireParams, trigger_time: Optional[float] = None
    ) -> "HotspotState":
        return cls(
            resistance=fraction * params.normal_resistance,
            normal_fraction=fraction,
            latched=fraction > 0,
            last_trigger_time=trigger_time,
        )


def detection_efficiency(bias_current: float, params: NanowireParams) -> float:
    """Saturating efficiency vs bias current, pinned to the plateau at I_nom.

    eta(I) = plateau * min(1, (1 - exp(-a*I/I_nom)) / (1 - exp(-a))); the clip
    keeps the curve bounded by the plateau above the nominal current.
    """
    if bias_current < 0:
        raise DomainError("bias_current must be >= 0")
    a = params.efficiency_sharpness
    shape = -math.expm1(-a * bias_current / params.nominal_bias_current)
    shape /= -math.expm1(-a)
    return params.detection_plateau * min(1.0, shape)


def absorb_photon(
    state: HotspotState,
    time: float,
    bias_current: float,
    rng_draw: float,
    params: NanowireParams,
) -> HotspotState:
    """Attempt a detection; a latched wire ignores all further photons."""
    if state.latched:
        return state
    if rng_draw < detection_efficiency(bias_current, params):
        return HotspotState.from_fraction(
            params.seed_normal_fraction, params, trigger_time=time
        )
    return state


def hotspot_growth_rate(
    state: HotspotState, current_through_wire: float, params: NanowireParams
) -> float:
    """d(normal_fraction)/dt from the lumped power balance, clipped at [0, 1]."""
    if not state.latched:
        raise DomainError("no hotspot to evolve")
    f = state.normal_fraction
    joule = current_through_wire**2 * f * params.normal_resistance
    dissipated = params.dissipation_scale * f
    rate = (joule - dissipated) / params.thermal_energy_scale
    if f >= 1.0 and rate > 0:
        return 0.0
    return rate


def reset(state: HotspotState) -> HotspotState:
    """Collapse the hotspot (bias removed); idempotent."""
    return HotspotState.unlatched()


@dataclass(frozen=True)
class Equilibrium:
    """Steady state of the coupled source/hotspot system; latched=False means
    the optical power cannot sustain any hotspot (no-latch result)."""

    latched: bool
    operating_point: Optional[OperatingPoint] = None
    hotspot: Optional[HotspotState] = None


def _node_voltage(
    fraction: float,
    optical_power: float,
    pd_params: PhotodiodeParams,
    nw_params: NanowireParams,
) -> float:
    """Node voltage with a hotspot of the given fraction on the source."""
    g_hs = 1.0 / (fraction * nw_params.normal_resistance)
    g = g_hs + nw_params.leak_conductance

    def mismatch(v):
        return source_current_at_voltage(v, optical_power, pd_params) - v * g

    v_hi = open_circuit_voltage(optical_power, pd_params)
    if v_hi <= 0:
        return 0.0
    v = optimize.brentq(mismatch, 0.0, v_hi, xtol=1e-16, rtol=8.9e-16)
    # Newton polish for a sub-pA node residual.
    ks = pd_params.knee_sharpness
    kv = pd_params.knee_voltage
    for _ in range(3):
        r = mismatch(v)
        dr = -math.exp((v - kv) / ks) / ks - g
        v = min(max(v - r / dr, 0.0), v_hi)
    return v


def equilibrium_point(
    optical_power: float,
    pd_params: PhotodiodeParams,
    nw_params: NanowireParams,
) -> Equilibrium:
    """Joint steady state: node current balance plus hotspot thermal balance.

    Returns a no-latch result when the photocurrent cannot reach the
    sustaining wire current.
    """
    if optical_power < 0:
        raise DomainError("optical_power must be >= 0")
    i_sus = nw_params.sustaining_current
    i_ph = photocurrent(optical_power, pd_params)
    if i_ph <= i_sus:
        return Equilibrium(latched=False)

    def wire_current(fraction):
        v = _node_voltage(fraction, optical_power, pd_params, nw_params)
        return v / (fraction * nw_params.normal_resistance)

    def imbalance(fraction):
        return wire_current(fraction) - i_sus

    f_lo = 1e-9
    if imbalance(f_lo) <= 0:
        return Equilibrium(latched=False)
    if imbalance(1.0) > 0:
        f_eq = 1.0  # fully normal wire still above the sustaining current
    else:
        f_eq = optimize.brentq(imbalance, f_lo, 1.0, xtol=1e-18, rtol=8.9e-16)
    v_eq = _node_voltage(f_eq, optical_power, pd_params, nw_params)
    i_eq = v_eq / (f_eq * nw_params.normal_resistance)
    joule = i_eq**2 * f_eq * nw_params.normal_resistance
    dissipated = nw_params.dissipation_scale * f_eq
    if f_eq < 1.0 and abs(joule - dissipated) > 1e-6 * joule:
        raise NumericalError(
            "hotspot balance did not converge",
            {"fraction": f_eq, "joule": joule, "dissipated": dissipated},
        )
    return Equilibrium(
        latched=True,
        operating_point=OperatingPoint.from_vi(v_eq, i_eq),
        hotspot=HotspotState.from_fraction(f_eq, nw_params),
    )
