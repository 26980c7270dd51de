"""Michelson intensity modulator: transfer function, V_pi(T), optical budget."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# Temperature anchors for the V_pi interpolation (cryogenic / ambient).
T_COLD_ANCHOR = 4.0  # K
T_WARM_ANCHOR = 290.0  # K

# Bias phase putting the click signal on the rising quadrature slope.
QUADRATURE_BIAS_PHASE = -math.pi / 2


@dataclass(frozen=True)
class ModulatorParams:
    vpi_cold: float  # V, at 1 K
    vpi_warm: float  # V, at 300 K
    bias_phase: float = QUADRATURE_BIAS_PHASE  # rad, phase offset at zero volt
    fiber_to_fiber_efficiency: float = 1.0
    extinction_imbalance: float = 0.0  # residual minimum from non-50:50 splitting
    capacitance: float = 500e-12  # F, lumped electrode + wiring
    electrode_length: float = 20e-3  # m

    def __post_init__(self):
        if self.vpi_cold <= 0 or self.vpi_warm <= 0:
            raise DomainError("vpi must be > 0")
        if not 0 < self.fiber_to_fiber_efficiency <= 1:
            raise DomainError("fiber_to_fiber_efficiency must be in (0, 1]")
        if not 0 <= self.extinction_imbalance < 1:
            raise DomainError("extinction_imbalance must be in [0, 1)")
        if self.capacitance <= 0:
            raise DomainError("capacitance must be > 0")

    @property
    def modulation_depth(self) -> float:
        return 1.0 - self.extinction_imbalance


@dataclass(frozen=True)
class OpticalBudget:
    """Factors of the fiber-waveguide-fiber throughput."""

    mode_overlap_in: float
    mode_overlap_out: float
    interface_transmission: float
    propagation_loss: float  # dB/cm
    path_length_one_way: float  # cm
    mirror_reflectivity: float

    def __post_init__(self):
        for name in (
            "mode_overlap_in",
            "mode_overlap_out",
            "interface_transmission",
            "mirror_reflectivity",
        ):
            val = getattr(self, name)
            if not 0 < val <= 1:
                raise DomainError(f"{name} must be in (0, 1]")
        if self.propagation_loss < 0:
            raise DomainError("propagation_loss must be >= 0")
        if self.path_length_one_way <= 0:
            raise DomainError("path_length_one_way must be > 0")


def vpi_at_temperature(temperature: float, params: ModulatorParams) -> float:
    """Half-wave voltage, linearly interpolated between the two anchors."""
    if not 0 < temperature <= 350:
        raise DomainError("temperature must be in (0, 350] K")
    if temperature <= T_COLD_ANCHOR:
        return params.vpi_cold
    if temperature >= T_WARM_ANCHOR:
        return params.vpi_warm
    frac = (temperature - T_COLD_ANCHOR) / (T_WARM_ANCHOR - T_COLD_ANCHOR)
    return params.vpi_cold + frac * (params.vpi_warm - params.vpi_cold)


def transmission(v: float, temperature: float, params: ModulatorParams) -> float:
    """Power transmission at drive voltage v.

    T(v) = eta * (1 + m * cos(pi*v/V_pi + bias_phase)) / 2, periodic in 2*V_pi.
    """
    if not math.isfinite(v):
        raise DomainError("drive voltage must be finite")
    vpi = vpi_at_temperature(temperature, params)
    m = params.modulation_depth
    phase = math.pi * v / vpi + params.bias_phase
    return params.fiber_to_fiber_efficiency * (1.0 + m * math.cos(phase)) / 2.0


@dataclass(frozen=True)
class SmallSignalResponse:
    linearized: float  # W, quadrature-slope approximation
    exact: float  # W, T(dv) - T(0) difference


def small_signal_response(
    p_in: float, delta_v: float, temperature: float, params: ModulatorParams
) -> SmallSignalResponse:
    """Optical output change for a small drive step at the quadrature bias.

    Linearized form: p_in * eta * m * (pi/2) * (delta_v / V_pi).  The exact
    value is the transfer-function difference at the quadrature bias phase.
    """
    vpi = vpi_at_temperature(temperature, params)
    eta = params.fiber_to_fiber_efficiency
    m = params.modulation_depth
    linear = p_in * eta * m * (math.pi / 2.0) * (delta_v / vpi)
    quad = ModulatorParams(
        vpi_cold=params.vpi_cold,
        vpi_warm=params.vpi_warm,
        bias_phase=QUADRATURE_BIAS_PHASE,
        fiber_to_fiber_efficiency=eta,
        extinction_imbalance=params.extinction_imbalance,
        capacitance=params.capacitance,
        electrode_length=params.electrode_length,
    )
    exact = p_in * (
        transmission(delta_v, temperature, quad) - transmission(0.0, temperature, quad)
    )
    return SmallSignalResponse(linearized=linear, exact=exact)


def modulation_strength(vpi: float, electrode_length: float, passes: int) -> float:
    """V_pi * length * passes in V*cm (passes = 2 for the Michelson double pass)."""
    if vpi <= 0:
        raise DomainError("vpi must be > 0")
    if electrode_length < 0:
        raise DomainError("electrode_length must be >= 0")
    if passes not in (1, 2):
        raise DomainError("passes must be 1 or 2")
    return vpi * (electrode_length * 100.0) * passes


def coupling_budget(budget: OpticalBudget) -> float:
    """Round-trip fiber-waveguide-fiber efficiency from the individual factors."""
    round_trip_db = budget.propagation_loss * 2.0 * budget.path_length_one_way
    return (
        budget.mode_overlap_in
        * budget.mode_overlap_out
        * budget.interface_transmission**2
        * 10.0 ** (-round_trip_db / 10.0)
        * budget.mirror_reflectivity
    )
