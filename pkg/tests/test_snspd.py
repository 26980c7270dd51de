import math

import pytest

from optosnspd.errors import DomainError
from optosnspd.snspd import (
    HotspotState,
    NanowireParams,
    absorb_photon,
    detection_efficiency,
    equilibrium_point,
    hotspot_growth_rate,
    reset,
)


def test_efficiency_plateau_at_nominal(nw):
    assert detection_efficiency(4e-6, nw) == pytest.approx(0.83, rel=1e-12)


def test_efficiency_zero_current(nw):
    assert detection_efficiency(0.0, nw) == 0.0


def test_efficiency_half_nominal_formula(nw):
    a = nw.efficiency_sharpness
    expected = 0.83 * (1 - math.exp(-a / 2)) / (1 - math.exp(-a))
    got = detection_efficiency(2e-6, nw)
    assert got == pytest.approx(expected, rel=1e-12)
    assert 0 < got < 0.83


def test_efficiency_monotone_and_bounded(nw):
    currents = [i * 1e-7 for i in range(0, 100)]
    effs = [detection_efficiency(i, nw) for i in currents]
    assert all(b >= a for a, b in zip(effs, effs[1:]))
    assert all(e <= nw.detection_plateau + 1e-15 for e in effs)


def test_efficiency_negative_current(nw):
    with pytest.raises(DomainError):
        detection_efficiency(-1e-6, nw)


def test_absorb_photon_latches(nw):
    state = HotspotState.unlatched()
    new = absorb_photon(state, 1e-6, 4e-6, 0.0, nw)
    assert new.latched
    assert new.normal_fraction == nw.seed_normal_fraction
    assert new.last_trigger_time == 1e-6
    assert new.resistance == pytest.approx(
        nw.seed_normal_fraction * nw.normal_resistance
    )


def test_absorb_photon_already_latched(nw):
    latched = HotspotState.from_fraction(0.01, nw)
    assert absorb_photon(latched, 2e-6, 4e-6, 0.0, nw) is latched


def test_absorb_photon_draw_above_efficiency(nw):
    state = HotspotState.unlatched()
    assert absorb_photon(state, 0.0, 4e-6, 0.99, nw) is state


def test_growth_rate_balance_point(nw):
    f = 0.01
    state = HotspotState.from_fraction(f, nw)
    assert hotspot_growth_rate(state, nw.sustaining_current, nw) == pytest.approx(
        0.0, abs=1e-6
    )


def test_growth_rate_positive_at_nominal_current(nw):
    state = HotspotState.from_fraction(nw.seed_normal_fraction, nw)
    assert hotspot_growth_rate(state, 4e-6, nw) > 0


def test_growth_rate_clipped_at_full_wire(nw):
    state = HotspotState.from_fraction(1.0, nw)
    assert hotspot_growth_rate(state, 10e-6, nw) == 0.0


def test_growth_rate_requires_latch(nw):
    with pytest.raises(DomainError):
        hotspot_growth_rate(HotspotState.unlatched(), 4e-6, nw)


def test_equilibrium_preset_anchor(pd, nw):
    eq = equilibrium_point(6e-6, pd, nw)
    assert eq.latched
    assert eq.operating_point.voltage == pytest.approx(31e-3, rel=0.01)
    assert eq.hotspot.resistance == pytest.approx(40e3, rel=0.01)


def test_equilibrium_high_power_saturates(pd, nw):
    eq = equilibrium_point(700e-6, pd, nw)
    assert eq.latched
    assert eq.operating_point.voltage >= 0.55


def test_equilibrium_no_power(pd, nw):
    eq = equilibrium_point(0.0, pd, nw)
    assert not eq.latched
    assert eq.operating_point is None


def test_equilibrium_consistency(pd, nw):
    from optosnspd.photodiode import source_current_at_voltage

    eq = equilibrium_point(6e-6, pd, nw)
    v = eq.operating_point.voltage
    i_w = eq.operating_point.current
    f = eq.hotspot.normal_fraction
    joule = i_w**2 * f * nw.normal_resistance
    dissipated = nw.dissipation_scale * f
    assert abs(joule - dissipated) / joule < 1e-6
    node_residual = abs(
        source_current_at_voltage(v, 6e-6, pd) - i_w - v * nw.leak_conductance
    )
    assert node_residual < 1e-12


def test_reset(nw):
    latched = HotspotState.from_fraction(40e3 / nw.normal_resistance, nw)
    off = reset(latched)
    assert not off.latched
    assert off.normal_fraction == 0.0 and off.resistance == 0.0
    assert reset(off) == off
    again = absorb_photon(off, 5e-6, 4e-6, 0.0, nw)
    assert again.latched


def test_state_coupling_invariant(nw):
    with pytest.raises(DomainError):
        HotspotState(resistance=100.0, normal_fraction=0.0, latched=True)
    with pytest.raises(DomainError):
        HotspotState(resistance=0.0, normal_fraction=0.5, latched=False)


def test_params_validation():
    with pytest.raises(DomainError):
        NanowireParams(normal_resistance=-1)
    with pytest.raises(DomainError):
        NanowireParams(detection_plateau=1.5)
    with pytest.raises(DomainError):
        NanowireParams(leak_conductance=-1e-6)
