import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sfwm_ladder.core import (HBAR, MASS_RB85, AtomicSystem, Dipoles, FieldDrive, mhz_2pi,
                              most_probable_speed, rabi_frequency, relaxation_rates,
                              to_mhz_2pi, validate_regime)

rates = st.floats(1e5, 1e10)
detunings = st.floats(-1e10, 1e10)


def system(**kw):
    base = dict(gamma1=mhz_2pi(3), Gamma1=mhz_2pi(1), N=1e16, T=300.0)
    base.update(kw)
    return AtomicSystem(**base)


def drive(sys_=None, **kw):
    base = dict(Delta1=mhz_2pi(25), Omega_p1=mhz_2pi(60), Omega_p2=mhz_2pi(0.6))
    base.update(kw)
    return FieldDrive.from_detunings(sys_ or system(), **base)


def test_rabi_frequency_trivial_cases():
    assert rabi_frequency(0.0, 123.0) == 0
    assert rabi_frequency(1e-29, 0.0) == 0


def test_rabi_frequency_hand_value():
    # 1e-29 C m * 1e4 V/m / 1.0546e-34 J s
    assert rabi_frequency(1.0e-29, 1.0e4) == pytest.approx(9.482e8, rel=1e-3)


def test_rabi_frequency_rejects_negative_dipole():
    with pytest.raises(ValueError):
        rabi_frequency(-1e-29, 1.0)


def test_relaxation_rates_zero_detuning_are_real():
    r = relaxation_rates(system(gamma1=2.0, Gamma1=5.0), drive(Delta1=0.0))
    assert (r.G21, r.G31, r.G42, r.G43, r.G41) == (2, 2, 12, 12, 10)


def test_relaxation_rates_cold_parameters():
    r = relaxation_rates(system(), drive())
    assert r.G31 == pytest.approx(complex(3, -25) * 2 * math.pi * 1e6)


@given(g=rates, G=rates, d1=detunings, d1p=detunings, d2=detunings)
def test_relaxation_real_parts(g, G, d1, d1p, d2):
    s = system(gamma1=g, Gamma1=G)
    r = relaxation_rates(s, drive(s, Delta1=d1, Delta1p=d1p, Delta2=d2))
    assert r.G21.real == g and r.G31.real == g
    assert r.G42.real == r.G43.real == 2 * G + g
    assert r.G41.real == 2 * G


@given(d1=detunings, d1p=detunings, d2=detunings)
def test_negated_detunings_conjugate_rates(d1, d1p, d2):
    s = system()
    a = relaxation_rates(s, drive(s, Delta1=d1, Delta1p=d1p, Delta2=d2))
    b = relaxation_rates(s, drive(s, Delta1=-d1, Delta1p=-d1p, Delta2=-d2))
    for name in ("G21", "G31", "G42", "G43", "G41"):
        assert getattr(b, name) == getattr(a, name).conjugate()


def test_transposed_rate_is_conjugate():
    r = relaxation_rates(system(), drive())
    assert r.conj("G13") == r.G31.conjugate()
    assert r.conj("G14") == r.G41.conjugate()


def test_speed_scales_with_root_temperature():
    assert most_probable_speed(1600.0) / most_probable_speed(400.0) == pytest.approx(2.0, rel=1e-15)


def test_speed_hot_rubidium():
    # sqrt(2 * 1.381e-23 * 383.15 / 1.410e-25)
    assert most_probable_speed(383.15, 1.410e-25) == pytest.approx(274.0, abs=0.5)
    assert most_probable_speed(383.15) == pytest.approx(274.0, abs=1.0)


def test_speed_vanishes_for_frozen_atoms():
    assert most_probable_speed(1e-12) < 1e-3


@given(T=st.floats(1.0, 2000.0), f=st.floats(1.01, 10.0))
def test_speed_monotone(T, f):
    assert most_probable_speed(T * f) > most_probable_speed(T)
    assert most_probable_speed(T, MASS_RB85 * f) < most_probable_speed(T)


def test_speed_rejects_nonpositive():
    with pytest.raises(ValueError):
        most_probable_speed(0.0)


def test_regime_clean_drive():
    assert validate_regime(drive(Omega_p1=100.0, Omega_p2=1.0)) == []


def test_regime_hierarchy_warning():
    kinds = [w.kind for w in validate_regime(drive(Omega_p1=5.0, Omega_p2=5.0))]
    assert kinds == ["hierarchy"]


def test_regime_closure_warning():
    d = drive(Delta1=1e9, Delta1p=1e9, Delta2=0.0).with_(Delta2p=1.0)
    assert [w.kind for w in validate_regime(d)] == ["closure"]


def test_closure_filled_in():
    d = drive(Delta1=mhz_2pi(30), Delta1p=mhz_2pi(20), Delta2=mhz_2pi(4))
    assert d.two_photon_residual == pytest.approx(0.0, abs=1e-6)
    assert d.omega_p1 + d.omega_p2 == pytest.approx(d.omega_s1 + d.omega_s2, rel=1e-15)


@given(st.floats(-1e6, 1e6))
def test_mhz_round_trip(x):
    assert to_mhz_2pi(mhz_2pi(x)) == pytest.approx(x, rel=2.3e-16, abs=0)


@pytest.mark.parametrize("field", ["gamma1", "Gamma1", "T", "L", "m"])
def test_system_rejects_nonpositive(field):
    with pytest.raises(ValueError, match=field):
        system(**{field: 0.0})


def test_system_rejects_negative_density():
    with pytest.raises(ValueError):
        system(N=-1.0)


def test_dipoles_rejects_negative():
    with pytest.raises(ValueError):
        Dipoles(1e-29, -1e-29, 0.0, 0.0)


def test_field_amplitude_from_rabi():
    s = system()
    d = drive(s)
    assert d.eps_p1 * s.dipoles.u34 / HBAR == pytest.approx(abs(d.Omega_p1))
    assert np.isclose(d.eps_p2 * s.dipoles.u13 / HBAR, abs(d.Omega_p2))
