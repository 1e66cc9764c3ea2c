import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neqcasimir.constants import C, E_CHARGE, HBAR, KB
from neqcasimir.materials import BandgapSpec
from neqcasimir.optics import (BiasState, WaveGeometry, bose, delta_occupation,
                               effective_temperature, fresnel, occupation, perp_wavevector)

GAAS_GAP = BandgapSpec(1.43)
W = 2e15


def test_normal_incidence():
    r_te, r_tm = fresnel(WaveGeometry.real(W, 0.0), 4.0)
    assert r_te == pytest.approx(-1 / 3)
    assert r_tm == pytest.approx(1 / 3)


def test_vacuum_does_not_reflect():
    for geom in (WaveGeometry.real(W, 0.3 * W / C), WaveGeometry.real(W, 2 * W / C),
                 WaveGeometry.imag(W, W / C)):
        r_te, r_tm = fresnel(geom, 1.0)
        assert abs(r_te) < 1e-15 and abs(r_tm) < 1e-15


def test_perfect_reflector():
    r_te, r_tm = fresnel(WaveGeometry.real(W, 0.5 * W / C), math.inf)
    assert r_te == -1 and r_tm == 1


def test_brewster_angle():
    eps = 2.25
    k = W / C * math.sqrt(eps / (1 + eps))
    _, r_tm = fresnel(WaveGeometry.real(W, k), eps)
    assert abs(r_tm) < 1e-12


def test_lossless_total_internal_reflection_is_unimodular():
    # evanescent in vacuum, propagating in the dielectric
    r_te, r_tm = fresnel(WaveGeometry.real(W, 1.2 * W / C), 4.0)
    assert abs(r_te) == pytest.approx(1.0, abs=1e-14)
    assert abs(r_tm) == pytest.approx(1.0, abs=1e-14)


def test_branch_choice():
    kz = perp_wavevector(WaveGeometry.real(W, 2 * W / C), 1.0)
    assert kz.imag > 0 and kz.real == 0
    kz = perp_wavevector(WaveGeometry.real(W, 0.5 * W / C), complex(-30, 2))
    assert kz.imag > 0


def test_imaginary_axis_decay_constant():
    kappa = perp_wavevector(WaveGeometry.imag(W, 3.0 / 1e-6), 5.0)
    assert kappa == pytest.approx(math.sqrt(5 * (W / C) ** 2 + 9e12))


def test_arrays_broadcast():
    k = np.linspace(0, 1, 7) * W / C
    r_te, r_tm = fresnel(WaveGeometry.real(W, k), complex(10, 1))
    assert r_te.shape == r_tm.shape == (7,)


def test_array_permittivity_with_mirrors():
    eps = np.array([4.0 + 0j, np.inf, 1.0 + 0j])
    r_te, r_tm = fresnel(WaveGeometry.real(np.full(3, W), 0.0), eps)
    assert r_te == pytest.approx([-1 / 3, -1, 0])
    assert r_tm == pytest.approx([1 / 3, 1, 0])
    r_te, r_tm = fresnel(WaveGeometry.imag(np.full(3, W), W / C), eps)
    assert r_te.dtype == float and r_te[1] == -1 and r_tm[1] == 1


@pytest.mark.parametrize("kwargs", [dict(frequency=-1.0, k=0.0), dict(frequency=W, k=-1.0),
                                    dict(frequency=W, k=0.0, axis="other")])
def test_geometry_validation(kwargs):
    with pytest.raises(ValueError):
        WaveGeometry(**kwargs)


passive_eps = st.builds(complex, st.floats(-100, 100), st.floats(0, 100))


@settings(max_examples=10_000, deadline=None)
@given(passive_eps, st.floats(1e12, 1e17), st.floats(0.0, 1.0))
def test_passivity_for_propagating_waves(eps, omega, frac):
    r_te, r_tm = fresnel(WaveGeometry.real(omega, frac * omega / C), eps)
    assert abs(r_te) <= 1 + 1e-12
    assert abs(r_tm) <= 1 + 1e-12


@settings(max_examples=500, deadline=None)
@given(st.floats(1.0, 1e4), st.floats(1e10, 1e17), st.floats(0, 1e9))
def test_imaginary_axis_coefficients_are_real_and_bounded(eps, xi, k):
    r_te, r_tm = fresnel(WaveGeometry.imag(xi, k), eps)
    assert np.isrealobj(r_te) and np.isrealobj(r_tm)
    assert -1 <= r_te <= 1 and -1 <= r_tm <= 1


def test_bose_small_and_large_arguments():
    assert bose(1e-12) == pytest.approx(1e12, rel=1e-6)
    assert bose(800.0) == 0.0 or bose(800.0) < 1e-300
    assert bose(60.0) == pytest.approx(math.exp(-60.0), rel=1e-12)


def test_unbiased_occupation_is_bose_einstein():
    bias = BiasState(0.0, GAAS_GAP, 300.0)
    w = np.array([1e13, 1e14, 3e15])
    assert np.allclose(occupation(w, bias), 1 / np.expm1(HBAR * w / (KB * 300.0)), rtol=1e-13)


def test_gap_exponent_at_largest_bias():
    bias = BiasState.from_relative(0.95, GAAS_GAP, 300.0)
    margin_mev = (GAAS_GAP.gap_energy - bias.voltage) * 1e3
    assert margin_mev == pytest.approx(71.5)
    kT_mev = KB * 300.0 / E_CHARGE * 1e3
    assert kT_mev == pytest.approx(25.85, abs=0.01)
    w = GAAS_GAP.omega * (1 + 1e-12)
    assert occupation(w, bias) == pytest.approx(1 / math.expm1(margin_mev / kT_mev), rel=1e-6)


def test_delta_occupation_zero_below_gap_and_unbiased():
    bias = BiasState.from_relative(0.9, GAAS_GAP, 300.0)
    w = np.linspace(0.01, 1.0, 40) * GAAS_GAP.omega
    assert np.all(delta_occupation(w, bias) == 0.0)
    zero = BiasState(0.0, GAAS_GAP, 300.0)
    assert np.all(delta_occupation(w * 2, zero) == 0.0)
    assert delta_occupation(GAAS_GAP.omega * 1.001, bias) > 0


@settings(max_examples=300, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(1.0 + 1e-9, 3.0), st.floats(50.0, 600.0))
def test_delta_occupation_sign_follows_bias(rel, scale, T):
    bias = BiasState.from_relative(rel, GAAS_GAP, T)
    dn = delta_occupation(GAAS_GAP.omega * scale, bias)
    assert (dn >= 0) if rel >= 0 else (dn <= 0)


@pytest.mark.parametrize("rel,expected", [(0.0, 300.0), (0.95, 6000.0), (0.9, 3000.0)])
def test_effective_temperature(rel, expected):
    bias = BiasState.from_relative(rel, GAAS_GAP, 300.0)
    assert effective_temperature(bias) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.97), st.floats(10.0, 1000.0))
def test_effective_temperature_matches_occupation_at_gap(rel, T):
    bias = BiasState.from_relative(rel, GAAS_GAP, T)
    hot = BiasState(0.0, GAAS_GAP, effective_temperature(bias))
    w = GAAS_GAP.omega * (1 + 1e-15)
    assert occupation(w, bias) == pytest.approx(occupation(w, hot), rel=1e-9)


def test_effective_temperature_is_exact_only_at_the_gap():
    bias = BiasState.from_relative(0.9, GAAS_GAP, 300.0)
    hot = BiasState(0.0, GAAS_GAP, effective_temperature(bias))
    w = GAAS_GAP.omega * 1.2
    assert occupation(w, bias) < 0.1 * occupation(w, hot)


def test_bias_validation():
    with pytest.raises(ValueError):
        BiasState(1.43, GAAS_GAP, 300.0)
    with pytest.raises(ValueError):
        BiasState(1.0, GAAS_GAP, 0.0)


def test_spontaneous_emission_warning(caplog):
    caplog.set_level(logging.WARNING, logger="neqcasimir")
    BiasState.from_relative(0.99, GAAS_GAP, 300.0)
    assert "spontaneous-emission" in caplog.text
    caplog.clear()
    BiasState.from_relative(0.9, GAAS_GAP, 300.0)
    assert caplog.text == ""


def test_occupation_rejects_nonpositive_frequency():
    with pytest.raises(ValueError):
        occupation(0.0, BiasState(0.0, GAAS_GAP, 300.0))
