"""Fast invariant checks behind ``neqcasimir check``."""

from __future__ import annotations

import math

import numpy as np

from .constants import C, HBAR
from .materials import PERFECT_REFLECTOR, get_material
from .numerics import polylog
from .optics import (BiasState, WaveGeometry, delta_occupation, effective_temperature, fresnel,
                     occupation)
from .planeplane import (Accuracy, PlatePair, PlateSpec, free_energy_area,
                         pressure_equilibrium, pressure_net, pressure_pw_constant,
                         pressure_pw_constant_ideal)


def _polylog_series():
    z = 0.3 + 0.4j
    k = np.arange(1, 200)
    ref = np.sum(z**k / k**2)
    return abs(polylog(2, z) - ref) / abs(ref) < 1e-12


def _passivity():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        eps = complex(rng.uniform(-50, 50), rng.uniform(0, 50))
        omega = rng.uniform(1e13, 1e16)
        k = rng.uniform(0, 1) * omega / C  # propagating; evanescent |r| may exceed 1
        r_te, r_tm = fresnel(WaveGeometry.real(omega, k), eps)
        if abs(r_te) > 1 + 1e-12 or abs(r_tm) > 1 + 1e-12:
            return False
    return True


def _effective_temperature():
    gaas = get_material("gaas")
    bias = BiasState.from_relative(0.95, gaas.gap, 300.0)
    cold = BiasState(0.0, gaas.gap, effective_temperature(bias))
    w = gaas.gap.omega * (1 + 1e-15)
    return math.isclose(occupation(w, bias), occupation(w, cold), rel_tol=1e-9)


def _ideal_mirrors():
    pair = PlatePair(PlateSpec(PERFECT_REFLECTOR), PlateSpec(PERFECT_REFLECTOR))
    d = 1e-6
    p = pressure_equilibrium(pair, d, 0.0)
    f = free_energy_area(pair, d, 0.0)
    return (math.isclose(p, -math.pi**2 * HBAR * C / (240 * d**4), rel_tol=1e-6)
            and math.isclose(f, -math.pi**2 * HBAR * C / (720 * d**3), rel_tol=1e-6))


def _gaas_au():
    gaas, au = get_material("gaas"), get_material("au")
    pair = PlatePair(PlateSpec.biased(gaas, 0.95, 300.0), PlateSpec(au))
    b = pressure_net(pair, 1e-6, 300.0)
    ratio = pressure_pw_constant(pair) / pressure_pw_constant_ideal(
        gaas.gap, 300.0, pair.bias.voltage)
    return b.p_eq < 0 < b.dp_pw and b.p_net == b.p_eq + b.dp_pw + b.dp_ew and 0.9 < ratio <= 1


def _free_energy_derivative():
    gaas, au = get_material("gaas"), get_material("au")
    pair = PlatePair(PlateSpec(gaas), PlateSpec(au))
    acc = Accuracy(rel=1e-12, inner_rel=1e-13, matsubara_rel=1e-14)
    d = 2e-7
    h = 1e-4 * d
    fd = -(free_energy_area(pair, d + h, 300.0, acc)
           - free_energy_area(pair, d - h, 300.0, acc)) / (2 * h)
    return math.isclose(fd, pressure_equilibrium(pair, d, 300.0, acc), rel_tol=1e-5)


def _zero_below_gap():
    gaas = get_material("gaas")
    bias = BiasState.from_relative(0.9, gaas.gap, 300.0)
    w = np.linspace(0.1, 1.0, 50) * gaas.gap.omega
    return bool(np.all(delta_occupation(w, bias) == 0.0))


CHECKS = [
    ("polylog matches its defining series", _polylog_series),
    ("Fresnel coefficients are passive", _passivity),
    ("effective temperature reproduces the gap occupation", _effective_temperature),
    ("occupation change vanishes below the gap", _zero_below_gap),
    ("ideal mirrors at T=0 give the textbook pressure and energy", _ideal_mirrors),
    ("free energy derivative equals the equilibrium pressure", _free_energy_derivative),
    ("GaAs-Au signs, assembly identity and near-ideal plateau", _gaas_au),
]


def run_checks(emit=print) -> bool:
    ok = True
    for name, check in CHECKS:
        try:
            passed = bool(check())
            detail = ""
        except Exception as exc:  # report and keep going
            passed, detail = False, f" ({type(exc).__name__}: {exc})"
        ok &= passed
        emit(f"{'PASS' if passed else 'FAIL'}  {name}{detail}")
    return ok
