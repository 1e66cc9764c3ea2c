"""Acceptance criteria, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL`` line and records its outcome
for the terminal summary. Expensive sweeps are shared through module fixtures.
Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they happen.
"""

import math
import time

import mpmath
import numpy as np
import pytest
from scipy import stats
from scipy.integrate import trapezoid

import conftest
from conftest import T_ROOM, biased_pair
from neqcasimir.cli import main
from neqcasimir.constants import C, HBAR, KB
from neqcasimir.materials import PERFECT_REFLECTOR, BandgapSpec, get_material
from neqcasimir.numerics import find_sign_change, polylog
from neqcasimir.optics import BiasState, WaveGeometry, delta_occupation, fresnel
from neqcasimir.planeplane import (Accuracy, PlatePair, PlateSpec, find_transition_separation,
                                   free_energy_area, phi_ew, phi_pw, pressure_eq_large_d,
                                   pressure_equilibrium, pressure_ew, pressure_ew_asymptotic,
                                   pressure_net, pressure_pw, pressure_pw_constant,
                                   pressure_pw_constant_ideal, pressure_pw_oscillatory,
                                   pressure_pw_oscillatory_asymptotic,
                                   pressure_pw_oscillatory_envelope)
from neqcasimir.sphere import SphereGeometry, force_pfa, force_pfa_direct

pytestmark = pytest.mark.slow

FAST = Accuracy(rel=1e-6, inner_rel=1e-8)
SWEEP = Accuracy(rel=1e-5, inner_rel=1e-7)
TIGHT = Accuracy(rel=1e-12, inner_rel=1e-13, matsubara_rel=1e-14)
MIRRORS = PlatePair(PlateSpec(PERFECT_REFLECTOR), PlateSpec(PERFECT_REFLECTOR))


def record(number, passed, detail, part=None):
    """Print and store one criterion outcome; parts of a criterion are AND-ed."""
    label = f"criterion {number}" + (f" [{part}]" if part else "")
    print(f"{label}: {'PASS' if passed else 'FAIL'}  {detail}")
    old_pass, old_detail = conftest.ACCEPTANCE.get(number, (True, ""))
    text = f"{part}: {detail}" if part else detail
    conftest.ACCEPTANCE[number] = (old_pass and passed,
                                   f"{old_detail}; {text}" if old_detail else text)
    assert passed, f"{label}: {detail}"


def within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


@pytest.fixture(scope="module")
def gaas():
    return get_material("gaas")


@pytest.fixture(scope="module")
def au():
    return get_material("au")


def first_sign_change(f, grid):
    previous = None
    for x in grid:
        value = f(x)
        if previous is not None and (previous[1] < 0) != (value < 0):
            return previous[0], x
        previous = (x, value)
    return None


# -- 1 ------------------------------------------------------------------------

def test_plate_transition_separations(gaas, au):
    targets = {0.95: 380e-9, 0.94: 400e-9, 0.925: 540e-9, 0.9: 850e-9}
    start = time.monotonic()
    found = {}
    for rel in targets:
        pair = biased_pair(gaas, au, rel)
        bracket = first_sign_change(lambda d: pressure_net(pair, d, T_ROOM, FAST).p_net,
                                    np.arange(0.2e-6, 2.01e-6, 0.1e-6))
        found[rel] = (math.nan if bracket is None else
                      find_transition_separation(pair, T_ROOM, *bracket, 1e-9, FAST))
    elapsed = time.monotonic() - start
    ok = all(within(found[r], targets[r], 0.15) for r in targets) and elapsed < 600
    detail = ", ".join(f"{r}: {found[r] * 1e9:.0f} nm (target {targets[r] * 1e9:.0f})"
                       for r in targets)
    record(1, ok, f"{detail}; {elapsed:.0f} s")


# -- 2 ------------------------------------------------------------------------

def test_plateau_pressures(au):
    targets = {"gaas": 3.6e-3, "inp": 3.5e-3, "inas": 0.7e-3, "zns": 0.4e-3, "insb": 0.2e-3}
    values = {name: pressure_pw_constant(biased_pair(get_material(name), au, 0.95))
              for name in targets}
    in_band = {name: within(values[name], targets[name], 0.25) for name in targets}
    ordered = list(targets) == sorted(targets, key=values.get, reverse=True)
    detail = ", ".join(f"{n} {values[n] * 1e3:.3f}{'' if in_band[n] else '(out)'}"
                       for n in targets) + f" mPa; ordering {'exact' if ordered else 'wrong'}"
    record(2, all(in_band.values()) and ordered, detail)


# -- 3 ------------------------------------------------------------------------

def test_near_ideality(gaas, au):
    ratios = {}
    for rel in (0.95, 0.94, 0.925, 0.9):
        pair = biased_pair(gaas, au, rel)
        ideal = pressure_pw_constant_ideal(gaas.gap, T_ROOM, pair.bias.voltage)
        ratios[rel] = pressure_pw_constant(pair) / ideal
    ok = all(0.94 <= x <= 1.0 for x in ratios.values())
    record(3, ok, ", ".join(f"{r}: {x:.4f}" for r, x in ratios.items()))


# -- 4 ------------------------------------------------------------------------

def test_oscillation_period(gaas, au):
    pair = biased_pair(gaas, au, 0.95)
    ds = np.arange(1.95e-6, 6.05e-6, 25e-9)
    p = np.array([pressure_pw(pair, d, SWEEP) for d in ds])
    peaks = []
    for i in range(1, len(ds) - 1):
        if p[i] > p[i - 1] and p[i] >= p[i + 1]:
            # vertex of the parabola through the three samples
            h = ds[1] - ds[0]
            shift = 0.5 * h * (p[i - 1] - p[i + 1]) / (p[i - 1] - 2 * p[i] + p[i + 1])
            peaks.append(ds[i] + shift)
    peaks = [x for x in peaks if 2e-6 <= x <= 6e-6]
    spacing = float(np.mean(np.diff(peaks))) if len(peaks) > 1 else math.nan
    record(4, within(spacing, 433e-9, 0.05),
           f"{len(peaks)} maxima, mean spacing {spacing * 1e9:.1f} nm (target 433)")


# -- 5 ------------------------------------------------------------------------

def brute_force_ideal(gap_ev, rel, n=200_001):
    gap = BandgapSpec(gap_ev)
    bias = BiasState.from_relative(rel, gap, T_ROOM)
    w = np.linspace(gap.omega, gap.omega + 60 * KB * T_ROOM / HBAR, n)
    w[0] *= 1 + 1e-15  # just above the gap
    f = w**3 * delta_occupation(w, bias)
    return HBAR / (3 * math.pi**2 * C**3) * trapezoid(f, w)


def test_ideal_closed_form_and_shape():
    worst = 0.0
    for gap_ev in np.linspace(0.2, 3.0, 10):
        for rel in np.linspace(0.5, 0.95, 6):
            value = pressure_pw_constant_ideal(BandgapSpec(gap_ev), T_ROOM, rel * gap_ev)
            worst = max(worst, abs(value / brute_force_ideal(gap_ev, rel) - 1))
    grid_ok = worst <= 1e-6

    gaps = np.geomspace(0.05, 10.0, 120)
    argmax, single = [], True
    for rel in (0.8, 0.85, 0.9, 0.95):
        p = np.array([pressure_pw_constant_ideal(BandgapSpec(g), T_ROOM, rel * g)
                      for g in gaps])
        i = int(np.argmax(p))
        rises, falls = np.all(np.diff(p[:i + 1]) > 0), np.all(np.diff(p[i:]) < 0)
        single &= 0 < i < len(gaps) - 1 and bool(rises and falls)
        argmax.append(gaps[i])
    shifts = all(a < b for a, b in zip(argmax, argmax[1:]))
    record(5, grid_ok and single and shifts,
           f"worst rel. deviation {worst:.1e}; maxima at "
           + ", ".join(f"{g:.2f}" for g in argmax) + " eV")


# -- 6 ------------------------------------------------------------------------

def test_asymptotic_agreement(gaas, au):
    pair = biased_pair(gaas, au, 0.95)
    d = 20e-6
    ew = pressure_ew(pair, d)
    ew_err = abs(ew - pressure_ew_asymptotic(pair, d)) / abs(ew)
    osc = pressure_pw_oscillatory(pair, d)
    osc_err = (abs(osc - pressure_pw_oscillatory_asymptotic(pair, d))
               / pressure_pw_oscillatory_envelope(pair, d))
    eq_pair = PlatePair(PlateSpec(gaas), PlateSpec(au))
    large = pressure_eq_large_d(eq_pair, 25e-6, T_ROOM)
    eq_err = abs(large / pressure_equilibrium(eq_pair, 25e-6, T_ROOM) - 1)
    detail = (f"EW {ew_err:.3f} (<= 0.05), Fabry-Perot {osc_err:.3f} (<= 0.10), "
              f"large-d equilibrium {eq_err:.4f} (<= 0.02)")
    record(6, ew_err <= 0.05 and osc_err <= 0.10 and eq_err <= 0.02, detail)


# -- 7 ------------------------------------------------------------------------

def test_sphere_forces(gaas, au):
    pair = biased_pair(gaas, au, 0.95)
    constant = pressure_pw_constant(pair)
    targets = {150e-6: 17e-9, 100e-6: 21e-9, 50e-6: 30e-9}
    found = {}
    for R, target in targets.items():
        def f(d):
            return force_pfa(pair, SphereGeometry(R, d), T_ROOM, FAST, constant).f_net
        bracket = first_sign_change(f, np.arange(5e-9, 400.1e-9, 5e-9))
        found[R] = math.nan if bracket is None else find_sign_change(f, *bracket, 1e-11)
    trans_ok = all(within(found[R], targets[R], 0.20) for R in targets)
    plateau = {R: math.pi * R**2 * constant for R in (50e-6, 150e-6)}
    plateau_ok = 20e-12 <= plateau[50e-6] <= 45e-12 and 180e-12 <= plateau[150e-6] <= 320e-12
    detail = (", ".join(f"R={R * 1e6:.0f} um: {found[R] * 1e9:.1f} nm (target "
                        f"{targets[R] * 1e9:.0f})" for R in targets)
              + f"; plateau {plateau[50e-6] * 1e12:.1f} pN and {plateau[150e-6] * 1e12:.1f} pN")
    record(7, trans_ok and plateau_ok, detail)


# -- 8 ------------------------------------------------------------------------

def central_difference(f, d):
    h = 1e-4 * d
    return (f(d + h) - f(d - h)) / (2 * h)


def test_antiderivatives(gaas, au):
    rng = np.random.default_rng(20)
    eq_pair = PlatePair(PlateSpec(gaas), PlateSpec(au))
    pair = biased_pair(gaas, au, 0.95)
    checks = {
        "free energy": (lambda x: free_energy_area(eq_pair, x, T_ROOM, TIGHT),
                        lambda x: pressure_equilibrium(eq_pair, x, T_ROOM, TIGHT)),
        "phi_pw": (lambda x: phi_pw(pair, x, TIGHT),
                   lambda x: pressure_pw_oscillatory(pair, x, TIGHT)),
        "phi_ew": (lambda x: phi_ew(pair, x, TIGHT),
                   lambda x: pressure_ew(pair, x, TIGHT)),
    }
    worst = {}
    for name, (potential, pressure) in checks.items():
        ds = np.exp(rng.uniform(math.log(0.1e-6), math.log(3e-6), 5))
        worst[name] = max(abs(-central_difference(potential, d) / pressure(d) - 1) for d in ds)
    record(8, all(w <= 1e-5 for w in worst.values()),
           ", ".join(f"{k} {v:.1e}" for k, v in worst.items()), "finite differences")


def test_ideal_mirror_limits():
    d = 0.5e-6
    p = pressure_equilibrium(MIRRORS, d, 0.0) / (-math.pi**2 * HBAR * C / (240 * d**4))
    f = free_energy_area(MIRRORS, d, 0.0) / (-math.pi**2 * HBAR * C / (720 * d**3))
    record(8, abs(p - 1) <= 5e-3 and abs(f - 1) <= 5e-3,
           f"pressure ratio {p:.10f}, free energy ratio {f:.10f}", "ideal mirrors")


def test_pfa_against_direct_average(gaas, au):
    pair = biased_pair(gaas, au, 0.9)
    geom = SphereGeometry(2e-6, 100e-9)
    pfa = force_pfa(pair, geom, T_ROOM).f_net
    direct = force_pfa_direct(pair, geom, T_ROOM)
    dev = direct / pfa - 1
    record(8, abs(dev) <= 0.02, f"direct/PFA - 1 = {dev:+.4f} (|.| <= 0.02)", "direct PFA")


# -- 9 ------------------------------------------------------------------------

def test_expansion_identities():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(1000):
        R = rng.uniform(0, 0.99) * np.exp(1j * rng.uniform(-math.pi, math.pi))
        x = math.exp(-2 * rng.uniform(0.05, 20.0))
        phase = rng.uniform(0, 50.0)
        s = np.arange(1, 6000)
        # Im(R^s)/Im(R) loses digits for nearly real R, the case the library guards
        if abs(R.imag) > 1e-3 * abs(R):
            series = np.sum((R**s).imag / R.imag * x**s)
            worst = max(worst, abs(series / (x / abs(1 - R * x) ** 2) - 1))
        z = R * np.exp(1j * phase)
        series = (1 + 2 * np.sum(z**s).real) / (1 - abs(R) ** 2)
        worst = max(worst, abs(series * abs(1 - z) ** 2 - 1))
    record(9, worst <= 1e-10, f"worst {worst:.1e} over 1000 draws", "expansion identities")


def test_passivity():
    rng = np.random.default_rng(4)
    n = 10_000
    eps = rng.uniform(-100, 100, n) + 1j * rng.uniform(0, 100, n)
    omega = rng.uniform(1e12, 1e17, n)
    k = rng.uniform(0, 1, n) * omega / C
    r_te, r_tm = fresnel(WaveGeometry.real(omega, k), eps)
    worst = float(max(np.max(np.abs(r_te)), np.max(np.abs(r_tm))))
    record(9, worst <= 1 + 1e-12, f"max |r| = {worst:.15f} over {n} draws", "passivity")


def test_pw_is_repulsive(gaas, au):
    rng = np.random.default_rng(100)
    values = []
    for d, rel in zip(rng.uniform(0.1e-6, 8e-6, 100), rng.uniform(0.5, 0.97, 100)):
        values.append(pressure_pw(biased_pair(gaas, au, rel), d, SWEEP))
    low = min(values)
    record(9, low >= 0, f"min over 100 draws {low:.3e} Pa", "PW repulsion")


def test_logarithmic_divergence(gaas, au):
    # (hbar w_g - eV)/k_B T well below one, where the divergence sets in
    delta = np.geomspace(3e-3, 0.3, 8)
    rels = 1 - delta * KB * T_ROOM / (HBAR * gaas.gap.omega)
    p = [pressure_pw_constant(biased_pair(gaas, au, r)) for r in rels]
    fit = stats.linregress(-np.log(delta), p)
    record(9, fit.rvalue**2 > 0.99, f"R^2 = {fit.rvalue**2:.5f} against -ln((hbar w_g - eV)/kT)",
           "log divergence")


def test_polylog_oracle():
    rng = np.random.default_rng(12)
    radius = np.concatenate([rng.uniform(0, 1, 150), 1 - 10.0 ** rng.uniform(-8, -1, 50)])
    angle = rng.uniform(-math.pi, math.pi, 200)
    worst = 0.0
    for s in (2, 3):
        for z in list(radius * np.exp(1j * angle)) + [1.0, -1.0, 0.5, 1j]:
            ref = complex(mpmath.polylog(s, mpmath.mpc(z)))
            worst = max(worst, abs(polylog(s, z) - ref) / max(abs(ref), 1e-300))
    record(9, worst <= 1e-9, f"worst rel. error {worst:.1e}", "polylog")


# -- 10 -----------------------------------------------------------------------

def test_determinism(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("""
mode = "plane-pressure"
temperature_k = 300.0
[materials]
plate1 = "gaas"
plate2 = "au"
[bias]
relative_bias = [0.9, 0.95]
[grid]
min_nm = 300
max_nm = 2000
count = 5
[tolerances]
rel = 1e-6
inner_rel = 1e-8
""")
    outputs = []
    for workers in (1, 2, 4):
        out = tmp_path / f"w{workers}.csv"
        assert main(["run", str(cfg), "-w", str(workers), "-o", str(out)]) == 0
        outputs.append(out.read_bytes())
    same = all(o == outputs[0] for o in outputs)
    rows = len(outputs[0].splitlines()) - 1
    record(10, same, f"{rows} rows identical for 1, 2 and 4 workers")
