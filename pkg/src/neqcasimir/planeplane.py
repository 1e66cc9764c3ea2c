"""Pressure between two parallel half-spaces, plate 1 biased.

Sign convention: negative pressure is attraction. The nonequilibrium
contributions act on plate 2.

Equilibrium terms use the Matsubara sum on the imaginary axis. The
nonequilibrium terms are real-frequency double integrals over
``omega in [omega_g, omega_g + omega_span k_B T / hbar]`` and over the
normal wavenumber in the vacuum gap: ``t = k_perp`` in ``[0, omega/c]`` for
propagating waves and ``q = Im k_perp`` in ``[0, inf)`` for evanescent
waves. Both substitutions follow from ``k dk = -k_perp dk_perp``.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .constants import C, HBAR, KB, thermal_omega
from .materials import DielectricModel, epsilon_imag_axis, epsilon_real_axis
from .numerics import (IntegrationError, QuadratureResult, Tolerance, find_sign_change,
                       integrate_adaptive, integrate_semiinfinite, polylog)
from .optics import (BiasState, WaveGeometry, _fresnel_from_kz, bose, delta_occupation,
                     fresnel, static_reflection)

log = logging.getLogger(__name__)

ZETA3 = float(special.zeta(3))


@dataclass(frozen=True)
class Accuracy:
    """Numerical settings shared by the pressure engines.

    ``rel`` applies to outer integrals (over omega, over xi at T = 0) and to
    each Matsubara term, ``inner_rel`` to the wavenumber integrals.
    """

    rel: float = 1e-7
    inner_rel: float = 1e-9
    matsubara_rel: float = 1e-10
    matsubara_min_terms: int = 10
    matsubara_max_terms: int = 200_000
    omega_span: float = 40.0  # multiples of k_B T / hbar above the gap

    @property
    def outer(self) -> Tolerance:
        return Tolerance(self.rel)

    @property
    def inner(self) -> Tolerance:
        return Tolerance(self.inner_rel)


DEFAULT_ACCURACY = Accuracy()


@dataclass(frozen=True)
class PlateSpec:
    material: DielectricModel
    bias: BiasState | None = None

    @classmethod
    def biased(cls, material: DielectricModel, relative_bias: float, temperature: float):
        """Plate with bias ``eV = relative_bias * hbar omega_g`` from the material's gap."""
        if material.gap is None:
            raise ValueError(f"material {material.name!r} has no band gap")
        return cls(material, BiasState.from_relative(relative_bias, material.gap, temperature))


@dataclass(frozen=True)
class PlatePair:
    plate1: PlateSpec  # emitter
    plate2: PlateSpec  # passive

    def __post_init__(self):
        if self.plate2.bias is not None:
            raise ValueError("only plate 1 may carry a bias")

    @property
    def bias(self) -> BiasState | None:
        return self.plate1.bias

    @property
    def is_biased(self) -> bool:
        return self.plate1.bias is not None


@dataclass(frozen=True)
class PressureBreakdown:
    separation: float
    p_eq: float
    dp_pw: float
    dp_ew: float
    p_net: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p_net", self.p_eq + self.dp_pw + self.dp_ew)


def _check_separation(d):
    if not d > 0:
        raise ValueError(f"separation must be > 0, got {d}")


def _require_bias(pair: PlatePair) -> BiasState:
    if pair.bias is None:
        raise ValueError("plate 1 must be biased for nonequilibrium contributions")
    return pair.bias


# ---------------------------------------------------------------------------
# Equilibrium: Matsubara sum

def _imag_axis_reflections(eps, xi, kappa):
    """``(r_TE, r_TM)`` at imaginary frequency in terms of the vacuum decay constant."""
    if np.isinf(eps):
        return -np.ones_like(kappa), np.ones_like(kappa)
    kappa_m = np.sqrt(kappa * kappa + (eps - 1.0) * (xi / C) ** 2)
    return _fresnel_from_kz(eps, kappa, kappa_m)


def _lifshitz_kernel(kind: str, products, d: float):
    """Integrand over kappa for products ``R_p(kappa)`` of reflection coefficients."""
    def g(kappa):
        x_decay = np.exp(-2.0 * kappa * d)
        total = 0.0
        for R in products(kappa):
            x = R * x_decay
            if kind == "pressure":
                total = total + x / (1.0 - x)
            else:
                total = total + np.log1p(-x)
        return (kappa * kappa if kind == "pressure" else kappa) * total
    return g


def _static_products(pair: PlatePair):
    te1, tm1 = static_reflection(pair.plate1.material)
    te2, tm2 = static_reflection(pair.plate2.material)
    return te1 * te2, tm1 * tm2


def _matsubara_term(pair: PlatePair, xi: float, eps1: float, eps2: float, d: float,
                    kind: str, tol: Tolerance) -> float:
    """kappa-integral for one imaginary frequency (``xi = 0`` uses static coefficients)."""
    if xi == 0.0:
        rte, rtm = _static_products(pair)

        def products(kappa):
            return [np.full_like(kappa, r) for r in (rte, rtm) if r != 0.0]
    else:
        def products(kappa):
            te1, tm1 = _imag_axis_reflections(eps1, xi, kappa)
            te2, tm2 = _imag_axis_reflections(eps2, xi, kappa)
            return [te1 * te2, tm1 * tm2]

    g = _lifshitz_kernel(kind, products, d)
    try:
        return integrate_semiinfinite(g, xi / C, 1.0 / (2.0 * d), tol).value
    except IntegrationError as exc:
        raise IntegrationError(f"Matsubara term at xi={xi:.6g} rad/s, d={d:.6g} m: {exc}",
                               exc.result) from exc


@functools.lru_cache(maxsize=4096)
def _matsubara_eps(model: DielectricModel, temperature: float, start: int, count: int):
    """``eps(i xi_n)`` for ``n`` in ``[start, start + count)``, cached per material and T."""
    n = np.arange(start, start + count, dtype=float)
    xi = 2.0 * math.pi * n * thermal_omega(temperature)
    return tuple(np.atleast_1d(epsilon_imag_axis(model, xi)).tolist())


_CHUNK = 64


def _matsubara_sum(pair: PlatePair, d: float, T: float, kind: str, acc: Accuracy) -> float:
    """``sum'_n term_n`` with the n = 0 term halved and a geometric tail estimate."""
    tol = acc.outer
    m1, m2 = pair.plate1.material, pair.plate2.material
    total = 0.5 * _matsubara_term(pair, 0.0, math.inf, math.inf, d, kind, tol)
    w1 = 2.0 * math.pi * thermal_omega(T)
    previous = None
    n = 1
    while n <= acc.matsubara_max_terms:
        start = (n // _CHUNK) * _CHUNK
        e1 = _matsubara_eps(m1, T, start, _CHUNK)
        e2 = _matsubara_eps(m2, T, start, _CHUNK)
        for j in range(n - start, min(_CHUNK, acc.matsubara_max_terms + 1 - start)):
            term = _matsubara_term(pair, n * w1, e1[j], e2[j], d, kind, tol)
            total += term
            if n >= acc.matsubara_min_terms and abs(term) <= acc.matsubara_rel * abs(total):
                if previous:
                    ratio = term / previous
                    if 0.0 < ratio < 1.0:
                        total += term * ratio / (1.0 - ratio)
                return total
            previous = term
            n += 1
    raise IntegrationError(
        f"Matsubara sum not converged after {acc.matsubara_max_terms} terms at d={d:.6g} m",
        QuadratureResult(total, math.nan, 0))


def _zero_temperature_integral(pair: PlatePair, d: float, kind: str, acc: Accuracy) -> float:
    """``int_0^inf dxi term(xi)``, the T -> 0 limit of the Matsubara sum."""
    m1, m2 = pair.plate1.material, pair.plate2.material
    tol = acc.outer

    def f(xi):
        e1 = np.atleast_1d(epsilon_imag_axis(m1, xi))
        e2 = np.atleast_1d(epsilon_imag_axis(m2, xi))
        return np.array([_matsubara_term(pair, x, a, b, d, kind, acc.inner)
                         for x, a, b in zip(xi, e1, e2)])

    return integrate_semiinfinite(f, 0.0, C / (2.0 * d), tol).value


def pressure_equilibrium(pair: PlatePair, d: float, T: float,
                         accuracy: Accuracy | None = None) -> float:
    """Equilibrium Lifshitz pressure in Pa.

    ``T = 0`` replaces the Matsubara sum by its frequency integral.
    """
    _check_separation(d)
    acc = accuracy or DEFAULT_ACCURACY
    if T < 0:
        raise ValueError(f"temperature must be >= 0, got {T}")
    if T == 0:
        return -HBAR / (2.0 * math.pi**2) * _zero_temperature_integral(pair, d, "pressure", acc)
    return -KB * T / math.pi * _matsubara_sum(pair, d, T, "pressure", acc)


def free_energy_area(pair: PlatePair, d: float, T: float,
                     accuracy: Accuracy | None = None) -> float:
    """Equilibrium free energy per unit area in J/m^2 (its negative d-derivative is
    :func:`pressure_equilibrium`)."""
    _check_separation(d)
    acc = accuracy or DEFAULT_ACCURACY
    if T < 0:
        raise ValueError(f"temperature must be >= 0, got {T}")
    if T == 0:
        return HBAR / (4.0 * math.pi**2) * _zero_temperature_integral(pair, d, "free", acc)
    return KB * T / (2.0 * math.pi) * _matsubara_sum(pair, d, T, "free", acc)


def pressure_eq_large_d(pair: PlatePair, d: float, T: float) -> float:
    """Zero-frequency Matsubara term alone, ``-k_B T Li_3(r1 r2) / (8 pi d^3)`` summed
    over polarizations (only TM survives unless both plates are perfect reflectors)."""
    _check_separation(d)
    total = sum(polylog(3, R).real for R in _static_products(pair) if R != 0.0)
    return -KB * T / (8.0 * math.pi * d**3) * total


# ---------------------------------------------------------------------------
# Nonequilibrium: real-frequency integrals

def _real_axis_reflections(eps, omega, kz):
    """``(r_TE, r_TM)`` for vacuum normal wavenumber ``kz`` (real or ``i q``)."""
    if np.isinf(eps):
        ones = np.ones(np.shape(kz), dtype=complex)
        return -ones, ones
    arg = (eps - 1.0) * (omega / C) ** 2 + kz * kz
    kz_m = np.sqrt(arg + 0j)
    flip = (kz_m.imag < 0) | ((kz_m.imag == 0) & (kz_m.real < 0))
    kz_m = np.where(flip, -kz_m, kz_m)
    return _fresnel_from_kz(eps, kz, kz_m)


def _omega_integral(pair: PlatePair, inner, d: float | None, acc: Accuracy,
                    relative_to: str = "value") -> float:
    """``int dw Delta n(w) inner(w, eps1, eps2)`` over the biased band."""
    bias = _require_bias(pair)
    if bias.voltage == 0:
        return 0.0
    wg = bias.gap.omega
    wT = thermal_omega(bias.temperature)
    hi = wg + acc.omega_span * wT
    pts = list(wg + wT * np.array([0.25, 1.0, 3.0, 8.0, 16.0]))
    if d is not None:
        # phase 2 w d / c advances by pi between these points
        step = math.pi * C / (2.0 * d)
        if (hi - wg) / step < 2000:
            pts.extend(np.arange(wg + step, hi, step))
    m1, m2 = pair.plate1.material, pair.plate2.material

    def f(w):
        dn = delta_occupation(w, bias)
        e1 = np.atleast_1d(epsilon_real_axis(m1, w))
        e2 = np.atleast_1d(epsilon_real_axis(m2, w))
        vals = np.array([inner(wi, a, b) for wi, a, b in zip(w, e1, e2)])
        return dn * vals

    return integrate_adaptive(f, wg, hi, acc.outer, pts, relative_to).value


def _resonance_points(k0: float, d: float | None):
    """``k_perp d = m pi / 2`` inside ``(0, k0)``, thinned if there are very many."""
    if d is None:
        return None
    step = math.pi / (2.0 * d)
    count = int(k0 / step)
    if count > 4000:
        step *= math.ceil(count / 4000)
    return np.arange(step, k0, step)


def _pw_inner(kind: str, d: float | None, acc: Accuracy):
    """Normal-wavenumber integral for propagating waves at one frequency.

    ``kind``: ``full`` (multiple-reflection kernel), ``const`` (ray-optical
    average), ``osc`` (``full - const``), ``phi`` (antiderivative kernel).
    """
    def inner(omega, eps1, eps2):
        k0 = omega / C

        def g(t):
            r1te, r1tm = _real_axis_reflections(eps1, omega, t)
            r2te, r2tm = _real_axis_reflections(eps2, omega, t)
            total = np.zeros_like(t)
            phase = None if d is None else np.exp(2j * t * d)
            for r1, r2 in ((r1te, r2te), (r1tm, r2tm)):
                a1 = np.abs(r1) ** 2
                a2 = np.abs(r2) ** 2
                R = r1 * r2
                if kind == "full":
                    total += (1.0 - a1) * (1.0 + a2) / np.abs(1.0 - R * phase) ** 2
                    continue
                fp = (1.0 - a1) * (1.0 + a2) / (1.0 - a1 * a2)
                if kind == "const":
                    total += fp
                elif kind == "osc":
                    X = R * phase
                    total += 2.0 * fp * (X / (1.0 - X)).real
                else:
                    total += fp * np.angle(1.0 - R * phase)
            return (t if kind == "phi" else t * t) * total

        rel = "value" if kind in ("full", "const") else "magnitude"
        return integrate_adaptive(g, 0.0, k0, acc.inner, _resonance_points(k0, d), rel).value
    return inner


def _ew_inner(kind: str, d: float, acc: Accuracy):
    """Evanescent integral over ``q = Im k_perp`` at one frequency."""
    def inner(omega, eps1, eps2):
        k0 = omega / C
        pts = []
        for eps in (eps1, eps2):
            # surface-polariton pole of r_TM
            if np.isfinite(eps) and eps.real < -1.0:
                pts.append(k0 / math.sqrt(-eps.real - 1.0))

        def g(q):
            kz = 1j * q
            r1te, r1tm = _real_axis_reflections(eps1, omega, kz)
            r2te, r2tm = _real_axis_reflections(eps2, omega, kz)
            x = np.exp(-2.0 * q * d)
            total = np.zeros_like(q)
            for r1, r2 in ((r1te, r2te), (r1tm, r2tm)):
                R = r1 * r2
                w = r1.imag * r2.real
                if kind == "full":
                    total += w / np.abs(1.0 - R * x) ** 2
                    continue
                # Im r1 Re r2 / Im R * Im ln(1 - R x), with the Im R -> 0 limit
                small = np.abs(R.imag) < 1e-12 * np.maximum(np.abs(R), 1e-300)
                safe_im = np.where(small, 1.0, R.imag)
                ratio_form = w / safe_im * np.angle(1.0 - R * x)
                limit = -w * x / (1.0 - R.real * x)
                total += np.where(small, limit, ratio_form)
            if kind == "full":
                return q * q * x * total
            return q * total

        return integrate_semiinfinite(g, 0.0, 1.0 / (2.0 * d), acc.inner, pts or None,
                                      relative_to="magnitude").value
    return inner


def pressure_pw(pair: PlatePair, d: float, accuracy: Accuracy | None = None) -> float:
    """Propagating-wave nonequilibrium pressure on plate 2 (Pa, repulsive)."""
    _check_separation(d)
    acc = accuracy or DEFAULT_ACCURACY
    val = _omega_integral(pair, _pw_inner("full", d, acc), d, acc)
    return HBAR / (4.0 * math.pi**2) * val


def pressure_ew(pair: PlatePair, d: float, accuracy: Accuracy | None = None) -> float:
    """Evanescent-wave nonequilibrium pressure on plate 2 (Pa, either sign)."""
    _check_separation(d)
    acc = accuracy or DEFAULT_ACCURACY
    val = _omega_integral(pair, _ew_inner("full", d, acc), d, acc, "magnitude")
    return -HBAR / math.pi**2 * val


def pressure_pw_constant(pair: PlatePair, accuracy: Accuracy | None = None) -> float:
    """Separation-independent part of the propagating-wave pressure (Pa)."""
    acc = accuracy or DEFAULT_ACCURACY
    val = _omega_integral(pair, _pw_inner("const", None, acc), None, acc)
    return HBAR / (4.0 * math.pi**2) * val


def pressure_pw_oscillatory(pair: PlatePair, d: float,
                            accuracy: Accuracy | None = None) -> float:
    """``pressure_pw - pressure_pw_constant`` computed directly from its own kernel."""
    _check_separation(d)
    acc = accuracy or DEFAULT_ACCURACY
    val = _omega_integral(pair, _pw_inner("osc", d, acc), d, acc, "magnitude")
    return HBAR / (4.0 * math.pi**2) * val


def phi_pw(pair: PlatePair, d: float, accuracy: Accuracy | None = None) -> float:
    """Negative antiderivative in ``d`` of :func:`pressure_pw_oscillatory` (J/m^2)."""
    _check_separation(d)
    acc = accuracy or DEFAULT_ACCURACY
    val = _omega_integral(pair, _pw_inner("phi", d, acc), d, acc, "magnitude")
    return HBAR / (4.0 * math.pi**2) * val


def phi_ew(pair: PlatePair, d: float, accuracy: Accuracy | None = None) -> float:
    """Negative antiderivative in ``d`` of :func:`pressure_ew` (J/m^2)."""
    _check_separation(d)
    acc = accuracy or DEFAULT_ACCURACY
    val = _omega_integral(pair, _ew_inner("phi", d, acc), d, acc, "magnitude")
    return HBAR / (2.0 * math.pi**2) * val


def _ideal_constant(occupation, lo: float, hi: float, tol: Tolerance) -> float:
    """``hbar/(3 pi^2 c^3) int_lo^hi w^3 occupation(w) dw``."""
    res = integrate_adaptive(lambda w: w**3 * occupation(w), lo, hi, tol,
                             np.linspace(lo, hi, 9)[1:-1])
    return HBAR / (3.0 * math.pi**2 * C**3) * res.value


def pressure_pw_constant_ideal(gap, T: float, V: float,
                               accuracy: Accuracy | None = None) -> float:
    """Constant propagating-wave pressure for a black emitter facing a perfect mirror.

    ``gap`` is a :class:`~neqcasimir.materials.BandgapSpec`.
    """
    acc = accuracy or DEFAULT_ACCURACY
    bias = BiasState(V, gap, T)
    if V == 0:
        return 0.0
    wg = gap.omega
    hi = wg + acc.omega_span * thermal_omega(T)
    return _ideal_constant(lambda w: delta_occupation(w, bias), wg, hi,
                           Tolerance(min(acc.rel, 1e-10)))


def _delta_occupation_at_gap(bias: BiasState) -> float:
    """``Delta n`` approached from above the gap."""
    kT = KB * bias.temperature
    e_g = HBAR * bias.gap.omega
    return float(bose((e_g - bias.chemical_potential) / kT) - bose(e_g / kT))


def pressure_pw_oscillatory_asymptotic(pair: PlatePair, d: float) -> float:
    """Large-separation form of the oscillatory propagating-wave pressure (Pa).

    Uses normal-incidence reflection at the gap frequency. Valid for ``d``
    well beyond both ``hbar c / k_B T`` and ``pi c / omega_g``.
    """
    _check_separation(d)
    bias = _require_bias(pair)
    wg = bias.gap.omega
    R, f = _gap_reflection(pair, wg)
    return (HBAR * wg**2 / (4.0 * C * math.pi**2 * d**2) * _delta_occupation_at_gap(bias)
            * f * polylog(2, R * np.exp(2j * wg * d / C)).real)


def pressure_pw_oscillatory_envelope(pair: PlatePair, d: float) -> float:
    """Envelope of :func:`pressure_pw_oscillatory_asymptotic`: the same prefactor
    times ``Li_2(|r1 r2|)``."""
    _check_separation(d)
    bias = _require_bias(pair)
    wg = bias.gap.omega
    R, f = _gap_reflection(pair, wg)
    return (HBAR * wg**2 / (4.0 * C * math.pi**2 * d**2) * _delta_occupation_at_gap(bias)
            * f * polylog(2, abs(R)).real)


def _gap_reflection(pair: PlatePair, omega: float):
    geom = WaveGeometry.real(omega, 0.0)
    r1 = complex(fresnel(geom, epsilon_real_axis(pair.plate1.material, omega))[0])
    r2 = complex(fresnel(geom, epsilon_real_axis(pair.plate2.material, omega))[0])
    a1, a2 = abs(r1) ** 2, abs(r2) ** 2
    return r1 * r2, (1.0 - a1) * (1.0 + a2) / (1.0 - a1 * a2)


def pressure_ew_asymptotic(pair: PlatePair, d: float, accuracy: Accuracy | None = None) -> float:
    """Leading large-separation evanescent pressure, set by plate 1 alone (Pa)."""
    _check_separation(d)
    acc = accuracy or DEFAULT_ACCURACY
    bias = _require_bias(pair)
    if bias.voltage == 0:
        return 0.0
    m1 = pair.plate1.material
    wg = bias.gap.omega
    hi = wg + acc.omega_span * thermal_omega(bias.temperature)

    def f(w):
        eps = np.asarray(epsilon_real_axis(m1, w), dtype=complex)
        if np.any(eps == 1.0):
            raise ValueError("pressure_ew_asymptotic is singular for eps = 1 (vacuum plate 1)")
        root = np.sqrt(eps - 1.0)
        gamma = (1.0 / root).real + (eps / root).real
        return delta_occupation(w, bias) / w * gamma

    val = integrate_adaptive(f, wg, hi, acc.outer, wg + thermal_omega(bias.temperature)
                             * np.array([1.0, 3.0, 8.0])).value
    return 3.0 * ZETA3 * HBAR * C / (4.0 * math.pi**2 * d**4) * val


def pressure_net(pair: PlatePair, d: float, T: float,
                 accuracy: Accuracy | None = None) -> PressureBreakdown:
    """Equilibrium plus both nonequilibrium parts; zero bias terms for an unbiased pair."""
    _check_separation(d)
    if pair.bias is not None and pair.bias.temperature != T:
        log.warning("equilibrium temperature %g K differs from the bias temperature %g K",
                    T, pair.bias.temperature)
    p_eq = pressure_equilibrium(pair, d, T, accuracy)
    if pair.bias is None:
        return PressureBreakdown(d, p_eq, 0.0, 0.0)
    return PressureBreakdown(d, p_eq, pressure_pw(pair, d, accuracy),
                             pressure_ew(pair, d, accuracy))


def find_transition_separation(pair: PlatePair, T: float, lo: float, hi: float,
                               xtol: float = 1e-10, accuracy: Accuracy | None = None) -> float:
    """Separation in ``[lo, hi]`` where the net pressure changes sign."""
    return find_sign_change(lambda d: pressure_net(pair, d, T, accuracy).p_net, lo, hi, xtol)
