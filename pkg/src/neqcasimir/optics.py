"""Perpendicular wave vectors, Fresnel coefficients and photon occupations."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .constants import C, E_CHARGE, HBAR, KB
from .materials import BandgapSpec, DielectricModel, static_permittivity

log = logging.getLogger(__name__)

#: warn when (gap - eV) drops below this many k_B T
SPONTANEOUS_EMISSION_MARGIN = 2.0


@dataclass(frozen=True)
class WaveGeometry:
    """A mode: frequency on the real (``omega``) or imaginary (``xi``) axis
    plus in-plane wavenumber ``k``. Fields may be numpy arrays."""

    frequency: float | np.ndarray
    k: float | np.ndarray
    axis: str = "real"

    def __post_init__(self):
        if self.axis not in ("real", "imag"):
            raise ValueError(f"axis must be 'real' or 'imag', got {self.axis!r}")
        if np.any(np.asarray(self.k) < 0):
            raise ValueError("in-plane wavenumber k must be >= 0")
        f = np.asarray(self.frequency)
        if self.axis == "real" and np.any(f <= 0):
            raise ValueError("real-axis omega must be > 0")
        if self.axis == "imag" and np.any(f < 0):
            raise ValueError("imaginary-axis xi must be >= 0")

    @classmethod
    def real(cls, omega, k):
        return cls(omega, k, "real")

    @classmethod
    def imag(cls, xi, k):
        return cls(xi, k, "imag")


def _kz_real(eps, omega, k2):
    """sqrt(eps w^2/c^2 - k^2) on the branch Im >= 0 (Re >= 0 when Im == 0)."""
    kz = np.sqrt(eps * (omega / C) ** 2 - k2 + 0j)
    flip = (kz.imag < 0) | ((kz.imag == 0) & (kz.real < 0))
    return np.where(flip, -kz, kz)


def perp_wavevector(geom: WaveGeometry, eps):
    """Wave vector component normal to the plates in a medium of permittivity ``eps``.

    Real axis: complex, outgoing/decaying branch. Imaginary axis: the real
    decay constant ``sqrt(eps xi^2/c^2 + k^2)``.
    """
    k2 = np.asarray(geom.k, dtype=float) ** 2
    if geom.axis == "real":
        return _kz_real(eps, geom.frequency, k2)
    return np.sqrt(np.real(eps) * (np.asarray(geom.frequency) / C) ** 2 + k2)


def _fresnel_from_kz(eps, kz, kz_m):
    den_te = kz + kz_m
    den_tm = eps * kz + kz_m
    if np.all(den_te != 0) and np.all(den_tm != 0):
        return (kz - kz_m) / den_te, (eps * kz - kz_m) / den_tm
    # 0/0 only at eps = 1 with grazing incidence (no interface) or at eps = 0,
    # where the limits are 0 and -1
    with np.errstate(invalid="ignore", divide="ignore"):
        r_te = np.where(den_te == 0, 0.0, (kz - kz_m) / den_te)
        r_tm = np.where(den_tm == 0, np.where(kz == 0, 0.0, -1.0), (eps * kz - kz_m) / den_tm)
    return r_te[()], r_tm[()]


def fresnel(geom: WaveGeometry, eps):
    """``(r_TE, r_TM)`` for vacuum against a half-space of permittivity ``eps``.

    An infinite ``eps`` (the perfect reflector) gives ``r_TE = -1``,
    ``r_TM = 1``. Imaginary-axis coefficients are returned as real arrays.
    """
    eps = np.asarray(eps)
    if geom.axis == "imag":
        eps = np.real(eps).astype(float)
    mirror = np.isinf(eps)
    if np.all(mirror):
        shape = np.broadcast(np.asarray(geom.frequency), np.asarray(geom.k), eps).shape
        dtype = complex if geom.axis == "real" else float
        return np.full(shape, -1.0, dtype)[()], np.full(shape, 1.0, dtype)[()]
    finite = np.where(mirror, 1.0, eps)
    kz = perp_wavevector(geom, 1.0)
    kz_m = perp_wavevector(geom, finite)
    r_te, r_tm = _fresnel_from_kz(finite, kz, kz_m)
    if np.any(mirror):
        r_te, r_tm = np.where(mirror, -1.0, r_te)[()], np.where(mirror, 1.0, r_tm)[()]
    return r_te, r_tm


def static_reflection(model: DielectricModel) -> tuple[float, float]:
    """Zero-frequency ``(r_TE, r_TM)``: Drude metals (0, 1), dielectrics
    ``(0, (eps0-1)/(eps0+1))``, the perfect reflector (-1, 1)."""
    if model.kind == "perfect":
        return -1.0, 1.0
    if model.is_metal:
        return 0.0, 1.0
    eps0 = static_permittivity(model)
    return 0.0, (eps0 - 1.0) / (eps0 + 1.0)


# ---------------------------------------------------------------------------
# Occupation numbers

@dataclass(frozen=True)
class BiasState:
    voltage: float          # V
    gap: BandgapSpec
    temperature: float      # K

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0 K, got {self.temperature}")
        if not self.voltage < self.gap.gap_energy:
            raise ValueError(
                f"eV={self.voltage} eV must stay below the gap {self.gap.gap_energy} eV "
                "(lasing threshold)")
        margin = self.gap.gap_energy - self.voltage
        kT_ev = KB * self.temperature / E_CHARGE
        if margin < SPONTANEOUS_EMISSION_MARGIN * kT_ev:
            log.warning("gap - eV = %.4g eV is below %.3g k_B T; the biased occupation "
                        "is outside the spontaneous-emission regime",
                        margin, SPONTANEOUS_EMISSION_MARGIN)

    @classmethod
    def from_relative(cls, relative_bias: float, gap: BandgapSpec, temperature: float):
        """Bias given as ``eV / (hbar omega_g)``."""
        return cls(relative_bias * gap.gap_energy, gap, temperature)

    @property
    def relative_bias(self) -> float:
        return self.voltage / self.gap.gap_energy

    @property
    def chemical_potential(self) -> float:
        """eV in joules."""
        return self.voltage * E_CHARGE


def bose(x):
    """``1/(exp(x) - 1)`` for ``x > 0``; ``exp(-x)`` beyond ``x = 50``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        out = np.where(x > 50.0, np.exp(-x), 1.0 / np.expm1(np.minimum(x, 50.0)))
    return out[()] if out.ndim == 0 else out


def _reduced_energy(omega, bias: BiasState, with_bias: bool):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("occupation requires omega > 0")
    mu = bias.chemical_potential if with_bias else 0.0
    above = omega > bias.gap.omega
    x = (HBAR * omega - np.where(above, mu, 0.0)) / (KB * bias.temperature)
    if np.any(x <= 0):
        raise ValueError("hbar*omega <= eV above the gap: occupation diverges")
    return x


def occupation(omega, bias: BiasState):
    """Photon occupation with chemical potential eV applied above the gap only."""
    return bose(_reduced_energy(omega, bias, True))


def delta_occupation(omega, bias: BiasState):
    """``n(omega, T, V) - n(omega, T, 0)``; exactly zero at and below the gap."""
    omega = np.asarray(omega, dtype=float)
    above = omega > bias.gap.omega
    diff = occupation(omega, bias) - bose(_reduced_energy(omega, bias, False))
    out = np.where(above, diff, 0.0)
    return out[()] if out.ndim == 0 else out


def effective_temperature(bias: BiasState) -> float:
    """Temperature at which the unbiased occupation at the gap matches the biased one."""
    ratio = bias.voltage / bias.gap.gap_energy
    if ratio >= 1:
        raise ValueError("eV >= gap energy")
    return bias.temperature / (1.0 - ratio)
