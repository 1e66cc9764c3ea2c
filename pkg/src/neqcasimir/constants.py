"""CODATA 2018 exact constants (SI) and unit helpers."""

from scipy import constants as _sc

C = _sc.c                 # 299792458 m/s
HBAR = _sc.hbar           # 1.054571817e-34 J s
KB = _sc.k                # 1.380649e-23 J/K
E_CHARGE = _sc.e          # 1.602176634e-19 C

EV_TO_RAD_S = E_CHARGE / HBAR


def ev_to_omega(energy_ev):
    """Photon energy in eV to angular frequency in rad/s."""
    return energy_ev * EV_TO_RAD_S


def omega_to_ev(omega):
    return omega / EV_TO_RAD_S


def thermal_omega(temperature):
    """k_B T / hbar in rad/s."""
    return KB * temperature / HBAR
