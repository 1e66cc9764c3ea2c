"""Sphere facing the biased plate in the proximity-force approximation."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .numerics import Tolerance, integrate_adaptive
from .planeplane import (Accuracy, PlatePair, free_energy_area, phi_ew, phi_pw,
                         pressure_equilibrium, pressure_ew, pressure_pw, pressure_pw_constant)

log = logging.getLogger(__name__)

#: separation/radius above which the PFA is flagged as poor
PFA_WARN_RATIO = 0.01


@dataclass(frozen=True)
class SphereGeometry:
    radius: float      # m
    separation: float  # m, closest approach

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if not self.separation > 0:
            raise ValueError(f"separation must be > 0, got {self.separation}")
        if self.separation / self.radius > PFA_WARN_RATIO:
            log.warning("d/R = %.3g exceeds %.3g; PFA corrections may be significant",
                        self.separation / self.radius, PFA_WARN_RATIO)

    @property
    def pfa_ok(self) -> bool:
        return self.separation / self.radius <= PFA_WARN_RATIO


@dataclass(frozen=True)
class ForceBreakdown:
    f_eq: float
    df_pw_const: float
    df_pw_osc: float
    df_ew: float
    f_net: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "f_net",
                           self.f_eq + self.df_pw_const + self.df_pw_osc + self.df_ew)


def local_distance(r, geom: SphereGeometry):
    """Gap ``H(r) = d + R - sqrt(R^2 - r^2)`` at distance ``r`` from the axis."""
    r = np.asarray(r, dtype=float)
    R = geom.radius
    if np.any(r < 0) or np.any(r > R):
        raise ValueError(f"r must lie in [0, R={R}]")
    # R - sqrt(R^2 - r^2) rewritten without cancellation
    out = geom.separation + r * r / (R + np.sqrt(R * R - r * r))
    return out[()] if out.ndim == 0 else out


def force_pfa(pair: PlatePair, geom: SphereGeometry, T: float,
              accuracy: Accuracy | None = None,
              pw_constant: float | None = None) -> ForceBreakdown:
    """PFA force on the sphere (N), positive is repulsive.

    ``pw_constant`` lets a sweep reuse a precomputed
    :func:`~neqcasimir.planeplane.pressure_pw_constant`.
    """
    R, d = geom.radius, geom.separation
    f_eq = 2.0 * math.pi * R * free_energy_area(pair, d, T, accuracy)
    if pair.bias is None:
        return ForceBreakdown(f_eq, 0.0, 0.0, 0.0)
    if pw_constant is None:
        pw_constant = pressure_pw_constant(pair, accuracy)
    return ForceBreakdown(
        f_eq,
        math.pi * R * R * pw_constant,
        2.0 * math.pi * R * phi_pw(pair, d, accuracy),
        2.0 * math.pi * R * phi_ew(pair, d, accuracy),
    )


def force_pfa_direct(pair: PlatePair, geom: SphereGeometry, T: float,
                     accuracy: Accuracy | None = None, rel: float = 1e-5,
                     time_budget: float = 600.0) -> float:
    """Derjaguin average of the net plate pressure over the exact sphere profile (N).

    With ``r dr = (R + d - H) dH`` the force is
    ``2 pi int_d^{d+R} (R + d - H) P_net(H) dH``. Intended as a check on
    :func:`force_pfa` for small spheres; the cost grows with ``R``.
    """
    R, d = geom.radius, geom.separation
    start = time.monotonic()

    def p_net(H):
        total = pressure_equilibrium(pair, H, T, accuracy)
        if pair.bias is not None:
            total += pressure_pw(pair, H, accuracy) + pressure_ew(pair, H, accuracy)
        return total

    def f(H):
        return (R + d - H) * np.array([p_net(h) for h in H])

    pts = d * 2.0 ** np.arange(1, 60)
    pts = pts[pts < d + R]
    res = integrate_adaptive(f, d, d + R, Tolerance(rel), pts, "magnitude")
    elapsed = time.monotonic() - start
    if elapsed > time_budget:
        log.warning("force_pfa_direct took %.0f s (budget %.0f s)", elapsed, time_budget)
    return 2.0 * math.pi * res.value
