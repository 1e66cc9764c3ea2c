"""Quadrature, polylogarithm and root-bracketing helpers.

Every integrand passed to :func:`integrate_adaptive` and
:func:`integrate_semiinfinite` must be vectorized: it receives a 1-d
``numpy`` array of abscissae and returns an array of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special

__all__ = [
    "Tolerance",
    "QuadratureResult",
    "IntegrationError",
    "NonDecayingIntegrandError",
    "BracketError",
    "integrate_adaptive",
    "integrate_semiinfinite",
    "polylog",
    "find_sign_change",
]

# Gauss-Kronrod 7/15 abscissae (positive half, Kronrod ordering) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])            # 15 nodes, ascending
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 13, 11, 9]] = np.concatenate([_WG[:3], _WG[:3]])
_GWEIGHTS[7] = _WG[3]
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    """Convergence target for the adaptive integrators.

    ``rel`` is relative to the running estimate, ``abs`` is in integrand
    units times abscissa units, ``max_depth`` bounds panel bisection.
    """

    rel: float = 1e-8
    abs: float = 0.0
    max_depth: int = 50

    def __post_init__(self):
        if not self.rel > 0:
            raise ValueError(f"Tolerance.rel must be > 0, got {self.rel}")
        if not self.abs >= 0:
            raise ValueError(f"Tolerance.abs must be >= 0, got {self.abs}")
        if self.max_depth < 1:
            raise ValueError(f"Tolerance.max_depth must be >= 1, got {self.max_depth}")

    def scaled(self, factor: float) -> "Tolerance":
        """Same tolerance with ``rel`` and ``abs`` multiplied by ``factor``."""
        return Tolerance(self.rel * factor, self.abs * factor, self.max_depth)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    magnitude: float = math.nan  # estimate of int |f|

    def __float__(self) -> float:
        return float(self.value)


class IntegrationError(RuntimeError):
    """Raised when the error target cannot be met; carries the best estimate."""

    def __init__(self, message: str, result: QuadratureResult):
        super().__init__(f"{message} (best estimate {result.value:.6e} "
                         f"+/- {result.abs_error_estimate:.3e})")
        self.result = result


class NonDecayingIntegrandError(IntegrationError):
    pass


class BracketError(ValueError):
    pass


def _gk15(f, lo: np.ndarray, hi: np.ndarray):
    """Kronrod estimate and QUADPACK-style error for a batch of panels."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise FloatingPointError(f"integrand is not finite at x={bad!r}")
    kron = half * (y @ _KWEIGHTS)
    gauss = half * (y @ _GWEIGHTS)
    mean = kron / np.where(half != 0, 2.0 * half, 1.0)
    resabs = np.abs(half) * (np.abs(y) @ _KWEIGHTS)
    resasc = np.abs(half) * (np.abs(y - mean[:, None]) @ _KWEIGHTS)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(resasc > 0, np.minimum(1.0, (200.0 * err / resasc) ** 1.5), 1.0)
    err = np.where(resasc > 0, resasc * scale, err)
    err = np.maximum(err, 50.0 * _EPS * resabs)
    return kron, err, resabs


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: Tolerance | None = None,
    points: Sequence[float] | None = None,
    relative_to: str = "value",
) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod 7/15 quadrature of ``f`` over ``[a, b]``.

    All panels flagged for refinement in one sweep are bisected and
    evaluated together, so ``f`` sees a few large batches instead of many
    15-point calls. ``points`` are extra initial breakpoints (resonances,
    kinks); those outside ``(a, b)`` are ignored.

    With ``relative_to="magnitude"`` the relative target is taken against
    ``int |f|`` instead of ``|int f|``. Use it for sign-changing integrands
    whose total may nearly cancel.

    Raises
    ------
    IntegrationError
        When a panel needing refinement is already at ``tol.max_depth``.
        The exception carries the best available estimate.
    """
    tol = tol or Tolerance()
    a = float(a)
    b = float(b)
    if not a < b:
        raise ValueError(f"integrate_adaptive requires a < b, got [{a}, {b}]")
    if relative_to not in ("value", "magnitude"):
        raise ValueError(f"relative_to must be 'value' or 'magnitude', got {relative_to!r}")
    edges = [a, b]
    if points is not None:
        inner = np.asarray(points, dtype=float).ravel()
        edges = np.unique(np.concatenate([[a, b], inner[(inner > a) & (inner < b)]]))
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    depth = np.zeros(lo.size, dtype=int)
    vals, errs, mags = _gk15(f, lo, hi)
    nevals = 15 * lo.size

    while True:
        total = float(vals.sum())
        err_total = float(errs.sum())
        magnitude = float(mags.sum())
        scale = abs(total) if relative_to == "value" else magnitude
        target = max(tol.abs, tol.rel * scale)
        if err_total <= target:
            return QuadratureResult(total, err_total, nevals, magnitude)
        order = np.argsort(errs)[::-1]
        # split the worst panels until the untouched ones hold at most half the target
        cum = err_total - np.cumsum(errs[order])
        nsplit = int(np.searchsorted(-cum, -0.5 * target)) + 1
        split = order[:max(nsplit, 1)]
        if np.any(depth[split] >= tol.max_depth):
            raise IntegrationError(
                f"max_depth={tol.max_depth} reached on [{a:.6g}, {b:.6g}]",
                QuadratureResult(total, err_total, nevals, magnitude),
            )
        keep = np.ones(lo.size, dtype=bool)
        keep[split] = False
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_depth = np.concatenate([depth[split], depth[split]]) + 1
        new_vals, new_errs, new_mags = _gk15(f, new_lo, new_hi)
        nevals += 15 * new_lo.size
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        depth = np.concatenate([depth[keep], new_depth])
        vals = np.concatenate([vals[keep], new_vals])
        errs = np.concatenate([errs[keep], new_errs])
        mags = np.concatenate([mags[keep], new_mags])


def integrate_semiinfinite(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    decay_scale: float,
    tol: Tolerance | None = None,
    points: Sequence[float] | None = None,
    n_scales: float = 40.0,
    method: str = "truncate",
    relative_to: str = "value",
) -> QuadratureResult:
    """Integrate an exponentially decaying ``f`` over ``[a, inf)``.

    ``method="truncate"`` integrates ``[a, a + n_scales*decay_scale]`` and
    then adds successive tail windows of the same length until a window is
    below the tolerance; a tail window that does not shrink relative to the
    previous one signals a non-decaying integrand.
    ``method="map"`` uses ``x = a + s*t/(1-t)`` on ``t in [0, 1)``.
    ``relative_to`` is passed on to :func:`integrate_adaptive`.
    """
    tol = tol or Tolerance()
    if not decay_scale > 0:
        raise ValueError(f"decay_scale must be > 0, got {decay_scale}")
    if method == "map":
        s = float(decay_scale)

        def g(t):
            one_minus = 1.0 - t
            return f(a + s * t / one_minus) * s / one_minus**2

        mapped_points = None
        if points is not None:
            p = np.asarray(points, dtype=float)
            p = p[p > a]
            mapped_points = (p - a) / (p - a + s)
        return integrate_adaptive(g, 0.0, 1.0, tol, mapped_points, relative_to)
    if method != "truncate":
        raise ValueError(f"unknown method {method!r}")

    width = n_scales * decay_scale
    end = a + width
    res = integrate_adaptive(f, a, end, tol, points, relative_to)
    value, err, nevals = res.value, res.abs_error_estimate, res.evaluations
    magnitude = res.magnitude
    ref = abs(value) if relative_to == "value" else magnitude
    # tail windows only need a few digits; their size is what is tested
    tail_tol = Tolerance(1e-4, max(tol.abs, 1e-2 * tol.rel * ref), tol.max_depth)
    previous = None
    for _ in range(8):
        tail = integrate_adaptive(f, end, end + width, tail_tol, points, relative_to)
        value += tail.value
        err += tail.abs_error_estimate
        nevals += tail.evaluations
        magnitude += tail.magnitude
        end += width
        if abs(tail.value) <= max(tol.abs, tol.rel * ref):
            return QuadratureResult(value, err + abs(tail.value), nevals, magnitude)
        if previous is not None and abs(tail.value) >= abs(previous):
            raise NonDecayingIntegrandError(
                "tail windows are not shrinking", QuadratureResult(value, err, nevals, magnitude))
        previous = tail.value
    raise NonDecayingIntegrandError(
        f"tail still above tolerance at x={end:.6g}", QuadratureResult(value, err, nevals, magnitude))


def _polylog_series(s: int, z: complex, nterms: int) -> complex:
    k = np.arange(1, nterms + 1, dtype=float)
    return complex(np.sum(z ** k / k**s))


def _polylog_log_series(s: int, z: complex) -> complex:
    # Li_s(e^mu) = sum_{k != s-1} zeta(s-k) mu^k / k!
    #              + mu^(s-1)/(s-1)! * (H_{s-1} - log(-mu)),  |mu| < 2 pi
    mu = complex(np.log(z))
    harmonic = sum(1.0 / j for j in range(1, s))
    total = mu ** (s - 1) / math.factorial(s - 1) * (harmonic - np.log(-mu))
    term_pow = 1.0 + 0j
    for k in range(0, 80):
        if k > 0:
            term_pow *= mu / k
        if k == s - 1:
            continue
        m = s - k
        zeta_val = float(special.zeta(m)) if m > 1 else _zeta_nonpositive(m)
        contrib = zeta_val * term_pow
        total += contrib
        if k > s + 4 and contrib != 0 and abs(contrib) < 1e-18 * abs(total):
            break
    return total


def _zeta_nonpositive(m: int) -> float:
    # zeta(-n) = (-1)^n B_{n+1} / (n+1)
    n = -m
    bern = special.bernoulli(n + 1)[n + 1]
    return float((-1) ** n * bern / (n + 1))


def polylog(s: int, z: complex) -> complex:
    """Polylogarithm ``Li_s(z)`` for ``s`` in {2, 3} and ``|z| <= 1``.

    For ``|z| <= 0.5`` the defining series is summed directly (60 terms
    reach double precision). Otherwise the expansion in ``mu = log z``
    around ``z = 1`` is used; on the closed unit disk ``|mu| < 3.3 < 2 pi``
    and the series converges to ~1e-15 relative within 80 terms.
    """
    if s not in (2, 3):
        raise ValueError(f"polylog supports s in {{2, 3}}, got {s}")
    z = complex(z)
    r = abs(z)
    if r > 1.0 + 1e-14:
        raise ValueError(f"polylog requires |z| <= 1, got |z|={r}")
    if z == 0:
        return 0j
    if z == 1:
        return complex(special.zeta(s))
    if r <= 0.5:
        return _polylog_series(s, z, 60)
    return _polylog_log_series(s, z)


def find_sign_change(f: Callable[[float], float], lo: float, hi: float,
                     xtol: float) -> float:
    """Locate a sign change of ``f`` inside ``[lo, hi]`` to within ``xtol``.

    Uses Brent's method. Raises :class:`BracketError` if ``f(lo)`` and
    ``f(hi)`` share a sign.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(
            f"f({lo:.6g})={flo:.3e} and f({hi:.6g})={fhi:.3e} have the same sign; "
            "widen or move the bracket")
    return float(optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * _EPS))
