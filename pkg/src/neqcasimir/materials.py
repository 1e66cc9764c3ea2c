"""Dielectric functions on the real and imaginary frequency axes.

Models come in three kinds:

``drude``
    Free-electron term, optionally with interband Lorentz oscillators
    (Drude-Lorentz form).
``lorentz_set``
    Sum of Lorentz oscillators. The empty set is vacuum.
``tabulated``
    ``(photon energy, eps_re, eps_im)`` rows. The imaginary-axis value is a
    Kramers-Kronig integral over the table.

A fourth kind, ``perfect``, is an ideal reflector used by the tests and
the ideal-system reductions; its permittivity is reported as infinite.

Energies are stored in eV. The evaluation functions take angular
frequencies in rad/s.
"""

from __future__ import annotations

import csv
import functools
import logging
import math
import pathlib
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.interpolate import PchipInterpolator

from .constants import EV_TO_RAD_S
from .numerics import Tolerance, integrate_adaptive, integrate_semiinfinite

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

log = logging.getLogger(__name__)

KINDS = ("drude", "lorentz_set", "tabulated", "perfect")


class MaterialError(ValueError):
    """Invalid material definition or material file."""


@dataclass(frozen=True)
class DrudeTerm:
    plasma_energy: float   # eV
    damping_energy: float  # eV

    def __post_init__(self):
        if not self.plasma_energy > 0:
            raise MaterialError(f"drude.plasma_ev must be > 0, got {self.plasma_energy}")
        if not self.damping_energy > 0:
            raise MaterialError(f"drude.damping_ev must be > 0, got {self.damping_energy}")


@dataclass(frozen=True)
class Oscillator:
    strength: float       # dimensionless
    center_energy: float  # eV
    width_energy: float   # eV

    def __post_init__(self):
        if not self.center_energy > 0:
            raise MaterialError(f"oscillator center_ev must be > 0, got {self.center_energy}")
        if not self.width_energy > 0:
            raise MaterialError(f"oscillator width_ev must be > 0, got {self.width_energy}")
        if not self.strength >= 0:
            raise MaterialError(f"oscillator strength must be >= 0, got {self.strength}")


@dataclass(frozen=True)
class Table:
    photon_energy: tuple[float, ...]  # eV, strictly increasing
    eps_re: tuple[float, ...]
    eps_im: tuple[float, ...]

    def __post_init__(self):
        e = np.asarray(self.photon_energy, dtype=float)
        if not (len(self.photon_energy) == len(self.eps_re) == len(self.eps_im)):
            raise MaterialError("table columns have different lengths")
        if e.size < 2:
            raise MaterialError("table needs at least two rows")
        if np.any(e <= 0):
            raise MaterialError("table photon energies must be > 0")
        bad = np.nonzero(np.diff(e) <= 0)[0]
        if bad.size:
            raise MaterialError(f"table photon_energy not strictly increasing at row {bad[0] + 2}")
        neg = np.nonzero(np.asarray(self.eps_im) < 0)[0]
        if neg.size:
            raise MaterialError(
                f"table row {neg[0] + 1} has eps_im={self.eps_im[neg[0]]} < 0 (non-passive)")


@dataclass(frozen=True)
class BandgapSpec:
    gap_energy: float  # eV

    def __post_init__(self):
        if not self.gap_energy > 0:
            raise MaterialError(f"gap_energy must be > 0, got {self.gap_energy}")

    @property
    def omega(self) -> float:
        """Gap angular frequency in rad/s."""
        return self.gap_energy * EV_TO_RAD_S


@dataclass(frozen=True)
class DielectricModel:
    name: str
    kind: str
    drude: DrudeTerm | None = None
    oscillators: tuple[Oscillator, ...] = ()
    table: Table | None = None
    gap: BandgapSpec | None = None
    provenance: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MaterialError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        if self.kind == "drude" and self.drude is None:
            raise MaterialError(f"{self.name}: kind 'drude' needs a [drude] section")
        if self.kind == "lorentz_set" and (self.drude is not None or self.table is not None):
            raise MaterialError(f"{self.name}: kind 'lorentz_set' takes oscillators only")
        if self.kind == "tabulated" and self.table is None:
            raise MaterialError(f"{self.name}: kind 'tabulated' needs a [table] section")
        if self.kind != "tabulated" and self.table is not None:
            raise MaterialError(f"{self.name}: table given for kind {self.kind!r}")
        if self.kind == "perfect" and (self.drude or self.oscillators):
            raise MaterialError(f"{self.name}: kind 'perfect' takes no payload")

    @property
    def is_metal(self) -> bool:
        """True when eps(i xi) diverges as xi -> 0."""
        return self.kind == "perfect" or self.drude is not None

    @functools.cached_property
    def _interp(self):
        t = self.table
        e = np.asarray(t.photon_energy)
        return (PchipInterpolator(e, np.asarray(t.eps_re), extrapolate=False),
                PchipInterpolator(e, np.asarray(t.eps_im), extrapolate=False))


VACUUM = DielectricModel("vacuum", "lorentz_set", provenance="identity material")
PERFECT_REFLECTOR = DielectricModel("perfect", "perfect", provenance="ideal mirror")


def _as_energy(omega):
    return np.asarray(omega, dtype=float) / EV_TO_RAD_S


def _drude_lorentz_real(model: DielectricModel, energy):
    E = energy.astype(complex)
    eps = np.ones_like(E)
    if model.drude is not None:
        p, g = model.drude.plasma_energy, model.drude.damping_energy
        eps -= p * p / (E * E + 1j * g * E)
    for o in model.oscillators:
        c = o.center_energy
        eps += o.strength * c * c / (c * c - E * E - 1j * o.width_energy * E)
    return eps


def _table_eps_imag(model: DielectricModel, energy):
    """Tabulated eps_im with the Kramers-Kronig extrapolation rules."""
    t = model.table
    e_lo, e_hi = t.photon_energy[0], t.photon_energy[-1]
    E = np.asarray(energy, dtype=float)
    out = np.empty_like(E)
    inside = (E >= e_lo) & (E <= e_hi)
    out[inside] = model._interp[1](E[inside])
    below = E < e_lo
    if model.drude is not None:
        p, g = model.drude.plasma_energy, model.drude.damping_energy
        out[below] = p * p * g / (E[below] * (E[below] ** 2 + g * g))
    else:
        out[below] = t.eps_im[0] * E[below] / e_lo
    above = E > e_hi
    out[above] = t.eps_im[-1] * (e_hi / E[above]) ** 3
    return np.maximum(out, 0.0)


def epsilon_real_axis(model: DielectricModel, omega):
    """Complex permittivity at real angular frequency ``omega`` (rad/s)."""
    E = _as_energy(omega)
    if np.any(E <= 0):
        raise ValueError("epsilon_real_axis requires omega > 0")
    if model.kind == "perfect":
        out = np.full(E.shape, complex(-np.inf, 0.0))
    elif model.kind == "tabulated":
        t = model.table
        Ec = np.clip(E, t.photon_energy[0], t.photon_energy[-1])
        if np.any(Ec != E):
            log.warning("%s: photon energy outside table [%g, %g] eV, holding end values",
                        model.name, t.photon_energy[0], t.photon_energy[-1])
        re, im = model._interp
        out = re(Ec) + 1j * np.maximum(im(Ec), 0.0)
    else:
        out = _drude_lorentz_real(model, E)
    return out[()] if out.ndim == 0 else out


def kramers_kronig_imag_axis(eps_imag, xi_ev: float, breakpoints=(),
                             tol: Tolerance | None = None) -> float:
    """``1 + (2/pi) int_0^inf E eps_imag(E) / (E^2 + xi^2) dE`` with energies in eV.

    ``eps_imag`` must be vectorized and decay at least like ``E**-2``.
    The integral is split at ``xi`` and at ``breakpoints``; past the last
    breakpoint it is finished with the mapped semi-infinite rule.
    """
    tol = tol or Tolerance(rel=1e-10)
    xi_ev = float(xi_ev)

    def integrand(E):
        return E * eps_imag(E) / (E * E + xi_ev * xi_ev)

    pts = sorted({float(p) for p in breakpoints if p > 0} | ({xi_ev} if xi_ev > 0 else set()))
    if not pts:
        pts = [1.0]
    split = pts[-1]
    head = integrate_adaptive(integrand, 0.0, split, tol, pts[:-1]).value
    tail = integrate_semiinfinite(integrand, split, split, tol, method="map").value
    return 1.0 + 2.0 / math.pi * (head + tail)


@functools.lru_cache(maxsize=65536)
def _tabulated_imag_axis(model: DielectricModel, xi_ev: float) -> float:
    t = model.table
    pts = list(t.photon_energy)
    if model.drude is not None:
        pts.append(model.drude.damping_energy)
    return kramers_kronig_imag_axis(lambda E: _table_eps_imag(model, E), xi_ev, pts)


def epsilon_imag_axis(model: DielectricModel, xi):
    """Real permittivity ``eps(i xi)`` at imaginary angular frequency ``xi`` (rad/s).

    Metals return ``inf`` at ``xi = 0``.
    """
    X = _as_energy(xi)
    if np.any(X < 0):
        raise ValueError("epsilon_imag_axis requires xi >= 0")
    if model.kind == "perfect":
        out = np.full(X.shape, np.inf)
    elif model.kind == "tabulated":
        flat = np.atleast_1d(X).ravel()
        vals = np.array([np.inf if (x == 0 and model.drude is not None)
                         else _tabulated_imag_axis(model, float(x)) for x in flat])
        out = vals.reshape(X.shape)
    else:
        out = np.ones(X.shape)
        with np.errstate(divide="ignore"):
            if model.drude is not None:
                p, g = model.drude.plasma_energy, model.drude.damping_energy
                out = out + p * p / (X * X + g * X)
        for o in model.oscillators:
            c = o.center_energy
            out = out + o.strength * c * c / (c * c + X * X + o.width_energy * X)
    return out[()] if out.ndim == 0 else out


def static_permittivity(model: DielectricModel) -> float:
    """``eps(i0)``; ``inf`` for metals and the perfect reflector."""
    if model.is_metal:
        return math.inf
    return float(epsilon_imag_axis(model, 0.0))


# ---------------------------------------------------------------------------
# Material files

def _require(section: dict, key: str, where: str, path) -> float:
    if key not in section:
        raise MaterialError(f"{path}: missing '{key}' in {where}")
    value = section[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise MaterialError(f"{path}: '{where}.{key}' must be a number, got {value!r}")
    return float(value)


def _read_table_csv(path: pathlib.Path) -> Table:
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise MaterialError(f"cannot open table {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = [h.strip() for h in next(reader, [])]
        if header == ["energy_ev", "eps_re", "eps_im"]:
            mode = "eps"
        elif header == ["energy_ev", "n", "k"]:
            mode = "nk"
        else:
            raise MaterialError(
                f"{path}:1: header must be 'energy_ev,eps_re,eps_im' or 'energy_ev,n,k', "
                f"got {','.join(header)!r}")
        energy, re, im = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 3:
                raise MaterialError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                a, b, c = (float(x) for x in row)
            except ValueError as exc:
                raise MaterialError(f"{path}:{lineno}: {exc}") from exc
            if mode == "nk":
                if b < 0 or c < 0:
                    raise MaterialError(f"{path}:{lineno}: n and k must be >= 0")
                eps = complex(b, c) ** 2
                b, c = eps.real, eps.imag
            if c < 0:
                raise MaterialError(f"{path}:{lineno}: eps_im={c} < 0 violates passivity")
            energy.append(a)
            re.append(b)
            im.append(c)
    try:
        return Table(tuple(energy), tuple(re), tuple(im))
    except MaterialError as exc:
        raise MaterialError(f"{path}: {exc}") from exc


def load_material(path) -> DielectricModel:
    """Parse and validate a material file.

    The file is TOML with sections ``[meta]`` (``name``, optional
    ``gap_energy_ev``, ``provenance``), ``[drude]`` (``plasma_ev``,
    ``damping_ev``), repeated ``[[oscillator]]`` (``strength``,
    ``center_ev``, ``width_ev``) and ``[table]`` (``file``: a CSV next to
    the material file).
    """
    path = pathlib.Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise MaterialError(f"cannot read material file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise MaterialError(f"{path}: {exc}") from exc
    return _model_from_dict(data, path)


def _model_from_dict(data: dict, path) -> DielectricModel:
    meta = data.get("meta", {})
    name = meta.get("name", pathlib.Path(str(path)).stem)
    gap = None
    if "gap_energy_ev" in meta:
        gap = BandgapSpec(_require(meta, "gap_energy_ev", "meta", path))
    drude = None
    if "drude" in data:
        d = data["drude"]
        drude = DrudeTerm(_require(d, "plasma_ev", "drude", path),
                          _require(d, "damping_ev", "drude", path))
    oscillators = []
    for i, o in enumerate(data.get("oscillator", []), start=1):
        where = f"oscillator[{i}]"
        try:
            oscillators.append(Oscillator(_require(o, "strength", where, path),
                                          _require(o, "center_ev", where, path),
                                          _require(o, "width_ev", where, path)))
        except MaterialError as exc:
            raise MaterialError(f"{path}: {where}: {exc}") from exc
    table = None
    if "table" in data:
        tfile = data["table"].get("file")
        if not tfile:
            raise MaterialError(f"{path}: [table] needs 'file'")
        table = _read_table_csv(pathlib.Path(str(path)).parent / tfile)
    kind = meta.get("kind")
    if kind is None:
        kind = "tabulated" if table else "drude" if drude else "lorentz_set"
    return DielectricModel(name=name, kind=kind, drude=drude, oscillators=tuple(oscillators),
                           table=table, gap=gap, provenance=meta.get("provenance", ""))


def _shipped_dir():
    return resources.files(__package__).joinpath("data")


def shipped_names() -> list[str]:
    return sorted(p.name[:-5] for p in _shipped_dir().iterdir() if p.name.endswith(".toml"))


@functools.lru_cache(maxsize=None)
def get_material(name_or_path: str) -> DielectricModel:
    """Shipped material by name (``"gaas"``) or a material file path."""
    if name_or_path in ("vacuum",):
        return VACUUM
    if name_or_path in ("perfect",):
        return PERFECT_REFLECTOR
    if name_or_path in shipped_names():
        with resources.as_file(_shipped_dir().joinpath(f"{name_or_path}.toml")) as p:
            return load_material(p)
    p = pathlib.Path(name_or_path)
    if p.exists():
        return load_material(p)
    raise MaterialError(
        f"unknown material {name_or_path!r}; shipped: {', '.join(shipped_names())}")


def list_materials() -> list[dict]:
    """Shipped materials, ordered by name."""
    rows = []
    for name in shipped_names():
        m = get_material(name)
        rows.append({
            "name": m.name,
            "kind": m.kind,
            "gap_energy_ev": m.gap.gap_energy if m.gap else None,
            "drude": (m.drude.plasma_energy, m.drude.damping_energy) if m.drude else None,
            "provenance": m.provenance,
        })
    return rows
