"""Run configuration files.

A config is TOML. Physical quantities carry their unit in the key name::

    mode = "plane-pressure"      # plane-pressure | sphere-force | ideal-constant | transition-scan
    temperature_k = 300.0

    [materials]
    plate1 = "gaas"              # shipped name or path to a material file
    plate2 = "au"

    [bias]
    relative_bias = 0.95         # or voltage_v; scalar or list

    [grid]                       # separations; gap energies (min_ev/max_ev) in ideal-constant
    min_nm = 200
    max_nm = 3000
    count = 57
    spacing = "linear"           # linear | log

    [sphere]                     # sphere-force, optional for transition-scan
    radius_um = [50, 100, 150]

    [output]
    path = "out.csv"
    format = "csv"               # csv | json

    [tolerances]                 # optional, see planeplane.Accuracy
    rel = 1e-7
"""

from __future__ import annotations

import pathlib
import sys
from dataclasses import dataclass, fields

import numpy as np

from .materials import BandgapSpec, DielectricModel, MaterialError, get_material
from .planeplane import Accuracy

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

MODES = ("plane-pressure", "sphere-force", "ideal-constant", "transition-scan")

_LENGTH_UNITS = {"m": 1.0, "um": 1e-6, "nm": 1e-9}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str
    temperature: float
    plate1: str
    plate2: str
    grid: tuple[float, ...]           # m, or eV in ideal-constant mode
    voltages: tuple[float, ...] = ()  # V; filled for modes with a material gap
    relative_biases: tuple[float, ...] = ()
    radii: tuple[float, ...] = ()
    output_path: str = "result.csv"
    output_format: str = "csv"
    accuracy: Accuracy = Accuracy()
    source: dict | None = None

    def material(self, which: int) -> DielectricModel:
        return get_material(self.plate1 if which == 1 else self.plate2)


def _number(section: dict, key: str, where: str) -> float:
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
    return float(value)


def _numbers(section: dict, key: str, where: str) -> tuple[float, ...]:
    value = section[key]
    items = value if isinstance(value, list) else [value]
    if not items:
        raise ConfigError(f"{where}.{key} is empty")
    return tuple(_number({key: v}, key, where) for v in items)


def _length(section: dict, stem: str, where: str, required: bool = True):
    found = [(k, u) for u, k in ((u, f"{stem}_{u}") for u in _LENGTH_UNITS) if k in section]
    if len(found) > 1:
        raise ConfigError(f"{where}: give only one of {[k for k, _ in found]}")
    if not found:
        if required:
            keys = ", ".join(f"{stem}_{u}" for u in _LENGTH_UNITS)
            raise ConfigError(f"{where}: missing {stem} (one of {keys})")
        return None
    key, unit = found[0]
    return tuple(v * _LENGTH_UNITS[unit] for v in _numbers(section, key, where))


def _grid(section: dict, energy: bool) -> tuple[float, ...]:
    if energy:
        for key in ("min_ev", "max_ev"):
            if key not in section:
                raise ConfigError(f"grid: missing {key}")
        lo, hi = _number(section, "min_ev", "grid"), _number(section, "max_ev", "grid")
    else:
        lo = _length(section, "min", "grid")[0]
        hi = _length(section, "max", "grid")[0]
    count = section.get("count")
    if isinstance(count, bool) or not isinstance(count, int):
        raise ConfigError(f"grid.count must be an integer, got {count!r}")
    if count < 1:
        raise ConfigError(f"grid.count must be >= 1, got {count}")
    if not lo > 0:
        raise ConfigError(f"grid minimum must be > 0, got {lo}")
    if hi < lo:
        raise ConfigError(f"grid maximum {hi} is below the minimum {lo}")
    if count > 1 and hi == lo:
        raise ConfigError("grid.count > 1 needs max > min")
    spacing = section.get("spacing", "linear")
    if spacing == "linear":
        values = np.linspace(lo, hi, count)
    elif spacing == "log":
        values = np.geomspace(lo, hi, count)
    else:
        raise ConfigError(f"grid.spacing must be 'linear' or 'log', got {spacing!r}")
    return tuple(float(v) for v in values)


def _bias(section: dict, gap: BandgapSpec | None, mode: str):
    has_v, has_rel = "voltage_v" in section, "relative_bias" in section
    if has_v == has_rel:
        raise ConfigError("bias: give exactly one of voltage_v or relative_bias")
    if has_rel:
        rel = _numbers(section, "relative_bias", "bias")
        for r in rel:
            if not 0 < r < 1:
                raise ConfigError(f"bias.relative_bias must lie in (0, 1), got {r}")
        if mode == "ideal-constant":
            return (), rel
        return tuple(r * gap.gap_energy for r in rel), rel
    volts = _numbers(section, "voltage_v", "bias")
    if mode == "ideal-constant":
        raise ConfigError("ideal-constant mode scans the gap; give bias.relative_bias")
    for v in volts:
        if not v < gap.gap_energy:
            raise ConfigError(f"bias.voltage_v={v} must be below the gap {gap.gap_energy} eV")
    return volts, tuple(v / gap.gap_energy for v in volts)


def parse_config(data: dict, base: pathlib.Path | None = None) -> RunConfig:
    """Validate a config mapping and resolve units and materials."""
    mode = data.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if "temperature_k" not in data:
        raise ConfigError("missing temperature_k")
    T = _number(data, "temperature_k", "config")
    if not T > 0:
        raise ConfigError(f"temperature_k must be > 0, got {T}")

    mats = data.get("materials", {})
    plate1, plate2 = mats.get("plate1"), mats.get("plate2", "au")
    if mode != "ideal-constant":
        if not plate1:
            raise ConfigError("materials.plate1 is required")
        plate1, plate2 = (_resolve_material(p, base) for p in (plate1, plate2))
        try:
            m1 = get_material(plate1)
            get_material(plate2)
        except MaterialError as exc:
            raise ConfigError(str(exc)) from exc
        if m1.gap is None:
            raise ConfigError(f"plate1 material {plate1!r} has no gap_energy_ev")
        gap = m1.gap
    else:
        plate1, plate2, gap = "ideal-emitter", "perfect", None

    if "bias" not in data:
        raise ConfigError("missing [bias] section")
    voltages, rel = _bias(data["bias"], gap, mode)
    if "grid" not in data:
        raise ConfigError("missing [grid] section")
    grid = _grid(data["grid"], energy=(mode == "ideal-constant"))

    radii = ()
    if "sphere" in data:
        radii = _length(data["sphere"], "radius", "sphere")
        if any(r <= 0 for r in radii):
            raise ConfigError("sphere radius must be > 0")
    if mode == "sphere-force" and not radii:
        raise ConfigError("sphere-force mode needs [sphere] radius_um (or radius_m/radius_nm)")

    out = data.get("output", {})
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {fmt!r}")
    path = out.get("path", f"{mode}.{fmt}")  # relative to the working directory

    tol = data.get("tolerances", {})
    known = {f.name for f in fields(Accuracy)}
    unknown = set(tol) - known
    if unknown:
        raise ConfigError(f"unknown tolerance keys {sorted(unknown)}; known: {sorted(known)}")
    try:
        accuracy = Accuracy(**tol)
    except TypeError as exc:
        raise ConfigError(f"tolerances: {exc}") from exc

    return RunConfig(mode, T, plate1, plate2, grid, voltages, rel, radii, path, fmt,
                     accuracy, data)


def _resolve_material(name: str, base: pathlib.Path | None) -> str:
    if base is not None and (name.endswith(".toml") or "/" in name):
        p = pathlib.Path(name)
        if not p.is_absolute():
            return str(base / p)
    return name


def load_config(path) -> RunConfig:
    path = pathlib.Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data, path.parent)
