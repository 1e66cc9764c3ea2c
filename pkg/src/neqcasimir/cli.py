"""Command-line front end: ``neqcasimir run|materials|check``."""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import datetime
import json
import logging
import math
import os
import pathlib
import sys
import time

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .constants import C, E_CHARGE, HBAR, KB
from .materials import BandgapSpec, MaterialError, list_materials
from .numerics import find_sign_change
from .optics import BiasState
from .planeplane import (PlatePair, PlateSpec, find_transition_separation, pressure_net,
                         pressure_pw_constant, pressure_pw_constant_ideal)
from .sphere import PFA_WARN_RATIO, SphereGeometry, force_pfa

log = logging.getLogger("neqcasimir")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2

COLUMNS = {
    "plane-pressure": ["separation_m", "p_eq_pa", "dp_pw_pa", "dp_ew_pa", "p_net_pa"],
    "sphere-force": ["radius_m", "separation_m", "f_eq_n", "df_pw_const_n", "df_pw_osc_n",
                     "df_ew_n", "f_net_n"],
    "ideal-constant": ["gap_ev", "relative_bias", "dp_pw0_ideal_pa"],
    "transition-scan": ["voltage_v", "relative_bias", "radius_m", "transition_m"],
}


def _pair(cfg: RunConfig, voltage: float) -> PlatePair:
    m1 = cfg.material(1)
    return PlatePair(PlateSpec(m1, BiasState(voltage, m1.gap, cfg.temperature)),
                     PlateSpec(cfg.material(2)))


def _tasks(cfg: RunConfig) -> list[tuple]:
    """Grid points in output order."""
    if cfg.mode == "plane-pressure":
        return [(v, d) for v in cfg.voltages for d in cfg.grid]
    if cfg.mode == "sphere-force":
        return [(v, R, d) for v in cfg.voltages for R in cfg.radii for d in cfg.grid]
    if cfg.mode == "ideal-constant":
        return [(g, r) for r in cfg.relative_biases for g in cfg.grid]
    return [(v, R) for v in cfg.voltages for R in (cfg.radii or (math.nan,))]


def _compute(cfg: RunConfig, task: tuple, pw_constants: dict) -> list[float]:
    acc, T = cfg.accuracy, cfg.temperature
    if cfg.mode == "plane-pressure":
        v, d = task
        b = pressure_net(_pair(cfg, v), d, T, acc)
        return [d, b.p_eq, b.dp_pw, b.dp_ew, b.p_net]
    if cfg.mode == "sphere-force":
        v, R, d = task
        geom = SphereGeometry(R, d)
        f = force_pfa(_pair(cfg, v), geom, T, acc, pw_constants.get(v))
        return [R, d, f.f_eq, f.df_pw_const, f.df_pw_osc, f.df_ew, f.f_net]
    if cfg.mode == "ideal-constant":
        g, r = task
        gap = BandgapSpec(g)
        return [g, r, pressure_pw_constant_ideal(gap, T, r * g, acc)]
    v, R = task
    return [v, v / cfg.material(1).gap.gap_energy, R, _transition(cfg, v, R, pw_constants)]


def _transition(cfg: RunConfig, v: float, R: float, pw_constants: dict) -> float:
    """First sign change of the net pressure (or sphere force) along the grid, refined."""
    pair, T, acc = _pair(cfg, v), cfg.temperature, cfg.accuracy
    if math.isnan(R):
        def net(d):
            return pressure_net(pair, d, T, acc).p_net
    else:
        def net(d):
            return force_pfa(pair, SphereGeometry(R, d), T, acc, pw_constants.get(v)).f_net
    previous = None
    for d in cfg.grid:
        value = net(d)
        if previous is not None and (previous[1] < 0) != (value < 0):
            xtol = 1e-4 * previous[0]
            if math.isnan(R):
                return find_transition_separation(pair, T, previous[0], d, xtol, acc)
            return find_sign_change(net, previous[0], d, xtol)
        previous = (d, value)
    return math.nan


def _key_columns(cfg: RunConfig, task: tuple) -> list[float]:
    if cfg.mode == "plane-pressure":
        return [task[1]]
    if cfg.mode == "sphere-force":
        return [task[1], task[2]]
    if cfg.mode == "ideal-constant":
        return list(task)
    return [task[0], task[0] / cfg.material(1).gap.gap_energy, task[1]]


def _worker(args):
    cfg, task, pw_constants = args
    # the per-point PFA quality warning is summarised once by execute()
    sphere_log = logging.getLogger("neqcasimir.sphere")
    level = sphere_log.level
    sphere_log.setLevel(logging.ERROR)
    start = time.monotonic()
    try:
        row = _compute(cfg, task, pw_constants)
        error = None
    except Exception as exc:  # a failed point is flagged, the run continues
        keys = _key_columns(cfg, task)
        row = keys + [math.nan] * (len(COLUMNS[cfg.mode]) - len(keys))
        error = f"{type(exc).__name__}: {exc}"
    finally:
        sphere_log.setLevel(level)
    return row, error, time.monotonic() - start


def _format(value: float) -> str:
    return repr(float(value))


def execute(cfg: RunConfig, workers: int = 1) -> int:
    """Run a validated config, write the outputs, return the exit status."""
    started = datetime.datetime.now(datetime.timezone.utc)
    pw_constants = {}
    if cfg.mode in ("sphere-force", "transition-scan"):
        for v in cfg.voltages:
            pw_constants[v] = pressure_pw_constant(_pair(cfg, v), cfg.accuracy)
    tasks = _tasks(cfg)
    if cfg.mode == "sphere-force":
        worst = max(d / R for _, R, d in tasks)
        if worst > PFA_WARN_RATIO:
            log.warning("d/R reaches %.3g (> %.3g); PFA corrections may be significant",
                        worst, PFA_WARN_RATIO)
    jobs = [(cfg, t, pw_constants) for t in tasks]
    if workers <= 1 or len(jobs) == 1:
        results = [_worker(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, jobs))

    header = list(COLUMNS[cfg.mode])
    multi_bias = cfg.mode in ("plane-pressure", "sphere-force") and len(cfg.voltages) > 1
    rows = []
    for task, (row, _, _) in zip(tasks, results):
        rows.append(([task[0]] if multi_bias else []) + row)
    if multi_bias:
        header = ["voltage_v"] + header

    failures = [(t, e) for t, (_, e, _) in zip(tasks, results) if e]
    for task, error in failures:
        log.error("point %s failed: %s", task, error)

    meta = _metadata(cfg, started, workers, [w for _, _, w in results], failures)
    out = pathlib.Path(cfg.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    if cfg.output_format == "csv":
        with out.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format(x) for x in row])
        meta_path = out.with_name(out.name + ".meta.json")
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        doc = {"columns": header, "rows": [dict(zip(header, map(float, r))) for r in rows],
               "metadata": meta}
        out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("wrote %d rows to %s", len(rows), out)
    return EXIT_NUMERICAL if failures else EXIT_OK


def _metadata(cfg, started, workers, wall_times, failures) -> dict:
    materials = {}
    if cfg.mode != "ideal-constant":
        for key, which in (("plate1", 1), ("plate2", 2)):
            m = cfg.material(which)
            materials[key] = {"name": m.name, "kind": m.kind, "provenance": m.provenance,
                              "source": getattr(cfg, key)}
    return {
        "version": __version__,
        "started_utc": started.isoformat(),
        "workers": workers,
        "config": cfg.source,
        "resolved": {
            "mode": cfg.mode,
            "temperature_k": cfg.temperature,
            "voltages_v": list(cfg.voltages),
            "relative_biases": list(cfg.relative_biases),
            "radii_m": list(cfg.radii),
            "grid": list(cfg.grid),
            "accuracy": dataclasses.asdict(cfg.accuracy),
        },
        "constants": {"c": C, "hbar": HBAR, "k_B": KB, "e": E_CHARGE},
        "materials": materials,
        "wall_time_s": wall_times,
        "failed_points": [{"point": list(t), "error": e} for t, e in failures],
    }


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, MaterialError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.output:
        cfg = dataclasses.replace(cfg, output_path=args.output)
    if cfg.mode != "ideal-constant" and min(cfg.grid) < 1e-9:
        print("error: separations below 1 nm are not supported", file=sys.stderr)
        return EXIT_VALIDATION
    workers = args.workers or os.cpu_count() or 1
    return execute(cfg, workers)


def _cmd_materials(args) -> int:
    rows = list_materials()
    if args.json:
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    print(f"{'name':<10} {'kind':<12} {'gap_ev':>7}  {'drude (plasma, damping) eV':<27} provenance")
    for r in rows:
        gap = f"{r['gap_energy_ev']:.3f}" if r["gap_energy_ev"] is not None else "-"
        drude = "-" if r["drude"] is None else f"{r['drude'][0]:g}, {r['drude'][1]:g}"
        prov = r["provenance"]
        if len(prov) > 60 and not args.verbose:
            prov = prov[:57] + "..."
        print(f"{r['name']:<10} {r['kind']:<12} {gap:>7}  {drude:<27} {prov}")
    return EXIT_OK


def _cmd_check(args) -> int:
    from .selfcheck import run_checks
    ok = run_checks(print)
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neqcasimir",
        description="Casimir pressure and sphere force with a forward-biased semiconductor plate.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a config file")
    run.add_argument("config", help="TOML run configuration")
    run.add_argument("-w", "--workers", type=int, default=None,
                     help="worker processes (default: number of CPUs)")
    run.add_argument("-o", "--output", help="override output.path")
    run.set_defaults(func=_cmd_run)

    mats = sub.add_parser("materials", help="list shipped materials")
    mats.add_argument("--json", action="store_true")
    mats.set_defaults(func=_cmd_materials)

    check = sub.add_parser("check", help="run the built-in invariant checks")
    check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
