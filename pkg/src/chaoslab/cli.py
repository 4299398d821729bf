"""Command-line front end.

Every subcommand reads an optional flat ``key = value`` config file
(``--config``), applies ``--key value`` flag overrides, writes its CSV
artifacts under ``--out`` and prints a JSON summary (also saved as
``summary.json``). Exit codes: 0 success, 2 configuration error, 3 numerical
failure (escape, step underflow, degenerate fit).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import __version__, kernels
from .dynamics import Params, ScaleSpec, SystemField

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


# value parsers

def _bool(s) -> bool:
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _vec(n: int | tuple) -> Callable:
    sizes = (n,) if isinstance(n, int) else n

    def parse(s):
        parts = [p for p in re.split(r"[,\s]+", str(s).strip()) if p]
        vals = tuple(float(p) for p in parts)
        if len(vals) not in sizes or not all(math.isfinite(v) for v in vals):
            want = " or ".join(str(k) for k in sizes)
            raise ValueError(f"expected {want} comma-separated finite numbers, got {s!r}")
        return vals
    parse.__name__ = f"vec{sizes}"
    return parse


def _choice(*options) -> Callable:
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s
    parse.__name__ = "choice"
    return parse


def _opt_float(s):
    if s is None or str(s).strip().lower() in ("", "none", "auto"):
        return None
    return float(s)


@dataclass(frozen=True)
class Key:
    parse: Callable
    default: Any
    help: str = ""


PARAM_KEYS = {name: Key(float, getattr(Params(), name), f"coefficient {name}")
              for name in Params.names()}
COMMON_KEYS = {
    "seed": Key(int, 0, "random seed"),
    "threads": Key(int, 0, "worker cap (0 = CHAOSLAB_THREADS or all cores)"),
    "gnuplot": Key(_bool, False, "also write a gnuplot script"),
}
INTEGRATOR_KEYS = {
    "mode": Key(_choice("fixed", "adaptive"), "adaptive", "integrator"),
    "step": Key(float, 1e-3, "fixed step, or initial step"),
    "max_step": Key(float, 1e-3, "largest adaptive step"),
    "rel_tol": Key(float, 2.2204e-6, "relative tolerance"),
    "abs_tol": Key(float, 1e-9, "absolute tolerance"),
    "t_end": Key(float, 500.0, "end time"),
    "transient": Key(float, 50.0, "time treated as transient"),
    "escape_radius": Key(float, 1e6, "norm at which a run counts as escaped"),
}
CLASSIFIER_KEYS = {
    "fp_radius": Key(float, 0.05, "fixed-point proximity radius"),
    "fp_dwell": Key(float, 20.0, "dwell time near a fixed point"),
    "n_crossings": Key(int, 10, "consistent section crossings required"),
    "t_max": Key(float, 2000.0, "classification time budget"),
    "escape_radius": Key(float, 1e6, "escape norm"),
    "level": Key(_opt_float, None, "section level (default r-)"),
}

SUBCOMMANDS: dict[str, dict] = {
    "simulate": {
        "help": "trajectory of the system or of the 6-D robot system",
        "keys": {
            **INTEGRATOR_KEYS,
            "system": Key(_choice("original", "robot"), "original", "which field"),
            "ic": Key(_vec((3, 6)), (1.0, -1.0, 0.0), "initial state"),
            "ic2": Key(_vec((3, 6)), None, "optional second initial state"),
            "stride": Key(int, 1, "keep every n-th fixed step"),
            "d": Key(float, 0.08, "wheel separation (robot)"),
            "xmax": Key(float, 31.596, "modular bound on |x+y| (robot)"),
        },
    },
    "equilibria": {
        "help": "equilibria, eigenvalues and a stability sweep over a8",
        "keys": {
            "a8_min": Key(float, -0.5, "sweep start"),
            "a8_max": Key(float, 1.5, "sweep end"),
            "n_points": Key(int, 401, "sweep points"),
            "which": Key(_choice("E1", "E2", "E3", "E4", "E5", "E6", "all"), "E6", "swept point"),
        },
    },
    "lyapunov": {
        "help": "Lyapunov spectrum and Kaplan-Yorke dimension",
        "keys": {
            "ic": Key(_vec(3), (0.1001, 0.1003, 0.1003), "initial state"),
            "step": Key(float, 0.01, "RK4 step"),
            "iterations": Key(int, 1_000_000, "RK4 steps accumulated"),
            "renorm": Key(int, 1, "steps between Gram-Schmidt passes"),
            "transient": Key(float, 100.0, "time discarded first"),
            "trace_points": Key(int, 1000, "rows in the convergence trace"),
        },
    },
    "bifurcate": {
        "help": "x-maxima versus a8 with continuation",
        "keys": {
            "a8_start": Key(float, -0.5, "first grid value"),
            "a8_end": Key(float, 1.5, "last grid value"),
            "n_points": Key(int, 400, "grid points"),
            "direction": Key(_choice("forward", "backward"), "forward", "sweep direction"),
            "ic_policy": Key(_choice("fixed", "continued"), "continued", "seeding rule"),
            "ic": Key(_vec(3), (-2.1441, -0.3086, 0.1113), "seed state"),
            "t_end": Key(float, 300.0, "time per grid point"),
            "transient": Key(float, 150.0, "discarded time per point"),
            "mode": Key(_choice("fixed", "adaptive"), "adaptive", "integrator"),
            "step": Key(float, 0.005, "RK4 step (fixed mode)"),
            "max_step": Key(float, 1e-3, "largest adaptive step"),
            "rel_tol": Key(float, 2.2204e-6, "relative tolerance"),
            "abs_tol": Key(float, 1e-9, "absolute tolerance"),
            "sign_reset": Key(_bool, False, "mirror the carried state at the first a8 above sign_reset_a8"),
            "sign_reset_a8": Key(float, 0.0, "threshold for sign_reset"),
            "mask": Key(_bool, False, "also compute the chaos mask"),
            "mask_points": Key(int, 81, "grid points for the chaos mask"),
            "mask_iterations": Key(int, 100_000, "Lyapunov iterations per mask point"),
        },
    },
    "basin": {
        "help": "basin-of-attraction map on the z = r- plane",
        "defaults": {"a8": 1.2},
        "keys": {
            **CLASSIFIER_KEYS,
            "x_min": Key(float, -10.0, "window"), "x_max": Key(float, 10.0, "window"),
            "y_min": Key(float, -10.0, "window"), "y_max": Key(float, 10.0, "window"),
            "nx": Key(int, 200, "cells along x"), "ny": Key(int, 200, "cells along y"),
        },
    },
    "basin-class": {
        "help": "basin size power law P(r) = P0 / r^gamma and class",
        "defaults": {"a8": 1.2},
        "keys": {
            **CLASSIFIER_KEYS,
            "radii_min": Key(float, 10.0, "smallest radius"),
            "radii_max": Key(float, 1e6, "largest radius"),
            "n_radii": Key(int, 11, "log-spaced radii"),
            "samples": Key(int, 1000, "samples per radius"),
            "include_fixed": Key(_bool, True, "count fixed-point basins as in basin"),
            "tail_from": Key(_opt_float, None, "smallest radius in the fit"),
        },
    },
    "circuit": {
        "help": "resistor synthesis, realized coefficients, dynamic range",
        "keys": {
            "s1": Key(float, 3.0, "amplitude divisor for x"),
            "s2": Key(float, 1.0, "amplitude divisor for y"),
            "s3": Key(float, 1.0, "amplitude divisor for z"),
            "kappa": Key(float, 1000.0, "time scale 1/(R C)"),
            "C": Key(float, 1e-9, "capacitance (F)"),
            "rounding": Key(_choice("floor1k", "none", "E24", "E96"), "floor1k", "rounding policy"),
            "rail": Key(float, 10.0, "multiplier input limit (V)"),
            "range_check": Key(_bool, True, "run the dynamic-range check"),
            "ic": Key(_vec(3), (1.0 / 3.0, -1.0, 0.0), "capacitor voltages for the trajectory"),
            "tau_end": Key(float, 100.0, "circuit trajectory length in tau (0 = none)"),
        },
    },
    "robot": {
        "help": "chaos-driven robot navigation and coverage",
        "keys": {
            "ic": Key(_vec(6), (0.1, -0.1, 0.0, 0.0, 0.0, 0.0), "(x,y,z,X,Y,theta)"),
            "ic2": Key(_vec(6), None, "optional second initial state"),
            "t_end": Key(float, 500.0, "simulated time"),
            "step": Key(float, 0.005, "RK4 step"),
            "d": Key(float, 0.08, "wheel separation"),
            "wheel_radius": Key(float, 1.0, "wheel radius"),
            "xmax": Key(_opt_float, 31.596, "modular bound (auto = calibrate)"),
            "workspace": Key(_vec(4), (0.0, 10.0, 0.0, 10.0), "xlo,xhi,ylo,yhi"),
            "cells": Key(_vec(2), (10.0, 10.0), "coverage grid nx,ny"),
            "boundary": Key(_choice("none", "no-motion"), "no-motion", "wall rule"),
            "csv_stride": Key(int, 20, "write every n-th step to the CSV"),
        },
    },
}


def all_keys(cmd: str) -> dict:
    spec = SUBCOMMANDS[cmd]
    keys = {**PARAM_KEYS, **COMMON_KEYS, **spec["keys"]}
    for k, v in spec.get("defaults", {}).items():
        keys[k] = Key(keys[k].parse, v, keys[k].help)
    return keys


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        fh = open(path)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    with fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def resolve(cmd: str, file_values: dict, flag_values: dict) -> dict:
    keys = all_keys(cmd)
    unknown = sorted(set(file_values) - set(keys))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {cmd}: {', '.join(unknown)}")
    values = {k: spec.default for k, spec in keys.items()}
    for source in (file_values, flag_values):
        for k, raw in source.items():
            if raw is None:
                continue
            try:
                values[k] = keys[k].parse(raw)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"bad value for {k}: {e}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chaoslab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"chaoslab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd, spec in SUBCOMMANDS.items():
        sp = sub.add_parser(cmd, help=spec["help"])
        sp.add_argument("--config", help="flat key = value file")
        sp.add_argument("--out", default="out", help="output directory")
        for k, key in all_keys(cmd).items():
            flag = "--" + k.replace("_", "-")
            default = key.default
            shown = ",".join(f"{v:g}" for v in default) if isinstance(default, tuple) else default
            if key.parse is _bool:
                sp.add_argument(flag, dest=k, nargs="?", const="true", default=None,
                                help=f"{key.help} (default {shown})")
            else:
                sp.add_argument(flag, dest=k, default=None, help=f"{key.help} (default {shown})")
    return ap


_NEG = re.compile(r"^-[\d.]")


def _join_negative_values(argv):
    """Turn ``--ic -1,-1,0`` into ``--ic=-1,-1,0`` so argparse does not read a flag."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--") and "=" not in a and i + 1 < len(argv) and _NEG.match(argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


# subcommand runners; each returns the JSON summary

def _params(v) -> Params:
    try:
        return Params(*(v[n] for n in Params.names()))
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _path(out, name):
    return os.path.join(out, name)


def run_simulate(v, out):
    from .integrate import IntegratorConfig, StepUnderflowError, integrate, write_csv
    from .robot import RobotConfig, simulate_navigation

    p = _params(v)
    summary = {"command": "simulate", "system": v["system"], "files": []}
    ics = [("trajectory.csv", v["ic"])]
    if v["ic2"] is not None:
        ics.append(("trajectory_2.csv", v["ic2"]))
    failed = None
    for name, ic in ics:
        if v["system"] == "robot":
            if len(ic) != 6:
                raise ConfigError("robot system needs a 6-component ic")
            cfg = RobotConfig(d=v["d"], xmax=v["xmax"], boundary="none")
            traj, _ = simulate_navigation(p, cfg, ic, v["t_end"], v["step"])
            traj.times, traj.states = traj.times[::v["stride"]], traj.states[::v["stride"]]
        else:
            if len(ic) != 3:
                raise ConfigError("original system needs a 3-component ic")
            try:
                cfg = IntegratorConfig(mode=v["mode"], step=v["step"], max_step=v["max_step"],
                                       rel_tol=v["rel_tol"], abs_tol=v["abs_tol"],
                                       t_end=v["t_end"], transient=v["transient"],
                                       escape_radius=v["escape_radius"],
                                       stride=v["stride"]).validate()
            except ValueError as e:
                raise ConfigError(str(e)) from None
            try:
                traj = integrate(SystemField(p), ic, cfg)
            except StepUnderflowError as e:
                raise NumericalFailure(str(e)) from None
        write_csv(_path(out, name), traj)
        summary["files"].append(name)
        tail = traj.after(v["transient"]).states
        key = "" if name == "trajectory.csv" else "_2"
        summary["terminal" + key] = traj.terminal
        summary["samples" + key] = len(traj)
        if len(tail):
            summary["state_min" + key] = tail[:, :3].min(axis=0).tolist()
            summary["state_max" + key] = tail[:, :3].max(axis=0).tolist()
        if traj.terminal == "escaped":
            failed = f"trajectory from {list(ic)} escaped at t={traj.escape_time:.6g}"
    if v["gnuplot"]:
        _write_gnuplot(out, "simulate.gp", _GP_SIMULATE if v["system"] == "original" else _GP_ROBOT)
    if failed:
        summary["error"] = failed
        raise NumericalFailure(failed, summary)
    return summary


def run_equilibria(v, out):
    from .equilibria import EQ_IDS, ParameterDegenerateError, equilibria, stability_report, \
        stability_sweep, write_csv

    p = _params(v)
    try:
        es = equilibria(p)
    except ParameterDegenerateError as e:
        raise ConfigError(str(e)) from None
    pts = {}
    reports = []
    for k in EQ_IDS:
        r = stability_report(p, k)
        reports.append(r)
        pts[k] = {"present": r.present,
                  "point": r.point.tolist() if r.present else None,
                  "eigenvalues": [[z.real, z.imag] for z in r.eigenvalues] if r.present else None,
                  "class": r.classification}
    write_csv(_path(out, "equilibria.csv"), reports)
    grid = np.linspace(v["a8_min"], v["a8_max"], v["n_points"])
    sweep = stability_sweep(p, grid, v["which"])
    write_csv(_path(out, "stability_sweep.csv"), sweep)
    if v["gnuplot"]:
        _write_gnuplot(out, "equilibria.gp", _GP_STABILITY)
    return {"command": "equilibria", "r_plus": es.r_plus, "r_minus": es.r_minus,
            "p_plus": es.p_plus, "p_minus": es.p_minus, "q_plus": es.q_plus,
            "q_minus": es.q_minus, "equilibria": pts,
            "files": ["equilibria.csv", "stability_sweep.csv"]}


def run_lyapunov(v, out):
    from .lyapunov import EscapedError, lyapunov_spectrum, write_trace_csv

    p = _params(v)
    try:
        run = lyapunov_spectrum(p, v["ic"], v["step"], v["iterations"], v["renorm"],
                                v["transient"], v["trace_points"])
    except EscapedError as e:
        raise NumericalFailure(str(e)) from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    write_trace_csv(_path(out, "lyapunov_trace.csv"), run)
    if v["gnuplot"]:
        _write_gnuplot(out, "lyapunov.gp", _GP_LYAPUNOV)
    L = run.exponents
    return {"command": "lyapunov", "L1": L[0], "L2": L[1], "L3": L[2], "sum": run.sum,
            "DKY": run.dimension, "divergence_mean": run.divergence_mean,
            "step": run.step, "iterations": run.iterations, "transient": run.transient,
            "files": ["lyapunov_trace.csv"]}


def run_bifurcate(v, out):
    from .bifurcation import SweepConfig, bifurcation_scan, chaos_mask, write_csv, \
        write_mask_csv

    p = _params(v)
    try:
        cfg = SweepConfig(v["a8_start"], v["a8_end"], v["n_points"], v["direction"],
                          v["ic_policy"], tuple(v["ic"]), v["t_end"], v["transient"],
                          v["mode"], v["step"], v["max_step"], v["rel_tol"], v["abs_tol"],
                          v["sign_reset"], v["sign_reset_a8"])
    except ValueError as e:
        raise ConfigError(str(e)) from None
    data = bifurcation_scan(p, cfg)
    write_csv(_path(out, "bifurcation.csv"), data)
    files = ["bifurcation.csv"]
    pos = data.a8 > 0
    summary = {"command": "bifurcate", "grid_points": len(data.grid),
               "maxima": len(data.xmax), "escaped_points": int(data.escaped.sum()),
               "positive_a8_maxima_above_zero": int(np.sum(data.xmax[pos] > 0)),
               "positive_a8_maxima_below_zero": int(np.sum(data.xmax[pos] < 0))}
    if v["mask"]:
        grid = np.linspace(v["a8_start"], v["a8_end"], v["mask_points"])
        m = chaos_mask(p, grid, iterations=v["mask_iterations"], threads=v["threads"])
        write_mask_csv(_path(out, "chaos_mask.csv"), m)
        files.append("chaos_mask.csv")
        summary["chaotic_points"] = int(m.chaotic.sum())
    if v["gnuplot"]:
        _write_gnuplot(out, "bifurcation.gp", _GP_BIFURCATION)
    summary["files"] = files
    return summary


def _classifier(v):
    from .basin import ClassifierConfig
    try:
        return ClassifierConfig(fp_radius=v["fp_radius"], fp_dwell=v["fp_dwell"],
                                n_crossings=v["n_crossings"], t_max=v["t_max"],
                                escape_radius=v["escape_radius"])
    except ValueError as e:
        raise ConfigError(str(e)) from None


def run_basin(v, out):
    from .basin import GridSpec, basin_grid

    p = _params(v)
    try:
        spec = GridSpec((v["x_min"], v["x_max"]), (v["y_min"], v["y_max"]), v["nx"], v["ny"],
                        v["level"])
    except ValueError as e:
        raise ConfigError(str(e)) from None
    g = basin_grid(p, spec, _classifier(v), threads=v["threads"])
    g.write_csv(_path(out, "basin.csv"))
    g.write_ppm(_path(out, "basin.ppm"))
    viol, decided = g.mirror_violations()
    wrong = g.wrong_side()
    if v["gnuplot"]:
        _write_gnuplot(out, "basin.gp", _GP_BASIN)
    return {"command": "basin", "level": g.level, "fractions": g.fractions(),
            "composite_fraction": g.composite_fraction(),
            "left_cells_chaotic_2": wrong[0], "right_cells_chaotic_1": wrong[1],
            "mirror_violations": viol, "decided_cells": decided,
            "files": ["basin.csv", "basin.ppm"]}


def run_basin_class(v, out):
    from .basin import ScalingFitError, basin_scaling, write_scaling_csv

    p = _params(v)
    if not (0 < v["radii_min"] < v["radii_max"]) or v["n_radii"] < 3:
        raise ConfigError("need 0 < radii_min < radii_max and n_radii >= 3")
    radii = np.logspace(math.log10(v["radii_min"]), math.log10(v["radii_max"]), v["n_radii"])
    try:
        fit = basin_scaling(p, radii, v["samples"], v["seed"], _classifier(v),
                            v["include_fixed"], tail_from=v["tail_from"], threads=v["threads"])
    except ScalingFitError as e:
        raise NumericalFailure(str(e)) from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    write_scaling_csv(_path(out, "basin_scaling.csv"), fit)
    if v["gnuplot"]:
        _write_gnuplot(out, "basin_class.gp", _GP_SCALING.format(P0=fit.P0, g=fit.gamma))
    return {"command": "basin-class", "gamma": fit.gamma, "P0": fit.P0, "class": fit.basin_class,
            "fit_residual": fit.residual, "radii": fit.radii.tolist(),
            "P": fit.probability.tolist(), "samples": fit.samples,
            "files": ["basin_scaling.csv"]}


def run_circuit(v, out):
    from .circuit import SynthesisError, bom_text, circuit_params, dynamic_range, synthesize
    from .integrate import IntegratorConfig, integrate, write_csv

    p = _params(v)
    try:
        sc = ScaleSpec(v["s1"], v["s2"], v["s3"], v["kappa"])
        cr = synthesize(p, sc, v["C"], v["rounding"])
    except (SynthesisError, ValueError) as e:
        raise ConfigError(str(e)) from None
    with open(_path(out, "bom.txt"), "w") as fh:
        fh.write(bom_text(cr))
    files = ["bom.txt"]
    summary = {"command": "circuit", "R": cr.R, "C": cr.C, "kappa": cr.kappa,
               "invert_u4": bool(cr.invert_u4),
               "resistors": {k: cr.resistors[k] for k in cr.resistors},
               "ideal": {k: cr.ideal[k] for k in cr.ideal},
               "R9": cr.R9, "R10": cr.R10,
               "realized": dict(zip(Params.names(), cr.realized.as_array().tolist())),
               "rel_error": cr.rel_error,
               "max_rel_error": max(cr.rel_error.values())}
    if v["tau_end"] > 0:
        traj = integrate(SystemField(circuit_params(cr)), v["ic"],
                         IntegratorConfig(t_end=v["tau_end"], transient=0.0))
        write_csv(_path(out, "circuit_trajectory.csv"), traj)
        files.append("circuit_trajectory.csv")
        summary["trajectory_terminal"] = traj.terminal
    if v["range_check"]:
        rr = dynamic_range(p, sc, v["rail"])
        summary["range"] = {"maxima": rr.maxima.tolist(), "rail": rr.rail,
                            "passed": rr.passed, "diagnostic": rr.diagnostic}
    summary["files"] = files
    return summary


def run_robot(v, out):
    from .robot import RobotConfig, calibrate_xmax, mask_text, simulate_navigation, write_csv

    p = _params(v)
    xmax = v["xmax"] if v["xmax"] is not None else calibrate_xmax(p)
    try:
        cfg = RobotConfig(v["d"], v["wheel_radius"], xmax, tuple(v["workspace"]),
                          tuple(int(c) for c in v["cells"]), v["boundary"])
    except ValueError as e:
        raise ConfigError(str(e)) from None
    summary = {"command": "robot", "xmax": xmax, "files": []}
    runs = [("robot.csv", "coverage_mask.txt", v["ic"], "")]
    if v["ic2"] is not None:
        runs.append(("robot_2.csv", "coverage_mask_2.txt", v["ic2"], "_2"))
    for csv_name, mask_name, ic, key in runs:
        try:
            traj, rep = simulate_navigation(p, cfg, ic, v["t_end"], v["step"])
        except ValueError as e:
            raise ConfigError(str(e)) from None
        write_csv(_path(out, csv_name), p, traj, rep, cfg, v["csv_stride"])
        with open(_path(out, mask_name), "w") as fh:
            fh.write(mask_text(rep))
        summary["files"] += [csv_name, mask_name]
        summary["coverage" + key] = rep.final
        summary["final_pose" + key] = traj.states[-1, 3:].tolist()
    if v["gnuplot"]:
        _write_gnuplot(out, "robot.gp", _GP_ROBOT)
    return summary


RUNNERS = {"simulate": run_simulate, "equilibria": run_equilibria, "lyapunov": run_lyapunov,
           "bifurcate": run_bifurcate, "basin": run_basin, "basin-class": run_basin_class,
           "circuit": run_circuit, "robot": run_robot}


# gnuplot scripts, run from inside the output directory

_GP_SIMULATE = """set datafile separator ','
set key autotitle columnhead
set multiplot layout 1,2
plot 'trajectory.csv' using 2:3 with lines lw 0.5 title 'x-y'
plot 'trajectory.csv' using 1:2 with lines lw 0.5 title 'x(t)'
unset multiplot
"""
_GP_ROBOT = """set datafile separator ','
set key autotitle columnhead
set size square
plot 'robot.csv' using 5:6 with lines lw 0.5 title 'robot path'
"""
_GP_STABILITY = """set datafile separator ','
set xlabel 'a8'; set ylabel 'max Re(lambda)'
plot 'stability_sweep.csv' using 1:(($3>$5)?$3:$5) every ::1 with lines title 'E6'
"""
_GP_LYAPUNOV = """set datafile separator ','
set logscale x; set xlabel 't'
plot for [i=2:4] 'lyapunov_trace.csv' using 1:i every ::1 with lines title columnhead(i)
"""
_GP_BIFURCATION = """set datafile separator ','
set xlabel 'a8'; set ylabel 'x max'
plot 'bifurcation.csv' using 1:2 every ::1 with dots notitle
"""
_GP_BASIN = """set size ratio -1
plot 'basin.ppm' binary filetype=ppm with rgbimage notitle
"""
_GP_SCALING = """set datafile separator ','
set logscale xy; set xlabel 'r'; set ylabel 'P'
plot 'basin_scaling.csv' using 1:2 every ::1 with points pt 7 title 'P(r)', \\
     {P0!r}/x**{g!r} title 'fit'
"""


def _write_gnuplot(out, name, text):
    with open(_path(out, name), "w") as fh:
        fh.write(text)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def main(argv=None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    args = build_parser().parse_args(argv)
    cmd = args.command
    keys = all_keys(cmd)
    flags = {k: getattr(args, k) for k in keys}
    try:
        file_values = read_config(args.config) if args.config else {}
        values = resolve(cmd, file_values, flags)
        if values["threads"] < 0:
            raise ConfigError("threads must be non-negative")
        if values["threads"]:
            os.environ["CHAOSLAB_THREADS"] = str(values["threads"])
        os.makedirs(args.out, exist_ok=True)
        summary = RUNNERS[cmd](values, args.out)
        code = 0
    except ConfigError as e:
        print(f"chaoslab {cmd}: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as e:
        print(f"chaoslab {cmd}: numerical failure: {e.args[0]}", file=sys.stderr)
        if len(e.args) < 2:
            return EXIT_NUMERIC
        summary, code = e.args[1], EXIT_NUMERIC
    summary["backend"] = kernels.BACKEND
    text = json.dumps(summary, indent=2, sort_keys=True, default=_json_default)
    with open(_path(args.out, "summary.json"), "w") as fh:
        fh.write(text + "\n")
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
