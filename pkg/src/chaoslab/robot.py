"""Chaos-driven differential-drive robot: drive laws, wheel speeds, coverage.

The chaotic states feed a unicycle through

    v  = mod(|x + y|, xmax) / 2,     mu = (x - y) / d,
    X' = v cos(theta),  Y' = v sin(theta),  theta' = mu,

and (x, y, z) evolve independently of the robot's pose.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .dynamics import Params, robot_field, unicycle_inputs
from .integrate import Trajectory

DEFAULT_IC = (0.1, -0.1, 0.0, 0.0, 0.0, 0.0)
BOUNDARY_RULES = ("none", "no-motion")


@dataclass(frozen=True)
class RobotConfig:
    d: float = 0.08
    wheel_radius: float = 1.0
    xmax: float = 31.596
    workspace: tuple = (0.0, 10.0, 0.0, 10.0)
    grid: tuple = (10, 10)
    boundary: str = "no-motion"

    def __post_init__(self):
        if not (self.d > 0 and self.wheel_radius > 0 and self.xmax > 0):
            raise ValueError("d, wheel_radius and xmax must be positive")
        xlo, xhi, ylo, yhi = self.workspace
        if not (xhi > xlo and yhi > ylo):
            raise ValueError(f"degenerate workspace {self.workspace}")
        if len(self.grid) != 2 or min(self.grid) < 1:
            raise ValueError("coverage grid needs two positive cell counts")
        if self.boundary not in BOUNDARY_RULES:
            raise ValueError(f"boundary must be one of {BOUNDARY_RULES}")

    def with_(self, **changes) -> "RobotConfig":
        return replace(self, **changes)

    def inside(self, X, Y):
        xlo, xhi, ylo, yhi = self.workspace
        return (xlo <= X) & (X <= xhi) & (ylo <= Y) & (Y <= yhi)


@dataclass
class WheelSpeeds:
    w_l: float
    w_r: float


def drive_inputs(x: float, y: float, cfg: RobotConfig) -> tuple[float, float]:
    """(v, mu) with v = mod(|x+y|, xmax)/2 and mu = (x-y)/d."""
    return unicycle_inputs(x, y, cfg.d, cfg.xmax)


def wheel_speeds(v: float, mu: float, cfg: RobotConfig) -> WheelSpeeds:
    """Invert v = R (w_l + w_r)/2, theta' = R (w_r - w_l)/d."""
    R = cfg.wheel_radius
    return WheelSpeeds((2.0 * v - cfg.d * mu) / (2.0 * R), (2.0 * v + cfg.d * mu) / (2.0 * R))


def drive_from_wheels(w: WheelSpeeds, cfg: RobotConfig) -> tuple[float, float]:
    R = cfg.wheel_radius
    return R * (w.w_l + w.w_r) / 2.0, R * (w.w_r - w.w_l) / cfg.d


def calibrate_xmax(p: Params, s0=DEFAULT_IC[:3], step: float = 0.005,
                   t_start: float = 50.0, t_stop: float = 1050.0) -> float:
    """max |x(t)| over [t_start, t_stop] of a fixed-step reference run."""
    n = int(round(t_stop / step))
    t, S, status = kernels.rk4_path(p.as_array(), np.asarray(s0, dtype=float), step, n, 1, 1e6)
    if status != kernels.COMPLETED:
        raise RuntimeError("reference run for xmax escaped")
    return float(np.max(np.abs(S[t >= t_start, 0])))


@dataclass
class CoverageReport:
    mask: np.ndarray
    times: np.ndarray
    fraction: np.ndarray
    per_sample: np.ndarray = field(repr=False, default=None)

    @property
    def final(self) -> float:
        return float(self.fraction[-1]) if len(self.fraction) else 0.0

    def fraction_at(self, t: float) -> float:
        i = np.searchsorted(self.times, t, side="right") - 1
        return float(self.fraction[i]) if i >= 0 else 0.0


def coverage(times, X, Y, cfg: RobotConfig, cadence: float = 1.0) -> CoverageReport:
    """Visited cells of the coverage grid and the covered fraction over time.

    Samples outside the workspace do not count. The time series is sampled
    every ``cadence`` from times[0] and always includes the last sample time.
    """
    times = np.asarray(times, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    nx, ny = cfg.grid
    xlo, xhi, ylo, yhi = cfg.workspace
    inside = cfg.inside(X, Y)
    ix = np.clip(((X - xlo) / (xhi - xlo) * nx).astype(np.int64), 0, nx - 1)
    iy = np.clip(((Y - ylo) / (yhi - ylo) * ny).astype(np.int64), 0, ny - 1)
    cell = np.where(inside, iy * nx + ix, -1)
    mask = np.zeros((ny, nx), dtype=bool)
    first = np.full(len(times), False)
    valid = np.flatnonzero(cell >= 0)
    if valid.size:
        cells, idx = np.unique(cell[valid], return_index=True)
        mask.flat[cells] = True
        first[valid[idx]] = True
    per_sample = np.cumsum(first) / float(nx * ny)
    if len(times) == 0:
        return CoverageReport(mask, np.zeros(0), np.zeros(0), per_sample)
    grid_t = np.arange(times[0], times[-1], cadence) if cadence > 0 else np.zeros(0)
    if len(grid_t) == 0 or grid_t[-1] < times[-1]:
        grid_t = np.append(grid_t, times[-1])
    j = np.searchsorted(times, grid_t, side="right") - 1
    return CoverageReport(mask, grid_t, per_sample[j], per_sample)


def simulate_navigation(p: Params, cfg: RobotConfig = RobotConfig(), s0=DEFAULT_IC,
                        t_end: float = 500.0, step: float = 0.005,
                        cadence: float = 1.0) -> tuple[Trajectory, CoverageReport]:
    """Fixed-step RK4 on the 6-D system, storing every step.

    Under the no-motion rule a step whose new position leaves the workspace
    keeps the old position; heading and chaotic states still advance.
    """
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (6,) or not np.all(np.isfinite(s0)):
        raise ValueError("s0 must be six finite numbers")
    bounds = None
    if cfg.boundary == "no-motion":
        if not cfg.inside(s0[3], s0[4]):
            raise ValueError("initial position must lie inside the workspace")
        bounds = tuple(float(b) for b in cfg.workspace)
    n = int(round(t_end / step))
    t, S, _ = kernels.robot_rk4_path(p.as_array(), cfg.d, cfg.xmax, s0, step, n, 1, bounds)
    traj = Trajectory(t, S)
    rep = coverage(t, S[:, 3], S[:, 4], cfg, cadence)
    return traj, rep


def heading_residual(p: Params, cfg: RobotConfig, states) -> np.ndarray:
    """|X' sin(theta) - Y' cos(theta)| at each state (the no-skid constraint)."""
    out = np.empty(len(states))
    for i, s in enumerate(states):
        f = robot_field(p, cfg.d, cfg.xmax, s)
        out[i] = abs(f[3] * math.sin(s[5]) - f[4] * math.cos(s[5]))
    return out


def write_csv(path, p: Params, traj: Trajectory, rep: CoverageReport, cfg: RobotConfig,
              stride: int = 1):
    S = traj.states
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "z", "X", "Y", "theta", "v", "mu", "covered_fraction"])
        for i in range(0, len(traj.times), max(1, stride)):
            v, mu = drive_inputs(S[i, 0], S[i, 1], cfg)
            row = [traj.times[i], *S[i], v, mu, rep.per_sample[i]]
            w.writerow([format(float(c), ".17g") for c in row])


def mask_text(rep: CoverageReport) -> str:
    """Coverage mask as rows of 0/1, top row = highest Y."""
    return "\n".join("".join("1" if c else "0" for c in row) for row in rep.mask[::-1]) + "\n"
