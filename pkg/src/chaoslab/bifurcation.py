"""Bifurcation scans over a8: local maxima of x with state continuation.

A continued scan seeds each grid point with the final state of the
previous one, so the branch that is followed depends on the sweep history.
This is what exposes the coexisting mirror-image attractors for a8 > 0.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .dynamics import Params
from .integrate import Trajectory, local_maxima
from .lyapunov import DEFAULT_IC, lyapunov_spectrum

NEG_SEED = (-2.1441, -0.3086, 0.1113)
POS_SEED = (2.1441, -0.3086, 0.0)


@dataclass(frozen=True)
class SweepConfig:
    a8_start: float = -0.5
    a8_end: float = 1.5
    n_points: int = 400
    direction: str = "forward"
    ic_policy: str = "continued"
    s0: tuple = NEG_SEED
    t_end: float = 300.0
    transient: float = 150.0
    mode: str = "adaptive"
    step: float = 0.005
    max_step: float = 1e-3
    rel_tol: float = 2.2204e-6
    abs_tol: float = 1e-9
    sign_reset: bool = False
    sign_reset_a8: float = 0.0
    escape_radius: float = 1e6

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        if not self.transient < self.t_end:
            raise ValueError("transient must be shorter than t_end")
        if self.direction not in ("forward", "backward"):
            raise ValueError("direction must be forward or backward")
        if self.ic_policy not in ("fixed", "continued"):
            raise ValueError("ic_policy must be fixed or continued")
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError("mode must be fixed or adaptive")
        if not (self.step > 0 and self.max_step > 0):
            raise ValueError("step and max_step must be positive")

    def with_(self, **changes) -> "SweepConfig":
        return replace(self, **changes)

    def grid(self) -> np.ndarray:
        """Grid points in sweep order."""
        g = np.linspace(self.a8_start, self.a8_end, self.n_points)
        return g if self.direction == "forward" else g[::-1]


@dataclass
class BifurcationData:
    a8: np.ndarray           # one entry per recorded maximum
    xmax: np.ndarray
    grid: np.ndarray         # sweep order
    escaped: np.ndarray      # per grid point
    seeds: np.ndarray = field(repr=False, default=None)   # IC used at each grid point
    L1: np.ndarray | None = None

    def maxima_at(self, a8: float) -> np.ndarray:
        return self.xmax[self.a8 == a8]

    def sign_violations(self, sign: int, a8_min: float = 0.0) -> int:
        """Recorded maxima with a8 > a8_min whose sign differs from ``sign``."""
        m = self.a8 > a8_min
        return int(np.sum(np.sign(self.xmax[m]) != sign))


def _mirror(s):
    return np.array([-s[0], -s[1], s[2]])


def bifurcation_scan(p: Params, cfg: SweepConfig = SweepConfig()) -> BifurcationData:
    """Integrate at every grid a8 and record x-maxima after the transient.

    ``mode`` selects Dormand-Prince (``max_step``, tolerances) or RK4 with
    ``step``. With continuation, an escaped point reseeds the next one from ``cfg.s0``.
    ``sign_reset`` mirrors the carried state (x, y) -> (-x, -y) at the first
    grid point with a8 > ``sign_reset_a8`` (default 0) if its x sign differs
    from the seed's.
    """
    grid = cfg.grid()
    n_steps = int(round(cfg.t_end / cfg.step))
    seed = np.asarray(cfg.s0, dtype=float)
    seed_sign = math.copysign(1.0, seed[0])
    carried = seed.copy()
    reset_done = False
    a8s, xs, esc, seeds = [], [], np.zeros(len(grid), dtype=bool), np.empty((len(grid), 3))
    for i, a8 in enumerate(grid):
        s0 = seed.copy() if cfg.ic_policy == "fixed" else carried
        if cfg.sign_reset and not reset_done and a8 > cfg.sign_reset_a8:
            reset_done = True
            if math.copysign(1.0, s0[0]) != seed_sign:
                s0 = _mirror(s0)
        seeds[i] = s0
        coef = p.with_(a8=float(a8)).as_array()
        if cfg.mode == "fixed":
            t, S, status = kernels.rk4_path(coef, s0, cfg.step, n_steps, 1, cfg.escape_radius)
        else:
            t, S, status = kernels.dopri_path(coef, s0, cfg.t_end, min(cfg.step, cfg.max_step),
                                              cfg.max_step, cfg.rel_tol, cfg.abs_tol,
                                              cfg.escape_radius, 1e-14 * cfg.t_end)
        if status != kernels.COMPLETED:
            esc[i] = True
            carried = seed.copy()
            continue
        carried = S[-1].copy()
        keep = t >= cfg.transient
        for _, v in local_maxima(Trajectory(t[keep], S[keep]), 0):
            a8s.append(a8)
            xs.append(v)
    return BifurcationData(np.array(a8s), np.array(xs), grid, esc, seeds)


@dataclass
class ChaosMask:
    a8: np.ndarray
    L1: np.ndarray
    chaotic: np.ndarray
    escaped: np.ndarray


def chaos_mask(p: Params, a8_grid, s0=DEFAULT_IC, iterations: int = 100_000,
               step: float = 0.01, transient: float = 100.0, threshold: float = 0.01,
               threads: int | None = None) -> ChaosMask:
    """Largest exponent per grid point; chaotic where L1 > threshold, escape -> False."""
    grid = np.asarray(a8_grid, dtype=float)

    def one(a8):
        run = lyapunov_spectrum(p.with_(a8=float(a8)), s0, step, iterations,
                                transient=transient, trace_points=1, raise_on_escape=False)
        return run.status == "escaped", float(run.exponents[0])

    with ThreadPoolExecutor(max_workers=kernels.thread_count(threads)) as ex:
        res = list(ex.map(one, grid))
    escaped = np.array([r[0] for r in res])
    L1 = np.array([r[1] for r in res])
    chaotic = ~escaped & (np.nan_to_num(L1, nan=-np.inf) > threshold)
    return ChaosMask(grid, L1, chaotic, escaped)


def hysteresis_witness(a: BifurcationData, b: BifurcationData, lo: float = 0.0,
                       hi: float = 1.3) -> list[float]:
    """Grid values in (lo, hi) where the two scans' maxima lie on opposite signs only."""
    out = []
    for a8 in np.intersect1d(a.grid, b.grid):
        if not lo < a8 < hi:
            continue
        sa, sb = np.sign(a.maxima_at(a8)), np.sign(b.maxima_at(a8))
        if sa.size and sb.size and np.all(sa == sa[0]) and np.all(sb == -sa[0]):
            out.append(float(a8))
    return out


def write_csv(path, data: BifurcationData):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a8", "xmax"])
        for a8, x in zip(data.a8, data.xmax):
            w.writerow([format(a8, ".17g"), format(x, ".17g")])


def write_mask_csv(path, mask: ChaosMask):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a8", "L1"])
        for a8, L in zip(mask.a8, mask.L1):
            w.writerow([format(a8, ".17g"), format(L, ".17g")])
