"""Fixed-step RK4 and adaptive Dormand-Prince integration with event detection.

Fields are autonomous callables ``f(state) -> rate``. Instances of
:class:`~chaoslab.dynamics.SystemField` take the compiled fast path;
anything else runs through the generic numpy loops below.

Events are detected on the stored samples by sign-change bracketing and
refined by interpolation (quadratic for local maxima, linear for plane
crossings); integration is never restarted at an event.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, Union

import numpy as np

from . import kernels
from .dynamics import SystemField

COLUMN_NAMES = ("x", "y", "z", "X", "Y", "theta")


class StepUnderflowError(RuntimeError):
    """Adaptive step fell below 1e-14 * t_end (stiffness or a singularity)."""

    def __init__(self, t: float, h: float):
        super().__init__(f"step size underflow at t={t:.6g} (h={h:.3g})")
        self.t = t
        self.h = h


@dataclass
class IntegratorConfig:
    mode: str = "adaptive"
    step: float = 1e-3
    max_step: float = 1e-3
    rel_tol: float = 2.2204e-6
    abs_tol: float = 1e-9
    t_end: float = 500.0
    transient: float = 50.0
    escape_radius: float = 1e6
    stride: int = 1

    def validate(self) -> "IntegratorConfig":
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"mode must be 'fixed' or 'adaptive', got {self.mode!r}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        # max_step only bounds the adaptive controller
        if self.mode == "adaptive" and not self.step <= self.max_step:
            raise ValueError("need step <= max_step in adaptive mode")
        if self.rel_tol <= 0 or self.abs_tol < 0:
            raise ValueError("rel_tol must be positive and abs_tol non-negative")
        if not self.transient < self.t_end:
            raise ValueError("transient must be shorter than t_end")
        if self.escape_radius <= 0:
            raise ValueError("escape_radius must be positive")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        return self

    def with_(self, **changes) -> "IntegratorConfig":
        return replace(self, **changes)

    @property
    def min_step(self) -> float:
        return 1e-14 * self.t_end


# event specifications

@dataclass(frozen=True)
class LocalMax:
    coordinate: Union[int, str] = 0


@dataclass(frozen=True)
class PlaneCrossing:
    coordinate: Union[int, str] = 2
    level: float = 0.0
    direction: str = "both"


@dataclass(frozen=True)
class Proximity:
    """Terminates the run once the state stays within ``radius`` of ``point`` for ``dwell``."""

    point: tuple
    radius: float
    dwell: float = 0.0

    def __post_init__(self):
        if self.radius <= 0 or self.dwell < 0:
            raise ValueError("proximity needs radius > 0 and dwell >= 0")


EventSpec = Union[LocalMax, PlaneCrossing, Proximity]


@dataclass
class Event:
    time: float
    state: np.ndarray
    kind: str


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    terminal: str = "completed"
    events: list = field(default_factory=list)
    escape_time: float | None = None

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def after(self, t0: float) -> "Trajectory":
        """Samples with time >= t0; events are filtered the same way."""
        m = self.times >= t0
        return Trajectory(self.times[m], self.states[m], self.terminal,
                          [e for e in self.events if e.time >= t0], self.escape_time)

    def events_of(self, kind: str) -> list:
        return [e for e in self.events if e.kind == kind]


def coordinate_index(coordinate) -> int:
    if isinstance(coordinate, str):
        try:
            return COLUMN_NAMES.index(coordinate)
        except ValueError:
            raise ValueError(f"unknown coordinate {coordinate!r}") from None
    return int(coordinate)


# generic integrators

def _rk4_generic(f, s0, h, n_steps, stride, escape_radius):
    s = np.array(s0, dtype=float)
    times, rows = [0.0], [s.copy()]
    status, last = kernels.COMPLETED, 0
    for i in range(1, n_steps + 1):
        k1 = np.asarray(f(s), dtype=float)
        k2 = np.asarray(f(s + 0.5 * h * k1), dtype=float)
        k3 = np.asarray(f(s + 0.5 * h * k2), dtype=float)
        k4 = np.asarray(f(s + h * k3), dtype=float)
        sn = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.dot(sn, sn) <= escape_radius * escape_radius:
            status = kernels.ESCAPED
            break
        s, last = sn, i
        if i % stride == 0:
            times.append(i * h)
            rows.append(s.copy())
    if last % stride != 0:
        times.append(last * h)
        rows.append(s.copy())
    return np.array(times), np.array(rows), status


_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


def _dopri_generic(f, s0, t_end, h0, max_step, rtol, atol, escape_radius, min_step):
    s = np.array(s0, dtype=float)
    t, h = 0.0, min(h0, max_step)
    times, rows = [t], [s.copy()]
    status = kernels.COMPLETED
    k1 = np.asarray(f(s), dtype=float)
    while t < t_end:
        last = t + h >= t_end
        if last:
            h = t_end - t
        ks = [k1]
        for a in _A[1:]:
            ks.append(np.asarray(f(s + h * sum(c * k for c, k in zip(a, ks))), dtype=float))
        sn = s + h * sum(b * k for b, k in zip(_B, ks))
        k7 = np.asarray(f(sn), dtype=float)
        err_vec = h * sum(e * k for e, k in zip(_E, ks + [k7]))
        scale = atol + rtol * np.maximum(np.abs(s), np.abs(sn))
        err = float(np.max(np.abs(err_vec) / scale))
        if not math.isfinite(err):
            err = math.inf
        if err == 0.0:
            fac = 5.0
        elif math.isinf(err):
            fac = 0.2
        else:
            fac = min(5.0, max(0.2, 0.9 * err ** -0.2))
        if err <= 1.0:
            if not np.dot(sn, sn) <= escape_radius * escape_radius:
                status = kernels.ESCAPED
                break
            t = t_end if last else t + h
            s, k1 = sn, k7
            times.append(t)
            rows.append(s.copy())
            h = min(h * fac, max_step)
        else:
            h = h * fac
            if h < min_step:
                status = kernels.UNDERFLOW
                break
    return np.array(times), np.array(rows), status


def integrate(field: Callable, s0, cfg: IntegratorConfig | None = None,
              events: Sequence[EventSpec] = ()) -> Trajectory:
    """Integrate ``field`` from ``s0`` over [0, cfg.t_end].

    Escape (norm above ``cfg.escape_radius`` or a non-finite state) ends the
    run with ``terminal == "escaped"``; the offending step is not stored.
    A :class:`Proximity` event that fires truncates the run with
    ``terminal == "converged"``.

    Raises
    ------
    StepUnderflowError
        If the adaptive step collapses below ``1e-14 * t_end``.
    """
    cfg = (cfg or IntegratorConfig()).validate()
    s0 = np.atleast_1d(np.asarray(s0, dtype=float))
    if not np.all(np.isfinite(s0)):
        raise ValueError("initial state must be finite")

    fast = isinstance(field, SystemField) and s0.shape == (3,)
    if cfg.mode == "fixed":
        n_steps = int(round(cfg.t_end / cfg.step))
        if fast:
            t, S, status = kernels.rk4_path(field.coefficients, s0, cfg.step, n_steps,
                                            cfg.stride, cfg.escape_radius)
        else:
            t, S, status = _rk4_generic(field, s0, cfg.step, n_steps, cfg.stride,
                                        cfg.escape_radius)
    else:
        args = (s0, cfg.t_end, cfg.step, cfg.max_step, cfg.rel_tol, cfg.abs_tol,
                cfg.escape_radius, cfg.min_step)
        if fast:
            t, S, status = kernels.dopri_path(field.coefficients, *args)
        else:
            t, S, status = _dopri_generic(field, *args)
        if status == kernels.UNDERFLOW:
            raise StepUnderflowError(float(t[-1]), cfg.min_step)

    traj = Trajectory(t, S.reshape(len(t), -1))
    if status == kernels.ESCAPED:
        traj.terminal = "escaped"
        traj.escape_time = float(t[-1])
    _attach_events(traj, events)
    return traj


def _attach_events(traj: Trajectory, events: Sequence[EventSpec]):
    for spec in events:
        if isinstance(spec, Proximity):
            hit = _first_dwell(traj, spec)
            if hit is not None:
                i = hit
                traj.times = traj.times[:i + 1]
                traj.states = traj.states[:i + 1]
                traj.terminal = "converged"
                traj.escape_time = None
                traj.events.append(Event(float(traj.times[i]), traj.states[i].copy(), "converged"))
    for spec in events:
        if isinstance(spec, LocalMax):
            idx = coordinate_index(spec.coordinate)
            for tm, val in local_maxima(traj, idx):
                state = _interp_state(traj, tm)
                state[idx] = val
                traj.events.append(Event(tm, state, f"local-max:{COLUMN_NAMES[idx]}"))
        elif isinstance(spec, PlaneCrossing):
            for tc, sc in plane_crossings(traj, spec.coordinate, spec.level, spec.direction):
                traj.events.append(Event(tc, sc, f"crossing:{spec.direction}"))
    traj.events.sort(key=lambda e: e.time)


def _first_dwell(traj: Trajectory, spec: Proximity):
    d = traj.states - np.asarray(spec.point, dtype=float)
    inside = np.einsum("ij,ij->i", d, d) <= spec.radius ** 2
    start = None
    for i, flag in enumerate(inside):
        if not flag:
            start = None
            continue
        if start is None:
            start = traj.times[i]
        if traj.times[i] - start >= spec.dwell:
            return i
    return None


def _interp_state(traj: Trajectory, t: float) -> np.ndarray:
    return np.array([np.interp(t, traj.times, traj.states[:, j])
                     for j in range(traj.states.shape[1])])


def local_maxima(traj: Trajectory, coordinate=0) -> list[tuple[float, float]]:
    """Interior samples with v[i-1] < v[i] >= v[i+1], refined by a parabola.

    The parabola passes through the three bracketing samples; the vertex
    gives the refined (time, value). Returns an empty list for fewer than
    three samples.
    """
    idx = coordinate_index(coordinate)
    t = np.asarray(traj.times, dtype=float)
    v = np.asarray(traj.states[:, idx] if np.ndim(traj.states) == 2 else traj.states, dtype=float)
    if len(v) < 3:
        return []
    i = np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])) + 1
    if i.size == 0:
        return []
    t0, t1, t2 = t[i - 1], t[i], t[i + 1]
    v0, v1, v2 = v[i - 1], v[i], v[i + 1]
    # divided differences of the interpolating parabola
    d01 = (v1 - v0) / (t1 - t0)
    d12 = (v2 - v1) / (t2 - t1)
    curv = (d12 - d01) / (t2 - t0)
    out = []
    for k in range(i.size):
        if curv[k] < 0:
            tv = 0.5 * (t0[k] + t1[k]) - d01[k] / (2.0 * curv[k])
            tv = min(max(tv, t0[k]), t2[k])
            # Newton form of the parabola about t0, t1
            val =v0[k] + d01[k] * (tv - t0[k]) + curv[k] * (tv - t0[k]) * (tv - t1[k])
        else:
            tv, val = t1[k], v1[k]
        out.append((float(tv), float(val)))
    return out


def plane_crossings(traj: Trajectory, coordinate, level: float,
                    direction: str = "both") -> list[tuple[float, np.ndarray]]:
    """Linearly interpolated states where ``coordinate`` passes ``level``.

    ``direction`` is ``"up"``, ``"down"`` or ``"both"``. A sample lying exactly
    on the level counts once, as the end of the bracketing interval.
    """
    if direction not in ("up", "down", "both"):
        raise ValueError(f"direction must be up, down or both, got {direction!r}")
    idx = coordinate_index(coordinate)
    S = np.asarray(traj.states, dtype=float)
    t = np.asarray(traj.times, dtype=float)
    if len(t) < 2:
        return []
    a = S[:-1, idx] - level
    b = S[1:, idx] - level
    up = (a < 0) & (b >= 0)
    down = (a > 0) & (b <= 0)
    mask = {"up": up, "down": down, "both": up | down}[direction]
    out = []
    for k in np.flatnonzero(mask):
        frac = a[k] / (a[k] - b[k])
        state = S[k] + frac * (S[k + 1] - S[k])
        state[idx] = level
        out.append((float(t[k] + frac * (t[k + 1] - t[k])), state))
    return out


def write_csv(path, traj: Trajectory, extra: dict | None = None):
    """Write ``t,x,y,z[,X,Y,theta]`` plus any extra columns, 17 significant digits."""
    n_state = traj.states.shape[1]
    header = ["t"] + list(COLUMN_NAMES[:n_state])
    cols = [np.asarray(traj.times)] + [traj.states[:, j] for j in range(n_state)]
    for name, values in (extra or {}).items():
        header.append(name)
        cols.append(np.asarray(values))
    data = np.column_stack(cols)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in data:
            w.writerow([format(v, ".17g") for v in row])
