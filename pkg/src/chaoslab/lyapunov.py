"""Lyapunov spectrum, Kaplan-Yorke dimension and the divergence check.

The spectrum comes from RK4 integration of the state together with three
tangent vectors under the Jacobian, re-orthonormalized by modified
Gram-Schmidt (the Wolf construction done with variational equations).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import Params, divergence

DEFAULT_IC = (0.1001, 0.1003, 0.1003)


class EscapedError(RuntimeError):
    """The reference trajectory left the escape radius."""


@dataclass
class LyapunovRun:
    exponents: np.ndarray
    trace: np.ndarray
    step: float
    iterations: int
    renorm: int
    s0: tuple
    transient: float
    divergence_mean: float
    final_state: np.ndarray
    status: str = "completed"

    @property
    def total_time(self) -> float:
        return self.step * self.iterations

    @property
    def sum(self) -> float:
        return float(np.sum(self.exponents))

    @property
    def dimension(self) -> float:
        return kaplan_yorke(self.exponents)


def lyapunov_spectrum(p: Params, s0=DEFAULT_IC, step: float = 0.01,
                      iterations: int = 1_000_000, renorm: int = 1,
                      transient: float = 100.0, trace_points: int = 1000,
                      escape_radius: float = 1e6, raise_on_escape: bool = True) -> LyapunovRun:
    """Finite-time spectrum after discarding ``transient`` time units.

    The trace holds about ``trace_points`` running estimates ``(t, L1, L2, L3)``;
    its last row equals the returned exponents. The divergence average is
    taken over the same accumulation window.
    """
    if step <= 0 or iterations < 1 or renorm < 1:
        raise ValueError("need step > 0, iterations >= 1 and renorm >= 1")
    n_tr = int(round(transient / step))
    stride = max(1, iterations // max(1, trace_points))
    # keep trace rows aligned with renormalization instants
    stride = max(renorm, (stride // renorm) * renorm)
    sums, trace, status, final, div_mean, done = kernels.lyapunov_rk4(
        p.as_array(), np.asarray(s0, dtype=float), step, n_tr, iterations, renorm,
        stride, escape_radius)
    if status != kernels.COMPLETED:
        if raise_on_escape:
            raise EscapedError(f"trajectory escaped after {done} iterations")
        return LyapunovRun(np.full(3, math.nan), trace, step, done, renorm, tuple(s0),
                           transient, div_mean, final, "escaped")
    exps = np.sort(sums / (done * step))[::-1]
    trace = np.asarray(trace, dtype=float).copy()
    if len(trace):
        trace[:, 1:] = -np.sort(-trace[:, 1:], axis=1)
    return LyapunovRun(exps, trace, step, done, renorm, tuple(s0), transient, div_mean, final)


def kaplan_yorke(exponents) -> float:
    """D = j + (L1 + ... + Lj) / |L(j+1)| with j the largest index whose partial sum is >= 0."""
    L = np.asarray(exponents, dtype=float)
    if np.any(np.diff(L) > 0):
        raise ValueError("exponents must be sorted in descending order")
    if L[0] < 0:
        return 0.0
    partial = np.cumsum(L)
    j = int(np.max(np.flatnonzero(partial >= 0))) + 1
    if j == len(L):
        return float(len(L))
    return j + float(partial[j - 1]) / abs(float(L[j]))


def divergence_time_average(p: Params, traj) -> float:
    """Trapezoid time average of the divergence along a sampled trajectory."""
    t = np.asarray(traj.times, dtype=float)
    if len(t) < 2:
        raise ValueError("need at least two samples")
    # divergence is affine in z, so evaluate it vectorized
    d0 = divergence(p, (0.0, 0.0, 0.0))
    slope = divergence(p, (0.0, 0.0, 1.0)) - d0
    div = d0 + slope * np.asarray(traj.states)[:, 2]
    return float(np.sum(0.5 * (div[1:] + div[:-1]) * np.diff(t)) / (t[-1] - t[0]))


def write_trace_csv(path, run: LyapunovRun):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "L1", "L2", "L3"])
        for row in run.trace:
            w.writerow([format(v, ".17g") for v in row])
