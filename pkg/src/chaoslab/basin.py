"""Basins of attraction in the multistable regime and the basin-size power law.

Each initial condition is integrated until it either dwells near one of the
fixed-point attractors E5/E6, or makes ``n_crossings`` consecutive downward
crossings of the section z = r- with the same sign of x (chaotic-1 for
x < 0, chaotic-2 for x > 0). Blow-up or step underflow counts as escaped.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import kernels
from .dynamics import Params, SystemField
from .equilibria import equilibria
from .integrate import IntegratorConfig, integrate


class AttractorLabel(enum.IntEnum):
    UNDECIDED = kernels.LABEL_UNDECIDED
    CHAOTIC_1 = kernels.LABEL_CHAOTIC_1
    CHAOTIC_2 = kernels.LABEL_CHAOTIC_2
    FIXED_1 = kernels.LABEL_FIXED_1
    FIXED_2 = kernels.LABEL_FIXED_2
    ESCAPED = kernels.LABEL_ESCAPED

    @property
    def text(self) -> str:
        return _TEXT[self]

    @classmethod
    def from_text(cls, s: str) -> "AttractorLabel":
        for k, v in _TEXT.items():
            if v == s:
                return k
        raise ValueError(f"unknown label {s!r}")

    @property
    def in_basin(self) -> bool:
        return self in (AttractorLabel.CHAOTIC_1, AttractorLabel.CHAOTIC_2,
                        AttractorLabel.FIXED_1, AttractorLabel.FIXED_2)


_TEXT = {
    AttractorLabel.UNDECIDED: "undecided",
    AttractorLabel.CHAOTIC_1: "chaotic-1",
    AttractorLabel.CHAOTIC_2: "chaotic-2",
    AttractorLabel.FIXED_1: "fixed-point-1",
    AttractorLabel.FIXED_2: "fixed-point-2",
    AttractorLabel.ESCAPED: "escaped",
}

# label of the mirror image (x, y) -> (-x, -y)
MIRROR = np.array([0, 2, 1, 4, 3, 5], dtype=np.int8)

# Fig. 4 style colours
COLOURS = {
    AttractorLabel.UNDECIDED: (255, 255, 255),
    AttractorLabel.CHAOTIC_1: (0, 160, 0),
    AttractorLabel.CHAOTIC_2: (220, 0, 0),
    AttractorLabel.FIXED_1: (200, 0, 200),
    AttractorLabel.FIXED_2: (0, 0, 220),
    AttractorLabel.ESCAPED: (255, 255, 255),
}


@dataclass(frozen=True)
class ClassifierConfig:
    fp_radius: float = 0.05
    fp_dwell: float = 20.0
    n_crossings: int = 10
    t_max: float = 2000.0
    escape_radius: float = 1e6
    transient: float = 50.0
    exclusion_radius: float = 0.5
    step: float = 1e-2
    max_step: float = 0.05
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9

    def __post_init__(self):
        for name in ("fp_radius", "fp_dwell", "n_crossings", "t_max", "escape_radius",
                     "step", "max_step", "rel_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.transient < 0 or self.exclusion_radius < 0 or self.abs_tol < 0:
            raise ValueError("transient, exclusion_radius and abs_tol must be non-negative")

    def with_(self, **changes) -> "ClassifierConfig":
        return replace(self, **changes)


def _targets(p: Params, level: float | None):
    es = equilibria(p)
    fps = [es.points[k] for k in ("E5", "E6") if es.valid[k]]
    if len(fps) != 2:
        # labels FIXED_1/FIXED_2 are positional, so drop both if the pair is missing
        fps = []
    if level is None:
        level = es.r_minus
    return np.array(fps, dtype=float).reshape(-1, 3), float(level)


def classify_batch(p: Params, ics, cfg: ClassifierConfig = ClassifierConfig(),
                   level: float | None = None, escape_radii=None,
                   threads: int | None = None) -> np.ndarray:
    """Labels (int8 codes of :class:`AttractorLabel`) for an (n, 3) array of ICs."""
    ics = np.ascontiguousarray(np.asarray(ics, dtype=float).reshape(-1, 3))
    fps, level = _targets(p, level)
    esc = cfg.escape_radius if escape_radii is None else escape_radii
    esc = np.ascontiguousarray(np.broadcast_to(np.asarray(esc, dtype=float), (len(ics),)))
    return np.asarray(kernels.classify_batch(
        p.as_array(), ics, cfg.t_max, cfg.step, cfg.max_step, cfg.rel_tol, cfg.abs_tol,
        level, fps, cfg.fp_radius, cfg.fp_dwell, cfg.n_crossings, esc, 1e-14 * cfg.t_max,
        cfg.transient, cfg.exclusion_radius, kernels.thread_count(threads)), dtype=np.int8)


def classify_ic(p: Params, s0, cfg: ClassifierConfig = ClassifierConfig(),
                level: float | None = None) -> AttractorLabel:
    return AttractorLabel(int(classify_batch(p, [s0], cfg, level, threads=1)[0]))


@dataclass(frozen=True)
class GridSpec:
    x_range: tuple = (-10.0, 10.0)
    y_range: tuple = (-10.0, 10.0)
    nx: int = 200
    ny: int = 200
    level: float | None = None

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell per axis")
        if not (self.x_range[1] > self.x_range[0] and self.y_range[1] > self.y_range[0]):
            raise ValueError("empty grid window")

    def centres(self) -> tuple[np.ndarray, np.ndarray]:
        x0, x1 = self.x_range
        y0, y1 = self.y_range
        xs = x0 + (np.arange(self.nx) + 0.5) * (x1 - x0) / self.nx
        ys = y0 + (np.arange(self.ny) + 0.5) * (y1 - y0) / self.ny
        return xs, ys


@dataclass
class BasinGrid:
    spec: GridSpec
    level: float
    labels: np.ndarray  # (ny, nx), row j <-> ys[j]
    cfg: ClassifierConfig

    @property
    def xs(self):
        return self.spec.centres()[0]

    @property
    def ys(self):
        return self.spec.centres()[1]

    def fractions(self) -> dict:
        counts = np.bincount(self.labels.ravel(), minlength=6)
        return {AttractorLabel(i).text: counts[i] / self.labels.size for i in range(6)}

    def composite_fraction(self) -> float:
        return float(np.mean(np.isin(self.labels, (1, 2, 3, 4))))

    def wrong_side(self) -> tuple[int, int]:
        """(cells with x<0 labelled chaotic-2, cells with x>0 labelled chaotic-1)."""
        X = np.broadcast_to(self.xs[None, :], self.labels.shape)
        return (int(np.sum((X < 0) & (self.labels == AttractorLabel.CHAOTIC_2))),
                int(np.sum((X > 0) & (self.labels == AttractorLabel.CHAOTIC_1))))

    def mirror_violations(self) -> tuple[int, int]:
        """(violations, decided cells) comparing each cell with its mirror image.

        Only meaningful on windows symmetric about the origin.
        """
        L = self.labels
        flipped = MIRROR[L[::-1, ::-1]]
        decided = (L != AttractorLabel.UNDECIDED) & (flipped != AttractorLabel.UNDECIDED)
        return int(np.sum((L != flipped) & decided)), int(np.sum(decided))

    def write_csv(self, path):
        xs, ys = self.spec.centres()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x0", "y0", "label"])
            for j, y in enumerate(ys):
                for i, x in enumerate(xs):
                    w.writerow([format(x, ".17g"), format(y, ".17g"),
                                AttractorLabel(int(self.labels[j, i])).text])

    def write_ppm(self, path):
        """Binary PPM, top row = largest y."""
        ny, nx = self.labels.shape
        lut = np.array([COLOURS[AttractorLabel(i)] for i in range(6)], dtype=np.uint8)
        img = lut[self.labels[::-1]]
        with open(path, "wb") as fh:
            fh.write(f"P6\n{nx} {ny}\n255\n".encode())
            fh.write(img.tobytes())


def basin_grid(p: Params, spec: GridSpec = GridSpec(), cfg: ClassifierConfig = ClassifierConfig(),
               threads: int | None = None) -> BasinGrid:
    _, level = _targets(p, spec.level)
    xs, ys = spec.centres()
    X, Y = np.meshgrid(xs, ys)
    ics = np.column_stack([X.ravel(), Y.ravel(), np.full(X.size, level)])
    lab = classify_batch(p, ics, cfg, level, threads=threads)
    return BasinGrid(spec, level, lab.reshape(spec.ny, spec.nx), cfg)


# basin size scaling

class ScalingFitError(ValueError):
    """Too few usable radii for the power-law fit."""


@dataclass
class ScalingFit:
    radii: np.ndarray
    probability: np.ndarray
    samples: int
    gamma: float
    P0: float
    residual: float
    basin_class: int
    fit_mask: np.ndarray


def basin_class(gamma: float, P0: float, dim: int = 3, gamma_tol: float = 0.01,
                p0_tol: float = 0.02) -> int:
    """Four-class rule on the fitted P(r) = P0 / r^gamma.

    1: gamma = 0 and P0 = 1 (attracts almost everything); 2: gamma = 0 and
    P0 < 1; 3: 0 < gamma < dim; 4: gamma = dim (bounded basin). Equalities
    hold within the given tolerances.
    """
    if not (math.isfinite(gamma) and math.isfinite(P0)):
        raise ValueError("gamma and P0 must be finite")
    if gamma <= gamma_tol:
        return 1 if P0 >= 1.0 - p0_tol else 2
    if gamma >= dim - gamma_tol:
        return 4
    return 3


def fit_power_law(radii, P, tail_from: float | None = None) -> tuple[float, float, float, np.ndarray]:
    """Least-squares fit of log P = log P0 - gamma log r.

    Uses radii >= ``tail_from`` (default: 10 x the smallest radius, or all
    radii when that leaves fewer than three) with P > 0. Returns
    (gamma, P0, rms residual in log P, mask of fitted points).
    """
    r = np.asarray(radii, dtype=float)
    P = np.asarray(P, dtype=float)
    if np.any(np.diff(r) <= 0) or np.any(r <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    if tail_from is None:
        tail_from = 10.0 * r[0]
        if np.sum((r >= tail_from) & (P > 0)) < 3:
            tail_from = r[0]
    m = (r >= tail_from) & (P > 0)
    if np.sum(m) < 3:
        raise ScalingFitError(f"only {int(np.sum(m))} radii with P > 0 in the fit range; need 3")
    A = np.column_stack([np.ones(int(np.sum(m))), -np.log(r[m])])
    coef, *_ = np.linalg.lstsq(A, np.log(P[m]), rcond=None)
    logP0, gamma = coef
    res = np.log(P[m]) - A @ coef
    return float(gamma), float(math.exp(logP0)), float(np.sqrt(np.mean(res ** 2))), m


def attractor_centroid(p: Params, s0=(1.0, -1.0, 0.0), t_end: float = 1100.0,
                       transient: float = 100.0) -> np.ndarray:
    """Time average of a reference trajectory (chaotic-2 from (1, -1, 0) at a8 = 1.2)."""
    cfg = IntegratorConfig(step=1e-3, max_step=0.01, rel_tol=1e-8, abs_tol=1e-10,
                           t_end=t_end, transient=transient)
    tr = integrate(SystemField(p), s0, cfg)
    if tr.terminal != "completed":
        raise RuntimeError("reference trajectory for the centroid did not complete")
    tr = tr.after(transient)
    w = np.diff(tr.times)
    mid = 0.5 * (tr.states[1:] + tr.states[:-1])
    return (mid * w[:, None]).sum(axis=0) / w.sum()


def sample_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    d = rng.normal(size=(n, 3))
    return d / np.linalg.norm(d, axis=1)[:, None]


def basin_scaling(p: Params, radii, samples_per_radius: int = 1000, seed: int = 0,
                  cfg: ClassifierConfig = ClassifierConfig(), include_fixed: bool = True,
                  centroid=None, tail_from: float | None = None,
                  in_basin: Callable | None = None, threads: int | None = None) -> ScalingFit:
    """P(r) of landing in the composite basin from random points at distance r.

    Directions are uniform on the sphere around the attractor centroid;
    radius i draws from ``default_rng([seed, i])``. Escape thresholds scale as
    max(cfg.escape_radius, 1e3 r). ``in_basin(ics, r, rng)`` replaces the
    classifier (used for synthetic fixtures).
    """
    radii = np.asarray(radii, dtype=float)
    if samples_per_radius < 100:
        raise ValueError("samples_per_radius must be at least 100")
    if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    if in_basin is None:
        cen = attractor_centroid(p) if centroid is None else np.asarray(centroid, dtype=float)
    else:
        cen = np.zeros(3) if centroid is None else np.asarray(centroid, dtype=float)
    keep = (1, 2, 3, 4) if include_fixed else (1, 2)
    P = np.empty(len(radii))
    for i, r in enumerate(radii):
        rng = np.random.default_rng([seed, i])
        ics = cen + r * sample_directions(rng, samples_per_radius)
        if in_basin is not None:
            hit = np.asarray(in_basin(ics, r, rng), dtype=bool)
        else:
            esc = max(cfg.escape_radius, 1e3 * r)
            lab = classify_batch(p, ics, cfg.with_(escape_radius=esc), threads=threads)
            hit = np.isin(lab, keep)
        P[i] = float(np.mean(hit))
    gamma, P0, res, mask = fit_power_law(radii, P, tail_from)
    return ScalingFit(radii, P, samples_per_radius, gamma, P0, res, basin_class(gamma, P0), mask)


def write_scaling_csv(path, fit: ScalingFit):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "P"])
        for r, P in zip(fit.radii, fit.probability):
            w.writerow([format(r, ".17g"), format(P, ".17g")])
