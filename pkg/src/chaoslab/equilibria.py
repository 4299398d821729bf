"""Equilibrium points, their eigenvalues, and stability sweeps over a8.

Besides the origin E1 and E2 = (0, 0, a6/a8) there are two symmetric pairs
on the planes z = r+ and z = r-. Labels follow the attractor picture of the
multistable regime: E5/E6 is the pair at z = r- that turns stable as a8
grows (the fixed-point attractors of the basin maps), E3/E4 the pair at
z = r+ that stays unstable.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Params, jacobian, vector_field

EPS_STAB = 1e-6
EQ_IDS = ("E1", "E2", "E3", "E4", "E5", "E6")


class ParameterDegenerateError(ValueError):
    """A closed-form formula would divide by a zero coefficient."""

    def __init__(self, coefficient: str):
        super().__init__(f"coefficient {coefficient} must be nonzero for closed-form equilibria")
        self.coefficient = coefficient


class NotAnEquilibriumError(ValueError):
    pass


@dataclass
class EquilibriumSet:
    points: dict
    valid: dict
    r_plus: float
    r_minus: float
    p_plus: float
    p_minus: float
    q_plus: float
    q_minus: float

    def __getitem__(self, eq_id: str) -> np.ndarray:
        if not self.valid.get(eq_id, False):
            raise KeyError(f"{eq_id} does not exist for these parameters")
        return self.points[eq_id]

    def present(self) -> list[str]:
        return [k for k in EQ_IDS if self.valid[k]]


def residual(p: Params, s) -> float:
    return float(np.max(np.abs(vector_field(p, s))))   # max-norm: no overflow from squaring


def _residual_ok(p: Params, s) -> bool:
    return residual(p, s) < 1e-9 * (1.0 + float(np.max(np.abs(s))))


def equilibria(p: Params) -> EquilibriumSet:
    """Closed-form equilibria.

    r+- solve a3 a5 r^2 + a1 a4 r - a1 a4 = 0, p+- = sqrt(a4 (a6 - a8 r+-) / (a7 a5))
    and q+- = (a5 / a4) p+- r+-. Points whose radicand is negative (or whose r
    is complex) are marked invalid; E2 is invalid at a8 = 0
    (or when a6/a8 overflows).
    """
    for name in ("a3", "a5", "a4", "a7"):
        if getattr(p, name) == 0.0:
            raise ParameterDegenerateError(name)
    nan = math.nan
    pts = {k: np.full(3, nan) for k in EQ_IDS}
    ok = dict.fromkeys(EQ_IDS, False)
    pts["E1"] = np.zeros(3)
    ok["E1"] = True
    z2 = p.a6 / p.a8 if p.a8 != 0.0 else math.inf
    if math.isfinite(z2):   # a8 so small that a6/a8 overflows puts E2 at infinity
        pts["E2"] = np.array([0.0, 0.0, z2])
        ok["E2"] = True

    b = p.a1 * p.a4
    disc = b * b + 4.0 * p.a3 * p.a5 * b
    rp = rm = pp = pm = qp = qm = nan
    if disc >= 0.0:
        sq = math.sqrt(disc)
        den = 2.0 * p.a3 * p.a5
        rp = (-b + sq) / den
        rm = (-b - sq) / den
        vals = {}
        for tag, r in (("+", rp), ("-", rm)):
            rad = p.a4 * (p.a6 - p.a8 * r) / (p.a7 * p.a5)
            if rad >= 0.0:
                pr = math.sqrt(rad)
                vals[tag] = (pr, p.a5 / p.a4 * pr * r, r)
        if "+" in vals:
            pp, qp, _ = vals["+"]
            pts["E3"] = np.array([pp, qp, rp])
            pts["E4"] = np.array([-pp, -qp, rp])
            ok["E3"] = ok["E4"] = True
        if "-" in vals:
            pm, qm, _ = vals["-"]
            pts["E5"] = np.array([-pm, -qm, rm])
            pts["E6"] = np.array([pm, qm, rm])
            ok["E5"] = ok["E6"] = True
    return EquilibriumSet(pts, ok, rp, rm, pp, pm, qp, qm)


def characteristic_coefficients(J) -> tuple[float, float, float]:
    """(c2, c1, c0) of det(lambda I - J) = lambda^3 + c2 lambda^2 + c1 lambda + c0."""
    J = np.asarray(J, dtype=float)
    tr = J[0, 0] + J[1, 1] + J[2, 2]
    minors = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
              + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
              + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
    det = float(np.linalg.det(J))
    return -tr, minors, -det


def _poly(c, lam):
    c2, c1, c0 = c
    return ((lam + c2) * lam + c1) * lam + c0


def cubic_roots(c2: float, c1: float, c0: float) -> list[complex]:
    """Roots of lambda^3 + c2 lambda^2 + c1 lambda + c0 (Cardano / trigonometric form).

    Falls back to companion-matrix eigenvalues when any root fails the
    residual test |poly| < 1e-8 (1 + |lambda|^3).
    """
    shift = c2 / 3.0
    pp = c1 - c2 * c2 / 3.0
    qq = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (qq / 2.0) ** 2 + (pp / 3.0) ** 3
    if pp == 0.0 and qq == 0.0:
        ts = [0.0, 0.0, 0.0]
    elif disc > 0.0:
        sq = math.sqrt(disc)
        u = math.copysign(abs(-qq / 2.0 + sq) ** (1 / 3), -qq / 2.0 + sq)
        v = math.copysign(abs(-qq / 2.0 - sq) ** (1 / 3), -qq / 2.0 - sq)
        w = cmath.exp(2j * math.pi / 3)
        ts = [u + v, u * w + v * w.conjugate(), u * w.conjugate() + v * w]
    else:
        m = 2.0 * math.sqrt(-pp / 3.0)
        arg = 3.0 * qq / (pp * m) if pp != 0.0 else 0.0
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        ts = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    roots = [complex(t) - shift for t in ts]
    c = (c2, c1, c0)
    if all(abs(_poly(c, r)) < 1e-8 * (1.0 + abs(r) ** 3) for r in roots):
        return roots
    return [complex(r) for r in np.roots([1.0, c2, c1, c0])]


def _sort_desc(roots) -> np.ndarray:
    # descending real part; ties broken by descending imaginary part
    return np.array(sorted(roots, key=lambda z: (-z.real, -z.imag)), dtype=complex)


def eigenvalues_at(p: Params, E, check: bool = True) -> np.ndarray:
    """Eigenvalues of the Jacobian at equilibrium ``E``, sorted by descending real part."""
    E = np.asarray(E, dtype=float)
    if check and not _residual_ok(p, E):
        raise NotAnEquilibriumError(f"state {E.tolist()} is not an equilibrium "
                                    f"(residual {residual(p, E):.3g})")
    return _sort_desc(cubic_roots(*characteristic_coefficients(jacobian(p, E))))


def classify(eigs, eps: float = EPS_STAB) -> str:
    re = np.real(eigs)
    n_up = int(np.sum(re > eps))
    if n_up == 0:
        return "stable" if np.all(re < -eps) else "marginally-stable"
    if n_up == len(re):
        return "unstable"
    return f"saddle({n_up})"


@dataclass
class StabilityReport:
    a8: float
    eq_id: str
    present: bool
    point: np.ndarray = field(default_factory=lambda: np.full(3, math.nan))
    eigenvalues: np.ndarray = field(default_factory=lambda: np.full(3, complex(math.nan, math.nan)))
    classification: str = "absent"

    @property
    def max_real(self) -> float:
        return float(np.max(np.real(self.eigenvalues))) if self.present else math.nan

    @property
    def n_unstable(self) -> int:
        return int(np.sum(np.real(self.eigenvalues) > EPS_STAB)) if self.present else 0

    @property
    def unstable(self) -> bool:
        return self.present and self.max_real > EPS_STAB


def stability_report(p: Params, eq_id: str) -> StabilityReport:
    if eq_id not in EQ_IDS:
        raise ValueError(f"unknown equilibrium {eq_id!r}; expected one of {EQ_IDS}")
    es = equilibria(p)
    if not es.valid[eq_id]:
        return StabilityReport(p.a8, eq_id, False)
    E = es.points[eq_id]
    eig = eigenvalues_at(p, E)
    return StabilityReport(p.a8, eq_id, True, E.copy(), eig, classify(eig))


def stability_sweep(p: Params, a8_grid, which: str = "E6") -> list[StabilityReport]:
    grid = np.asarray(a8_grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise ValueError("a8 grid must be finite")
    if np.any(np.diff(grid) < 0):
        raise ValueError("a8 grid must be sorted ascending")
    ids = EQ_IDS if which == "all" else (which,)
    return [stability_report(p.with_(a8=float(a)), k) for a in grid for k in ids]


def write_csv(path, reports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a8", "eq_id", "re1", "im1", "re2", "im2", "re3", "im3", "class"])
        for r in reports:
            row = [format(r.a8, ".17g"), r.eq_id]
            for lam in r.eigenvalues:
                row += [format(lam.real, ".17g"), format(lam.imag, ".17g")]
            row.append(r.classification)
            w.writerow(row)
