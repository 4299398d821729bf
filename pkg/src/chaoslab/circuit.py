"""Analog realization: resistor synthesis, realized coefficients, dynamic range.

The op-amp/multiplier circuit obeys, in tau = kappa t,

    W1' = -(R/R1) W1 + (R/10R2) W1 W3 + (R/10R3) W2 W3
    W2' = (R/R4)(R10/R9) W2 - (R/10R5) W1 W3
    W3' = -(R/R6) W3 + (R/10R7) W1 W2 + s8 (R/10R8) W3^2

with R = 1/(kappa C) and s8 = +-1 set by an inverting stage after U4. The
factor 10 is the 1/10 V scale of the AD633 multiplier. Matching these
coefficients against the amplitude-scaled system fixes R1..R8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Params, ScaleSpec, scaled_params, vector_field
from .integrate import IntegratorConfig, integrate
from .dynamics import SystemField

MULTIPLIER_GAIN = 10.0
DEFAULT_C = 1e-9
DEFAULT_R9 = DEFAULT_R10 = 100e3
RESISTOR_NAMES = tuple(f"R{i}" for i in range(1, 9))
# which resistors set multiplier terms (carry the 1/10 factor)
_MULT = (False, True, True, False, True, False, True, True)

E24 = (1.0, 1.1, 1.2, 1.3, 1.5, 1.6, 1.8, 2.0, 2.2, 2.4, 2.7, 3.0,
       3.3, 3.6, 3.9, 4.3, 4.7, 5.1, 5.6, 6.2, 6.8, 7.5, 8.2, 9.1)
E96 = tuple(round(10 ** (i / 96), 2) for i in range(96))


class SynthesisError(ValueError):
    pass


def _nearest_in_series(value: float, series) -> float:
    dec = math.floor(math.log10(value))
    best = None
    for d in (dec - 1, dec, dec + 1):
        for m in series:
            cand = m * 10.0 ** d
            if best is None or abs(math.log(cand / value)) < abs(math.log(best / value)):
                best = cand
    # strip float noise from m * 10**d
    return float(f"{best:.6g}")


def round_resistance(value: float, policy: str = "floor1k") -> float:
    """Apply a rounding policy: none, floor1k, E24 or E96 (nearest in log scale)."""
    if math.isinf(value):
        return value
    if policy == "none":
        return value
    if policy == "floor1k":
        # the epsilon keeps exact multiples such as 400k from dropping a step
        return 1000.0 * math.floor(value / 1000.0 + 1e-9)
    if policy == "E24":
        return _nearest_in_series(value, E24)
    if policy == "E96":
        return _nearest_in_series(value, E96)
    raise ValueError(f"unknown rounding policy {policy!r}")


@dataclass
class CircuitRealization:
    resistors: dict
    ideal: dict
    C: float
    R: float
    kappa: float
    R9: float
    R10: float
    invert_u4: bool
    scale: ScaleSpec
    target: Params
    rounding: str
    realized: Params = field(init=False)
    rel_error: dict = field(init=False)

    def __post_init__(self):
        self.realized, self.rel_error = realized_params(self)

    def ratios(self) -> np.ndarray:
        """Circuit coefficients b1..b8 from the stored resistances."""
        return _ratios(self.resistors, self.R, self.R9, self.R10, self.invert_u4)

    def table(self) -> list[tuple]:
        """Rows (name, ideal ohms, rounded ohms, realized coefficient, % error)."""
        rows = []
        for i, name in enumerate(RESISTOR_NAMES):
            a = Params.names()[i]
            rows.append((name, self.ideal[name], self.resistors[name],
                         getattr(self.realized, a), 100.0 * self.rel_error[a]))
        return rows


def _ratios(res, R, R9, R10, invert) -> np.ndarray:
    b = []
    for i, name in enumerate(RESISTOR_NAMES):
        g = R / res[name] if not math.isinf(res[name]) else 0.0
        if _MULT[i]:
            g /= MULTIPLIER_GAIN
        b.append(g)
    b[3] *= R10 / R9
    if invert:
        b[7] = -b[7]
    return np.array(b)


def synthesize(p: Params, sc: ScaleSpec = ScaleSpec(), C: float = DEFAULT_C,
               rounding: str = "floor1k", R9: float = DEFAULT_R9,
               R10: float = DEFAULT_R10) -> CircuitRealization:
    """Resistor values realizing ``p`` under amplitude scaling ``sc``.

    The topology fixes the signs of b1..b7 (all positive); only b8 may be
    negative, realized through the U4 inversion flag. a8 = 0 leaves R8 open
    (infinite).
    """
    if C <= 0 or R9 <= 0 or R10 <= 0:
        raise SynthesisError("C, R9 and R10 must be positive")
    R = 1.0 / (sc.kappa * C)
    b = scaled_params(p, sc).as_array()
    ideal = {}
    for i, name in enumerate(RESISTOR_NAMES):
        coef = Params.names()[i]
        bi = b[i]
        if i == 7:
            if bi == 0.0:
                ideal[name] = math.inf
                continue
            bi = abs(bi)
        elif bi == 0.0:
            raise SynthesisError(f"coefficient {coef} is zero; {name} would be infinite")
        elif bi < 0.0:
            raise SynthesisError(f"coefficient {coef} is negative; the topology fixes its sign")
        if i == 3:
            bi = bi * R9 / R10
        ideal[name] = R / (MULTIPLIER_GAIN * bi) if _MULT[i] else R / bi
    rounded = {k: round_resistance(v, rounding) for k, v in ideal.items()}
    for k, v in rounded.items():
        if not v > 0:
            raise SynthesisError(f"{k} rounds to a non-positive value ({ideal[k]:.6g} ohm)")
    return CircuitRealization(rounded, ideal, C, R, sc.kappa, R9, R10, b[7] < 0, sc, p, rounding)


def realized_params(cr: CircuitRealization) -> tuple[Params, dict]:
    """Invert the synthesis map on the stored resistances.

    Returns the realized coefficients in the original (unscaled) variables
    and the relative error of each against the target.
    """
    b = cr.ratios()
    s1, s2, s3 = cr.scale.s1, cr.scale.s2, cr.scale.s3
    a = Params(b[0], b[1] / s3, b[2] * s1 / (s2 * s3), b[3], b[4] * s2 / (s1 * s3),
               b[5], b[6] * s3 / (s1 * s2), b[7] / s3)
    err = {}
    for name in Params.names():
        want, got = getattr(cr.target, name), getattr(a, name)
        err[name] = 0.0 if want == got else abs(got - want) / abs(want)
    return a, err


def circuit_params(cr: CircuitRealization) -> Params:
    """The circuit's coefficients as a member of the system family (tau-time)."""
    return Params.from_array(cr.ratios())


def circuit_field(cr: CircuitRealization, W) -> np.ndarray:
    return vector_field(circuit_params(cr), W)


def physical_time(tau, kappa: float):
    """Seconds corresponding to dimensionless time tau."""
    return np.asarray(tau) / kappa


@dataclass
class RangeReport:
    maxima: np.ndarray
    rail: float
    passed: bool
    diagnostic: str = ""


def dynamic_range(p: Params, sc: ScaleSpec = ScaleSpec(), rail: float = 10.0,
                  s0=(1.0, -1.0, 0.0), t_run: float = 1000.0, transient: float = 50.0,
                  cfg: IntegratorConfig | None = None) -> RangeReport:
    """Per-channel max |w| of the scaled system over ``t_run`` after a transient."""
    if rail <= 0:
        raise ValueError("rail must be positive")
    w0 = np.asarray(s0, dtype=float) / np.array([sc.s1, sc.s2, sc.s3])
    cfg = (cfg or IntegratorConfig()).with_(t_end=transient + t_run, transient=transient)
    traj = integrate(SystemField(scaled_params(p, sc)), w0, cfg)
    if traj.terminal == "escaped":
        return RangeReport(np.full(3, math.inf), rail, False,
                           f"trajectory escaped at tau={traj.escape_time:.6g}")
    tail = traj.after(transient).states
    mx = np.max(np.abs(tail), axis=0)
    ok = bool(np.all(mx < rail))
    return RangeReport(mx, rail, ok, "" if ok else "amplitude exceeds rail")


def bom_text(cr: CircuitRealization) -> str:
    """Bill of materials: component, ideal value, rounded value, realized coefficient, % error."""
    lines = [f"# R = {cr.R:.6g} ohm, C = {cr.C:.6g} F, kappa = {cr.kappa:.6g} 1/s, "
             f"rounding = {cr.rounding}",
             f"{'component':<10}{'ideal_ohm':>16}{'rounded_ohm':>16}{'realized':>14}{'error_%':>10}"]
    for name, ideal, rounded, coef, pct in cr.table():
        lines.append(f"{name:<10}{ideal:>16.6g}{rounded:>16.6g}{coef:>14.6g}{pct:>10.3f}")
    lines.append(f"{'R9':<10}{cr.R9:>16.6g}{cr.R9:>16.6g}{'':>14}{'':>10}")
    lines.append(f"{'R10':<10}{cr.R10:>16.6g}{cr.R10:>16.6g}{'':>14}{'':>10}")
    lines.append(f"{'C':<10}{cr.C:>16.6g}{cr.C:>16.6g}{'':>14}{'':>10}")
    lines.append(f"U4 output inverted: {'yes' if cr.invert_u4 else 'no'}")
    return "\n".join(lines) + "\n"


def resistance_list(cr: CircuitRealization) -> str:
    """Compact list such as ``R1 = 1M, R2 = 100k, ...``."""
    def fmt(v):
        if math.isinf(v):
            return "open"
        for unit, div in (("M", 1e6), ("k", 1e3)):
            if v >= div:
                return f"{v / div:g}{unit}"
        return f"{v:g}"
    return ", ".join(f"{k} = {fmt(cr.resistors[k])}" for k in RESISTOR_NAMES)
