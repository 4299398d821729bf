"""Vector fields of the quadratic system and its scaled / robot-coupled forms.

The system is

    x' = -a1 x + a2 x z + a3 y z
    y' =  a4 y - a5 x z
    z' = -a6 z + a7 x y + a8 z^2

and is invariant under the rotation (x, y, z) -> (-x, -y, z).
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, replace

import numpy as np


@dataclass(frozen=True)
class Params:
    """The eight coefficients a1..a8."""

    a1: float = 1.0
    a2: float = 1.0
    a3: float = 2.3
    a4: float = 2.0
    a5: float = 1.0
    a6: float = 6.0
    a7: float = 1.0
    a8: float = -0.25

    def __post_init__(self):
        for name, value in zip(self.names(), astuple(self)):
            if not math.isfinite(value):
                raise ValueError(f"coefficient {name} must be finite, got {value}")

    @staticmethod
    def names() -> tuple[str, ...]:
        return ("a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8")

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, values) -> "Params":
        vals = [float(v) for v in values]
        if len(vals) != 8:
            raise ValueError(f"expected 8 coefficients, got {len(vals)}")
        return cls(*vals)

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)


#: The chaotic parameter set used throughout (a8 = -0.25).
DEFAULT_PARAMS = Params()
#: The multistable regime with two chaotic and two fixed-point attractors.
MULTISTABLE_A8 = 1.2


@dataclass(frozen=True)
class ScaleSpec:
    """Amplitude divisors (w = x/s1, y/s2, z/s3) and the circuit time scale kappa."""

    s1: float = 3.0
    s2: float = 1.0
    s3: float = 1.0
    kappa: float = 1000.0

    def __post_init__(self):
        for name in ("s1", "s2", "s3", "kappa"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive real, got {value}")


def vector_field(p: Params, s) -> np.ndarray:
    x, y, z = (float(v) for v in s)
    return np.array([
        -p.a1 * x + p.a2 * x * z + p.a3 * y * z,
        p.a4 * y - p.a5 * x * z,
        -p.a6 * z + p.a7 * x * y + p.a8 * z * z,
    ])


def jacobian(p: Params, s) -> np.ndarray:
    """Row i is the gradient of component i of :func:`vector_field`."""
    x, y, z = (float(v) for v in s)
    return np.array([
        [p.a2 * z - p.a1, p.a3 * z, p.a2 * x + p.a3 * y],
        [-p.a5 * z, p.a4, -p.a5 * x],
        [p.a7 * y, p.a7 * x, 2.0 * p.a8 * z - p.a6],
    ])


def divergence(p: Params, s) -> float:
    # trace of the Jacobian: (a2 + 2 a8) z - (a1 - a4 + a6)
    z = float(s[2])
    return (p.a2 + 2.0 * p.a8) * z - (p.a1 - p.a4 + p.a6)


def scaled_params(p: Params, sc: ScaleSpec) -> Params:
    """Coefficients of the system written in w = (x/s1, y/s2, z/s3).

    Substituting x = s1 wx, y = s2 wy, z = s3 wz keeps the same quadratic
    form, so the scaled system is again a member of the family.
    """
    s1, s2, s3 = sc.s1, sc.s2, sc.s3
    return Params(
        p.a1,
        p.a2 * s3,
        p.a3 * s2 * s3 / s1,
        p.a4,
        p.a5 * s1 * s3 / s2,
        p.a6,
        p.a7 * s1 * s2 / s3,
        p.a8 * s3,
    )


def scaled_field(p: Params, sc: ScaleSpec, w) -> np.ndarray:
    """Field of the amplitude-scaled system, in dimensionless tau-time."""
    return vector_field(scaled_params(p, sc), w)


def unicycle_inputs(x: float, y: float, d: float, xmax: float) -> tuple[float, float]:
    """Forward speed and turn rate derived from the chaotic states.

    v = mod(|x + y|, xmax) / 2 and mu = (x - y) / d.
    """
    v = math.fmod(abs(x + y), xmax) / 2.0
    mu = (x - y) / d
    return v, mu


def robot_field(p: Params, d: float, xmax: float, s) -> np.ndarray:
    """Six-dimensional field: the chaotic system driving a unicycle (X, Y, theta)."""
    if d <= 0 or xmax <= 0:
        raise ValueError("wheel separation and xmax must be positive")
    x, y, z, _, _, theta = (float(v) for v in s)
    v, mu = unicycle_inputs(x, y, d, xmax)
    f = vector_field(p, (x, y, z))
    return np.array([f[0], f[1], f[2], v * math.cos(theta), v * math.sin(theta), mu])


class SystemField:
    """Callable field of the system, recognised by the integrator fast path."""

    def __init__(self, p: Params):
        self.params = p
        self._arr = p.as_array()

    def __call__(self, s) -> np.ndarray:
        return vector_field(self.params, s)

    @property
    def coefficients(self) -> np.ndarray:
        return self._arr

    def __repr__(self):
        return f"SystemField({self.params!r})"
