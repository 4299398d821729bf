"""Simulation and analysis toolkit for a quadratic 3-D chaotic system."""

__version__ = "0.1.0"

from .dynamics import (MULTISTABLE_A8, DEFAULT_PARAMS, Params, ScaleSpec, SystemField,
                       divergence, jacobian, robot_field, scaled_field, scaled_params,
                       vector_field)
from .kernels import BACKEND

__all__ = [
    "BACKEND", "MULTISTABLE_A8", "DEFAULT_PARAMS", "Params", "ScaleSpec", "SystemField",
    "divergence", "jacobian", "robot_field", "scaled_field", "scaled_params", "vector_field",
]
