"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``CHAOSLAB_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the pure-Python module is used. ``BACKEND`` names the
active one.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("CHAOSLAB_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "compiled"

rk4_path = _impl.rk4_path
dopri_path = _impl.dopri_path
lyapunov_rk4 = _impl.lyapunov_rk4
classify_batch = _impl.classify_batch
robot_rk4_path = _impl.robot_rk4_path

COMPLETED = _kernels_py.COMPLETED
ESCAPED = _kernels_py.ESCAPED
UNDERFLOW = _kernels_py.UNDERFLOW

LABEL_UNDECIDED = _kernels_py.LABEL_UNDECIDED
LABEL_CHAOTIC_1 = _kernels_py.LABEL_CHAOTIC_1
LABEL_CHAOTIC_2 = _kernels_py.LABEL_CHAOTIC_2
LABEL_FIXED_1 = _kernels_py.LABEL_FIXED_1
LABEL_FIXED_2 = _kernels_py.LABEL_FIXED_2
LABEL_ESCAPED = _kernels_py.LABEL_ESCAPED

python_backend = _kernels_py


def compiled_backend():
    """Return the compiled module, or None if it was not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


def thread_count(requested=None) -> int:
    """Worker cap: explicit value, else CHAOSLAB_THREADS, else all cores."""
    if requested:
        return max(1, int(requested))
    env = os.environ.get("CHAOSLAB_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
