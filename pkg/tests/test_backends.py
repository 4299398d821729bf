"""The compiled kernels and the pure-Python fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from chaoslab import kernels
from chaoslab.basin import _targets
from chaoslab.dynamics import Params

compiled = kernels.compiled_backend()
py = kernels.python_backend
pytestmark = pytest.mark.skipif(compiled is None, reason="compiled extension not built")

P = Params().as_array()
P12 = Params(a8=1.2).as_array()
S0 = np.array([0.1001, 0.1003, 0.1003])


def test_rk4_path():
    a = compiled.rk4_path(P, S0, 0.01, 2000, 7, 1e6)
    b = py.rk4_path(P, S0, 0.01, 2000, 7, 1e6)
    assert a[2] == b[2]
    assert np.array_equal(a[0], b[0])
    assert np.allclose(a[1], b[1], rtol=0, atol=1e-12)


def test_rk4_escape_status():
    big = np.array([1e5, 1e5, 1e5])
    a = compiled.rk4_path(P, big, 0.01, 1000, 1, 1e6)
    b = py.rk4_path(P, big, 0.01, 1000, 1, 1e6)
    assert a[2] == b[2] == kernels.ESCAPED
    assert len(a[0]) == len(b[0])


def test_dopri_path():
    args = (S0, 20.0, 1e-3, 1e-2, 1e-8, 1e-10, 1e6, 1e-13)
    a = compiled.dopri_path(P, *args)
    b = py.dopri_path(P, *args)
    assert a[2] == b[2] == kernels.COMPLETED
    assert len(a[0]) == len(b[0])
    assert np.allclose(a[1], b[1], rtol=0, atol=1e-9)


def test_lyapunov():
    a = compiled.lyapunov_rk4(P, S0, 0.01, 100, 5000, 1, 500, 1e6)
    b = py.lyapunov_rk4(P, S0, 0.01, 100, 5000, 1, 500, 1e6)
    assert np.allclose(a[0], b[0], rtol=1e-10, atol=1e-10)
    assert a[-1] == b[-1]


def test_classify_batch():
    fps, level = _targets(Params(a8=1.2), None)
    ics = np.array([[1, -1, 0], [-1, 1, 0], [3.95, -2.87, -1.45], [1e4, 1e4, 1e4]], dtype=float)
    esc = np.full(len(ics), 1e6)
    args = (ics, 2000.0, 1e-2, 0.05, 1e-6, 1e-9, level, fps, 0.05, 20.0, 10, esc, 2e-11, 50.0, 0.5)
    a = compiled.classify_batch(P12, *args, 2)
    b = py.classify_batch(P12, *args, 1)
    assert np.array_equal(np.asarray(a), np.asarray(b))


@pytest.mark.parametrize("bounds", [None, (0.0, 10.0, 0.0, 10.0)])
def test_robot_path(bounds):
    s0 = np.array([0.1, -0.1, 0.0, 5.0, 5.0, 0.0])
    a = compiled.robot_rk4_path(P, 0.08, 31.596, s0, 0.005, 4000, 10, bounds)
    b = py.robot_rk4_path(P, 0.08, 31.596, s0, 0.005, 4000, 10, bounds)
    assert np.array_equal(a[0], b[0])
    assert np.allclose(a[1], b[1], rtol=0, atol=1e-9)


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")
    assert kernels.thread_count(3) == 3 and kernels.thread_count() >= 1


def test_env_forces_python():
    env = dict(os.environ, CHAOSLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import chaoslab; print(chaoslab.BACKEND)"],
                         capture_output=True, text=True, env=env).stdout.strip()
    assert out == "python"
