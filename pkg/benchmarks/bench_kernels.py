"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Workloads are sized so the Python side finishes in seconds; ``--scale``
multiplies every step count.
"""

import argparse
import time

import numpy as np

from chaoslab import kernels
from chaoslab.basin import _targets
from chaoslab.dynamics import Params


def workloads(scale):
    p = Params().as_array()
    p12 = Params(a8=1.2).as_array()
    s0 = np.array([0.1001, 0.1003, 0.1003])
    n = max(1, int(20_000 * scale))
    fps, level = _targets(Params(a8=1.2), None)
    rng = np.random.default_rng(0)
    ics = np.ascontiguousarray(rng.uniform(-8, 8, size=(max(1, int(8 * scale)), 3)))
    esc = np.full(len(ics), 1e6)
    robot0 = np.array([0.1, -0.1, 0.0, 5.0, 5.0, 0.0])
    return {
        "rk4_path": lambda m: m.rk4_path(p, s0, 0.01, n, 1, 1e6),
        "dopri_path": lambda m: m.dopri_path(p, s0, 20.0 * scale, 1e-3, 1e-3, 2.2204e-6, 1e-9, 1e6, 1e-13),
        "lyapunov_rk4": lambda m: m.lyapunov_rk4(p, s0, 0.01, 0, n, 1, 100, 1e6),
        "classify_batch": lambda m: m.classify_batch(
            p12, ics, 2000.0, 1e-2, 0.05, 1e-6, 1e-9, level, fps, 0.05, 20.0, 10, esc, 2e-11,
            50.0, 0.5, 1),
        "robot_rk4_path": lambda m: m.robot_rk4_path(p, 0.08, 31.596, robot0, 0.005, n, 1,
                                                     (0.0, 10.0, 0.0, 10.0)),
    }


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()
    compiled = kernels.compiled_backend()
    if compiled is None:
        raise SystemExit("compiled extension not built; reinstall without CHAOSLAB_NO_EXT")
    print(f"{'kernel':<16}{'python_s':>12}{'compiled_s':>12}{'speedup':>10}")
    for name, fn in workloads(args.scale).items():
        tp = best_of(lambda: fn(kernels.python_backend), args.repeat)
        tc = best_of(lambda: fn(compiled), args.repeat)
        print(f"{name:<16}{tp:>12.4f}{tc:>12.5f}{tp / tc:>9.0f}x")


if __name__ == "__main__":
    main()
