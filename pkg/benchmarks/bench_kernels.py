"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--n 4096] [--repeat 5]
"""

import argparse
import time

import numpy as np

from slopt import _pykernels

try:
    from slopt import _kernels
except ImportError:
    _kernels = None


def _cases(n):
    t = np.linspace(0.0, 1.0, n + 1)
    q = -5.0 * np.sin(np.pi * t[:-1]) ** 2
    jump = np.zeros(n + 1)
    return {
        "rk4_linear": lambda m: m.rk4_linear(t, q, q, q, 40.0, 0.0, 1.0, jump, False),
        "rk4_critical": lambda m: m.rk4_critical(t, 15.7, 47.2, 14.0, 2.9, 6.2),
        "rk4_pendulum": lambda m: m.rk4_pendulum(t, 32.0, 1.5, 0.3),
    }


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':<14}{'python [ms]':>13}{'cython [ms]':>13}{'speedup':>10}")
    for name, call in _cases(args.n).items():
        py = best_of(lambda: call(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{name:<14}{py * 1e3:>13.3f}{'n/a':>13}{'':>10}")
            continue
        cy = best_of(lambda: call(_kernels), args.repeat)
        print(f"{name:<14}{py * 1e3:>13.3f}{cy * 1e3:>13.3f}{py / cy:>9.0f}x")


if __name__ == "__main__":
    main()
