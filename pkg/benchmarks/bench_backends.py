"""Compare the numba and numpy evaluation backends.

Two views:

1. Kernel microbenchmarks -- ``eval_many`` / ``eval_scaled_many`` on packed
   arrays for a representative characteristic function, timed in-process for
   both backends across several batch sizes.
2. End-to-end isolation -- a subprocess per backend (the backend is fixed
   at import time via ``QPROOTS_BACKEND``) isolates the 14 roots of
   ``lam + (pi/2) exp(-lam)`` in ``[-40,40]^2`` and reports the wall time,
   excluding JIT warm-up.

Usage::

    python3 benchmarks/bench_backends.py [--sizes 256,4096,65536] [--repeats 5]
"""

from __future__ import annotations

import argparse
import math
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from qproots import DelaySpec, DelaySystem, build_characteristic_multi
from qproots._kernels import BACKENDS, get_backend
from qproots.quasipoly import _packed


def representative_problem() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Packed arrays for the characteristic function of a 4x4 two-delay system."""
    rng = np.random.default_rng(20240811)
    A = rng.standard_normal((4, 4))
    B1 = rng.standard_normal((4, 4))
    B2 = rng.standard_normal((4, 4))
    system = DelaySystem.multi(A, [B1, B2], DelaySpec.from_values([1, 2]))
    qp = build_characteristic_multi(system)
    return _packed(qp)


def contour_points(n: int) -> np.ndarray:
    """Points on a radius-30 circle, the typical argument pattern on contours."""
    t = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return 30.0 * np.exp(1j * t)


def best_of(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


END_TO_END_SNIPPET = """
import time
from qproots import AnalyticTarget, QuasiPolynomial, Region, count_roots, isolate_roots

qp = QuasiPolynomial.from_terms([(0, [0.0, 1.0]), (1, [1.5707963267948966])])
target = AnalyticTarget.from_quasipolynomial(qp)
count_roots(target, Region(-2, 2, -2, 2))  # warm-up: JIT compile + caches
t0 = time.perf_counter()
boxes = isolate_roots(target, Region(-40, 40, -40, 40))
print(sum(c for _, c in boxes), time.perf_counter() - t0)
"""


def run_end_to_end(backend: str) -> tuple[int, float]:
    env = dict(os.environ, QPROOTS_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", END_TO_END_SNIPPET],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    count_s, secs_s = out.stdout.split()
    return int(count_s), float(secs_s)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="256,4096,65536")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    names = ["numpy"]
    try:
        get_backend("numba")
        names.append("numba")
    except ImportError:
        print("numba not importable; benchmarking the numpy backend only\n")

    coeffs, degs, sigmas = representative_problem()
    print(
        f"problem: {degs.shape[0]} terms, max degree {int(degs.max())}, "
        f"radius-30 contour points"
    )

    for kernel in ("eval_many", "eval_scaled_many"):
        print(f"\n{kernel}")
        header = f"{'batch':>8}" + "".join(f"{n + ' (ms)':>14}" for n in names)
        if len(names) == 2:
            header += f"{'speedup':>10}"
        print(header)
        for size in sizes:
            lams = contour_points(size)
            row = f"{size:>8}"
            times = []
            for name in names:
                fn = getattr(BACKENDS[name], kernel)
                fn(coeffs, degs, sigmas, lams)  # warm-up (JIT on first call)
                times.append(best_of(lambda: fn(coeffs, degs, sigmas, lams), args.repeats))
                row += f"{times[-1] * 1e3:>14.3f}"
            if len(times) == 2:
                row += f"{times[0] / times[1]:>9.1f}x"
            print(row)

    print("\nend-to-end: isolate_roots of lam + (pi/2) exp(-lam) on [-40,40]^2")
    print(f"{'backend':>8}{'roots':>8}{'seconds':>10}")
    for name in names:
        count, secs = run_end_to_end(name)
        print(f"{name:>8}{count:>8}{secs:>10.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
