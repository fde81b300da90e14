"""Compare the numba and pure-numpy weight-loop kernels.

Usage: python benchmarks/bench_kernels.py [--n 2000] [--repeats 5]

Both backends solve the same (payload x sample x actuator x battery) grid; the
script checks they agree exactly and reports the best-of-``repeats`` time.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from codesign.uav import kernels
from codesign.uav.model import UavModel


def best_time(fn, repeats: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="world samples")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    model = UavModel()
    payloads = np.linspace(0.0, 3500.0, 8)
    act, bat, N = model.layout.arrays(model.sample(args.n, seed=0))
    consts = model.consts()
    cells = payloads.size * args.n * act.shape[1] * bat.shape[1]

    print(f"cells: {cells} ({payloads.size} payloads x {args.n} samples x {act.shape[1]}x{bat.shape[1]} pairs)")
    results = {}
    for backend in ("numba", "numpy"):
        try:
            kernels.solve_pairs(payloads[:1], act[:1], bat[:1], N[:1], consts, backend)  # warm-up / compile
        except ImportError:
            print(f"{backend:>6}: unavailable")
            continue
        t, sol = best_time(lambda: kernels.solve_pairs(payloads, act, bat, N, consts, backend), args.repeats)
        results[backend] = (t, sol)
        print(f"{backend:>6}: {t * 1e3:9.1f} ms  ({cells / t / 1e6:6.2f} M cells/s)")

    if len(results) == 2:
        a, b = results["numba"][1], results["numpy"][1]
        same = np.array_equal(a.cost, b.cost) and np.array_equal(a.status, b.status)
        print(f"speedup numba/numpy: {results['numpy'][0] / results['numba'][0]:.1f}x; identical outputs: {same}")


if __name__ == "__main__":
    main()
