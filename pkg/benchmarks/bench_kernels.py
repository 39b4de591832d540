"""Time the compiled and pure-Python return-map kernels on the same orbits.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from lienard import kernels
from lienard.constructor import compose_step, van_der_pol_seed

CASES = (
    # (label, system, eps, start, section threshold)
    ("van der Pol, a=1.0", "vdp", 0.05, 1.0, 0.0),
    ("van der Pol, a=3.0", "vdp", 0.05, 3.0, 0.0),
    ("composed well, a=2.28", "z534", 0.5, 2.28, 1.7888543819998317),
)


def _systems():
    seed = van_der_pol_seed()
    return {"vdp": seed, "z534": compose_step(seed, "odd")}


def bench(impl, sys, eps, a, xs, repeat):
    Fc = np.ascontiguousarray(sys.F.coeffs)
    gc = np.ascontiguousarray(sys.g.coeffs)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        x, steps, status = impl.return_map(Fc, gc, eps, a, xs, 1e4, 1e-10, 1e-12 * max(1.0, a), 10_000_000)
        best = min(best, time.perf_counter() - t0)
    return best, x, steps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = kernels.implementations()
    if "cython" not in impls:
        print("compiled kernel not built; only the Python kernel is available")
    systems = _systems()
    print(f"{'case':<26}{'kernel':<9}{'steps':>7}{'time [ms]':>12}{'speedup':>10}")
    for label, key, eps, a, xs in CASES:
        ref = None
        for name in ("python", "cython"):
            if name not in impls:
                continue
            t, x, steps = bench(impls[name], systems[key], eps, a, xs, args.repeat)
            if ref is None:
                ref = (t, x)
                speed = ""
            else:
                speed = f"{ref[0] / t:9.1f}x"
                assert abs(x - ref[1]) <= 1e-12 * max(1.0, abs(x)), "kernels disagree"
            print(f"{label:<26}{name:<9}{steps:>7}{1e3 * t:>12.3f}{speed:>10}")


if __name__ == "__main__":
    main()
