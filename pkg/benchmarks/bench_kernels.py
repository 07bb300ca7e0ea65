"""Compare the numba and numpy kernel paths on batch RK4 flows and polynomial evaluation.

    python3 benchmarks/bench_kernels.py [--batch 20000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from radonweights import systems
from radonweights._kernels import BACKEND, eval_poly, pack_fields, pack_polynomial, rk4_combination
from radonweights.poly import Polynomial


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=20000)
    ap.add_argument("--steps", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if BACKEND != "numba":
        print("numba unavailable or disabled; only the numpy path will run")
    sys = systems.moment_curve(3)
    I = ((1,), (2,), (1, 2), (1, 2, 2))
    packed = pack_fields([sys.table.field(w) for w in I])
    rng = np.random.default_rng(0)
    W = rng.uniform(-0.1, 0.1, size=(args.batch, len(I)))
    Z = rng.uniform(-0.5, 0.5, size=(args.batch, sys.d))
    dense = sum(Polynomial.variables(sys.d), Polynomial.constant(1, sys.d)) ** 6
    lam = pack_polynomial(dense)
    backends = ["numpy"] + (["numba"] if BACKEND == "numba" else [])
    # warm the jit before timing
    if "numba" in backends:
        rk4_combination(packed, W[:2], Z[:2], 1, "numba")
        eval_poly(*lam, Z[:2], "numba")
    results = {}
    print(f"batch={args.batch} steps={args.steps} d={sys.d}")
    print(f"{'kernel':<16}{'backend':<10}{'seconds':>10}")
    for b in backends:
        t_rk, out_rk = best_of(lambda: rk4_combination(packed, W, Z, args.steps, b), args.repeat)
        t_ev, out_ev = best_of(lambda: eval_poly(*lam, Z, b), args.repeat)
        results[b] = (out_rk, out_ev)
        print(f"{'rk4_combination':<16}{b:<10}{t_rk:>10.4f}")
        print(f"{'eval_poly':<16}{b:<10}{t_ev:>10.4f}")
    if len(results) == 2:
        drk = np.max(np.abs(results["numpy"][0] - results["numba"][0]))
        dev = np.max(np.abs(results["numpy"][1] - results["numba"][1]))
        print(f"max |numpy - numba|: rk4 {drk:.2e}, eval {dev:.2e}")


if __name__ == "__main__":
    main()
