"""Benchmark the numba kernel backend against the pure-numpy fallback.

Times the batched angular log-kernel evaluation (the hot loop of the
potential operator) on a representative workload and reports throughput and
agreement between the two backends.

Run:  python3 benchmarks/bench_kernels.py [--radii 64] [--sources 512]
"""

import argparse
import time

import numpy as np

from qconformal.accel import _build_numba, _log_kernel_many_np
from qconformal.kernels import graded_theta_rule


def _time(fn, *args, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", type=int, default=64)
    ap.add_argument("--sources", type=int, default=512)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    omc, wt = graded_theta_rule(4)
    r = np.geomspace(0.01, 50.0, args.radii)
    s = np.geomspace(1e-3, 60.0, args.sources)
    work = args.radii * args.sources * omc.size

    nb_log, _ = _build_numba()
    nb_log(r[:2], s[:2], omc, wt)                 # JIT warm-up

    t_np, out_np = _time(_log_kernel_many_np, r, s, omc, wt,
                         repeats=args.repeats)
    t_nb, out_nb = _time(nb_log, r, s, omc, wt, repeats=args.repeats)

    diff = max(float(np.max(np.abs(a - b)))
               for a, b in zip(out_np, out_nb))

    print(f"workload: {args.radii} radii x {args.sources} sources x "
          f"{omc.size} angles = {work / 1e6:.1f}M kernel evaluations")
    print(f"numpy : {t_np * 1e3:9.2f} ms   "
          f"({work / t_np / 1e6:8.1f} M evals/s)")
    print(f"numba : {t_nb * 1e3:9.2f} ms   "
          f"({work / t_nb / 1e6:8.1f} M evals/s)")
    print(f"speedup: {t_np / t_nb:.2f}x   max |difference|: {diff:.3e}")


if __name__ == "__main__":
    main()
