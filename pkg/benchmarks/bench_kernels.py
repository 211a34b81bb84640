"""Time the numba kernels against their pure-Python originals.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each compiled kernel exposes its source function as ``kernel.py``; both run
on identical inputs after one warm-up call, so compile time is excluded.
"""
import argparse
import time

import numpy as np

from rbsmc import NUMBA_ENABLED
from rbsmc.kernels import barrier, linalg as kl, rollout


def cases(rng):
    n = 24
    a = rng.standard_normal((n, n))
    spd = a @ a.T + n * np.eye(n)
    h = kl.hessenberg(a.astype(np.complex128))
    m, nvar = 14, 6
    basis = np.array([(lambda g: g + g.T)(rng.standard_normal((m, m))) for _ in range(nvar)])
    s_inv = np.linalg.inv(spd[:m, :m])
    k = 4
    dyn = [rng.standard_normal((k, k)) * 0.2, rng.standard_normal((k, k)) * 0.05,
           rng.standard_normal((k, 1)), rng.standard_normal((1, k)), rng.standard_normal((k, 1)),
           rng.standard_normal((1, k)), 0.2, 0.5, rng.standard_normal((2, k)),
           rng.standard_normal((2000, 1)) * 0.01]
    return [
        ("lu_factor 24x24", kl.lu_factor, (a, 1e-13)),
        ("jacobi_eigh 24x24", kl.jacobi_eigh, (spd, 1e-15, 100)),
        ("hessenberg_qr 24x24", kl.hessenberg_qr_eigvals, (h, 2400)),
        ("logdet_derivatives m=14", barrier.logdet_derivatives, (s_inv, basis)),
        ("rollout_closed N=2000", rollout.rollout_closed, tuple(dyn)),
    ]


def best_of(fn, args, repeat):
    fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not NUMBA_ENABLED:
        print("numba disabled (RBSMC_DISABLE_NUMBA=1); both columns run Python")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'numba [ms]':>11s} {'python [ms]':>12s} {'speedup':>8s}")
    for name, fn, inputs in cases(rng):
        t_jit = best_of(fn, inputs, args.repeat)
        t_py = best_of(fn.py, inputs, args.repeat)
        print(f"{name:28s} {1e3 * t_jit:11.3f} {1e3 * t_py:12.3f} {t_py / t_jit:8.1f}x")


if __name__ == "__main__":
    main()
