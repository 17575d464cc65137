"""Timing comparison of the numba and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Both backends are importable in one process; the numba variants are
compiled once before timing.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from hypernoise import kernels
from hypernoise._accel import HAVE_NUMBA


def _hermitian(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def _density4(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5, help="best-of repeats (default 5)")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)

    cases = []
    for n in (4, 16, 64):
        a = _hermitian(n, rng)
        cases.append((f"jacobi_eigh n={n}", kernels.jacobi_eigh_numba, kernels.jacobi_eigh_numpy, (a,)))
    axis = np.linspace(0.0, np.pi, 181)
    cases.append(
        ("correlation_table 181x181", kernels.correlation_table_numba,
         kernels.correlation_table_numpy, (_density4(rng), axis, axis))
    )

    if not HAVE_NUMBA:
        print("numba disabled; the 'numba' column times the same code uncompiled")
    print(f"{'kernel':<28}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, fast, slow, call_args in cases:
        fast(*call_args)
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        print(f"{name:<28}{t_fast * 1e3:>12.3f}{t_slow * 1e3:>12.3f}{t_slow / t_fast:>10.1f}x")


if __name__ == "__main__":
    main()
