"""Time the numba kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

Numba compilation happens in a warm-up call and is not timed.
"""
import argparse
import timeit

import numpy as np

from covtest import CovarianceModel, kernels


def cases(quick):
    rng = np.random.default_rng(0)
    reps, n_T, n_A = (20, 400, 20) if quick else (200, 2000, 40)
    X = rng.standard_normal((reps, n_T + n_A + 1))
    dev = rng.standard_normal((reps, n_A + 1))
    table = CovarianceModel.tabulated(np.linspace(0, 10, 200), np.exp(-np.linspace(0, 10, 200)))
    taus = np.linspace(0.0, 2.0, 51 if quick else 401)
    n_inner = 200 if quick else 2000
    yield "correlogram_batch", (X, n_T, n_A + 1, 0.05, n_T * 0.05)
    yield "lp_trapezoid", (dev, 0.05, 2.0)
    yield "psi_simpson", (*CovarianceModel.exponential().kernel_args(), 50.0, taus, n_inner)
    yield "psi_simpson[table]", (*table.kernel_args(), 5.0, taus, n_inner)
    yield "rho_values[table]", (*table.kernel_args(), rng.uniform(-12, 12, 200_000))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small inputs, for smoke runs")
    args = ap.parse_args(argv)

    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speed-up':>10}")
    for name, call_args in cases(args.quick):
        base = name.split("[")[0]
        nb = getattr(kernels, base + "_nb")
        npy = getattr(kernels, base + "_np")
        np.testing.assert_allclose(nb(*call_args), npy(*call_args), rtol=1e-10, atol=1e-14)
        t_nb = min(timeit.repeat(lambda: nb(*call_args), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: npy(*call_args), number=1, repeat=args.repeat))
        print(f"{name:<22}{1e3 * t_nb:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
