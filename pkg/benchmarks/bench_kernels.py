"""Numba vs numpy timing for the relaxed fixed-point sweep and the Thomas solve.

    python3 benchmarks/bench_kernels.py --eps 3 5 --repeat 3

Both backends run the same preset (Table 1 row I) from the same start; the
script checks that they agree and prints the wall-clock ratio.
"""
import argparse
import time

import numpy as np

from ccpb import BoundaryData, IonSystem, make_uniform
from ccpb import _kernels as K
from ccpb.grid import step_matrix
from ccpb.solver import SolverConfig, initial_field


def relax_args(k, n_cells):
    eps = 2.0 ** -k
    sys_ = IonSystem([(1, 1.2)], [(1, 0.4), (2, 0.4)])
    bd = BoundaryData(1.0, -1.0, 0.5 * eps * eps)
    grid = make_uniform(n_cells)
    sub, diag, sup, bc, free = step_matrix(grid, eps, bd)
    q, m = sys_.signed()
    s = SolverConfig().s_for(eps)
    phi = initial_field(grid, bd, "linear").values.copy()
    return phi, (grid.weights, sub, diag, sup, bc, free, s, 1e-6, 2_000_000, q, m, False, 700.0)


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=int, nargs="+", default=[3, 5], help="eps = 2^-k")
    ap.add_argument("--cells", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if not K.HAVE_NUMBA:
        print("numba unavailable (or CCPB_DISABLE_JIT set): only the numpy path is timed")

    for k in args.eps:
        phi0, rest = relax_args(k, args.cells)

        def run_np():
            phi = phi0.copy()
            n = K._relax_np(phi, *rest)[0]
            return phi, n

        t_np, (phi_np, n_np) = best_of(run_np, args.repeat)
        line = f"relax eps=2^-{k} cells={args.cells} iters={n_np}: numpy {t_np:.3f}s"
        if K.HAVE_NUMBA:
            def run_jit():
                phi = phi0.copy()
                n = K._relax_jit(phi, *rest)[0]
                return phi, n

            run_jit()  # compile outside the timing
            t_jit, (phi_jit, n_jit) = best_of(run_jit, args.repeat)
            diff = np.max(np.abs(phi_jit - phi_np))
            line += f"  numba {t_jit:.3f}s  speedup {t_np / t_jit:.2f}x  max|diff|={diff:.1e}"
            assert n_jit == n_np and diff < 1e-10, "backends disagree"
        print(line)

    rng = np.random.default_rng(0)
    n = 1 << 14
    sub, sup = rng.uniform(-1, 0, n - 1), rng.uniform(-1, 0, n - 1)
    diag = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=n)
    t_np, _ = best_of(lambda: K._thomas_solve_py(sub, *K._thomas_factor_py(sub, diag, sup)[:2], rhs),
                      args.repeat)
    line = f"thomas n={n}: numpy loop {t_np * 1e3:.2f}ms"
    if K.HAVE_NUMBA:
        K._thomas_solve_jit(sub, *K._thomas_factor_jit(sub, diag, sup)[:2], rhs)
        t_jit, _ = best_of(lambda: K._thomas_solve_jit(sub, *K._thomas_factor_jit(sub, diag, sup)[:2], rhs),
                           args.repeat)
        line += f"  numba {t_jit * 1e3:.2f}ms  speedup {t_np / t_jit:.1f}x"
    print(line)


if __name__ == "__main__":
    main()
