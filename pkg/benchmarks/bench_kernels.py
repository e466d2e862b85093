"""Timing of the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--repeat 20]

Both variants are imported directly (the ``LAGPR_FEM_NUMBA`` switch only
selects which one the package uses), checked for agreement, then timed
on a 100-point correlation matrix, the corresponding 4096-row cross
correlation and an 8x8x8 hexahedral mesh.
"""

import argparse
import time

import numpy as np

from lagpr_fem import kernels
from lagpr_fem.fem import make_cube_mesh
from lagpr_fem.fem.element import deformation_gradients, right_cauchy_green_gp
from lagpr_fem.mechanics import make_oracle


def best_of(fn, args, repeat):
    fn(*args)  # warm-up (compiles the numba variant)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    X = 1.0 + 0.1 * rng.standard_normal((100, 6))
    Xq = 1.0 + 0.1 * rng.standard_normal((4096, 6))
    theta = np.full(6, 0.3)

    mesh = make_cube_mesh(8, 8, 8)
    u = 0.02 * rng.standard_normal((mesh.n_nodes, 3))
    F = deformation_gradients(mesh, u)
    c = right_cauchy_green_gp(F).reshape(-1, 6)
    oracle = make_oracle("trans-iso")
    s = oracle.stress(c).reshape(-1, 8, 6)
    D = oracle.tangent(c).reshape(-1, 8, 6, 6)
    dN, wdet = mesh.geometry
    elem_args = tuple(np.ascontiguousarray(a) for a in (dN, wdet, F, s, D))
    return [
        ("corr_matrix 100x100", kernels.corr_matrix_numpy, kernels.corr_matrix_numba, (X, theta)),
        ("corr_cross 4096x100", kernels.corr_cross_numpy, kernels.corr_cross_numba, (Xq, X, theta)),
        ("element 512 hex8", kernels.element_kernel_numpy, kernels.element_kernel_numba, elem_args),
    ]


def _max_rel(a, b):
    if isinstance(a, tuple):
        return max(_max_rel(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':24s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speed-up':>9s} {'max rel diff':>13s}")
    for name, f_np, f_nb, fargs in cases(rng):
        diff = _max_rel(f_nb(*fargs), f_np(*fargs))
        t_np = best_of(f_np, fargs, args.repeat)
        t_nb = best_of(f_nb, fargs, args.repeat)
        print(f"{name:24s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:9.1f} {diff:13.2e}")


if __name__ == "__main__":
    main()
