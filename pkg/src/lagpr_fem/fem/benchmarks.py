"""Benchmark boundary-value problems.

Clamped cube (8x8x8, unit edge): bottom face ``z = 0`` clamped, top face
``z = 1`` given a uniform displacement that is normal (``cube-normal``),
along the fibre axis x (``cube-shear-a``) or along y (``cube-shear-b``).

Punch (7x7x7 unit block): bottom clamped, the top-centre patch of 3x3
elements pushed down by ``u0`` with its lateral motion held.

Cook's membrane: 48/44/16 tapered panel scaled by ``COOK_SCALE``, one
element deep with ``u_z = 0`` everywhere (plane strain), left edge
clamped, right edge moved vertically by ``u0``.
"""

import numpy as np

from ..errors import UnknownProblem
from .mesh import make_cook_mesh, make_cube_mesh
from .solver import BcSet

PROBLEMS = ("cube-normal", "cube-shear-a", "cube-shear-b", "punch", "cook")

# top-face displacements giving max |F_ij - delta_ij| = 0.15 over the Gauss
# points for the trans-iso oracle (see calibrate_cube_magnitude)
CUBE_MAGNITUDES = {
    "cube-normal": 0.1441,
    "cube-shear-a": 0.1283,
    "cube-shear-b": 0.1279,
}
DEFAULT_MAGNITUDES = dict(CUBE_MAGNITUDES, punch=-0.06, cook=0.12)

CUBE_DIVISIONS = 8
PUNCH_DIVISIONS = 7
COOK_DIVISIONS = (12, 12)
COOK_SCALE = 0.035

_CUBE_COMPONENT = {"cube-normal": 2, "cube-shear-a": 0, "cube-shear-b": 1}


def _close(a, b):
    return np.abs(a - b) < 1e-9


def cube_problem(problem, magnitude, n=CUBE_DIVISIONS):
    mesh = make_cube_mesh(n, n, n)
    z = mesh.nodes[:, 2]
    bottom = np.flatnonzero(_close(z, 0.0))
    top = np.flatnonzero(_close(z, 1.0))
    load = np.zeros(3)
    load[_CUBE_COMPONENT[problem]] = magnitude
    bcs = BcSet.from_nodes(bottom, (0, 1, 2), (0.0, 0.0, 0.0)).merged(BcSet.from_nodes(top, (0, 1, 2), load))
    return mesh, bcs


def punch_problem(u0, n=PUNCH_DIVISIONS):
    mesh = make_cube_mesh(n, n, n)
    x, y, z = mesh.nodes.T
    h = 1.0 / n
    lo, hi = (n - 3) / 2 * h, (n + 3) / 2 * h
    bottom = np.flatnonzero(_close(z, 0.0))
    inside = (x > lo - 1e-9) & (x < hi + 1e-9) & (y > lo - 1e-9) & (y < hi + 1e-9)
    patch = np.flatnonzero(_close(z, 1.0) & inside)
    bcs = BcSet.from_nodes(bottom, (0, 1, 2), (0.0, 0.0, 0.0)).merged(BcSet.from_nodes(patch, (0, 1, 2), (0.0, 0.0, u0)))
    return mesh, bcs


def cook_problem(u0, divisions=COOK_DIVISIONS):
    mesh = make_cook_mesh(*divisions, scale=COOK_SCALE)
    x = mesh.nodes[:, 0]
    left = np.flatnonzero(_close(x, 0.0))
    right = np.flatnonzero(_close(x, x.max()))
    everything = np.arange(mesh.n_nodes)
    bcs = (
        BcSet.from_nodes(everything, (2,), (0.0,))
        .merged(BcSet.from_nodes(left, (0, 1), (0.0, 0.0)))
        .merged(BcSet.from_nodes(right, (1,), (u0,)))
    )
    return mesh, bcs


def apply_benchmark(problem, magnitude=None):
    """Mesh and Dirichlet set for a named benchmark."""
    if problem not in PROBLEMS:
        raise UnknownProblem(f"unknown problem {problem!r}; expected one of {PROBLEMS}")
    if magnitude is None:
        magnitude = DEFAULT_MAGNITUDES[problem]
    if problem.startswith("cube"):
        return cube_problem(problem, magnitude)
    if problem == "punch":
        return punch_problem(magnitude)
    return cook_problem(magnitude)


def calibrate_cube_magnitude(problem, backend, target=0.15, guess=0.1, tol=1e-4, max_rounds=8):
    """Secant search for the top-face displacement whose converged solution
    reaches ``max |F_ij - delta_ij| = target``."""
    from .solver import NrConfig, solve_modified_nr

    cfg = NrConfig(g_tol=1e-10, max_iter=20)

    def peak(m):
        mesh, bcs = cube_problem(problem, m)
        return solve_modified_nr(mesh, bcs, backend, cfg).max_abs_F() - target

    m0, m1 = guess, guess * 1.2
    f0, f1 = peak(m0), peak(m1)
    for _ in range(max_rounds):
        if abs(f1) < tol:
            break
        m0, m1, f0 = m1, m1 - f1 * (m1 - m0) / (f1 - f0), f1
        f1 = peak(m1)
    return m1
