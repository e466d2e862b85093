"""Finite-element solver with pluggable constitutive back-ends."""

from .backends import Knn1Backend, LaGPRBackend, OracleBackend, make_backend
from .benchmarks import PROBLEMS, apply_benchmark
from .element import element_residual_and_tangent
from .mesh import HexMesh, make_cook_mesh, make_cube_mesh
from .solver import BcSet, NrConfig, SolveResult, solve_modified_nr, write_fields, write_trace

__all__ = [
    "BcSet",
    "HexMesh",
    "Knn1Backend",
    "LaGPRBackend",
    "NrConfig",
    "OracleBackend",
    "PROBLEMS",
    "SolveResult",
    "apply_benchmark",
    "element_residual_and_tangent",
    "make_backend",
    "make_cook_mesh",
    "make_cube_mesh",
    "solve_modified_nr",
    "write_fields",
    "write_trace",
]
