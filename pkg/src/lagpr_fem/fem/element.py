"""Total-Lagrangian hexahedron: kinematics, element force/tangent and assembly.

Stress and tangent come in the stored Voigt convention (raw shear
components). The factor two that makes ``S : dE`` a dot product lives in
the strain-displacement operator of :mod:`lagpr_fem.kernels` and nowhere
else.
"""

import numpy as np
from scipy import sparse

from .. import kernels
from ..mechanics import tensor_to_voigt


def deformation_gradients(mesh, u):
    """``F`` at every Gauss point, shape ``(E, 8, 3, 3)``; ``u`` is ``(n_nodes, 3)``."""
    dN, _ = mesh.geometry
    ue = np.asarray(u, dtype=float).reshape(-1, 3)[mesh.elements]  # (E, 8, 3)
    return np.eye(3) + np.einsum("eai,egaJ->egiJ", ue, dN)


def right_cauchy_green_gp(F):
    return tensor_to_voigt(np.einsum("...ki,...kj->...ij", F, F))


def element_residual_and_tangent(X, u, constitutive):
    """Internal force ``(24,)`` and tangent ``(24, 24)`` of one hexahedron.

    ``X`` and ``u`` are ``(8, 3)`` nodal reference coordinates and
    displacements; ``constitutive(c)`` maps ``(8, 6)`` Voigt strains to
    ``(s (8, 6), d (8, 36))``.
    """
    from .mesh import HexMesh

    mesh = HexMesh(np.asarray(X, dtype=float), np.arange(8)[None, :])
    F = deformation_gradients(mesh, u)
    s, d = constitutive(right_cauchy_green_gp(F)[0])
    fe, Ke = element_arrays(mesh, F, s[None], np.asarray(d).reshape(1, 8, 6, 6))
    return fe[0], Ke[0]


def element_arrays(mesh, F, s, D):
    dN, wdet = mesh.geometry
    return kernels.element_kernel(
        dN,
        np.ascontiguousarray(wdet),
        np.ascontiguousarray(F),
        np.ascontiguousarray(s),
        np.ascontiguousarray(D),
    )


def assemble(mesh, fe, Ke):
    """Global internal-force vector and sparse CSR tangent."""
    dm = mesh.dofmap
    n = mesh.n_dofs
    f = np.bincount(dm.ravel(), weights=fe.ravel(), minlength=n)
    rows = np.repeat(dm, 24, axis=1).ravel()
    cols = np.tile(dm, (1, 24)).ravel()
    K = sparse.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return f, K
