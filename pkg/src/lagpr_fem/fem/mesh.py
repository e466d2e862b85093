"""Structured 8-node hexahedral meshes and reference-configuration geometry."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import InvalidArgs

# parent-domain node signs in the usual counter-clockwise bottom/top order
NODE_SIGNS = np.array(
    [
        [-1, -1, -1],
        [1, -1, -1],
        [1, 1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
        [1, -1, 1],
        [1, 1, 1],
        [-1, 1, 1],
    ],
    dtype=float,
)
_G = 1.0 / np.sqrt(3.0)
GAUSS_POINTS = NODE_SIGNS * _G
GAUSS_WEIGHTS = np.ones(8)


def shape_functions(xi):
    """Trilinear shape functions ``(8,)`` and parent gradients ``(8, 3)``."""
    xi = np.asarray(xi, dtype=float)
    terms = 1.0 + NODE_SIGNS * xi
    N = 0.125 * np.prod(terms, axis=1)
    dN = np.empty((8, 3))
    for k in range(3):
        others = [j for j in range(3) if j != k]
        dN[:, k] = 0.125 * NODE_SIGNS[:, k] * terms[:, others[0]] * terms[:, others[1]]
    return N, dN


_PARENT_GRADS = np.stack([shape_functions(g)[1] for g in GAUSS_POINTS])  # (8 gp, 8 nodes, 3)


@dataclass(frozen=True)
class HexMesh:
    nodes: np.ndarray  # (n_nodes, 3) reference coordinates
    elements: np.ndarray  # (n_elem, 8) connectivity
    shape: tuple = None  # (nx, ny, nz) for structured meshes

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_dofs(self):
        return 3 * self.n_nodes

    @cached_property
    def dofmap(self):
        return (3 * self.elements[:, :, None] + np.arange(3)).reshape(len(self.elements), 24)

    @cached_property
    def jacobians(self):
        """Reference Jacobian matrices ``dX/dxi``, shape ``(E, 8, 3, 3)``."""
        Xe = self.nodes[self.elements]  # (E, 8 nodes, 3)
        return np.einsum("eai,gaj->egij", Xe, _PARENT_GRADS)

    @cached_property
    def geometry(self):
        """``(dN/dX (E, 8, 8, 3), weight * det J (E, 8))`` at the Gauss points."""
        J = self.jacobians
        det = np.linalg.det(J)
        if np.any(det <= 0):
            raise InvalidArgs("mesh has a non-positive reference Jacobian")
        Jinv = np.linalg.inv(J)
        dN = np.einsum("gaj,egji->egai", _PARENT_GRADS, Jinv)
        return np.ascontiguousarray(dN), det * GAUSS_WEIGHTS

    def nodes_where(self, predicate):
        return np.flatnonzero(predicate(self.nodes))


def structured_hex(nx, ny, nz, mapping):
    """Structured mesh of the unit parent box mapped through ``mapping``.

    ``mapping`` takes ``(n, 3)`` points of ``[0, 1]^3`` and returns physical
    coordinates. Node ``(i, j, k)`` has id ``i + j (nx+1) + k (nx+1)(ny+1)``.
    """
    for n in (nx, ny, nz):
        if int(n) != n or n < 1:
            raise InvalidArgs(f"element counts must be positive integers, got {(nx, ny, nz)}")
    nx, ny, nz = int(nx), int(ny), int(nz)
    k, j, i = np.meshgrid(np.arange(nz + 1), np.arange(ny + 1), np.arange(nx + 1), indexing="ij")
    unit = np.stack([i.ravel() / nx, j.ravel() / ny, k.ravel() / nz], axis=1)
    nodes = np.asarray(mapping(unit), dtype=float)

    def nid(i, j, k):
        return i + j * (nx + 1) + k * (nx + 1) * (ny + 1)

    ek, ej, ei = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    ei, ej, ek = ei.ravel(), ej.ravel(), ek.ravel()
    elements = np.stack(
        [
            nid(ei, ej, ek),
            nid(ei + 1, ej, ek),
            nid(ei + 1, ej + 1, ek),
            nid(ei, ej + 1, ek),
            nid(ei, ej, ek + 1),
            nid(ei + 1, ej, ek + 1),
            nid(ei + 1, ej + 1, ek + 1),
            nid(ei, ej + 1, ek + 1),
        ],
        axis=1,
    )
    return HexMesh(nodes, elements, (nx, ny, nz))


def make_cube_mesh(nx, ny, nz, lengths=(1.0, 1.0, 1.0)):
    lengths = np.asarray(lengths, dtype=float)
    if lengths.shape != (3,) or np.any(lengths <= 0):
        raise InvalidArgs("lengths must be three positive numbers")
    return structured_hex(nx, ny, nz, lambda p: p * lengths)


def make_cook_mesh(nx, ny, scale=0.01, thickness=None):
    """Cook's tapered panel: corners (0,0), (48,44), (48,60), (0,44) times
    ``scale``, extruded one element deep in z."""
    thickness = scale if thickness is None else thickness

    def mapping(p):
        x = 48.0 * p[:, 0]
        bottom = 44.0 * p[:, 0]
        top = 44.0 + 16.0 * p[:, 0]
        y = bottom + p[:, 1] * (top - bottom)
        return np.stack([scale * x, scale * y, thickness * p[:, 2]], axis=1)

    return structured_hex(nx, ny, 1, mapping)
