"""Hot numeric kernels in two interchangeable implementations.

``*_numba`` functions are compiled with numba, ``*_numpy`` functions are
vectorised numpy. The unsuffixed public names point at one or the other
according to :data:`lagpr_fem._accel.USE_NUMBA`.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

SQRT3 = np.sqrt(3.0)

# Voigt index pairs (11, 22, 33, 23, 31, 12)
_VP = np.array([[0, 0], [1, 1], [2, 2], [1, 2], [2, 0], [0, 1]], dtype=np.int64)


# --------------------------------------------------------------------------
# Matern 3/2 product correlation
# --------------------------------------------------------------------------


def corr_matrix_numpy(X, theta):
    a = np.abs(X[:, None, :] - X[None, :, :]) * (SQRT3 / theta)
    return np.prod(1.0 + a, axis=-1) * np.exp(-a.sum(axis=-1))


def corr_cross_numpy(Xq, X, theta):
    a = np.abs(Xq[:, None, :] - X[None, :, :]) * (SQRT3 / theta)
    return np.prod(1.0 + a, axis=-1) * np.exp(-a.sum(axis=-1))


@njit(cache=True, nogil=True, fastmath=False)
def corr_matrix_numba(X, theta):
    n, dim = X.shape
    inv = SQRT3 / theta
    R = np.empty((n, n))
    for i in range(n):
        R[i, i] = 1.0
        for j in range(i + 1, n):
            poly = 1.0
            expo = 0.0
            for k in range(dim):
                a = abs(X[i, k] - X[j, k]) * inv[k]
                poly *= 1.0 + a
                expo += a
            v = poly * np.exp(-expo)
            R[i, j] = v
            R[j, i] = v
    return R


@njit(cache=True, nogil=True, fastmath=False)
def corr_cross_numba(Xq, X, theta):
    m, dim = Xq.shape
    n = X.shape[0]
    inv = SQRT3 / theta
    R = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            poly = 1.0
            expo = 0.0
            for k in range(dim):
                a = abs(Xq[i, k] - X[j, k]) * inv[k]
                poly *= 1.0 + a
                expo += a
            R[i, j] = poly * np.exp(-expo)
    return R


# --------------------------------------------------------------------------
# Total-Lagrangian hexahedron: internal force and tangent per element
# --------------------------------------------------------------------------


def _b_matrix_numpy(F, dN):
    # G[..., a, i, J, K] = F[i, J] * dN[a, K]
    G = np.einsum("egiJ,egaK->egaiJK", F, dN)
    p, q = _VP[:, 0], _VP[:, 1]
    B = G[..., p, q] + G[..., q, p]
    B[..., :3] *= 0.5
    # (E, G, 6, 24) with dof index 3 * a + i
    E, Gp = F.shape[:2]
    return np.moveaxis(B, -1, 2).reshape(E, Gp, 6, -1)


def element_kernel_numpy(dN, wdet, F, S, D):
    """Element internal force ``(E, 24)`` and tangent ``(E, 24, 24)``.

    ``dN`` holds reference shape-function gradients ``(E, 8, 8, 3)``,
    ``wdet`` quadrature weight times Jacobian ``(E, 8)``, ``F`` the
    deformation gradient ``(E, 8, 3, 3)``, ``S`` raw Voigt stress
    ``(E, 8, 6)`` and ``D`` the Voigt tangent ``(E, 8, 6, 6)``.
    """
    B = _b_matrix_numpy(F, dN)
    fe = np.einsum("eg,egIk,egI->ek", wdet, B, S)
    Km = np.einsum("eg,egIk,egIJ,egJl->ekl", wdet, B, D, B, optimize=True)
    St = S[..., [[0, 5, 4], [5, 1, 3], [4, 3, 2]]]
    H = np.einsum("eg,egaJ,egJK,egbK->eab", wdet, dN, St, dN, optimize=True)
    E = len(wdet)
    Kg = np.einsum("eab,ij->eaibj", H, np.eye(3)).reshape(E, 24, 24)
    return fe, Km + Kg


@njit(cache=True, nogil=True, fastmath=False)
def element_kernel_numba(dN, wdet, F, S, D):
    E, Gp = wdet.shape
    fe = np.zeros((E, 24))
    Ke = np.zeros((E, 24, 24))
    B = np.empty((6, 24))
    DB = np.empty((6, 24))
    St = np.empty((3, 3))
    for e in range(E):
        for g in range(Gp):
            w = wdet[e, g]
            for a in range(8):
                for i in range(3):
                    k = 3 * a + i
                    for I in range(6):
                        p = _VP[I, 0]
                        q = _VP[I, 1]
                        if p == q:
                            B[I, k] = F[e, g, i, p] * dN[e, g, a, p]
                        else:
                            B[I, k] = F[e, g, i, p] * dN[e, g, a, q] + F[e, g, i, q] * dN[e, g, a, p]
            for k in range(24):
                acc = 0.0
                for I in range(6):
                    acc += B[I, k] * S[e, g, I]
                fe[e, k] += w * acc
            for I in range(6):
                for k in range(24):
                    acc = 0.0
                    for J in range(6):
                        acc += D[e, g, I, J] * B[J, k]
                    DB[I, k] = acc
            for k in range(24):
                for l in range(k, 24):
                    acc = 0.0
                    for I in range(6):
                        acc += B[I, k] * DB[I, l]
                    Ke[e, k, l] += w * acc
            for I in range(6):
                St[_VP[I, 0], _VP[I, 1]] = S[e, g, I]
                St[_VP[I, 1], _VP[I, 0]] = S[e, g, I]
            for a in range(8):
                for b in range(8):
                    h = 0.0
                    for J in range(3):
                        for K in range(3):
                            h += dN[e, g, a, J] * St[J, K] * dN[e, g, b, K]
                    h *= w
                    for i in range(3):
                        Ke[e, 3 * a + i, 3 * b + i] += h
        # material part lives on the upper triangle only; mirror it
        for k in range(24):
            for l in range(k + 1, 24):
                Ke[e, l, k] = Ke[e, k, l]
    return fe, Ke


if USE_NUMBA:
    corr_matrix = corr_matrix_numba
    corr_cross = corr_cross_numba
    element_kernel = element_kernel_numba
else:
    corr_matrix = corr_matrix_numpy
    corr_cross = corr_cross_numpy
    element_kernel = element_kernel_numpy
