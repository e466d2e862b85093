"""Tensor algebra, Voigt conversions and the analytical constitutive laws.

Voigt ordering is ``[11, 22, 33, 23, 31, 12]`` for strain ``c`` and stress
``s``; both store raw tensor components (no engineering factor 2). The
tangent ``d`` is the row-major flattening of the 6x6 matrix with entries
``D[I, J] = D_ijkl`` where ``D = 2 dS/dC``.

Every function accepts a single vector or a batch with leading axes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgs, NonInvertibleF, SingularC

VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (2, 0), (0, 1))
IDENTITY_VOIGT = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
F_APP_0 = IDENTITY_VOIGT.copy()

DET_FLOOR = 1e-12

_ROW = np.array([p[0] for p in VOIGT_PAIRS])
_COL = np.array([p[1] for p in VOIGT_PAIRS])
# tensor index (i, j) -> voigt index
_T2V = np.empty((3, 3), dtype=np.intp)
for _k, (_i, _j) in enumerate(VOIGT_PAIRS):
    _T2V[_i, _j] = _k
    _T2V[_j, _i] = _k


def voigt_to_tensor(v):
    """Symmetric ``(..., 3, 3)`` tensor from a ``(..., 6)`` Voigt vector."""
    v = np.asarray(v, dtype=float)
    return v[..., _T2V]


def tensor_to_voigt(a):
    """Voigt vector of the symmetric part of ``a`` (raw components)."""
    a = np.asarray(a, dtype=float)
    return 0.5 * (a[..., _ROW, _COL] + a[..., _COL, _ROW])


def tangent_to_voigt(t):
    """6x6 matrix ``D[I, J] = t[i, j, k, l]`` from a fourth-order tensor."""
    t = np.asarray(t, dtype=float)
    return t[..., _ROW[:, None], _COL[:, None], _ROW[None, :], _COL[None, :]]


def frobenius_voigt(v):
    """Frobenius norm of the symmetric tensor stored in ``v``; shears count twice."""
    v = np.asarray(v, dtype=float)
    return np.sqrt(np.sum(v[..., :3] ** 2, axis=-1) + 2.0 * np.sum(v[..., 3:] ** 2, axis=-1))


def compose_F(f_app):
    """Symmetric applied deformation gradient from ``[F11, F22, F33, F23, F31, F12]``."""
    f_app = np.asarray(f_app, dtype=float)
    if f_app.shape[-1] != 6:
        raise InvalidArgs(f"f_app must have 6 components, got shape {f_app.shape}")
    return voigt_to_tensor(f_app)


def right_cauchy_green(F):
    """Voigt vector of ``C = F^T F``."""
    F = np.asarray(F, dtype=float)
    det = np.linalg.det(F)
    if np.any(det <= DET_FLOOR):
        raise NonInvertibleF(f"det F <= {DET_FLOOR:g} (min det F = {np.min(det):.6g})")
    C = np.einsum("...ki,...kj->...ij", F, F)
    return tensor_to_voigt(C)


def _inverse_and_jacobian(c):
    C = voigt_to_tensor(c)
    det = np.linalg.det(C)
    if np.any(det <= DET_FLOOR):
        bad = np.flatnonzero(np.atleast_1d(det) <= DET_FLOOR)
        raise SingularC(
            f"det C <= {DET_FLOOR:g} at {bad.size} point(s)",
            index=int(bad[0]) if np.ndim(det) else None,
        )
    Cinv = np.linalg.inv(C)
    # exact symmetry of the inverse
    Cinv = 0.5 * (Cinv + np.swapaxes(Cinv, -1, -2))
    return C, Cinv, np.sqrt(det)


def _sym_inverse_product(Cinv):
    """Voigt 6x6 of 0.5 (Ci_ik Ci_jl + Ci_il Ci_jk), i.e. -dC^-1/dC."""
    a = Cinv[..., _ROW[:, None], _ROW[None, :]] * Cinv[..., _COL[:, None], _COL[None, :]]
    b = Cinv[..., _ROW[:, None], _COL[None, :]] * Cinv[..., _COL[:, None], _ROW[None, :]]
    return 0.5 * (a + b)


def _outer_voigt(a, b):
    return a[..., :, None] * b[..., None, :]


@dataclass(frozen=True)
class TransIsoParams:
    """Transversely isotropic law; defaults are the normalized moduli of the
    fibre-reinforced comparison study."""

    mu: float = 6.175e5
    beta: float = 5e4
    gamma: float = 1.8e5
    a0: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not (self.mu > 0 and self.beta > 0 and self.gamma >= 0):
            raise InvalidArgs("require mu > 0, beta > 0, gamma >= 0")
        a0 = np.asarray(self.a0, dtype=float)
        if a0.shape != (3,) or abs(np.linalg.norm(a0) - 1.0) > 1e-12:
            raise InvalidArgs("a0 must be a unit 3-vector")


@dataclass(frozen=True)
class NeoHookeParams:
    """Compressible Neo-Hookean law ``Psi = c1/beta (J^-2beta - 1) + c1 (I1 - 3)``."""

    c1: float
    beta_nh: float

    def __post_init__(self):
        if not (self.c1 > 0 and self.beta_nh > 0):
            raise InvalidArgs("require c1 > 0 and beta_nh > 0")

    @classmethod
    def from_shear_poisson(cls, mu, nu):
        if not (mu > 0 and 0 < nu < 0.5):
            raise InvalidArgs("require mu > 0 and 0 < nu < 0.5")
        return cls(c1=mu / 2.0, beta_nh=nu / (1.0 - 2.0 * nu))

    @classmethod
    def from_shear_bulk(cls, mu, kappa):
        nu = (3.0 * kappa - 2.0 * mu) / (2.0 * (3.0 * kappa + mu))
        return cls.from_shear_poisson(mu, nu)

    @property
    def mu(self):
        return 2.0 * self.c1

    @property
    def nu(self):
        return self.beta_nh / (1.0 + 2.0 * self.beta_nh)


# matrix phase of the homogenization study: mu = 80e3 MPa, K = 160e3 MPa
DEFAULT_NEO_HOOKE = NeoHookeParams.from_shear_bulk(80e3, 160e3)
DEFAULT_TRANS_ISO = TransIsoParams()


def trans_iso_stress(c, p: TransIsoParams = DEFAULT_TRANS_ISO):
    c = np.asarray(c, dtype=float)
    _, Cinv, J = _inverse_and_jacobian(c)
    a0 = np.asarray(p.a0, dtype=float)
    A = np.outer(a0, a0)
    I4 = np.einsum("...ij,ij->...", voigt_to_tensor(c), A)
    s_inv = tensor_to_voigt(Cinv)
    coef = (p.beta * J * (J - 1.0) - p.mu)[..., None]
    return p.mu * IDENTITY_VOIGT + coef * s_inv + (2.0 * p.gamma * (I4 - 1.0))[..., None] * tensor_to_voigt(A)


def trans_iso_tangent(c, p: TransIsoParams = DEFAULT_TRANS_ISO):
    """Analytical 6x6 tangent, returned flattened row-major as 36 values."""
    c = np.asarray(c, dtype=float)
    _, Cinv, J = _inverse_and_jacobian(c)
    a0 = np.asarray(p.a0, dtype=float)
    av = tensor_to_voigt(np.outer(a0, a0))
    ci = tensor_to_voigt(Cinv)
    isym = _sym_inverse_product(Cinv)
    J = J[..., None, None]
    D = (
        (2.0 * p.mu - 2.0 * p.beta * J * (J - 1.0)) * isym
        + p.beta * J * (2.0 * J - 1.0) * _outer_voigt(ci, ci)
        + 4.0 * p.gamma * np.outer(av, av)
    )
    return D.reshape(D.shape[:-2] + (36,))


def neo_hooke_energy(c, p: NeoHookeParams = DEFAULT_NEO_HOOKE):
    c = np.asarray(c, dtype=float)
    _, _, J = _inverse_and_jacobian(c)
    I1 = c[..., 0] + c[..., 1] + c[..., 2]
    return p.c1 / p.beta_nh * (J ** (-2.0 * p.beta_nh) - 1.0) + p.c1 * (I1 - 3.0)


def neo_hooke_stress(c, p: NeoHookeParams = DEFAULT_NEO_HOOKE):
    c = np.asarray(c, dtype=float)
    _, Cinv, J = _inverse_and_jacobian(c)
    return 2.0 * p.c1 * (IDENTITY_VOIGT - (J ** (-2.0 * p.beta_nh))[..., None] * tensor_to_voigt(Cinv))


def neo_hooke_tangent(c, p: NeoHookeParams = DEFAULT_NEO_HOOKE):
    c = np.asarray(c, dtype=float)
    _, Cinv, J = _inverse_and_jacobian(c)
    ci = tensor_to_voigt(Cinv)
    scale = (4.0 * p.c1 * J ** (-2.0 * p.beta_nh))[..., None, None]
    D = scale * (p.beta_nh * _outer_voigt(ci, ci) + _sym_inverse_product(Cinv))
    return D.reshape(D.shape[:-2] + (36,))


@dataclass(frozen=True)
class Oracle:
    """A named analytical law bundled with its parameters."""

    name: str
    params: object = field(repr=True)

    def stress(self, c):
        return _STRESS[self.name](c, self.params)

    def tangent(self, c):
        return _TANGENT[self.name](c, self.params)

    def descriptor(self):
        p = self.params
        if self.name == "trans-iso":
            return {
                "oracle": self.name,
                "mu": repr(float(p.mu)),
                "beta": repr(float(p.beta)),
                "gamma": repr(float(p.gamma)),
                "a0": " ".join(repr(float(x)) for x in p.a0),
            }
        return {"oracle": self.name, "mu": repr(float(p.mu)), "nu": repr(float(p.nu))}

    @classmethod
    def from_descriptor(cls, meta):
        name = meta["oracle"]
        if name == "trans-iso":
            a0 = tuple(float(x) for x in meta.get("a0", "1 0 0").split())
            return cls(name, TransIsoParams(float(meta["mu"]), float(meta["beta"]), float(meta["gamma"]), a0))
        if name == "neo-hooke":
            return cls(name, NeoHookeParams.from_shear_poisson(float(meta["mu"]), float(meta["nu"])))
        raise InvalidArgs(f"unknown oracle {name!r}")


_STRESS = {"trans-iso": trans_iso_stress, "neo-hooke": neo_hooke_stress}
_TANGENT = {"trans-iso": trans_iso_tangent, "neo-hooke": neo_hooke_tangent}
ORACLES = tuple(_STRESS)


def make_oracle(name, params=None):
    if name == "trans-iso":
        return Oracle(name, params or DEFAULT_TRANS_ISO)
    if name == "neo-hooke":
        return Oracle(name, params or DEFAULT_NEO_HOOKE)
    raise InvalidArgs(f"unknown oracle {name!r}; expected one of {ORACLES}")
