import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lagpr_fem import mechanics as m
from lagpr_fem.errors import InvalidArgs, NonInvertibleF, SingularC

LAWS = ["trans-iso", "neo-hooke"]


def random_c(rng, n, scale=0.15):
    F = np.eye(3) + scale * rng.uniform(-1, 1, (n, 3, 3))
    return m.right_cauchy_green(F)


def trans_iso_energy(c, p=m.DEFAULT_TRANS_ISO):
    # independent strain energy whose 2 dW/dC is the implemented stress
    C = m.voigt_to_tensor(c)
    J = np.sqrt(np.linalg.det(C))
    a = np.asarray(p.a0)
    I4 = a @ C @ a
    return 0.5 * p.mu * (np.trace(C) - 3) - p.mu * np.log(J) + 0.5 * p.beta * (J - 1) ** 2 + 0.5 * p.gamma * (I4 - 1) ** 2


def fd_stress(energy, c, h=1e-6):
    s = np.empty(6)
    for J in range(6):
        e = np.zeros(6)
        e[J] = h
        dW = (energy(c + e) - energy(c - e)) / (2 * h)
        # a shear perturbation moves both C_ij and C_ji
        s[J] = 2 * dW if J < 3 else dW
    return s


def fd_tangent(stress, c, h=1e-7):
    D = np.empty((6, 6))
    for J in range(6):
        e = np.zeros(6)
        e[J] = h
        ds = (stress(c + e) - stress(c - e)) / (2 * h)
        D[:, J] = 2 * ds if J < 3 else ds
    return D


def test_voigt_roundtrip(rng):
    A = rng.standard_normal((3, 3))
    A = A + A.T
    assert np.array_equal(m.voigt_to_tensor(m.tensor_to_voigt(A)), A)
    assert m.tensor_to_voigt(A).tolist() == [A[0, 0], A[1, 1], A[2, 2], A[1, 2], A[2, 0], A[0, 1]]


def test_frobenius_counts_shear_twice():
    v = np.array([1.0, 0, 0, 0, 0, 2.0])
    assert m.frobenius_voigt(v) == pytest.approx(np.sqrt(1 + 2 * 4))


@pytest.mark.parametrize("law", LAWS)
def test_zero_stress_at_identity(law):
    s = m.make_oracle(law).stress(m.IDENTITY_VOIGT)
    assert np.max(np.abs(s)) <= 1e-12


def test_trans_iso_uniaxial_closed_form():
    # F = diag(1.1, 1, 1): C11 = 1.21, J = 1.1, I4 = 1.21 for fibres along x
    p = m.DEFAULT_TRANS_ISO
    s = m.trans_iso_stress(np.array([1.21, 1, 1, 0, 0, 0]))
    s11 = p.mu * (1 - 1 / 1.21) + p.beta * 1.1 * 0.1 / 1.21 + 2 * p.gamma * 0.21
    s22 = p.beta * 1.1 * 0.1
    assert s == pytest.approx([s11, s22, s22, 0, 0, 0], rel=1e-14, abs=1e-9)


def test_neo_hooke_parameters():
    p = m.DEFAULT_NEO_HOOKE
    assert p.c1 == pytest.approx(40e3)
    assert p.beta_nh == pytest.approx(2.0 / 3.0)
    assert p.nu == pytest.approx(2.0 / 7.0)
    q = m.NeoHookeParams.from_shear_poisson(80e3, 2.0 / 7.0)
    assert q.c1 == pytest.approx(p.c1) and q.beta_nh == pytest.approx(p.beta_nh)


def test_trans_iso_stress_is_energy_gradient(rng):
    for c in random_c(rng, 5):
        assert m.trans_iso_stress(c) == pytest.approx(fd_stress(trans_iso_energy, c), rel=1e-6, abs=1e-2)


def test_neo_hooke_stress_is_energy_gradient(rng):
    for c in random_c(rng, 5):
        assert m.neo_hooke_stress(c) == pytest.approx(fd_stress(m.neo_hooke_energy, c), rel=1e-6, abs=1e-3)


@pytest.mark.parametrize("law", LAWS)
def test_tangent_matches_fd_of_stress(law, rng):
    o = m.make_oracle(law)
    for c in random_c(rng, 10):
        D = o.tangent(c).reshape(6, 6)
        D_fd = fd_tangent(o.stress, c)
        assert np.linalg.norm(D - D_fd) / np.linalg.norm(D) < 1e-6


@pytest.mark.parametrize("law", LAWS)
def test_tangent_major_symmetry(law, rng):
    D = m.make_oracle(law).tangent(random_c(rng, 20)).reshape(-1, 6, 6)
    assert np.allclose(D, np.swapaxes(D, 1, 2), rtol=0, atol=1e-9 * np.abs(D).max())


def test_batch_matches_single(rng):
    c = random_c(rng, 7)
    o = m.make_oracle("trans-iso")
    batch = o.stress(c)
    for i in range(7):
        assert np.array_equal(batch[i], o.stress(c[i]))


def test_compose_F_shape_and_errors():
    F = m.compose_F(m.F_APP_0)
    assert np.array_equal(F, np.eye(3))
    with pytest.raises(InvalidArgs):
        m.compose_F(np.ones(5))


def test_right_cauchy_green_rejects_singular_F():
    with pytest.raises(NonInvertibleF):
        m.right_cauchy_green(np.diag([1.0, 1.0, 0.0]))


def test_singular_c_raises():
    with pytest.raises(SingularC):
        m.trans_iso_stress(np.array([1.0, 1.0, 0.0, 0, 0, 0]))


def test_descriptor_roundtrip():
    for law in LAWS:
        o = m.make_oracle(law)
        d = {k: str(v) for k, v in o.descriptor().items()}
        o2 = m.Oracle.from_descriptor(d)
        c = np.array([1.1, 0.95, 1.02, 0.01, -0.02, 0.03])
        assert np.allclose(o2.stress(c), o.stress(c), rtol=1e-15)


def test_unknown_oracle():
    with pytest.raises(InvalidArgs):
        m.make_oracle("mooney")


@settings(max_examples=40, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-0.15, 0.15)), st.floats(0, 2 * np.pi))
def test_stress_ignores_rigid_rotation(H, angle):
    # C = F^T F is unchanged by a spatial rotation Q F
    F = np.eye(3) + H
    Q = np.array([[np.cos(angle), -np.sin(angle), 0], [np.sin(angle), np.cos(angle), 0], [0, 0, 1]])
    c1 = m.right_cauchy_green(F)
    c2 = m.right_cauchy_green(Q @ F)
    o = m.make_oracle("neo-hooke")
    assert np.allclose(o.stress(c1), o.stress(c2), rtol=1e-9, atol=1e-6)
