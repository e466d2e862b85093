import numpy as np
import pytest

from lagpr_fem import mechanics as m
from lagpr_fem.errors import InvalidArgs, UnknownProblem
from lagpr_fem.fem import (
    BcSet,
    LaGPRBackend,
    NrConfig,
    OracleBackend,
    apply_benchmark,
    element_residual_and_tangent,
    make_backend,
    make_cook_mesh,
    make_cube_mesh,
    solve_modified_nr,
)
from lagpr_fem.fem import benchmarks
from lagpr_fem.fem.element import assemble, deformation_gradients, element_arrays, right_cauchy_green_gp
from lagpr_fem.fem.mesh import shape_functions


def oracle_constitutive(law="neo-hooke"):
    o = m.make_oracle(law)
    return lambda c: (o.stress(c), o.tangent(c))


def global_residual(mesh, u, oracle):
    F = deformation_gradients(mesh, u.reshape(-1, 3))
    c = right_cauchy_green_gp(F).reshape(-1, 6)
    s = oracle.stress(c).reshape(-1, 8, 6)
    D = oracle.tangent(c).reshape(-1, 8, 6, 6)
    return assemble(mesh, *element_arrays(mesh, F, s, D))


def test_shape_functions_partition_of_unity(rng):
    for xi in rng.uniform(-1, 1, (5, 3)):
        N, dN = shape_functions(xi)
        assert N.sum() == pytest.approx(1.0)
        assert np.allclose(dN.sum(axis=0), 0.0)


def test_mesh_volume_and_numbering():
    mesh = make_cube_mesh(3, 2, 4, lengths=(2.0, 1.0, 0.5))
    assert mesh.n_nodes == 4 * 3 * 5 and mesh.n_elements == 24
    _, wdet = mesh.geometry
    assert wdet.sum() == pytest.approx(1.0)
    assert np.allclose(mesh.nodes[1], [2.0 / 3.0, 0, 0])


def test_cook_mesh_area():
    mesh = make_cook_mesh(6, 6, scale=1.0, thickness=1.0)
    _, wdet = mesh.geometry
    # trapezoid 48 wide with heights 44 and 16 at the ends
    assert wdet.sum() == pytest.approx(48 * (44 + 16) / 2)


def test_inverted_element_rejected():
    mesh = make_cube_mesh(1, 1, 1)
    bad = type(mesh)(mesh.nodes * np.array([-1.0, 1.0, 1.0]), mesh.elements)
    with pytest.raises(InvalidArgs):
        bad.geometry


def test_element_tangent_matches_fd(rng):
    cube = make_cube_mesh(1, 1, 1)
    X = cube.nodes[cube.elements[0]] + 0.05 * rng.uniform(-1, 1, (8, 3))
    u = 0.05 * rng.uniform(-1, 1, (8, 3))
    con = oracle_constitutive("trans-iso")
    f, K = element_residual_and_tangent(X, u, con)
    h = 1e-7
    K_fd = np.empty_like(K)
    for j in range(24):
        du = np.zeros(24)
        du[j] = h
        fp, _ = element_residual_and_tangent(X, u + du.reshape(8, 3), con)
        fm, _ = element_residual_and_tangent(X, u - du.reshape(8, 3), con)
        K_fd[:, j] = (fp - fm) / (2 * h)
    assert np.linalg.norm(K - K_fd) / np.linalg.norm(K) < 1e-4
    assert np.allclose(K, K.T, rtol=0, atol=1e-8 * np.abs(K).max())


def test_global_tangent_matches_fd(rng):
    mesh = make_cube_mesh(2, 2, 2)
    oracle = m.make_oracle("neo-hooke")
    u = 0.03 * rng.uniform(-1, 1, mesh.n_dofs)
    G, K = global_residual(mesh, u, oracle)
    K = K.toarray()
    h = 1e-7
    K_fd = np.empty_like(K)
    for j in range(mesh.n_dofs):
        e = np.zeros(mesh.n_dofs)
        e[j] = h
        K_fd[:, j] = (global_residual(mesh, u + e, oracle)[0] - global_residual(mesh, u - e, oracle)[0]) / (2 * h)
    assert np.linalg.norm(K - K_fd) / np.linalg.norm(K) < 1e-4


def test_zero_and_rigid_translation_residual():
    mesh = make_cube_mesh(2, 2, 2)
    oracle = m.make_oracle("trans-iso")
    G0, K0 = global_residual(mesh, np.zeros(mesh.n_dofs), oracle)
    assert np.abs(G0).max() == 0.0
    u = np.tile([0.3, -0.2, 0.1], mesh.n_nodes)
    G, _ = global_residual(mesh, u, oracle)
    assert np.abs(G).max() < 1e-9
    # clamping one face removes the rigid modes
    fixed = np.flatnonzero(np.repeat(mesh.nodes[:, 2] == 0, 3))
    free = np.setdiff1d(np.arange(mesh.n_dofs), fixed)
    assert np.linalg.eigvalsh(K0.toarray()[np.ix_(free, free)]).min() > 0


def test_bcset_dedup_and_conflict():
    b = BcSet([0, 1, 0], [1.0, 2.0, 1.0])
    assert b.dofs.tolist() == [0, 1]
    with pytest.raises(InvalidArgs):
        BcSet([0, 0], [1.0, 2.0])
    assert BcSet.from_nodes([2], (0, 2), (0.5, -0.5)).dofs.tolist() == [6, 8]


def test_nrconfig_validation():
    with pytest.raises(InvalidArgs):
        NrConfig(c_tol=0)
    with pytest.raises(InvalidArgs):
        NrConfig(max_iter=0)


def test_unknown_problem():
    with pytest.raises(UnknownProblem):
        apply_benchmark("plate")


def small_cube(magnitude=0.1, n=3):
    mesh = make_cube_mesh(n, n, n)
    z = mesh.nodes[:, 2]
    bcs = BcSet.from_nodes(np.flatnonzero(z == 0), (0, 1, 2), (0, 0, 0)).merged(
        BcSet.from_nodes(np.flatnonzero(np.isclose(z, 1)), (0, 1, 2), (magnitude, 0, 0))
    )
    return mesh, bcs


def test_oracle_newton_is_quadratic():
    mesh, bcs = small_cube()
    r = solve_modified_nr(mesh, bcs, OracleBackend(m.make_oracle("trans-iso")), NrConfig(g_tol=1e-12, max_iter=10))
    assert r.converged and r.n_iter <= 6
    res = [t.res_rel for t in r.trace]
    # once in the basin, each error is at most a constant times the square of the previous one
    assert res[-1] < 1e-12
    assert res[-2] < 1e-3 * res[-3]
    # prescribed values hold exactly
    assert np.array_equal(r.u.ravel()[bcs.dofs], bcs.values)


def test_load_steps_agree_with_single_step():
    mesh, bcs = small_cube()
    be = OracleBackend(m.make_oracle("neo-hooke"))
    a = solve_modified_nr(mesh, bcs, be, NrConfig(g_tol=1e-12))
    b = solve_modified_nr(mesh, bcs, be, NrConfig(g_tol=1e-12, load_steps=3))
    assert a.converged and b.converged
    assert np.allclose(a.u, b.u, atol=1e-10)
    assert {t.step for t in b.trace} == {1, 2, 3}


class RecordingBackend(LaGPRBackend):
    """Keeps the per-iteration surrogate fingerprints."""

    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self.history = []

    def evaluate(self, c, c_tol=None):
        out = super().evaluate(c, c_tol)
        self.history.append((self.state.fingerprints.copy(), self.state.frozen.copy()))
        return out


def test_freeze_keeps_surrogate_identity(trans_iso_small):
    mesh, bcs = small_cube(0.05, n=2)
    be = RecordingBackend(trans_iso_small, n_local=30, freeze_theta=True)
    solve_modified_nr(mesh, bcs, be, NrConfig(c_tol=0.01, g_tol=1e-8, max_iter=8))
    first_fp, first_frozen = be.history[0]
    assert not first_frozen.any()
    for (fp0, _), (fp1, frozen) in zip(be.history, be.history[1:]):
        assert np.array_equal(fp1[frozen], fp0[frozen])
        assert np.all(fp1[~frozen] != fp0[~frozen])
    assert any(f.any() for _, f in be.history[1:])


def test_freeze_off_refits_everywhere(trans_iso_small):
    mesh, bcs = small_cube(0.05, n=2)
    be = LaGPRBackend(trans_iso_small, n_local=30, freeze_theta=True)
    r = solve_modified_nr(mesh, bcs, be, NrConfig(max_iter=3, freeze_enabled=False))
    assert all(t.n_frozen == 0 and t.n_refit == 64 for t in r.trace)


def test_huge_c_tol_freezes_after_first_fit(trans_iso_small):
    # every surrogate is fitted once and then fixed. The predicted tangent is
    # regressed separately from the stress, so it is not the exact derivative
    # of the predicted stress and the contraction is linear, not quadratic.
    mesh, bcs = small_cube(0.05, n=2)
    be = LaGPRBackend(trans_iso_small, n_local=30, freeze_theta=True)
    r = solve_modified_nr(mesh, bcs, be, NrConfig(c_tol=1e6, g_tol=1e-6, max_iter=12))
    assert r.converged
    assert all(t.n_refit == 0 for t in r.trace[1:])
    assert be.n_fits == 1  # all Gauss points start at C = I and share one fit
    res = np.array([t.res_rel for t in r.trace])
    assert np.all(res[2:] / res[1:-1] < 0.5)


def test_solve_is_deterministic(trans_iso_small):
    mesh, bcs = small_cube(0.05, n=2)
    traces = []
    for _ in range(2):
        be = LaGPRBackend(trans_iso_small, n_local=30, share_theta=True)
        r = solve_modified_nr(mesh, bcs, be, NrConfig(max_iter=3))
        traces.append([(t.res_abs, t.n_refit) for t in r.trace])
    assert traces[0] == traces[1]


def test_threaded_refits_match_serial(trans_iso_small):
    mesh, bcs = small_cube(0.05, n=2)
    out = []
    for workers in (1, 3):
        be = LaGPRBackend(trans_iso_small, n_local=30, freeze_theta=True, workers=workers)
        out.append(solve_modified_nr(mesh, bcs, be, NrConfig(max_iter=3)).u)
    assert np.array_equal(out[0], out[1])


def test_knn1_backend_runs(trans_iso_small):
    be = make_backend("knn1", trans_iso_small)
    s, D, n_refit, n_frozen = be.evaluate(trans_iso_small.c[:4])
    assert np.array_equal(s, trans_iso_small.s[:4]) and D.shape == (4, 6, 6)
    with pytest.raises(InvalidArgs):
        make_backend("spline", trans_iso_small)


def test_benchmark_definitions():
    mesh, bcs = apply_benchmark("cube-shear-a")
    assert mesh.n_elements == 512
    top = np.flatnonzero(np.isclose(mesh.nodes[:, 2], 1.0))
    vals = dict(zip(bcs.dofs.tolist(), bcs.values.tolist()))
    assert vals[3 * top[0]] == benchmarks.CUBE_MAGNITUDES["cube-shear-a"]
    mesh, bcs = apply_benchmark("punch")
    assert mesh.n_elements == 343
    assert np.sum(bcs.values == -0.06) == 16  # 4x4 nodes under the punch
    mesh, bcs = apply_benchmark("cook")
    assert mesh.shape == (12, 12, 1)


def test_cube_magnitudes_reach_fifteen_percent():
    be = OracleBackend(m.make_oracle("trans-iso"))
    for p in ("cube-normal", "cube-shear-a", "cube-shear-b"):
        mesh, bcs = apply_benchmark(p)
        r = solve_modified_nr(mesh, bcs, be, NrConfig(g_tol=1e-10))
        assert r.max_abs_F() == pytest.approx(0.15, abs=5e-4)
