import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagpr_fem import lagpr
from lagpr_fem.errors import EmptyDataset, InvalidArgs


def brute_knn(points, q, k):
    d2 = np.sum((points - q) ** 2, axis=1)
    order = sorted(range(len(points)), key=lambda i: (d2[i], i))[:k]
    return np.array(order)


def test_matches_brute_force(rng):
    P = rng.uniform(0, 1, (300, 6))
    idx = lagpr.NeighborIndex(P)
    for q in rng.uniform(0, 1, (20, 6)):
        ids, dist = idx.query(q, 25)
        assert np.array_equal(ids, brute_knn(P, q, 25))
        assert np.all(np.diff(dist) >= 0)


def test_ties_broken_by_row_id():
    # a lattice has many equidistant neighbours
    g = np.array(np.meshgrid(*[[0.0, 1.0, 2.0]] * 3, indexing="ij")).reshape(3, -1).T
    P = np.hstack([g, np.zeros((len(g), 3))])[::-1].copy()
    idx = lagpr.NeighborIndex(P)
    q = np.array([1.0, 1.0, 1.0, 0, 0, 0])
    for k in (1, 7, 19, 27):
        assert np.array_equal(idx.query(q, k)[0], brute_knn(P, q, k))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60), st.integers(1, 80), st.integers(0, 1000))
def test_k_capped_and_batch_consistent(n, k, seed):
    r = np.random.default_rng(seed)
    P = np.round(r.uniform(0, 1, (n, 6)), 1)  # rounding creates ties
    idx = lagpr.NeighborIndex(P)
    Q = np.round(r.uniform(0, 1, (3, 6)), 1)
    ids, _ = idx.query(Q, k)
    assert ids.shape == (3, min(k, n))
    for i, q in enumerate(Q):
        assert np.array_equal(ids[i], brute_knn(P, q, k))


def test_errors():
    with pytest.raises(EmptyDataset):
        lagpr.NeighborIndex(np.empty((0, 6)))
    with pytest.raises(InvalidArgs):
        lagpr.NeighborIndex(np.zeros((3, 6))).query(np.zeros(6), 0)


def test_extrapolation_flag(trans_iso_small):
    idx = lagpr.build_index(trans_iso_small)
    delta = 0.175 / 2
    assert idx.flag_distance == pytest.approx(2 * delta + delta**2)
    assert not idx.is_extrapolating(0.0)
    assert idx.is_extrapolating(idx.flag_distance * 1.01)


def test_local_fit_reproduces_training_rows(trans_iso_small):
    ts = trans_iso_small
    idx = lagpr.build_index(ts)
    ls = lagpr.local_fit(idx, ts, ts.c[5], n_local=30, optimize=False)
    assert len(ls.ids) == 30 and ls.ids[0] == 5
    assert ls.theta.shape == (42, 6)
    s, d = lagpr.evaluate(ls, ts.c[ls.ids])
    assert np.allclose(s, ts.s[ls.ids], rtol=1e-6, atol=1e-6 * np.abs(ts.s).max())
    D = d.reshape(-1, 6, 6)
    assert np.allclose(D, np.swapaxes(D, 1, 2))


def test_local_fit_beats_nearest_neighbour(trans_iso_small, rng):
    from lagpr_fem.baselines import knn1_evaluate

    ts = trans_iso_small
    idx = lagpr.build_index(ts)
    Q = ts.c[0] + rng.uniform(-0.1, 0.1, (8, 6))
    truth = ts.oracle.stress(Q)
    s_gp = np.array([lagpr.evaluate(lagpr.local_fit(idx, ts, q, n_local=60, share_theta=True), q)[0] for q in Q])
    s_nn = knn1_evaluate(idx, ts, Q)[0]
    assert np.sum((s_gp - truth) ** 2) < np.sum((s_nn - truth) ** 2)


def test_fingerprints_unique(trans_iso_small):
    ts = trans_iso_small
    idx = lagpr.build_index(ts)
    a = lagpr.local_fit(idx, ts, ts.c[0], n_local=10, optimize=False)
    b = lagpr.local_fit(idx, ts, ts.c[0], n_local=10, optimize=False)
    assert a.fingerprint != b.fingerprint


def test_local_fit_arguments(trans_iso_small):
    idx = lagpr.build_index(trans_iso_small)
    with pytest.raises(InvalidArgs):
        lagpr.local_fit(idx, trans_iso_small, np.ones(6), n_local=1)
    with pytest.raises(InvalidArgs):
        lagpr.local_fit(idx, trans_iso_small, np.ones(6), n_local=10**6)
