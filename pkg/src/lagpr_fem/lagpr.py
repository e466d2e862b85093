"""Local approximate GP regression over a nearest-neighbour subset."""

from dataclasses import dataclass
import itertools

import numpy as np
from scipy.spatial import cKDTree

from . import gpr
from .errors import EmptyDataset, InvalidArgs

DEFAULT_N_LOCAL = 100
MIN_N_LOCAL = 8

_fingerprints = itertools.count(1)


def _sq_dist(q, X):
    return np.sum((X - q) ** 2, axis=1)


class NeighborIndex:
    """k-NN over training inputs, ordered by Euclidean distance then row id.

    A kd-tree proposes candidates; every candidate within the k-th
    distance is re-ranked with an exact squared-distance key so ties are
    broken by row id.
    """

    def __init__(self, points, flag_distance=None):
        points = np.ascontiguousarray(points, dtype=float)
        if points.ndim != 2 or len(points) == 0:
            raise EmptyDataset("cannot index an empty point set")
        self.points = points
        self.flag_distance = flag_distance
        self._tree = cKDTree(points)

    def __len__(self):
        return len(self.points)

    def _query_one(self, q, dk, k):
        if k == len(self.points):
            cand = np.arange(k)
        else:
            cand = np.asarray(self._tree.query_ball_point(q, dk * (1.0 + 1e-9) + 1e-300), dtype=np.intp)
        d2 = _sq_dist(q, self.points[cand])
        order = np.lexsort((cand, d2))[:k]
        return cand[order], np.sqrt(d2[order])

    def query(self, c, k):
        """Return ``(ids, distances)``; shapes ``(k,)`` or ``(m, k)`` for a batch."""
        c = np.asarray(c, dtype=float)
        single = c.ndim == 1
        Q = np.atleast_2d(c)
        k = min(int(k), len(self.points))
        if k < 1:
            raise InvalidArgs("k must be positive")
        dk, _ = self._tree.query(Q, k)
        dk = np.asarray(dk).reshape(len(Q), -1)[:, -1]
        ids = np.empty((len(Q), k), dtype=np.intp)
        dist = np.empty((len(Q), k))
        for i, q in enumerate(Q):
            ids[i], dist[i] = self._query_one(q, dk[i], k)
        if single:
            return ids[0], dist[0]
        return ids, dist

    def is_extrapolating(self, nearest_distance):
        if self.flag_distance is None:
            return np.zeros(np.shape(nearest_distance), dtype=bool)
        return np.asarray(nearest_distance) > self.flag_distance


def build_index(ts):
    """Index over ``ts.c``. For hypercube data, queries whose nearest
    training input is farther than one layer spacing (mapped to C-space,
    ``2 delta + delta^2``) are flagged as extrapolation."""
    if ts is None or len(ts) == 0:
        raise EmptyDataset("training set is empty")
    spacing = ts.spacing
    flag = None if spacing is None else 2.0 * spacing + spacing**2
    return NeighborIndex(ts.c, flag_distance=flag)


@dataclass
class LocalSurrogate:
    anchor: np.ndarray
    ids: np.ndarray
    gp: gpr.FittedGP
    theta: np.ndarray
    extrapolated: bool
    fingerprint: int

    def __call__(self, c):
        return evaluate(self, c)


def local_fit(idx, ts, c_star, n_local=DEFAULT_N_LOCAL, theta_init=None, optimize=True, share_theta=False, max_evals=200):
    """Fit a kriging model on the ``n_local`` training rows nearest ``c_star``.

    ``theta_init`` seeds the length-scale search (default: log-midpoint of
    the bounds). With ``optimize=False`` it is used as is.
    """
    n_local = int(n_local)
    if n_local < 2:
        raise InvalidArgs("n_local must be at least 2")
    if n_local > len(ts):
        raise InvalidArgs(f"n_local={n_local} exceeds the {len(ts)} training rows")
    c_star = np.asarray(c_star, dtype=float)
    ids, dist = idx.query(c_star, n_local)
    X, Y = ts.c[ids], ts.y[ids]
    theta = gpr.DEFAULT_THETA if theta_init is None else theta_init
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (Y.shape[1], X.shape[1]))
    if optimize:
        groups = gpr.SHARED_GROUPS if share_theta else None
        theta = gpr.optimize_theta(X, Y, theta, groups=groups, max_evals=max_evals)
    gp = gpr.fit_gp(X, Y, theta).compact()
    return LocalSurrogate(
        anchor=c_star.copy(),
        ids=ids,
        gp=gp,
        theta=np.array(theta),
        extrapolated=bool(idx.is_extrapolating(dist[0])),
        fingerprint=next(_fingerprints),
    )


def split_prediction(y):
    """Stress and symmetrised tangent from 42-wide predictions."""
    s = y[..., :6]
    D = y[..., 6:].reshape(y.shape[:-1] + (6, 6))
    D = 0.5 * (D + np.swapaxes(D, -1, -2))
    return s, D.reshape(y.shape[:-1] + (36,))


def evaluate(ls: LocalSurrogate, c):
    """``(s, d)`` predicted by a local surrogate at ``c``."""
    return split_prediction(gpr.predict(ls.gp, c))
