"""Constitutive back-ends evaluated at all Gauss points of a mesh at once.

Every back-end exposes ``start_step(n_points)`` and
``evaluate(c, c_tol) -> (s, D, n_refit, n_frozen)`` with ``c`` of shape
``(G, 6)``, ``s`` ``(G, 6)`` and ``D`` ``(G, 6, 6)``. ``c_tol=None``
disables freezing.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import gpr
from ..baselines import knn1_evaluate
from ..lagpr import DEFAULT_N_LOCAL, MIN_N_LOCAL, LocalSurrogate, build_index, evaluate, local_fit
from ..errors import InvalidArgs
from ..mechanics import frobenius_voigt


class OracleBackend:
    name = "oracle"

    def __init__(self, oracle):
        self.oracle = oracle

    def start_step(self, n_points):
        pass

    def evaluate(self, c, c_tol=None):
        s = self.oracle.stress(c)
        D = self.oracle.tangent(c).reshape(-1, 6, 6)
        return s, D, 0, 0


class Knn1Backend:
    name = "knn1"

    def __init__(self, ts, idx=None):
        self.ts = ts
        self.idx = idx or build_index(ts)

    def start_step(self, n_points):
        pass

    def evaluate(self, c, c_tol=None):
        s, d = knn1_evaluate(self.idx, self.ts, c)
        return s, d.reshape(-1, 6, 6), 0, 0


class GaussPointState:
    """Per-Gauss-point surrogate slots for one load step."""

    def __init__(self, n_points):
        self.c_ref = np.full((n_points, 6), np.nan)
        self.surrogates = [None] * n_points
        self.frozen = np.zeros(n_points, dtype=bool)
        self.theta = [None] * n_points

    @property
    def fingerprints(self):
        return np.array([0 if s is None else s.fingerprint for s in self.surrogates])


class LaGPRBackend:
    """Local GP surrogates per Gauss point with the freeze rule.

    A Gauss point keeps its surrogate while ``||C - C_ref||_F <= c_tol``,
    where ``C_ref`` is the strain the surrogate was built at; otherwise a
    new local model is fitted at the current strain. ``freeze_theta``
    skips length-scale optimisation and reuses the warm-start values.
    """

    name = "lagpr"

    def __init__(
        self,
        ts,
        idx=None,
        n_local=DEFAULT_N_LOCAL,
        freeze_theta=False,
        share_theta=False,
        theta_init=None,
        max_evals=200,
        workers=1,
    ):
        if n_local < MIN_N_LOCAL:
            raise InvalidArgs(f"n_local must be at least {MIN_N_LOCAL}")
        self.ts = ts
        self.idx = idx or build_index(ts)
        self.n_local = int(n_local)
        self.freeze_theta = freeze_theta
        self.share_theta = share_theta
        self.theta_init = gpr.DEFAULT_THETA if theta_init is None else theta_init
        self.max_evals = max_evals
        self.workers = max(1, int(workers))
        self.state = None
        self.n_fits = 0
        self.n_extrapolated = 0

    def start_step(self, n_points):
        prev = self.state
        self.state = GaussPointState(n_points)
        if prev is not None and len(prev.theta) == n_points:
            self.state.theta = list(prev.theta)

    def _fit(self, c, theta0):
        return local_fit(
            self.idx,
            self.ts,
            c,
            n_local=self.n_local,
            theta_init=theta0,
            optimize=not self.freeze_theta,
            share_theta=self.share_theta,
            max_evals=self.max_evals,
        )

    def _refit(self, points, c):
        st = self.state
        # Gauss points sitting at the same strain (and warm start) share one fit
        jobs = {}
        for g in points:
            th = st.theta[g]
            key = (c[g].tobytes(), None if th is None else th.tobytes())
            jobs.setdefault(key, []).append(g)
        keys = list(jobs)

        def run(key):
            g = jobs[key][0]
            th = st.theta[g]
            return self._fit(c[g], self.theta_init if th is None else th)

        if self.workers > 1 and len(keys) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                fitted = list(pool.map(run, keys))
        else:
            fitted = [run(k) for k in keys]
        for key, ls in zip(keys, fitted):
            self.n_fits += 1
            self.n_extrapolated += int(ls.extrapolated)
            for g in jobs[key]:
                st.surrogates[g] = ls
                st.c_ref[g] = c[g]
                st.theta[g] = ls.theta

    def evaluate(self, c, c_tol=None):
        c = np.asarray(c, dtype=float)
        if self.state is None or len(self.state.surrogates) != len(c):
            self.start_step(len(c))
        st = self.state
        has = np.array([s is not None for s in st.surrogates])
        if c_tol is None:
            refit = np.ones(len(c), dtype=bool)
        else:
            dC = np.where(has, frobenius_voigt(c - np.where(has[:, None], st.c_ref, 0.0)), np.inf)
            refit = dC > c_tol
        st.frozen = ~refit
        self._refit(np.flatnonzero(refit), c)
        s = np.empty((len(c), 6))
        d = np.empty((len(c), 36))
        # group Gauss points by surrogate to batch predictions
        by_model = {}
        for g, ls in enumerate(st.surrogates):
            by_model.setdefault(id(ls), (ls, []))[1].append(g)
        for ls, gs in by_model.values():
            s[gs], d[gs] = evaluate(ls, c[gs])
        n_refit = int(refit.sum())
        return s, d.reshape(-1, 6, 6), n_refit, len(c) - n_refit


def make_backend(kind, ts=None, oracle=None, **kwargs):
    if kind == "oracle":
        if oracle is None:
            oracle = ts.oracle
        return OracleBackend(oracle)
    if ts is None:
        raise InvalidArgs(f"backend {kind!r} needs a training set")
    if kind == "lagpr":
        return LaGPRBackend(ts, **kwargs)
    if kind in ("knn1", "1nn", "knn"):
        return Knn1Backend(ts)
    raise InvalidArgs(f"unknown backend {kind!r}")


__all__ = ["OracleBackend", "Knn1Backend", "LaGPRBackend", "GaussPointState", "LocalSurrogate", "make_backend"]
