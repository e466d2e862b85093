"""Ordinary kriging with a Matern 3/2 product kernel.

The 42 outputs (6 stresses, 36 tangent entries) are modelled as independent
scalar processes that share the input set. Each channel has its own
length-scale vector; channels whose length scales coincide share one
Cholesky factorization.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from . import kernels
from .errors import CholeskyFailure, DuplicateInputs, InvalidArgs, InvalidTheta

THETA_MIN = 1e-4
THETA_MAX = 1e2
LOG_BOUNDS = (np.log10(THETA_MIN), np.log10(THETA_MAX))
DEFAULT_THETA = 10.0 ** (0.5 * (LOG_BOUNDS[0] + LOG_BOUNDS[1]))

NUGGET_START = 1e-10
NUGGET_MAX = 1e-4

N_STRESS = 6
N_OUT = 42
# stress channels / tangent channels, used when length scales are shared
SHARED_GROUPS = (np.arange(0, N_STRESS), np.arange(N_STRESS, N_OUT))


def _check_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
        raise InvalidTheta(f"length scales must be finite and positive, got {theta}")
    return theta


def matern32(c, c_prime, theta):
    """Scalar Matern 3/2 product correlation between two inputs."""
    theta = _check_theta(theta)
    a = np.sqrt(3.0) * np.abs(np.asarray(c, float) - np.asarray(c_prime, float)) / theta
    return float(np.prod((1.0 + a) * np.exp(-a)))


def correlation(X, theta):
    theta = _check_theta(theta)
    return kernels.corr_matrix(np.ascontiguousarray(X, dtype=float), np.ascontiguousarray(theta))


def factor(R):
    """Lower Cholesky factor of ``R + nugget I`` with nugget escalation.

    Starts at ``1e-10 * trace(R) / n`` and multiplies by ten on failure up to
    ``1e-4``. Returns ``(L, nugget)``.
    """
    n = len(R)
    nugget = NUGGET_START * np.trace(R) / n
    while True:
        A = R.copy()
        A[np.diag_indices(n)] += nugget
        try:
            return linalg.cholesky(A, lower=True, check_finite=False), nugget
        except linalg.LinAlgError:
            pass
        if nugget * 10.0 > NUGGET_MAX * (1.0 + 1e-12):
            raise CholeskyFailure(f"R + nugget I not positive definite up to nugget {nugget:.1e}")
        nugget *= 10.0


def _gls(L, Y):
    """GLS constant mean and weights for every column of ``Y``."""
    n = len(L)
    Rinv1 = linalg.cho_solve((L, True), np.ones(n), check_finite=False)
    denom = Rinv1.sum()
    mu = Rinv1 @ Y / denom
    alpha = linalg.cho_solve((L, True), Y - mu, check_finite=False)
    return mu, alpha, denom


def _theta_groups(theta):
    """Map channels onto unique length-scale rows."""
    uniq, inverse = np.unique(theta, axis=0, return_inverse=True)
    return uniq, inverse.reshape(-1)


@dataclass
class FittedGP:
    inputs: np.ndarray  # (n, 6)
    targets: np.ndarray  # (n, m)
    theta: np.ndarray  # (m, 6)
    mu_hat: np.ndarray  # (m,)
    alpha: np.ndarray  # (n, m)
    group_theta: np.ndarray  # (g, 6) unique length-scale rows
    group_of: np.ndarray  # (m,) channel -> group
    nugget: np.ndarray  # (g,)
    chol: list = field(default=None, repr=False)

    @property
    def n_channels(self):
        return self.targets.shape[1]

    def predict(self, c_star):
        return predict(self, c_star)

    def compact(self):
        """Copy without Cholesky factors; enough for prediction."""
        return replace(self, chol=None)


def fit_gp(inputs, targets, theta):
    """Fit independent kriging models for every column of ``targets``.

    ``theta`` is either one 6-vector shared by all channels or an
    ``(m, 6)`` array with one row per channel.
    """
    X = np.ascontiguousarray(inputs, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = len(X)
    if n < 2:
        raise InvalidArgs("fit_gp needs at least two inputs")
    if len(Y) != n:
        raise InvalidArgs("inputs and targets differ in length")
    if len(np.unique(X, axis=0)) != n:
        raise DuplicateInputs("training inputs must be distinct")
    m = Y.shape[1]
    theta = _check_theta(np.broadcast_to(np.asarray(theta, float), (m, X.shape[1]))).copy()
    uniq, group_of = _theta_groups(theta)
    mu = np.empty(m)
    alpha = np.empty((n, m))
    chols, nuggets = [], []
    for g, th in enumerate(uniq):
        L, nug = factor(kernels.corr_matrix(X, np.ascontiguousarray(th)))
        cols = group_of == g
        mu[cols], alpha[:, cols], _ = _gls(L, Y[:, cols])
        chols.append(L)
        nuggets.append(nug)
    return FittedGP(X, Y, theta, mu, alpha, uniq, group_of, np.array(nuggets), chols)


def predict(gp: FittedGP, c_star):
    """Kriging mean ``mu + k(c*)^T alpha`` per channel; accepts one or many queries.

    The nugget is microscale variance of the process, so the correlation
    of a query with an identical training input includes it and the
    predictor returns that input's target. Everywhere else ``k`` is the
    plain Matern correlation.
    """
    q = np.asarray(c_star, dtype=float)
    single = q.ndim == 1
    Q = np.ascontiguousarray(np.atleast_2d(q))
    out = np.empty((len(Q), gp.n_channels))
    hits = None
    for g, th in enumerate(gp.group_theta):
        cols = gp.group_of == g
        r = kernels.corr_cross(Q, gp.inputs, np.ascontiguousarray(th))
        out[:, cols] = gp.mu_hat[cols] + r @ gp.alpha[:, cols]
        if hits is None:
            hits = [(i, j) for i, j in zip(*np.nonzero(r == 1.0)) if np.array_equal(Q[i], gp.inputs[j])]
    # (K + nugget I) alpha = y - mu holds row-wise, so the exact value is the target
    for i, j in hits or ():
        out[i] = gp.targets[j]
    return out[0] if single else out


# --------------------------------------------------------------------------
# Restricted likelihood and length-scale search
# --------------------------------------------------------------------------


def _constant_columns(Y):
    span = np.ptp(Y, axis=0)
    scale = np.max(np.abs(Y), axis=0)
    return span <= 1e-13 * np.maximum(scale, 1e-300)


def _group_nll(X, Y, theta, constant=None):
    """Sum over the columns of ``Y`` of the concentrated restricted
    negative log-likelihood at the shared length scales ``theta``."""
    n = len(X)
    L, _ = factor(kernels.corr_matrix(X, theta))
    mu, alpha, denom = _gls(L, Y)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    quad = np.einsum("ij,ij->j", Y - mu, alpha)
    if constant is None:
        constant = _constant_columns(Y)
    var_term = np.where(constant, 0.0, (n - 1) * np.log(np.maximum(quad, 1e-300) / (n - 1)))
    return 0.5 * float(np.sum(var_term) + Y.shape[1] * (logdet + np.log(denom)))


def neg_restricted_loglik(inputs, targets_channel, theta_channel):
    """Concentrated restricted negative log-likelihood of one channel.

    ``0.5 [(n-1) log s2 + log|R| + log(1^T R^-1 1)]`` with the process
    variance ``s2`` and the constant mean profiled out.
    """
    X = np.ascontiguousarray(inputs, dtype=float)
    y = np.asarray(targets_channel, dtype=float).reshape(-1, 1)
    theta = _check_theta(theta_channel)
    return _group_nll(X, y, np.ascontiguousarray(theta))


@dataclass
class PatternSearchResult:
    x: np.ndarray
    fun: float
    n_evals: int
    history: list  # objective after every accepted move


def hooke_jeeves(fun, x0, lower, upper, step=0.5, min_step=1e-3, max_evals=200):
    """Box-constrained Hooke-Jeeves pattern search (minimisation).

    Exploratory moves probe ``+step`` then ``-step`` along each coordinate;
    success triggers a pattern move along the last improvement. Failure
    halves the step. Stops once the step drops below ``min_step`` or the
    evaluation budget is spent.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        val = fun(x)
        return val if np.isfinite(val) else np.inf

    def explore(base, fbase):
        x, fx = base.copy(), fbase
        for k in range(len(x)):
            for sign in (1.0, -1.0):
                if evals >= max_evals:
                    return x, fx
                trial = x.copy()
                trial[k] = min(max(x[k] + sign * step, lower[k]), upper[k])
                if trial[k] == x[k]:
                    continue
                ft = f(trial)
                if ft < fx:
                    x, fx = trial, ft
                    break
        return x, fx

    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    fx = f(x)
    history = [fx]
    while step >= min_step and evals < max_evals:
        xn, fn = explore(x, fx)
        if fn < fx:
            while True:
                x_pat = np.clip(2.0 * xn - x, lower, upper)
                x, fx = xn, fn
                history.append(fx)
                if evals >= max_evals:
                    break
                xe, fe = explore(x_pat, f(x_pat))
                if fe < fx:
                    xn, fn = xe, fe
                else:
                    break
        else:
            step *= 0.5
    return PatternSearchResult(x, fx, evals, history)


def _safe_nll(X, Y, constant):
    def objective(log_theta):
        try:
            return _group_nll(X, Y, np.ascontiguousarray(10.0 ** log_theta), constant)
        except CholeskyFailure:
            return np.inf

    return objective


def optimize_theta(inputs, targets, theta0, groups=None, step=0.5, min_step=1e-3, max_evals=200):
    """Restricted-likelihood length scales by pattern search in log10 space.

    ``groups`` lists channel index arrays that share one length-scale
    vector; ``None`` optimises every channel on its own. ``max_evals``
    applies per group. Returns an ``(m, 6)`` array.
    """
    X = np.ascontiguousarray(inputs, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    m, dim = Y.shape[1], X.shape[1]
    theta0 = np.clip(np.broadcast_to(_check_theta(theta0), (m, dim)), THETA_MIN, THETA_MAX)
    if groups is None:
        groups = [np.array([j]) for j in range(m)]
    lo = np.full(dim, LOG_BOUNDS[0])
    hi = np.full(dim, LOG_BOUNDS[1])
    constant = _constant_columns(Y)
    theta = theta0.copy()
    for cols in groups:
        cols = np.asarray(cols)
        start = np.log10(theta0[cols[0]])
        res = hooke_jeeves(_safe_nll(X, Y[:, cols], constant[cols]), start, lo, hi, step, min_step, max_evals)
        theta[cols] = np.clip(10.0 ** res.x, THETA_MIN, THETA_MAX)
    return theta
