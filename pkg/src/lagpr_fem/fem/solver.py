"""Displacement-driven modified Newton-Raphson with frozen Gauss-point surrogates."""

from dataclasses import dataclass, field
import csv
import logging
import warnings

import numpy as np
from scipy.sparse.linalg import MatrixRankWarning, splu

from ..errors import InvalidArgs, LinearSolveFailure
from .element import assemble, deformation_gradients, element_arrays, right_cauchy_green_gp

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("iter", "res_abs", "res_rel", "n_refit", "n_frozen")


@dataclass
class BcSet:
    """Dirichlet data: prescribed dofs and their values at load factor one."""

    dofs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.dofs = np.asarray(self.dofs, dtype=np.intp)
        self.values = np.asarray(self.values, dtype=float)
        if self.dofs.shape != self.values.shape:
            raise InvalidArgs("dofs and values differ in shape")
        uniq, inv = np.unique(self.dofs, return_inverse=True)
        if len(uniq) != len(self.dofs):
            first = np.zeros(len(uniq))
            first[inv] = self.values
            if not np.array_equal(first[inv], self.values):
                raise InvalidArgs("a dof is constrained twice with conflicting values")
            keep = np.unique(inv, return_index=True)[1]
            self.dofs, self.values = self.dofs[keep], self.values[keep]

    @classmethod
    def from_nodes(cls, nodes, components, values):
        nodes = np.asarray(nodes, dtype=np.intp)
        dofs, vals = [], []
        for comp, val in zip(components, values):
            dofs.append(3 * nodes + comp)
            vals.append(np.full(len(nodes), float(val)))
        return cls(np.concatenate(dofs), np.concatenate(vals))

    def merged(self, other):
        return BcSet(np.concatenate([self.dofs, other.dofs]), np.concatenate([self.values, other.values]))


@dataclass
class NrConfig:
    c_tol: float = 0.01
    g_tol: float = 1e-8
    max_iter: int = 12
    freeze_enabled: bool = True
    load_steps: int = 1

    def __post_init__(self):
        if not (self.c_tol > 0 and self.g_tol > 0):
            raise InvalidArgs("tolerances must be positive")
        if self.max_iter < 1 or self.load_steps < 1:
            raise InvalidArgs("max_iter and load_steps must be at least one")


@dataclass
class TraceRow:
    iter: int
    res_abs: float
    res_rel: float
    n_refit: int
    n_frozen: int
    step: int = 0


@dataclass
class SolveResult:
    u: np.ndarray  # (n_nodes, 3)
    trace: list
    converged: bool
    status: str
    F: np.ndarray = field(repr=False, default=None)  # (E, 8, 3, 3)
    S: np.ndarray = field(repr=False, default=None)  # (E, 8, 6)

    @property
    def n_iter(self):
        """Linear solves performed in the last load step before it stopped."""
        last = [r for r in self.trace if r.step == self.trace[-1].step]
        return last[-1].iter

    @property
    def final_res_rel(self):
        return self.trace[-1].res_rel

    def max_abs_F(self, i=None, j=None):
        """Largest ``|F_ij - delta_ij|`` over Gauss points (all components if unspecified)."""
        dev = np.abs(self.F - np.eye(3))
        if i is None:
            return float(dev.max())
        return float(dev[..., i, j].max())


def _factorize(K):
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            return splu(K.tocsc())
        except (RuntimeError, MatrixRankWarning) as exc:
            raise LinearSolveFailure(f"tangent factorization failed: {exc}") from exc


def solve_modified_nr(mesh, bcs: BcSet, backend, cfg: NrConfig = None, u0=None):
    """Solve quasi-static equilibrium for prescribed displacements ``bcs``.

    Each iteration evaluates the back-end at the current Gauss-point
    strains, assembles ``G`` and ``K_T``, records the out-of-balance norm
    (including a pending prescribed increment) and stops once it falls to
    ``g_tol`` times the first one of the step.
    """
    cfg = cfg or NrConfig()
    n = mesh.n_dofs
    u = np.zeros(n) if u0 is None else np.asarray(u0, dtype=float).ravel().copy()
    fixed = bcs.dofs
    free = np.setdiff1d(np.arange(n), fixed)
    c_tol = cfg.c_tol if cfg.freeze_enabled else None
    trace = []
    converged = False
    status = "max-iter"
    n_gp = mesh.n_elements * 8
    for step in range(1, cfg.load_steps + 1):
        lam = step / cfg.load_steps
        target = lam * bcs.values
        backend.start_step(n_gp)
        ref = None
        converged = False
        for it in range(cfg.max_iter + 1):
            F = deformation_gradients(mesh, u.reshape(-1, 3))
            c = right_cauchy_green_gp(F).reshape(-1, 6)
            s, D, n_refit, n_frozen = backend.evaluate(c, c_tol)
            fe, Ke = element_arrays(mesh, F, s.reshape(-1, 8, 6), D.reshape(-1, 8, 6, 6))
            G, K = assemble(mesh, fe, Ke)
            du_fixed = target - u[fixed]
            K_fd = K[free][:, fixed]
            rhs = -(G[free] + K_fd @ du_fixed)
            res_abs = float(np.linalg.norm(rhs))
            if ref is None:
                ref = res_abs if res_abs > 0 else 1.0
            res_rel = res_abs / ref
            trace.append(TraceRow(it, res_abs, res_rel, n_refit, n_frozen, step))
            log.debug("step %d iter %d |G|=%.3e rel=%.3e refit=%d", step, it, res_abs, res_rel, n_refit)
            if not np.isfinite(res_abs):
                status = "diverged"
                break
            if res_rel <= cfg.g_tol or (res_abs == 0.0 and not np.any(du_fixed)):
                converged = True
                status = "converged"
                break
            if it == cfg.max_iter:
                status = "max-iter"
                break
            lu = _factorize(K[free][:, free])
            du = lu.solve(rhs)
            if not np.all(np.isfinite(du)):
                raise LinearSolveFailure("non-finite displacement increment")
            u[free] += du
            u[fixed] = target
        if not converged:
            break
    # every exit happens before an update, so F and s match u
    return SolveResult(u.reshape(-1, 3), trace, converged, status, F, s.reshape(-1, 8, 6))


def write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in trace:
            w.writerow([r.iter, repr(r.res_abs), repr(r.res_rel), r.n_refit, r.n_frozen])


def write_fields(nodes_path, gauss_path, mesh, result: SolveResult):
    with open(nodes_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "x", "y", "z", "ux", "uy", "uz"])
        for i, (x, uu) in enumerate(zip(mesh.nodes, result.u)):
            w.writerow([i, *map(repr, x.tolist()), *map(repr, uu.tolist())])
    names = [f"F{i + 1}{j + 1}" for i in range(3) for j in range(3)]
    with open(gauss_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["elem", "gp", *names, "S11", "S22", "S33", "S23", "S31", "S12"])
        for e in range(mesh.n_elements):
            for g in range(8):
                w.writerow([e, g, *map(repr, result.F[e, g].ravel().tolist()), *map(repr, result.S[e, g].tolist())])


