"""Solvers for the reduced SPD systems: preconditioned CG plus a sparse
direct path for cross-checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SparseSystem
from .errors import NotSPDError, SolverError


@dataclass
class SolveConfig:
    method: str = "cg"  # cg | direct
    rel_tolerance: float = 1e-10
    max_iterations: int | None = None  # default 20 sqrt(n), floor 1000
    preconditioner: str = "diagonal"  # diagonal | none

    def __post_init__(self):
        if not 0.0 < self.rel_tolerance < 1.0:
            raise ValueError("rel_tolerance must be in (0, 1)")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.method not in ("cg", "direct"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.preconditioner not in ("diagonal", "none"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class SolveReport:
    method: str
    iterations: int
    residual: float  # final relative residual
    converged: bool


def _check_symmetric(A):
    d = abs(A - A.T)
    scale = max(1.0, abs(A).max())
    if d.nnz and d.max() > 1e-12 * scale:
        raise NotSPDError("matrix is not symmetric")


def solve_spd(system: SparseSystem, cfg: SolveConfig | None = None):
    """Solve the reduced system; returns (u_free, SolveReport).

    CG detects indefiniteness through p^T A p <= 0. Non-convergence raises
    with the best iterate attached.
    """
    if cfg is None:
        cfg = SolveConfig()
    A = system.matrix
    b = system.rhs
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side contains non-finite entries")
    _check_symmetric(A)
    n = system.size
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(cfg.method, 0, 0.0, True)

    if cfg.method == "direct":
        lu = spla.splu(A.tocsc())
        u = lu.solve(b)
        res = float(np.linalg.norm(b - A @ u)) / bnorm
        return u, SolveReport("direct", 1, res, res <= max(cfg.rel_tolerance, 1e-8))

    maxit = cfg.max_iterations
    if maxit is None:
        maxit = max(1000, int(20.0 * np.sqrt(n)))
    diag = A.diagonal()
    if np.any(diag <= 0.0):
        raise NotSPDError("non-positive diagonal entry")
    inv_diag = 1.0 / diag if cfg.preconditioner == "diagonal" else np.ones(n)

    u = np.zeros(n)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    res = 1.0
    for it in range(1, maxit + 1):
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NotSPDError(f"p^T A p = {pAp:.3e} at iteration {it}")
        alpha = rz / pAp
        u += alpha * p
        r -= alpha * Ap
        res = float(np.linalg.norm(r)) / bnorm
        if res <= cfg.rel_tolerance:
            return u, SolveReport("cg", it, res, True)
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"CG did not reach {cfg.rel_tolerance:g} in {maxit} iterations (residual {res:.3e})",
        iterate=u,
        residual=res,
    )
