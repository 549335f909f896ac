"""Preconditioned conjugate gradients for the reduced SPD systems."""
from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from ..errors import SolverFailure

log = logging.getLogger(__name__)

AMG_THRESHOLD = 20_000


def _jacobi(A):
    d = A.diagonal()
    if np.any(d <= 0):
        raise SolverFailure("matrix has a non-positive diagonal entry")
    inv = 1.0 / d
    return LinearOperator(A.shape, matvec=lambda x: inv * x.ravel(), dtype=float)


def _amg(A):
    import pyamg
    ml = pyamg.smoothed_aggregation_solver(A, symmetry="symmetric", max_coarse=500)
    return ml.aspreconditioner(cycle="V")


def solve_spd(A, b, rtol: float = 1e-12, precond: str = "auto", x0=None):
    """Solve ``A x = b`` with PCG until ``||A x - b|| <= rtol ||b||``.

    A residual that stalls above ``rtol`` but below the level at which it can
    be evaluated in double precision, ``64 eps || |A||x| + |b| ||``, is
    accepted.
    ``precond`` is ``jacobi``, ``amg`` (smoothed aggregation V-cycle) or
    ``auto``, which picks AMG above ``AMG_THRESHOLD`` unknowns.  The
    iteration cap is ``50 sqrt(n) + 1000``.  Raises :class:`SolverFailure`
    with the final relative residual if the tolerance is not met.
    """
    if not 0 < rtol <= 1e-6:
        raise ValueError(f"rtol must lie in (0, 1e-6], got {rtol}")
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    bnorm = np.linalg.norm(b)
    if n == 0:
        return np.zeros(0)
    if bnorm == 0.0:
        return np.zeros(n)
    if precond == "auto":
        precond = "amg" if n > AMG_THRESHOLD else "jacobi"
    if precond == "jacobi":
        M = _jacobi(A)
    elif precond == "amg":
        M = _amg(A)
    else:
        raise ValueError(f"unknown preconditioner {precond!r}")
    maxiter = int(50 * np.sqrt(n) + 1000)
    count = [0]

    def tick(_):
        count[0] += 1

    # CG's recursive residual drifts from the true one near machine
    # precision, so restart from the current iterate while budget remains
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    res = np.linalg.norm(A @ x - b) / bnorm
    for _ in range(5):
        left = maxiter - count[0]
        if res <= rtol or left <= 0:
            break
        x, info = cg(A, b, x0=x, rtol=0.0, atol=0.5 * rtol * bnorm, maxiter=left, M=M,
                     callback=tick)
        res = np.linalg.norm(A @ x - b) / bnorm
    if res > rtol:
        # below this the residual cannot be measured in double precision
        floor = 64 * np.finfo(float).eps * np.linalg.norm(abs(A) @ abs(x) + abs(b)) / bnorm
        if res <= floor:
            log.info("PCG residual %.2e is at the rounding floor %.2e (target %.1e)", res, floor, rtol)
            return x
        raise SolverFailure(f"PCG stopped after {count[0]} iterations with relative residual "
                            f"{res:.3e} > {rtol:.1e}", residual=res, iterations=count[0])
    log.debug("PCG(%s) n=%d its=%d res=%.2e", precond, n, count[0], res)
    return x
