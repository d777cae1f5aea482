"""Sparse linear solvers shared by the eigen, corrector and time stepping stages.

The workhorse is GMRES preconditioned with an incomplete LU factorization;
a complete sparse LU is kept as fallback for the rare case the Krylov
iteration stagnates.  For the singular corrector system the operator is
wrapped between mean-removing projections, so the Krylov space lives in
the orthogonal complement of the one-dimensional kernel direction.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NoConvergence

DEFAULT_RTOL = 1e-12


class LinearSolver:
    """Repeated solves with one matrix: ILU-preconditioned GMRES.

    Factorizes once; ``solve(rhs, trans=True)`` solves with the transpose,
    reusing the same factors.
    """

    def __init__(self, A, rtol=DEFAULT_RTOL, maxiter=500):
        self.A = A.tocsc()
        self.rtol = rtol
        self.maxiter = maxiter
        self._ilu = spla.spilu(self.A, drop_tol=1e-6, fill_factor=20.0)
        self._lu = None

    def _direct(self):
        if self._lu is None:
            self._lu = spla.splu(self.A)
        return self._lu

    def solve(self, rhs, trans=False):
        rhs = np.asarray(rhs, dtype=float)
        op = self.A.T if trans else self.A
        which = "T" if trans else "N"
        M = spla.LinearOperator(
            self.A.shape, matvec=lambda v: self._ilu.solve(v, which))
        atol = self.rtol * np.linalg.norm(rhs)
        x, info = spla.gmres(op, rhs, M=M, rtol=0.0, atol=atol,
                             restart=60, maxiter=self.maxiter)
        if info != 0 or np.linalg.norm(op @ x - rhs) > 10 * atol + 1e-300:
            x = self._direct().solve(rhs, trans=which)
        return x


def projected_solve(A, rhs, rtol=1e-10, maxiter=2000, x0=None,
                    shift_reg=1.0):
    """Solve the singular system A x = rhs in the zero-mean gauge.

    A has (numerically) the constant vector in its kernel.  The GMRES
    iteration runs on P A P with P the orthogonal projector removing the
    global mean, which drops the kernel direction and absorbs the
    O(h^2) incompatibility of the right-hand side into a multiple of the
    constant vector.  The returned solution has exactly zero mean.

    Returns (x, relative_residual) where the residual is measured after
    projection: ||P(A x - rhs)|| / ||P rhs||.
    """
    n = A.shape[0]
    rhs = np.asarray(rhs, dtype=float)

    def project(v):
        return v - v.mean()

    rhs_p = project(rhs)
    rhs_norm = np.linalg.norm(rhs_p)
    if rhs_norm == 0.0:
        return np.zeros(n), 0.0

    op = spla.LinearOperator((n, n), matvec=lambda v: project(A @ project(v)))
    # regularize the kernel direction so the incomplete factorization is stable
    ilu = spla.spilu((A + shift_reg * sp.identity(n, format="csc")).tocsc(),
                     drop_tol=1e-6, fill_factor=20.0)
    M = spla.LinearOperator((n, n), matvec=lambda v: project(ilu.solve(project(v))))

    x, info = spla.gmres(op, rhs_p, M=M, rtol=0.0, atol=rtol * rhs_norm,
                         restart=80, maxiter=maxiter,
                         x0=None if x0 is None else project(x0))
    x = project(x)
    res = np.linalg.norm(project(A @ x - rhs)) / rhs_norm
    if info != 0 and res > rtol * 10:
        raise NoConvergence(
            f"projected GMRES stalled at relative residual {res:.3e}",
            iterations=maxiter, residual=res)
    return x, res
