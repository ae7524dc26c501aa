"""Matrix-free solution of the reduced coupled system.

The three-field saddle point problem

    [ A   0   B^T ] [u]       [g]
    [ 0   K  -L^T ] [w]   =   [0]
    [ B  -L   0   ] [lam]     [0]

is solved through its Schur reduction (A + B^T L^-1 K L^-1 B) u = g,
which is symmetric positive definite once Dirichlet data has been added
to A through Nitsche terms.  The fiber displacement and the multiplier
are recovered afterwards as w = L^-1 B u and lam = L^-1 K w.  The full
block system is kept only as a dense direct-solve oracle for small
instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError


def cg_solve(op, rhs, tol: float = 1e-10, maxit: int = 10000,
             precond=None, x0=None):
    """Conjugate gradients for a symmetric positive definite operator.

    ``op`` is a sparse matrix or a callable vector -> vector.  ``precond``
    is an optional positive diagonal (Jacobi).  Iterates until the true
    residual satisfies ||op x - rhs|| <= tol * ||rhs||; raises
    ConvergenceError with the residual history otherwise.

    Returns (x, iterations).
    """
    if not 0.0 < tol < 1.0:
        raise ValueError("tolerance must be in (0, 1)")
    matvec = op if callable(op) else lambda v: op @ v
    rhs = np.asarray(rhs, float)
    b_norm = np.linalg.norm(rhs)
    if b_norm == 0.0:
        return np.zeros_like(rhs), 0
    inv_diag = None if precond is None else 1.0 / np.asarray(precond, float)

    x = np.zeros_like(rhs) if x0 is None else np.array(x0, float, copy=True)
    r = rhs - matvec(x) if x0 is not None else rhs.copy()
    history = [float(np.linalg.norm(r))]
    if history[0] <= tol * b_norm:
        return x, 0
    z = r if inv_diag is None else inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, maxit + 1):
        q = matvec(p)
        alpha = rz / float(p @ q)
        x += alpha * p
        r -= alpha * q
        rn = float(np.linalg.norm(r))
        history.append(rn)
        if rn <= tol * b_norm:
            return x, it
        z = r if inv_diag is None else inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"CG did not reach {tol:g} within {maxit} iterations "
        f"(relative residual {history[-1] / b_norm:g})", history)


@dataclass
class ReducedOperator:
    """Action x -> A x + B^T L^-1 K L^-1 B x with nested CG solves of L."""

    A: sp.spmatrix
    K: sp.spmatrix
    B: sp.spmatrix
    L: sp.spmatrix
    inner_tol: float = 1e-12
    inner_maxit: int = 10000
    inner_iterations: int = field(default=0, init=False)

    def __post_init__(self):
        self._l_diag = self.L.diagonal() if self.L.shape[0] else None

    @property
    def shape(self):
        return self.A.shape

    def solve_mass(self, b: np.ndarray) -> np.ndarray:
        x, it = cg_solve(self.L, b, tol=self.inner_tol, maxit=self.inner_maxit,
                         precond=self._l_diag)
        self.inner_iterations += it
        return x

    def apply(self, x: np.ndarray) -> np.ndarray:
        ax = self.A @ x
        if self.B.shape[0] == 0:
            return ax
        y = self.solve_mass(self.B @ x)
        y = self.solve_mass(self.K @ y)
        return ax + self.B.T @ y

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.apply(x)


def apply_reduced_operator(op: ReducedOperator, x) -> np.ndarray:
    return op.apply(np.asarray(x, float))


def jacobi_diagonal(A: sp.spmatrix, K: sp.spmatrix, B: sp.spmatrix,
                    L: sp.spmatrix) -> np.ndarray:
    """diag(A) plus the fiber term's diagonal approximated with lumped L."""
    d = A.diagonal().copy()
    if B.shape[0]:
        lump = np.asarray(L.sum(axis=1)).ravel()
        c = sp.diags(1.0 / lump) @ B
        d += np.maximum(np.asarray((c.multiply(K @ c)).sum(axis=0)).ravel(), 0.0)
    return np.where(d > 0.0, d, 1.0)


@dataclass
class CoupledSolution:
    """Background and fiber displacements with the recovered multiplier."""

    u: np.ndarray
    w: np.ndarray
    lam: np.ndarray
    outer_iterations: int
    inner_iterations: int
    residual: float
    constraint_residual: float

    def stats_text(self) -> str:
        return "\n".join([
            f"outer_iterations={self.outer_iterations}",
            f"inner_iterations={self.inner_iterations}",
            f"residual={self.residual:.6e}",
            f"constraint_residual={self.constraint_residual:.6e}",
        ])


def solve_coupled(A, K, B, L, rhs, tol: float = 1e-10,
                  maxit: int = 50000, inner_tol: float = 1e-12) -> CoupledSolution:
    """Solve the reduced system and recover the fiber fields.

    A must already carry the Nitsche boundary terms (positive definite);
    K positive semidefinite, L positive definite.  Jacobi preconditioning
    on the reduced diagonal by default.
    """
    rhs = np.asarray(rhs, float)
    op = ReducedOperator(A, K, B, L, inner_tol=inner_tol)
    diag = jacobi_diagonal(A, K, B, L)
    u, outer = cg_solve(op, rhs, tol=tol, maxit=maxit, precond=diag)
    res = float(np.linalg.norm(op.apply(u) - rhs) / max(np.linalg.norm(rhs), 1e-300))

    m = B.shape[0]
    if m:
        bu = B @ u
        w = op.solve_mass(bu)
        lam = op.solve_mass(K @ w)
        cres = float(np.linalg.norm(L @ w - bu) / max(np.linalg.norm(bu), 1e-300))
    else:
        w = np.zeros(0)
        lam = np.zeros(0)
        cres = 0.0
    return CoupledSolution(u, w, lam, outer, op.inner_iterations, res, cres)


def solve_block_dense(A, K, B, L, rhs):
    """Dense direct solve of the full three-field block system.

    Intended as an oracle on small instances; returns (u, w, lam).
    """
    n = A.shape[0]
    m = K.shape[0]
    s = np.zeros((n + 2 * m, n + 2 * m))
    s[:n, :n] = A.toarray() if sp.issparse(A) else A
    s[:n, n + m:] = (B.T).toarray() if sp.issparse(B) else np.asarray(B).T
    s[n:n + m, n:n + m] = K.toarray() if sp.issparse(K) else K
    s[n:n + m, n + m:] = -(L.T.toarray() if sp.issparse(L) else np.asarray(L).T)
    s[n + m:, :n] = B.toarray() if sp.issparse(B) else B
    s[n + m:, n:n + m] = -(L.toarray() if sp.issparse(L) else L)
    b = np.zeros(n + 2 * m)
    b[:n] = rhs
    sol = np.linalg.solve(s, b)
    return sol[:n], sol[n:n + m], sol[n + m:]
