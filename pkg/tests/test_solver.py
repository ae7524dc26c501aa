"""Conjugate gradients, the reduced operator and the coupled solve."""

import numpy as np
import pytest
import scipy.sparse as sp

from helpers import MAT_STIFF, fiber_system, pull_system

from fiberfem.errors import ConvergenceError
from fiberfem.fem import MaterialParams
from fiberfem.mesh import FiberCurve, FiberNetwork
from fiberfem.solver import ReducedOperator, apply_reduced_operator, cg_solve, \
    jacobi_diagonal, solve_block_dense, solve_coupled


def test_cg_identity_one_iteration():
    x, it = cg_solve(sp.identity(5, format="csr"), np.arange(1.0, 6.0))
    assert np.allclose(x, np.arange(1.0, 6.0))
    assert it == 1


def test_cg_diagonal():
    x, _ = cg_solve(sp.diags([1.0, 2.0, 4.0]).tocsr(), np.array([1.0, 2.0, 4.0]))
    assert np.allclose(x, 1.0, atol=1e-12)


def test_cg_random_spd_matches_dense_solve():
    rng = np.random.default_rng(42)
    m = rng.standard_normal((10, 10))
    a = m.T @ m + np.eye(10)
    b = rng.standard_normal(10)
    want = np.linalg.solve(a, b)
    x, _ = cg_solve(sp.csr_matrix(a), b, tol=1e-12)
    assert np.abs(x - want).max() <= 1e-9


def test_cg_zero_rhs():
    x, it = cg_solve(sp.identity(4, format="csr"), np.zeros(4))
    assert np.array_equal(x, np.zeros(4))
    assert it == 0


def test_cg_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        cg_solve(sp.identity(3, format="csr"), np.ones(3), tol=0.0)


def test_cg_nonconvergence_carries_history():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((30, 30))
    a = sp.csr_matrix(m.T @ m + 1e-6 * np.eye(30))
    with pytest.raises(ConvergenceError) as err:
        cg_solve(a, rng.standard_normal(30), tol=1e-14, maxit=3)
    assert len(err.value.residual_history) == 4


def test_cg_deterministic_and_unique():
    mesh, dofs, a, rhs = pull_system(1)
    x1, it1 = cg_solve(a, rhs, tol=1e-11, precond=a.diagonal())
    x2, it2 = cg_solve(a, rhs, tol=1e-11, precond=a.diagonal())
    assert np.array_equal(x1, x2) and it1 == it2
    # different initial guesses agree to the tolerance
    rng = np.random.default_rng(9)
    x3, _ = cg_solve(a, rhs, tol=1e-11, precond=a.diagonal(),
                     x0=rng.standard_normal(rhs.size) * 1e-3)
    assert np.abs(x1 - x3).max() <= 1e-9


def small_coupled_system():
    mesh, dofs, a, rhs = pull_system(1)
    net = FiberNetwork([FiberCurve([[0.21, 0.47, 0.53], [0.79, 0.47, 0.53]],
                                   0.05, refinements=1)])
    fdofs, k, b, ell = fiber_system(net, dofs)
    return mesh, dofs, a, rhs, k, b, ell


def test_reduced_operator_empty_network_is_background():
    mesh, dofs, a, rhs = pull_system(1)
    op = ReducedOperator(a, sp.csr_matrix((0, 0)), sp.csr_matrix((0, dofs.n_dofs)),
                         sp.csr_matrix((0, 0)))
    x = np.sin(np.arange(dofs.n_dofs))
    assert np.array_equal(apply_reduced_operator(op, x), a @ x)


def test_reduced_operator_constant_lift_hits_kernel():
    mesh, dofs, a, rhs, k, b, ell = small_coupled_system()
    op = ReducedOperator(a, k, b, ell)
    x = np.tile([1.0, -2.0, 0.5], dofs.n_dofs // 3)
    got = op.apply(x)
    scale = np.abs(a @ x).max()
    assert np.abs(got - a @ x).max() <= 1e-10 * max(scale, 1.0)


def test_reduced_operator_matches_dense_assembly():
    mesh, dofs, a, rhs, k, b, ell = small_coupled_system()
    op = ReducedOperator(a, k, b, ell)
    l_inv = np.linalg.inv(ell.toarray())
    dense = a.toarray() + b.toarray().T @ l_inv @ k.toarray() @ l_inv @ b.toarray()
    rng = np.random.default_rng(31)
    for _ in range(5):
        x = rng.standard_normal(dofs.n_dofs)
        want = dense @ x
        assert np.abs(op.apply(x) - want).max() <= 1e-10 * np.abs(want).max()


def test_reduced_operator_symmetry_and_positivity():
    mesh, dofs, a, rhs, k, b, ell = small_coupled_system()
    op = ReducedOperator(a, k, b, ell)
    rng = np.random.default_rng(8)
    for _ in range(20):
        x = rng.standard_normal(dofs.n_dofs)
        y = rng.standard_normal(dofs.n_dofs)
        lhs = x @ op.apply(y)
        rhs_ = y @ op.apply(x)
        assert abs(lhs - rhs_) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(y)
        assert x @ op.apply(x) > 0.0


def test_solve_coupled_decoupled_when_moduli_match():
    mat = MaterialParams(0.4, 1.0, 0.4, 1.0)
    mesh, dofs, a, rhs = pull_system(2, mat=mat)
    net = FiberNetwork([
        FiberCurve([[0.2, 0.31, 0.31], [0.8, 0.31, 0.31]], 0.03, refinements=2),
        FiberCurve([[0.2, 0.69, 0.31], [0.8, 0.69, 0.31]], 0.03, refinements=2),
        FiberCurve([[0.2, 0.31, 0.69], [0.8, 0.31, 0.69]], 0.03, refinements=2),
        FiberCurve([[0.2, 0.69, 0.69], [0.8, 0.69, 0.69]], 0.03, refinements=2),
    ])
    fdofs, k, b, ell = fiber_system(net, dofs, mat=mat)
    assert abs(k).max() == 0.0
    sol = solve_coupled(a, k, b, ell, rhs)
    u_plain, _ = cg_solve(a, rhs, tol=1e-10, maxit=50000,
                          precond=jacobi_diagonal(a, k, b, ell))
    assert np.abs(sol.u - u_plain).max() <= 1e-10
    assert np.abs(sol.lam).max() <= 1e-10


def test_solve_coupled_zero_rhs():
    mesh, dofs, a, rhs, k, b, ell = small_coupled_system()
    sol = solve_coupled(a, k, b, ell, np.zeros(dofs.n_dofs))
    assert np.abs(sol.u).max() == 0.0
    assert np.abs(sol.w).max() == 0.0
    assert np.abs(sol.lam).max() == 0.0


def test_solve_coupled_matches_dense_block_oracle():
    mesh, dofs, a, rhs, k, b, ell = small_coupled_system()
    sol = solve_coupled(a, k, b, ell, rhs, tol=1e-12)
    u_d, w_d, lam_d = solve_block_dense(a, k, b, ell, rhs)
    assert np.abs(sol.u - u_d).max() <= 1e-8 * max(np.abs(u_d).max(), 1.0)
    assert np.abs(sol.w - w_d).max() <= 1e-8 * max(np.abs(w_d).max(), 1.0)
    assert np.abs(sol.lam - lam_d).max() <= 1e-8 * max(np.abs(lam_d).max(), 1.0)


def test_solve_coupled_constraint_residual():
    mesh, dofs, a, rhs, k, b, ell = small_coupled_system()
    sol = solve_coupled(a, k, b, ell, rhs)
    bu = b @ sol.u
    assert np.linalg.norm(ell @ sol.w - bu) <= 1e-10 * np.linalg.norm(bu)
    # multiplier recovery: L lam = K w
    assert np.linalg.norm(ell @ sol.lam - k @ sol.w) \
        <= 1e-9 * max(np.linalg.norm(k @ sol.w), 1e-12)


def test_solve_coupled_energy_minimum():
    mesh, dofs, a, rhs, k, b, ell = small_coupled_system()
    sol = solve_coupled(a, k, b, ell, rhs, tol=1e-12)
    l_inv = np.linalg.inv(ell.toarray())

    def energy(u):
        w = l_inv @ (b @ u)
        return 0.5 * u @ (a @ u) + 0.5 * w @ (k @ w) - rhs @ u

    e0 = energy(sol.u)
    rng = np.random.default_rng(77)
    for _ in range(20):
        delta = rng.standard_normal(dofs.n_dofs)
        delta *= 1e-3 / np.linalg.norm(delta)
        assert energy(sol.u + delta) > e0


def test_solution_statistics_text():
    mesh, dofs, a, rhs, k, b, ell = small_coupled_system()
    sol = solve_coupled(a, k, b, ell, rhs)
    text = sol.stats_text()
    assert "outer_iterations=" in text
    assert "residual=" in text
