"""Shared builders for the test suite."""

import numpy as np

from fiberfem.fem import DofMap, MaterialParams, apply_nitsche_dirichlet, \
    assemble_background_stiffness, assemble_coupling, assemble_fiber_mass, \
    assemble_fiber_stiffness, assemble_neumann_load
from fiberfem.mesh import build_hex_mesh

MAT_STIFF = MaterialParams(0.4, 1.0, 0.4, 1000.0)
PULL_TRACTION = (-0.05, 0.0, 0.0)


def pull_system(level, mat=MAT_STIFF, gamma=10.0, penalty_weight=None):
    """Mesh, dofs and the Nitsche-constrained pull test system."""
    mesh = build_hex_mesh(level)
    dofs = DofMap.for_mesh(mesh)
    a0 = assemble_background_stiffness(mesh, dofs, mat)
    a, rhs = apply_nitsche_dirichlet(a0, np.zeros(dofs.n_dofs), mesh, dofs,
                                     mat, 0, np.zeros(3), gamma=gamma,
                                     penalty_weight=penalty_weight)
    rhs = rhs + assemble_neumann_load(mesh, dofs, 1, PULL_TRACTION)
    return mesh, dofs, a, rhs


def fiber_system(network, bg_dofs, mat=MAT_STIFF, quad_order=4):
    """Fiber dof map and the three fiber-side matrices."""
    fdofs = DofMap.for_network(network)
    k = assemble_fiber_stiffness(network, fdofs, mat)
    b = assemble_coupling(bg_dofs, network, fdofs, quad_order=quad_order)
    ell = assemble_fiber_mass(network, fdofs)
    return fdofs, k, b, ell


def max_asymmetry(m):
    """Largest |M - M^T| entry relative to the largest |M| entry."""
    d = abs(m - m.T)
    scale = max(abs(m).max(), 1e-300)
    return (d.max() if d.nnz else 0.0) / scale
