"""Assembly of the coupled background / fiber elasticity system.

Four sparse operators describe the discrete problem:

  A  background stiffness, vector trilinear elements on the hex mesh
  K  fiber stiffness along the centerlines, scaled by the cross section
     area pi a^2 and the curvature factor
  B  coupling of background shapes restricted to the centerlines against
     the fiber shapes (rows: fiber dofs, columns: background dofs)
  L  fiber mass

All matrices are scipy CSR.  Dof numbering interleaves the three
displacement components per vertex: dof = 3 * vertex + component.
Dirichlet data enters weakly through Nitsche boundary terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import TubeValidityError
from .geometry import check_tube, curvature_factor, frenet_frame
from .mesh import FACE_AXIS_SIDE, FiberNetwork, HexMesh, locate_point, locate_points
from .quadrature import gauss_01

_EYE3 = np.eye(3)


@dataclass(frozen=True)
class MaterialParams:
    """Lame moduli of the elastic matrix and of the fibers.

    The fiber must be at least as stiff as the matrix; with equal moduli
    the excess moduli vanish and the coupled problem decouples.
    """

    lam: float
    mu: float
    lam_f: float
    mu_f: float

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValueError("matrix shear modulus must be positive")
        if 2.0 * self.mu + 3.0 * self.lam <= 0.0:
            raise ValueError("matrix bulk modulus must be positive")
        if self.mu_f < self.mu or self.lam_f < self.lam:
            raise ValueError("fiber moduli must not fall below the matrix moduli")

    @property
    def mu_delta(self) -> float:
        return self.mu_f - self.mu

    @property
    def lam_delta(self) -> float:
        return self.lam_f - self.lam


@dataclass
class DofMap:
    """Vector valued (d=3) trilinear dof numbering over a mesh.

    ``cell_dofs`` lists, per cell (hex) or per element (fiber), the global
    dofs in local order vertex-major, component-minor.
    """

    n_dofs: int
    cell_dofs: np.ndarray
    points: np.ndarray
    mesh: object = field(repr=False, default=None)

    @classmethod
    def for_mesh(cls, mesh: HexMesh) -> "DofMap":
        cv = mesh.cell_vertices
        dofs = (3 * cv[:, :, None] + np.arange(3)).reshape(cv.shape[0], 24)
        return cls(3 * mesh.n_vertices, dofs, mesh.vertices, mesh)

    @classmethod
    def for_network(cls, network: FiberNetwork) -> "DofMap":
        offsets = network.node_offsets()
        rows = []
        pts = []
        for off, curve in zip(offsets, network.curves):
            e = off + np.arange(curve.n_elements)
            rows.append(np.column_stack([e, e + 1]))
            pts.append(curve.nodes)
        conn = np.vstack(rows)
        dofs = (3 * conn[:, :, None] + np.arange(3)).reshape(conn.shape[0], 6)
        return cls(3 * network.n_nodes, dofs, np.vstack(pts), network)


def hex_shape_values(xi) -> np.ndarray:
    """Trilinear shape values at reference coordinates in [0,1]^3.

    Accepts a single point (3,) or a batch (m, 3); returns (8,) or (m, 8)
    in local vertex order k = kx + 2*ky + 4*kz.
    """
    xi = np.asarray(xi, float)
    single = xi.ndim == 1
    xi = np.atleast_2d(xi)
    k = np.arange(8)
    bx, by, bz = k & 1, (k >> 1) & 1, (k >> 2) & 1
    vals = (np.where(bx, xi[:, [0]], 1.0 - xi[:, [0]])
            * np.where(by, xi[:, [1]], 1.0 - xi[:, [1]])
            * np.where(bz, xi[:, [2]], 1.0 - xi[:, [2]]))
    return vals[0] if single else vals


def hex_shape_gradients(xi) -> np.ndarray:
    """Reference gradients (8, 3) of the trilinear shapes at one point."""
    xi = np.asarray(xi, float)
    k = np.arange(8)
    bits = np.stack([k & 1, (k >> 1) & 1, (k >> 2) & 1], axis=1)
    f = np.where(bits, xi[None, :], 1.0 - xi[None, :])  # (8, 3)
    sgn = np.where(bits, 1.0, -1.0)
    grad = np.empty((8, 3))
    grad[:, 0] = sgn[:, 0] * f[:, 1] * f[:, 2]
    grad[:, 1] = sgn[:, 1] * f[:, 0] * f[:, 2]
    grad[:, 2] = sgn[:, 2] * f[:, 0] * f[:, 1]
    return grad


def hex_element_stiffness(h: float, lam: float, mu: float) -> np.ndarray:
    """24x24 stiffness of one cube cell of edge h, 2x2x2 Gauss (exact here)."""
    q, w = gauss_01(2)
    ke = np.zeros((8, 3, 8, 3))
    for ix, qx in enumerate(q):
        for iy, qy in enumerate(q):
            for iz, qz in enumerate(q):
                g = hex_shape_gradients((qx, qy, qz)) / h
                wq = w[ix] * w[iy] * w[iz] * h**3
                dot = g @ g.T
                ke += wq * (mu * np.einsum("ij,ab->iajb", dot, _EYE3)
                            + mu * np.einsum("ib,ja->iajb", g, g)
                            + lam * np.einsum("ia,jb->iajb", g, g))
    return ke.reshape(24, 24)


def _scatter(rows, cols, data, shape) -> sp.csr_matrix:
    m = sp.coo_matrix((data, (rows, cols)), shape=shape).tocsr()
    m.sum_duplicates()
    return m


def assemble_background_stiffness(mesh: HexMesh, dofs: DofMap,
                                  mat: MaterialParams) -> sp.csr_matrix:
    """Global stiffness of the background material over the whole cube."""
    ke = hex_element_stiffness(mesh.h, mat.lam, mat.mu)
    cd = dofs.cell_dofs
    rows = np.repeat(cd, 24, axis=1).ravel()
    cols = np.tile(cd, (1, 24)).ravel()
    data = np.tile(ke.ravel(), cd.shape[0])
    return _scatter(rows, cols, data, (dofs.n_dofs, dofs.n_dofs))


def _fiber_element_matrices(network: FiberNetwork, use_curvature_factor: bool):
    """Per element tangent, length, and midpoint curvature factor."""
    a = network.radius
    for curve in network.curves:
        tube = check_tube(curve, a)
        if not tube.valid:
            raise TubeValidityError(
                f"radius {a} too large for curvature {tube.max_curvature}")
        for e in range(curve.n_elements):
            if use_curvature_factor:
                s_mid = 0.5 * (curve.node_arclengths[e] + curve.node_arclengths[e + 1])
                g = curvature_factor(frenet_frame(curve, s_mid).kappa, a)
            else:
                g = 1.0
            yield curve.element_tangents[e], curve.element_lengths[e], g


def assemble_fiber_stiffness(network: FiberNetwork, fiber_dofs: DofMap,
                             mat: MaterialParams,
                             use_curvature_factor: bool = True) -> sp.csr_matrix:
    """Fiber stiffness K from the excess moduli acting on the axial gradient.

    For an element with unit tangent t the 3x3 component coupling is
    mu_delta * I + (mu_delta + lam_delta) * t t^T, the projected strain of
    a field varying only along the centerline.  Each element carries the
    factor pi a^2 times the curvature factor at its midpoint.
    """
    mu_d, lam_d = mat.mu_delta, mat.lam_delta
    c_gamma = np.pi * network.radius**2
    s_ref = np.array([[1.0, -1.0], [-1.0, 1.0]])
    blocks = []
    for t, ell, g in _fiber_element_matrices(network, use_curvature_factor):
        d = mu_d * _EYE3 + (mu_d + lam_d) * np.outer(t, t)
        blocks.append((c_gamma * g / ell) * np.einsum("ij,ab->iajb", s_ref, d).reshape(6, 6))
    return _assemble_fiber_blocks(blocks, fiber_dofs)


def assemble_fiber_mass(network: FiberNetwork, fiber_dofs: DofMap) -> sp.csr_matrix:
    """Fiber mass L, block diagonal per component, exact for linear shapes."""
    m_ref = np.einsum("ij,ab->iajb",
                      np.array([[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]]),
                      _EYE3).reshape(6, 6)
    blocks = [ell * m_ref
              for curve in network.curves
              for ell in curve.element_lengths]
    return _assemble_fiber_blocks(blocks, fiber_dofs)


def _assemble_fiber_blocks(blocks, fiber_dofs: DofMap) -> sp.csr_matrix:
    cd = fiber_dofs.cell_dofs
    data = np.stack(blocks)
    rows = np.repeat(cd, 6, axis=1).ravel()
    cols = np.tile(cd, (1, 6)).ravel()
    return _scatter(rows, cols, data.ravel(), (fiber_dofs.n_dofs, fiber_dofs.n_dofs))


def assemble_coupling(bg_dofs: DofMap, network: FiberNetwork | None,
                      fiber_dofs: DofMap | None,
                      quad_order: int = 4) -> sp.csr_matrix:
    """Coupling matrix B: background shapes along the fibers against fiber shapes.

    Integrated per fiber element with ``quad_order`` Gauss points.  Fiber
    elements may straddle background cells, so the integrand is only
    piecewise smooth; the quadrature order controls that error.
    """
    n_cols = bg_dofs.n_dofs
    if network is None or fiber_dofs is None or fiber_dofs.n_dofs == 0:
        return sp.csr_matrix((0, n_cols))
    mesh = bg_dofs.mesh
    xi, wq = gauss_01(quad_order)

    p0 = fiber_dofs.points[fiber_dofs.cell_dofs[:, 0] // 3]
    p1 = fiber_dofs.points[fiber_dofs.cell_dofs[:, 3] // 3]
    ell = np.linalg.norm(p1 - p0, axis=1)
    ne, nq = p0.shape[0], quad_order

    pts = p0[:, None, :] + xi[None, :, None] * (p1 - p0)[:, None, :]
    cells, locs = locate_points(mesh, pts.reshape(-1, 3))
    phi = hex_shape_values(locs)                      # (ne*nq, 8)
    bg_vert = mesh.cell_vertices[cells]               # (ne*nq, 8)

    psi = np.stack([1.0 - xi, xi], axis=1)            # (nq, 2)
    weight = wq[None, :] * ell[:, None]               # (ne, nq)
    # data, rows, cols per (element, qpoint, fiber node, bg vertex, component)
    data = (weight[:, :, None, None]
            * psi[None, :, :, None]
            * phi.reshape(ne, nq, 1, 8))
    fib_vert = fiber_dofs.cell_dofs[:, [0, 3]] // 3   # (ne, 2)
    rows3 = 3 * fib_vert[:, None, :, None] + np.zeros((1, nq, 1, 8), int)
    cols3 = 3 * bg_vert.reshape(ne, nq, 1, 8) + np.zeros((1, 1, 2, 1), int)

    comp = np.arange(3)
    rows = (rows3[..., None] + comp).ravel()
    cols = (cols3[..., None] + comp).ravel()
    vals = np.broadcast_to(data[..., None], data.shape + (3,)).ravel()
    return _scatter(rows, cols, vals, (fiber_dofs.n_dofs, n_cols))


def _facet_reference(mesh: HexMesh, face_label: int):
    """2x2 Gauss data on a boundary facet of the given face.

    Returns (phi, grad, wq, normal): shape values (4, 8), physical
    gradients (4, 8, 3), weights summing to h^2, and the outward normal.
    """
    axis, side = FACE_AXIS_SIDE[face_label]
    q, w = gauss_01(2)
    free = [m for m in range(3) if m != axis]
    phi = np.empty((4, 8))
    grad = np.empty((4, 8, 3))
    wq = np.empty(4)
    i = 0
    for iq, qa in enumerate(q):
        for jq, qb in enumerate(q):
            xi = np.empty(3)
            xi[axis] = float(side)
            xi[free[0]], xi[free[1]] = qa, qb
            phi[i] = hex_shape_values(xi)
            grad[i] = hex_shape_gradients(xi) / mesh.h
            wq[i] = w[iq] * w[jq] * mesh.h**2
            i += 1
    normal = np.zeros(3)
    normal[axis] = -1.0 if side == 0 else 1.0
    return phi, grad, wq, normal


def _facet_quad_points(mesh: HexMesh, cell: int, face_label: int) -> np.ndarray:
    """Physical coordinates of the 2x2 facet Gauss points of one cell."""
    axis, side = FACE_AXIS_SIDE[face_label]
    q, _ = gauss_01(2)
    free = [m for m in range(3) if m != axis]
    pts = np.empty((4, 3))
    i = 0
    for qa in q:
        for qb in q:
            xi = np.empty(3)
            xi[axis] = float(side)
            xi[free[0]], xi[free[1]] = qa, qb
            pts[i] = mesh.map_local(cell, xi)
            i += 1
    return pts


def nitsche_penalty(mat: MaterialParams, h: float, gamma: float) -> float:
    """Penalty weight gamma * (2 mu + lam) / h used on Dirichlet faces."""
    return gamma * (2.0 * mat.mu + mat.lam) / h


def apply_nitsche_dirichlet(A: sp.csr_matrix, rhs: np.ndarray, mesh: HexMesh,
                            dofs: DofMap, mat: MaterialParams, face_label: int,
                            value, gamma: float = 10.0, penalty_weight=None):
    """Impose u = value weakly on one cube face; returns new (A, rhs).

    Adds the symmetric consistency terms of the elasticity operator and a
    penalty scaled by gamma * (2 mu + lam) / h, or by the explicit
    ``penalty_weight`` when two solves must share one boundary operator.
    ``value`` is a constant 3-vector or a callable point -> 3-vector.
    """
    if gamma <= 0.0:
        raise ValueError("Nitsche penalty scale must be positive")
    if face_label not in FACE_AXIS_SIDE:
        raise ValueError(f"unknown face label {face_label}")
    phi, grad, wq, nrm = _facet_reference(mesh, face_label)
    gamma_h = nitsche_penalty(mat, mesh.h, gamma) if penalty_weight is None \
        else float(penalty_weight)
    if gamma_h <= 0.0:
        raise ValueError("penalty weight must be positive")

    gn = grad @ nrm                                   # (4, 8)
    # sigma(phi_j e_b) n dotted with e_a, per qpoint: (4, 8, a, b)
    m_jab = (mat.mu * (gn[:, :, None, None] * _EYE3[None, None, :, :]
                       + grad[:, :, :, None] * nrm[None, None, None, :])
             + mat.lam * grad[:, :, None, :] * nrm[None, None, :, None])
    consist = np.einsum("q,qi,qjab->iajb", wq, phi, m_jab).reshape(24, 24)
    penalty = gamma_h * np.einsum("q,qi,qj,ab->iajb", wq, phi, phi, _EYE3).reshape(24, 24)
    ae = -consist - consist.T + penalty

    cells = mesh.boundary_cells(face_label)
    cd = dofs.cell_dofs[cells]
    rows = np.repeat(cd, 24, axis=1).ravel()
    cols = np.tile(cd, (1, 24)).ravel()
    data = np.tile(ae.ravel(), cells.shape[0])
    a_new = (A + _scatter(rows, cols, data, A.shape)).tocsr()

    rhs_new = np.array(rhs, float, copy=True)
    if callable(value):
        for cell in cells:
            ud = np.array([np.asarray(value(p), float)
                           for p in _facet_quad_points(mesh, cell, face_label)])
            re = _nitsche_rhs_element(phi, grad, wq, nrm, mat, gamma_h, ud)
            np.add.at(rhs_new, dofs.cell_dofs[cell], re)
    else:
        ud = np.broadcast_to(np.asarray(value, float), (4, 3))
        re = _nitsche_rhs_element(phi, grad, wq, nrm, mat, gamma_h, ud)
        np.add.at(rhs_new, cd.ravel(), np.tile(re, cells.shape[0]))
    return a_new, rhs_new


def _nitsche_rhs_element(phi, grad, wq, nrm, mat, gamma_h, ud) -> np.ndarray:
    """Facet load vector (24,) for boundary data ud given at the 4 qpoints."""
    gn = grad @ nrm
    gu = np.einsum("qid,qd->qi", grad, ud)
    un = ud @ nrm
    # -(sigma(phi_i e_a) n) . u_D  =  -(mu (grad_i.n) u_Da + mu n_a (grad_i.u_D)
    #                                   + lam grad_ia (u_D.n))
    term = (mat.mu * (gn[:, :, None] * ud[:, None, :]
                      + nrm[None, None, :] * gu[:, :, None])
            + mat.lam * grad * un[:, None, None])
    re = np.einsum("q,qia->ia", wq, -term + gamma_h * phi[:, :, None] * ud[:, None, :])
    return re.reshape(24)


def assemble_neumann_load(mesh: HexMesh, dofs: DofMap, face_label: int,
                          traction) -> np.ndarray:
    """Nodal loads of a constant traction on one cube face.

    Bilinear face shapes each integrate to h^2/4, so the loads sum to the
    traction times the unit face area.
    """
    if face_label not in FACE_AXIS_SIDE:
        raise ValueError(f"unknown face label {face_label}")
    traction = np.asarray(traction, float)
    axis, side = FACE_AXIS_SIDE[face_label]
    k = np.arange(8)
    on_face = ((k >> axis) & 1) == side
    cells = mesh.boundary_cells(face_label)
    verts = mesh.cell_vertices[cells][:, on_face]     # (nf, 4)
    rhs = np.zeros(dofs.n_dofs)
    w = mesh.h**2 / 4.0
    for c in range(3):
        np.add.at(rhs, 3 * verts.ravel() + c, w * traction[c])
    return rhs


class FEField:
    """Point evaluator for a vector nodal field on the background mesh."""

    def __init__(self, mesh: HexMesh, dofs: DofMap, values: np.ndarray):
        if values.shape[0] != dofs.n_dofs:
            raise ValueError("field values do not match the dof count")
        self.mesh = mesh
        self.nodal = np.asarray(values, float).reshape(-1, 3)

    def __call__(self, x) -> np.ndarray:
        loc = locate_point(self.mesh, x)
        phi = hex_shape_values(loc.local)
        return phi @ self.nodal[self.mesh.cell_vertices[loc.cell]]
