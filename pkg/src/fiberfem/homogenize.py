"""Reference homogenization models and elastic constant conversions.

Two classical estimates serve as comparison solutions for the coupled
fiber model: the rule of mixtures, which blends the matrix and fiber
stiffness tensors by the fiber volume ratio, and the empirical
Halpin-Tsai equations for short-fiber composites that are randomly
oriented in a plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import DofMap, MaterialParams, apply_nitsche_dirichlet, \
    assemble_background_stiffness, assemble_neumann_load
from .mesh import HexMesh
from .solver import cg_solve


@dataclass(frozen=True)
class EffectiveParams:
    """Lame moduli of the homogenized comparison material."""

    lam_eff: float
    mu_eff: float


def rule_of_mixtures(mat: MaterialParams, beta: float) -> EffectiveParams:
    """Volume-ratio blend of the matrix moduli with the excess fiber moduli."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"volume ratio {beta} outside [0, 1]")
    return EffectiveParams(mat.lam + beta * mat.lam_delta,
                           mat.mu + beta * mat.mu_delta)


@dataclass(frozen=True)
class HalpinTsaiResult:
    """Halpin-Tsai estimates; moduli are ratios to the matrix modulus."""

    eta_l: float
    eta_t: float
    e_l: float
    e_t: float
    e_c: float
    mu_c: float
    nu_r: float


def halpin_tsai(e_f: float, e_m: float, aspect: float, beta: float) -> HalpinTsaiResult:
    """Planar random short fiber estimate from fiber/matrix Young moduli.

    ``aspect`` is 2l/d (twice the length over the diameter).  Longitudinal
    and transverse moduli of the aligned composite are mixed with the
    3/8, 5/8 and 1/8, 1/4 weights for a planar random orientation, and the
    in-plane Poisson ratio follows from isotropy.
    """
    if e_f <= 0.0 or e_m <= 0.0:
        raise ValueError("Young moduli must be positive")
    if aspect <= 0.0:
        raise ValueError("aspect ratio must be positive")
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"volume ratio {beta} outside [0, 1)")
    ratio = e_f / e_m
    eta_l = (ratio - 1.0) / (ratio + aspect)
    eta_t = (ratio - 1.0) / (ratio + 2.0)
    den_l = 1.0 - eta_l * beta
    den_t = 1.0 - eta_t * beta
    if den_l <= 0.0 or den_t <= 0.0:
        raise ValueError("volume ratio too large for the Halpin-Tsai form")
    e_l = (1.0 + aspect * eta_l * beta) / den_l
    e_t = (1.0 + 2.0 * eta_t * beta) / den_t
    e_c = 0.375 * e_l + 0.625 * e_t
    mu_c = 0.125 * e_l + 0.25 * e_t
    nu_r = e_c / (2.0 * mu_c) - 1.0
    return HalpinTsaiResult(eta_l, eta_t, e_l, e_t, e_c, mu_c, nu_r)


def lame_from_young_poisson(e: float, nu: float):
    """Classic conversion (E, nu) -> (lambda, mu)."""
    if e <= 0.0:
        raise ValueError("Young modulus must be positive")
    if not -1.0 < nu < 0.5:
        raise ValueError(f"Poisson ratio {nu} outside (-1, 0.5)")
    mu = e / (2.0 * (1.0 + nu))
    lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return lam, mu


def young_poisson_from_lame(lam: float, mu: float):
    """Inverse conversion (lambda, mu) -> (E, nu)."""
    if mu <= 0.0:
        raise ValueError("shear modulus must be positive")
    e = mu * (3.0 * lam + 2.0 * mu) / (lam + mu)
    nu = lam / (2.0 * (lam + mu))
    return e, nu


def solve_homogenized(mesh: HexMesh, dofs: DofMap, eff: EffectiveParams,
                      dirichlet, neumann, gamma: float = 10.0,
                      tol: float = 1e-10, maxit: int = 50000,
                      penalty_weight=None) -> np.ndarray:
    """Plain elastic solve with the effective tensor and the given BCs.

    ``dirichlet`` and ``neumann`` are sequences of (face_label, value)
    pairs; Dirichlet data is imposed weakly through Nitsche terms so the
    solve matches the coupled pipeline exactly when the fiber term is
    absent.
    """
    mat = MaterialParams(eff.lam_eff, eff.mu_eff, eff.lam_eff, eff.mu_eff)
    a = assemble_background_stiffness(mesh, dofs, mat)
    rhs = np.zeros(dofs.n_dofs)
    for face, value in dirichlet:
        a, rhs = apply_nitsche_dirichlet(a, rhs, mesh, dofs, mat, face, value,
                                         gamma=gamma,
                                         penalty_weight=penalty_weight)
    for face, traction in neumann:
        rhs += assemble_neumann_load(mesh, dofs, face, traction)
    u, _ = cg_solve(a, rhs, tol=tol, maxit=maxit, precond=a.diagonal())
    return u
