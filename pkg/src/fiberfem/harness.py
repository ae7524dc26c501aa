"""Experiment driver: configs, sweeps, error metrics and exports.

Reproduces the validation setups: a pull (or push) test where uniform
parallel fibers are compared against the rule-of-mixtures solution while
the fiber count grows at fixed volume ratio, and a random planar chopped
fiber test compared against the Halpin-Tsai isotropic estimate.

Boundary conditions for both tests: homogeneous Dirichlet on face 0,
traction on face 1 (x component -0.05 for pull, +0.05 for push),
homogeneous Neumann on faces 2, 3, 4 and 5.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import FiberFemError
from .fem import DofMap, MaterialParams, apply_nitsche_dirichlet, \
    assemble_background_stiffness, assemble_coupling, assemble_fiber_mass, \
    assemble_fiber_stiffness, assemble_neumann_load, hex_shape_values, \
    nitsche_penalty
from .fibergen import random_planar_fibers, uniform_parallel_fibers
from .homogenize import EffectiveParams, halpin_tsai, lame_from_young_poisson, \
    rule_of_mixtures, solve_homogenized, young_poisson_from_lame
from .mesh import HexMesh, build_hex_mesh
from .quadrature import gauss_01
from .solver import solve_coupled
from .vtk_io import write_fiber_vtk, write_hex_vtk

# fiber parameter rows (count, length, radius) of the planar random test,
# constant volume ratio 0.135 at aspect ratio length / diameter = 10
RANDOM_TABLE = (
    (79, 0.6, 0.03),
    (268, 0.4, 0.02),
    (637, 0.3, 0.015),
    (1100, 0.25, 0.0125),
    (1509, 0.225, 0.01125),
    (2149, 0.2, 0.01),
    (2947, 0.18, 0.009),
)

DEFAULT_UNIFORM_SWEEP = (16, 36, 64, 144, 256, 400)
DEFAULT_RANDOM_SWEEP = tuple(row[0] for row in RANDOM_TABLE)
TRACTION_MAGNITUDE = 0.05

CSV_HEADER = "n_fibers,radius,l2_error,iterations,seconds"


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description, mirrored 1:1 by config keys and CLI flags."""

    test: str = "pull"          # pull | push | random-planar
    r_omega: int = 3
    r_gamma: int = 3
    mu: float = 1.0
    lam: float = 0.4
    mu_f: float = 1000.0
    lam_f: float = 0.4
    e_m: float | None = None    # optional Young/Poisson input, overrides Lame
    nu_m: float | None = None
    e_f: float | None = None
    nu_f: float | None = None
    beta: float = 0.1
    aspect: float = 20.0        # 2l/d used by the Halpin-Tsai reference
    fibers: tuple = ()          # sweep of fiber counts; empty -> per-test default
    margin: float = 0.05
    gamma: float = 10.0
    tol: float = 1e-10
    seed: int = 0
    out: str | None = None

    def material(self) -> MaterialParams:
        if self.e_m is not None:
            lam, mu = lame_from_young_poisson(self.e_m, self.nu_m)
        else:
            lam, mu = self.lam, self.mu
        if self.e_f is not None:
            lam_f, mu_f = lame_from_young_poisson(self.e_f, self.nu_f)
        else:
            lam_f, mu_f = self.lam_f, self.mu_f
        return MaterialParams(lam, mu, lam_f, mu_f)

    def sweep(self) -> tuple:
        if self.fibers:
            return tuple(self.fibers)
        if self.test == "random-planar":
            return DEFAULT_RANDOM_SWEEP
        return DEFAULT_UNIFORM_SWEEP

    def traction(self) -> np.ndarray:
        sign = 1.0 if self.test == "push" else -1.0
        return np.array([sign * TRACTION_MAGNITUDE, 0.0, 0.0])


_INT_KEYS = {"r_omega", "r_gamma", "seed"}
_FLOAT_KEYS = {"mu", "lam", "mu_f", "lam_f", "e_m", "nu_m", "e_f", "nu_f",
               "beta", "aspect", "margin", "gamma", "tol"}
_VALID_KEYS = {f.name for f in fields(ExperimentConfig)}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines with ``#`` comments into typed values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in _VALID_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in _INT_KEYS:
            out[key] = int(val)
        elif key in _FLOAT_KEYS:
            out[key] = float(val)
        elif key == "fibers":
            out[key] = tuple(int(v) for v in val.split(",") if v.strip())
        else:
            out[key] = val
    return out


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig(**parse_config_text(fh.read()))


def merge_config(cfg: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(overrides) - _VALID_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return replace(cfg, **overrides)


@dataclass
class SweepRecord:
    """One sweep point of an experiment."""

    n_fibers: int
    radius: float
    l2_error: float
    iterations: int
    seconds: float
    failed: bool = False


def l2_error(u, u_ref, mesh: HexMesh, dofs: DofMap) -> float:
    """L2 norm of the difference of two nodal fields, 2x2x2 Gauss per cell."""
    u = np.asarray(u, float)
    u_ref = np.asarray(u_ref, float)
    if u.shape != (dofs.n_dofs,) or u_ref.shape != (dofs.n_dofs,):
        raise ValueError("field sizes do not match the dof map")
    diff = (u - u_ref).reshape(-1, 3)
    q, w = gauss_01(2)
    pts = np.array([(a, b, c) for a in q for b in q for c in q])
    wts = np.array([wa * wb * wc for wa in w for wb in w for wc in w])
    phi = hex_shape_values(pts)                     # (8 qpoints, 8 shapes)
    nodal = diff[mesh.cell_vertices]                # (nc, 8, 3)
    vals = np.einsum("qk,cki->cqi", phi, nodal)
    total = float(np.einsum("q,cqi,cqi->", wts, vals, vals)) * mesh.h**3
    return math.sqrt(total)


@dataclass(frozen=True)
class SlopeResult:
    """Pairwise log-log slopes plus the least squares fit."""

    pairwise: tuple
    least_squares: float


def convergence_slope(errors, counts) -> SlopeResult:
    """Slopes ln(e2/e1) / ln(n2/n1) for consecutive sweep points."""
    errors = np.asarray(errors, float)
    counts = np.asarray(counts, float)
    if errors.shape != counts.shape or errors.size < 2:
        raise ValueError("need two or more matching errors and counts")
    if np.any(errors <= 0.0) or np.any(counts <= 0.0):
        raise ValueError("errors and counts must be positive")
    le, ln = np.log(errors), np.log(counts)
    pairwise = tuple((le[1:] - le[:-1]) / (ln[1:] - ln[:-1]))
    lsq = float(np.polyfit(ln, le, 1)[0])
    return SlopeResult(pairwise, lsq)


def _sweep_networks(cfg: ExperimentConfig):
    """Yield (n_f, unrefined network factory) for every sweep point."""
    if cfg.test in ("pull", "push"):
        for n_f in cfg.sweep():
            side = math.isqrt(n_f)
            if side * side != n_f:
                raise ValueError(f"uniform sweeps need square fiber counts, got {n_f}")
            yield n_f, lambda side=side: uniform_parallel_fibers(
                side, cfg.beta, axis=0, margin=cfg.margin)
    elif cfg.test == "random-planar":
        table = {row[0]: row for row in RANDOM_TABLE}
        for i, n_f in enumerate(cfg.sweep()):
            if n_f not in table:
                raise ValueError(
                    f"no fiber table row for count {n_f}; known: {sorted(table)}")
            _, length, radius = table[n_f]
            yield n_f, lambda n=n_f, l=length, r=radius, i=i: random_planar_fibers(
                n, l, r, cfg.seed + i)
    else:
        raise ValueError(f"unknown test kind {cfg.test!r}")


def effective_params(cfg: ExperimentConfig, mat: MaterialParams) -> EffectiveParams:
    """Moduli of the homogenized comparison material for the configured test."""
    if cfg.test == "random-planar":
        e_m, nu_m = (cfg.e_m, cfg.nu_m) if cfg.e_m is not None \
            else young_poisson_from_lame(mat.lam, mat.mu)
        e_f = cfg.e_f if cfg.e_f is not None \
            else young_poisson_from_lame(mat.lam_f, mat.mu_f)[0]
        ht = halpin_tsai(e_f, e_m, cfg.aspect, cfg.beta)
        lam_c, mu_c = lame_from_young_poisson(ht.e_c * e_m, ht.nu_r)
        return EffectiveParams(lam_c, mu_c)
    return rule_of_mixtures(mat, cfg.beta)


def reference_solution(cfg: ExperimentConfig, mesh: HexMesh, dofs: DofMap,
                       mat: MaterialParams, penalty_weight=None) -> np.ndarray:
    """Homogenized comparison field for the configured test."""
    return solve_homogenized(
        mesh, dofs, effective_params(cfg, mat),
        dirichlet=[(0, np.zeros(3))], neumann=[(1, cfg.traction())],
        gamma=cfg.gamma, tol=cfg.tol, penalty_weight=penalty_weight)


def _shared_penalty(cfg: ExperimentConfig, mesh: HexMesh,
                    mat: MaterialParams) -> float:
    """Dirichlet penalty weight used by both the coupled solve and its
    reference, scaled with the stiffer comparison material."""
    eff = effective_params(cfg, mat)
    mat_eff = MaterialParams(eff.lam_eff, eff.mu_eff, eff.lam_eff, eff.mu_eff)
    return nitsche_penalty(mat_eff, mesh.h, cfg.gamma)


def run_experiment(cfg: ExperimentConfig, log=None) -> list:
    """Run the configured sweep; one record per fiber count.

    A failing sweep point is recorded with a NaN error and the sweep
    continues.  Deterministic for a fixed config and seed.
    """
    log = log if log is not None else sys.stderr
    mesh = build_hex_mesh(cfg.r_omega)
    dofs = DofMap.for_mesh(mesh)
    mat = cfg.material()

    # the coupled solve and its reference share one boundary operator so
    # the error isolates the fiber model
    w_pen = _shared_penalty(cfg, mesh, mat)
    a0 = assemble_background_stiffness(mesh, dofs, mat)
    a, rhs = apply_nitsche_dirichlet(a0, np.zeros(dofs.n_dofs), mesh, dofs,
                                     mat, 0, np.zeros(3), gamma=cfg.gamma,
                                     penalty_weight=w_pen)
    rhs = rhs + assemble_neumann_load(mesh, dofs, 1, cfg.traction())
    u_ref = reference_solution(cfg, mesh, dofs, mat, penalty_weight=w_pen)

    records = []
    for n_f, make_network in _sweep_networks(cfg):
        t0 = time.perf_counter()
        try:
            network = make_network().refined(cfg.r_gamma)
            fdofs = DofMap.for_network(network)
            k = assemble_fiber_stiffness(network, fdofs, mat)
            b = assemble_coupling(dofs, network, fdofs)
            ell = assemble_fiber_mass(network, fdofs)
            sol = solve_coupled(a, k, b, ell, rhs, tol=cfg.tol)
            err = l2_error(sol.u, u_ref, mesh, dofs)
            records.append(SweepRecord(n_f, network.radius, err,
                                       sol.outer_iterations,
                                       time.perf_counter() - t0))
        except FiberFemError as exc:
            print(f"sweep point n_f={n_f} failed: {exc}", file=log)
            records.append(SweepRecord(n_f, float("nan"), float("nan"), 0,
                                       time.perf_counter() - t0, failed=True))
    return records


def solve_single(cfg: ExperimentConfig, n_f: int):
    """One coupled solve at a single fiber count.

    Returns (mesh, dofs, network, solution, u_ref, error).
    """
    sub = merge_config(cfg, {"fibers": (n_f,)})
    mesh = build_hex_mesh(sub.r_omega)
    dofs = DofMap.for_mesh(mesh)
    mat = sub.material()
    w_pen = _shared_penalty(sub, mesh, mat)
    a0 = assemble_background_stiffness(mesh, dofs, mat)
    a, rhs = apply_nitsche_dirichlet(a0, np.zeros(dofs.n_dofs), mesh, dofs,
                                     mat, 0, np.zeros(3), gamma=sub.gamma,
                                     penalty_weight=w_pen)
    rhs = rhs + assemble_neumann_load(mesh, dofs, 1, sub.traction())
    u_ref = reference_solution(sub, mesh, dofs, mat, penalty_weight=w_pen)
    (_, make_network), = _sweep_networks(sub)
    network = make_network().refined(sub.r_gamma)
    fdofs = DofMap.for_network(network)
    k = assemble_fiber_stiffness(network, fdofs, mat)
    b = assemble_coupling(dofs, network, fdofs)
    ell = assemble_fiber_mass(network, fdofs)
    sol = solve_coupled(a, k, b, ell, rhs, tol=sub.tol)
    err = l2_error(sol.u, u_ref, mesh, dofs)
    return mesh, dofs, network, sol, u_ref, err


def format_csv(records) -> str:
    """Render sweep records; identical runs give identical bytes apart
    from the wall-time column."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(f"{r.n_fibers},{r.radius:.12e},{r.l2_error:.12e},"
                     f"{r.iterations},{r.seconds:.6f}")
    return "\n".join(lines) + "\n"


def export_csv(records, path) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(format_csv(records))
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def export_vtk(path_base, mesh: HexMesh, u, u_hom=None, network=None,
               w=None) -> None:
    """Write the solved fields: background grid and, if given, fibers."""
    point_data = {"u": np.asarray(u).reshape(-1, 3)}
    if u_hom is not None:
        point_data["u_hom"] = np.asarray(u_hom).reshape(-1, 3)
    try:
        write_hex_vtk(mesh, f"{path_base}_background.vtk", point_data)
        if network is not None and w is not None:
            write_fiber_vtk(network, f"{path_base}_fibers.vtk",
                            {"w": np.asarray(w).reshape(-1, 3)})
    except OSError as exc:
        raise OSError(f"cannot write VTK to {path_base}: {exc}") from exc
