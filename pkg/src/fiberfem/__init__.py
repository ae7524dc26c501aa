"""Immersed finite elements for fiber reinforced linear elasticity.

A background hexahedral discretization of the unit cube and independent
one-dimensional fiber meshes are coupled through a mass-consistent
restriction operator; the resulting saddle point problem is solved via
its symmetric positive definite Schur reduction and validated against
rule-of-mixtures and Halpin-Tsai homogenization.
"""

from .errors import CapacityError, ConvergenceError, FiberFemError, \
    OutOfDomainError, OverlapError, TubeValidityError
from .fem import DofMap, FEField, MaterialParams, apply_nitsche_dirichlet, \
    assemble_background_stiffness, assemble_coupling, assemble_fiber_mass, \
    assemble_fiber_stiffness, assemble_neumann_load
from .fibergen import random_planar_fibers, read_network, \
    uniform_parallel_fibers, write_network
from .geometry import CircleArc, FrenetFrame, Helix, StraightSegment, \
    TubeValidity, check_tube, curvature_factor, frenet_frame, tubular_average
from .harness import ExperimentConfig, SweepRecord, convergence_slope, \
    export_csv, export_vtk, l2_error, load_config, run_experiment
from .homogenize import EffectiveParams, HalpinTsaiResult, halpin_tsai, \
    lame_from_young_poisson, rule_of_mixtures, solve_homogenized, \
    young_poisson_from_lame
from .mesh import CellLocation, FiberCurve, FiberNetwork, HexMesh, \
    build_fiber_mesh, build_hex_mesh, locate_point
from .solver import CoupledSolution, ReducedOperator, apply_reduced_operator, \
    cg_solve, solve_block_dense, solve_coupled

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ConvergenceError", "FiberFemError", "OutOfDomainError",
    "OverlapError", "TubeValidityError",
    "DofMap", "FEField", "MaterialParams", "apply_nitsche_dirichlet",
    "assemble_background_stiffness", "assemble_coupling",
    "assemble_fiber_mass", "assemble_fiber_stiffness", "assemble_neumann_load",
    "random_planar_fibers", "read_network", "uniform_parallel_fibers",
    "write_network",
    "CircleArc", "FrenetFrame", "Helix", "StraightSegment", "TubeValidity",
    "check_tube", "curvature_factor", "frenet_frame", "tubular_average",
    "ExperimentConfig", "SweepRecord", "convergence_slope", "export_csv",
    "export_vtk", "l2_error", "load_config", "run_experiment",
    "EffectiveParams", "HalpinTsaiResult", "halpin_tsai",
    "lame_from_young_poisson", "rule_of_mixtures", "solve_homogenized",
    "young_poisson_from_lame",
    "CellLocation", "FiberCurve", "FiberNetwork", "HexMesh",
    "build_fiber_mesh", "build_hex_mesh", "locate_point",
    "CoupledSolution", "ReducedOperator", "apply_reduced_operator",
    "cg_solve", "solve_block_dense", "solve_coupled",
]
