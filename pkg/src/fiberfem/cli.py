"""Command line front end.

Subcommands:
  run          run an experiment sweep and write a CSV
  halpin-tsai  print the planar random composite estimate
  gen-fibers   generate a fiber network file
  solve-one    single coupled solve with VTK output

Exits 0 on success; on failure prints one machine-readable line
``error type=<class> message=<text>`` to stderr and exits 1.
"""

from __future__ import annotations

import argparse
import sys

from .errors import FiberFemError
from .fibergen import random_planar_fibers, uniform_parallel_fibers, write_network
from .harness import ExperimentConfig, convergence_slope, export_csv, \
    export_vtk, format_csv, load_config, merge_config, run_experiment, \
    solve_single
from .homogenize import halpin_tsai


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--test", choices=["pull", "push", "random-planar"])
    p.add_argument("--r-omega", dest="r_omega", type=int)
    p.add_argument("--r-gamma", dest="r_gamma", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--mu-f", dest="mu_f", type=float)
    p.add_argument("--lam-f", dest="lam_f", type=float)
    p.add_argument("--e-m", dest="e_m", type=float)
    p.add_argument("--nu-m", dest="nu_m", type=float)
    p.add_argument("--e-f", dest="e_f", type=float)
    p.add_argument("--nu-f", dest="nu_f", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--aspect", type=float)
    p.add_argument("--fibers", help="comma separated fiber counts")
    p.add_argument("--margin", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")


def _config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for key in ("test", "r_omega", "r_gamma", "mu", "lam", "mu_f", "lam_f",
                "e_m", "nu_m", "e_f", "nu_f", "beta", "aspect", "margin",
                "gamma", "tol", "seed", "out"):
        overrides[key] = getattr(args, key)
    if args.fibers is not None:
        overrides["fibers"] = tuple(int(v) for v in args.fibers.split(","))
    return merge_config(cfg, overrides)


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    records = run_experiment(cfg)
    if cfg.out:
        export_csv(records, cfg.out)
        print(f"wrote {cfg.out}")
    else:
        sys.stdout.write(format_csv(records))
    done = [r for r in records if not r.failed]
    if len(done) >= 2:
        slopes = convergence_slope([r.l2_error for r in done],
                                   [r.n_fibers for r in done])
        print(f"log-log slope = {slopes.least_squares:.4f}")
    return 0 if all(not r.failed for r in records) else 1


def _cmd_halpin_tsai(args) -> int:
    ht = halpin_tsai(args.e_f, args.e_m, args.aspect, args.beta)
    print(f"eta_l={ht.eta_l:.6f}")
    print(f"eta_t={ht.eta_t:.6f}")
    print(f"e_l={ht.e_l:.6f}  ({ht.e_l * args.e_m:.6f} absolute)")
    print(f"e_t={ht.e_t:.6f}  ({ht.e_t * args.e_m:.6f} absolute)")
    print(f"e_c={ht.e_c:.6f}  ({ht.e_c * args.e_m:.6f} absolute)")
    print(f"mu_c={ht.mu_c:.6f}  ({ht.mu_c * args.e_m:.6f} absolute)")
    print(f"nu_r={ht.nu_r:.6f}")
    return 0


def _cmd_gen_fibers(args) -> int:
    if args.mode == "uniform":
        network = uniform_parallel_fibers(args.n_per_side, args.beta,
                                          axis=args.axis, margin=args.margin)
    else:
        network = random_planar_fibers(args.count, args.length, args.radius,
                                       args.seed)
    write_network(network, args.out)
    print(f"wrote {args.out} ({len(network)} fibers, beta={network.beta:.6f})")
    return 0


def _cmd_solve_one(args) -> int:
    cfg = _config_from_args(args)
    mesh, dofs, network, sol, u_ref, err = solve_single(cfg, args.n_fibers)
    print(f"n_fibers={args.n_fibers} l2_error={err:.6e}")
    if args.stats:
        print(sol.stats_text())
    if cfg.out:
        export_vtk(cfg.out, mesh, sol.u, u_hom=u_ref, network=network, w=sol.w)
        print(f"wrote {cfg.out}_background.vtk and {cfg.out}_fibers.vtk")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiberfem",
        description="Immersed finite elements for fiber reinforced elasticity")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment sweep")
    _add_config_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_ht = sub.add_parser("halpin-tsai", help="print the composite estimate")
    p_ht.add_argument("--e-f", dest="e_f", type=float, required=True)
    p_ht.add_argument("--e-m", dest="e_m", type=float, required=True)
    p_ht.add_argument("--aspect", type=float, default=20.0,
                      help="2l/d, twice the length over the diameter")
    p_ht.add_argument("--beta", type=float, required=True)
    p_ht.set_defaults(func=_cmd_halpin_tsai)

    p_gen = sub.add_parser("gen-fibers", help="emit a fiber network file")
    p_gen.add_argument("--mode", choices=["uniform", "random-planar"],
                       default="random-planar")
    p_gen.add_argument("--n-per-side", dest="n_per_side", type=int, default=4)
    p_gen.add_argument("--axis", type=int, default=0)
    p_gen.add_argument("--beta", type=float, default=0.1)
    p_gen.add_argument("--margin", type=float, default=0.05)
    p_gen.add_argument("--count", type=int, default=79)
    p_gen.add_argument("--length", type=float, default=0.6)
    p_gen.add_argument("--radius", type=float, default=0.03)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen_fibers)

    p_one = sub.add_parser("solve-one", help="single coupled solve")
    _add_config_flags(p_one)
    p_one.add_argument("--n-fibers", dest="n_fibers", type=int, required=True)
    p_one.add_argument("--stats", action="store_true",
                       help="print solver statistics")
    p_one.set_defaults(func=_cmd_solve_one)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FiberFemError, ValueError, OSError) as exc:
        print(f"error type={type(exc).__name__} message={exc}", file=sys.stderr)
        return 1
