"""Command line interface: run configs, built-in benchmarks, convergence
studies, and the uniform-flow consistency checks."""

from __future__ import annotations

import argparse
import sys

import numpy as np


def _cmd_run(args):
    from .scenarios import load_config, run_scenario

    cfg = load_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    res = run_scenario(cfg, progress=not args.quiet)
    worst = res.ledger.max_residuals()
    print(
        f"{cfg.name}: {res.n_steps} steps to t={res.field.t:.6g} "
        f"in {res.wall_time:.1f}s"
    )
    print(
        "max residuals  mass=%.2e  mom=(%.2e, %.2e)  energy=%.2e"
        % (worst[0], worst[1], worst[2], worst[3])
    )
    return 0


def _cmd_bench(args):
    from .scenarios import BENCHMARKS, run_scenario, save_config

    import inspect

    build = BENCHMARKS[args.name]
    kwargs = {}
    if args.resolution:
        kwargs["resolution"] = args.resolution
    cfg = build(**kwargs)
    if args.t_end:
        if "t_end" in inspect.signature(build).parameters:
            cfg = build(**kwargs, t_end=args.t_end)
        else:
            cfg.t_end = args.t_end
    cfg.scheme = args.scheme
    cfg.mixing = {"beta": "beta", "alpha-paper": "alpha-paper"}[args.mixing]
    if args.out:
        cfg.out_dir = args.out
        cfg.out_every = args.every
        save_config(cfg, f"{args.out}/config.ini")
    res = run_scenario(cfg, progress=not args.quiet)
    worst = res.ledger.max_residuals()
    print(
        f"{cfg.name}: {res.n_steps} steps to t={res.field.t:.6g} "
        f"in {res.wall_time:.1f}s"
    )
    print(
        "max residuals  mass=%.2e  mom=(%.2e, %.2e)  energy=%.2e"
        % (worst[0], worst[1], worst[2], worst[3])
    )
    for b in res.field.bodies:
        print(
            f"body {b.body_id}: X=({b.X[0]:.6g}, {b.X[1]:.6g}) "
            f"V=({b.V[0]:.6g}, {b.V[1]:.6g})"
        )
    return 0


def _cmd_converge(args):
    from .scenarios import run_convergence_suite

    levels = [int(v) for v in args.levels.split(",")]
    rep = run_convergence_suite(args.family, levels, progress=not args.quiet)
    print(f"family: {rep['family']}  levels: {rep['resolutions']}")
    if args.family == "sod":
        print(f"L1(rho) errors: {['%.3e' % e for e in rep['density_l1']]}")
        print(f"L1(rho) order : {rep['density_order']:.2f}")
    else:
        print(f"position Linf : {['%.3e' % e for e in rep['position_linf']]}")
        print(f"position order: {rep['position_order']:.2f}")
        print(f"pressure L1   : {['%.3e' % e for e in rep['pressure_l1']]}")
        print(f"pressure order: {rep['pressure_order']:.2f}")
    return 0


def _cmd_check(args):
    """Uniform-flow consistency suite: co-moving body and free slip."""
    from .coupling import CutCellField, coupled_step
    from .fluxes import FluxScheme
    from .gas import GasModel, conserved_from_primitive
    from .geometry import Grid
    from .rigid import make_planar_body
    from .scenarios import build_uniform_flow, run_scenario
    from .sweeps import BoundaryCondition, DomainBC, stable_dt

    ok = True

    cfg = build_uniform_flow(resolution=32)
    cfg.max_steps = args.steps
    res = run_scenario(cfg)
    w0 = conserved_from_primitive(np.array(cfg.regions[0][1]), res.field.gas)
    dev = float(np.max(np.abs(res.field.w - w0)))
    dv = float(np.max(np.abs(res.field.bodies[0].V[:2] - cfg.bodies[0]["velocity"])))
    passed = dev < 1e-12 and dv < 1e-12
    ok &= passed
    print(
        f"co-moving uniform flow ({res.n_steps} steps): field dev {dev:.2e}, "
        f"velocity dev {dv:.2e}  {'PASS' if passed else 'FAIL'}"
    )

    gas = GasModel()
    n = 48
    grid = Grid(n, n, 1.0 / n, 1.0 / n)
    c30, s30 = np.cos(np.pi / 6), np.sin(np.pi / 6)
    q0 = np.array([1.0, 0.8 * c30, 0.8 * s30, 1.0])
    w = conserved_from_primitive(np.broadcast_to(q0, (n, n, 4)).copy(), gas)
    wall = np.array(
        [[-2.0, -0.1 - 2.0 * s30 / c30], [3.0, -0.1 + 3.0 * s30 / c30],
         [3.0, -5.0], [-2.0, -5.0]]
    )
    body = make_planar_body(wall, density=1.0, static=True)
    tr = BoundaryCondition("transmissive")
    fld = CutCellField(
        grid, w, [body], gas, FluxScheme("mp2"),
        DomainBC(left=tr, right=tr, bottom=tr, top=tr),
    )
    for _ in range(args.steps):
        dt = stable_dt(fld.w, grid.dx, grid.dy, gas, 0.5, alpha=fld.alpha)
        fld, _ = coupled_step(fld, dt)
    live = fld.alpha < 1.0
    w0 = conserved_from_primitive(q0, gas)
    dev = float(np.max(np.abs(fld.w[live] - w0)))
    passed = dev < 1e-12
    ok &= passed
    print(
        f"free slip along 30-deg wall ({args.steps} steps): field dev {dev:.2e}"
        f"  {'PASS' if passed else 'FAIL'}"
    )
    return 0 if ok else 1


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="cutfsi",
        description="2D compressible flow with embedded rigid bodies "
        "(conservative cut cells)",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run a scenario config file")
    p.add_argument("config")
    p.add_argument("--out", default="")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("bench", help="run a built-in benchmark")
    p.add_argument(
        "name",
        choices=[
            "uniform", "sod", "piston", "double-mach-aligned",
            "double-mach-embedded", "lift-off", "doors",
        ],
    )
    p.add_argument("--resolution", type=int, default=0)
    p.add_argument("--t-end", dest="t_end", type=float, default=0.0)
    p.add_argument("--scheme", choices=["roe", "mp2"], default="mp2")
    p.add_argument("--mixing", choices=["beta", "alpha-paper"], default="beta")
    p.add_argument("--out", default="")
    p.add_argument("--every", type=int, default=0, help="snapshot cadence (steps)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("converge", help="self-convergence study")
    p.add_argument("family", choices=["piston", "sod"])
    p.add_argument("--levels", required=True, help="comma-separated resolutions")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=_cmd_converge)

    p = sub.add_parser("check", help="uniform-flow consistency suite")
    p.add_argument("--steps", type=int, default=100)
    p.set_defaults(fn=_cmd_check)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
