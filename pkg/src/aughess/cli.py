"""Command-line interface.

Subcommands: ``check-operator``, ``check-problem``, ``solve``,
``hoelder-probe``. Each reads an INI config, writes ``report.txt`` and
``resolved.cfg`` (plus ``fields.csv`` and figures on the solve path) into the
output directory, and exits with 0 (success), 1 (verified failure) or
2 (usage/config error).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .augmenting import RegularitySampler, certify_regularity
from .certify import CertTolerances, certify_condition
from .cones import ConeSampler, margin_batch
from .config import RunConfig
from .diagnostics import HoelderProbe, hoelder_null_check
from .errors import AugHessError, ConfigError, ConstraintError, SeedError
from .geometry import certify_convexity
from .grid import PolarDisk, TensorSquare
from .problems import MANUFACTURED
from .report import Report, write_fields_csv
from .solver import (QuadraticSeed, SolveConfig, check_comparison, solve)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args, require=()) -> RunConfig:
    cfg = RunConfig.load(args.config, require=require)
    if args.seed is not None:
        cfg.sections["certify"]["seed"] = int(args.seed)
    return cfg


def _common_metadata(cfg: RunConfig) -> dict:
    return {
        "config-sha256": cfg.sha256(),
        "rng": "numpy PCG64",
        "seed": str(cfg.get("certify", "seed")),
    }


def _write_resolved(cfg: RunConfig, out: Path) -> None:
    (out / "resolved.cfg").write_text(cfg.dump(), encoding="utf-8")


def cmd_check_operator(args) -> int:
    cfg = _load(args, require=("operator",))
    out = _out_dir(args)
    _write_resolved(cfg, out)
    op = cfg.build_operator()
    rng = cfg.rng()
    cert = cfg.sections["certify"]
    sampler = ConeSampler(op.cone, op.n, rng, eig_box=cert["eig_box"],
                          margin_floor=cert["margin_floor"])
    tol = CertTolerances(samples=cert["samples"],
                         band=tuple(cert["band"]))
    conditions = cert["conditions"]

    rep = Report(f"aughess check-operator: {op.label()}", _common_metadata(cfg))
    rows = []
    all_pass = True
    for cond in conditions:
        cr = certify_condition(op, cond, sampler, tol, rng=rng)
        all_pass &= cr.verdict
        rows.append([cond, cr.verdict, cr.worst_violation, cr.tolerance, cr.samples])
        rep.verdict_line(f"condition {cond}", cr.verdict, cr.worst_violation,
                         cr.tolerance, extra=f"samples={cr.samples}")
        for key in sorted(cr.details):
            rep.line(f"    {key} = {cr.details[key]:.6g}")
    rep.csv_block("conditions",
                  ["condition", "verdict", "worst_violation", "tolerance", "samples"],
                  rows)
    status = EXIT_OK if all_pass else EXIT_FAIL
    rep.line()
    rep.line(f"exit-status: {status}")
    rep.write(out / "report.txt")

    if cfg.get("output", "figures"):
        from . import figures
        figures.violations_figure(
            out / "conditions.png", [r[0] for r in rows],
            [r[2] for r in rows], [r[3] for r in rows],
            f"{op.label()}: sampled condition violations")
    return status


def cmd_check_problem(args) -> int:
    cfg = _load(args, require=("operator", "boundary"))
    out = _out_dir(args)
    _write_resolved(cfg, out)
    op = cfg.build_operator()
    rng = cfg.rng()
    cert = cfg.sections["certify"]
    rep = Report("aughess check-problem", _common_metadata(cfg))
    reasons = []

    try:
        domain = cfg.build_domain()
        A = cfg.build_augmenting()
        B = cfg.build_rhs()
        G = cfg.build_boundary(domain)
    except (ConfigError,):
        raise
    except ConstraintError as ex:
        rep.line(f"hypothesis bundle rejected during construction: {ex}")
        rep.line()
        rep.line(f"exit-status: {EXIT_FAIL}")
        rep.write(out / "report.txt")
        return EXIT_FAIL

    rep.line(f"operator: {op.label()}")
    rep.line(f"augmenting: {A.family}   boundary: {G.family}   "
             f"domain: {type(domain).__name__}")
    rep.line()

    reg_sampler = RegularitySampler(n=op.n, rng=rng, z_bound=cert["z_max"],
                                    p_max=cert["p_max"], points=cert["points"])
    reg = certify_regularity(A, reg_sampler, B=B)
    rep.verdict_line("strict regularity", reg.verdict("strictly_regular"),
                     -reg.c0_est, 0.0,
                     extra=f"lambda0={reg.lambda_est:.4g} "
                           f"lambdabar0={reg.lambda_bar_est:.4g}")
    if not reg.verdict("strictly_regular"):
        reasons.append("augmenting matrix not strictly regular")
    rows = [[k, v] for k, v in sorted(reg.verdicts.items())]
    rep.csv_block("regularity", ["verdict", "value"], rows)
    rep.csv_block("growth_exponents", ["derivative", "slope"],
                  [[k, v] for k, v in sorted(reg.growth_exponents.items())])

    # obliqueness is sampled on the boundary over the z-interval
    zs = np.linspace(cert["z_min"], cert["z_max"], 8)
    worst_obliq = float("inf")
    for th in domain.boundary_grid(64):
        x = domain.boundary_point(th)
        for z in zs:
            for _ in range(4):
                p = cert["p_max"] * rng.uniform(-1, 1, size=2)
                worst_obliq = min(worst_obliq, G.obliqueness(x, z, p))
    rep.verdict_line("obliqueness", worst_obliq > 0, -worst_obliq, 0.0,
                     extra=f"min G_p.nu = {worst_obliq:.4g}, floor beta0 = {G.beta0:.4g}")
    if not worst_obliq > 0:
        reasons.append("boundary operator not oblique")

    conv = certify_convexity(domain, A, G, op.cone,
                             (cert["z_min"], cert["z_max"]), rng=rng,
                             boundary_count=cert["boundary_count"],
                             z_count=cert["z_count"])
    rep.verdict_line("uniform convexity", conv.verdict,
                     -conv.margin_at_mu0, 0.0,
                     extra=f"mu0={conv.mu0:.4g} "
                           f"tangential-agreement={conv.tangential_agreement}")
    if not conv.verdict:
        reasons.append("domain not uniformly (Gamma, A, G)-convex")
    mus = [s.minimal_mu for s in conv.samples]
    rep.csv_block("convexity", ["samples", "minimal_mu_sup", "mu0", "margin_at_mu0"],
                  [[len(mus), max(mus), conv.mu0, conv.margin_at_mu0]])

    status = EXIT_OK if not reasons else EXIT_FAIL
    rep.line()
    for r in reasons:
        rep.line(f"reason: {r}")
    rep.line(f"exit-status: {status}")
    rep.write(out / "report.txt")

    if cfg.get("output", "figures"):
        from . import figures
        figures.violations_figure(
            out / "hypotheses.png",
            ["strict regularity", "obliqueness", "uniform convexity"],
            [-reg.c0_est, -worst_obliq, -conv.margin_at_mu0],
            [0.0, 0.0, 0.0], "hypothesis bundle margins (negative = pass)")
    return status


def _build_solve_config(cfg: RunConfig):
    sol = cfg.sections["solver"]
    name = sol["manufactured"].lower()
    if name not in ("", "none"):
        if name not in MANUFACTURED:
            raise ConfigError(f"unknown manufactured problem {name!r} "
                              f"(available: {sorted(MANUFACTURED)})",
                              location="solver.manufactured")
        prob = MANUFACTURED[name]()
        scfg = prob.config(sol["n_r"], sol["n_theta"],
                           continuation_steps=sol["continuation_steps"],
                           newton_max_iter=sol["newton_max_iter"],
                           residual_tolerance=sol["residual_tolerance"],
                           admissibility_floor=sol["admissibility_floor"],
                           min_continuation_step=sol["min_continuation_step"],
                           degenerate_alpha=sol["degenerate_alpha"])
        return scfg, prob

    op = cfg.build_operator()
    domain = cfg.build_domain()
    A = cfg.build_augmenting()
    B = cfg.build_rhs()
    G = cfg.build_boundary(domain)
    if sol["grid"].lower() == "polardisk":
        grid = PolarDisk(cfg.get("domain", "radius"), sol["n_r"], sol["n_theta"])
    elif sol["grid"].lower() == "tensorsquare":
        grid = TensorSquare(sol["square_side"], sol["n_x"], sol["n_y"])
    else:
        raise ConfigError(f"unknown grid layout {sol['grid']!r}",
                          location="solver.grid")
    seed = QuadraticSeed(sol["seed_c0"], sol["seed_eps"], tuple(sol["seed_x0"]))
    scfg = SolveConfig(operator=op, A=A, B=B, G=G, grid=grid, initial=seed,
                       continuation_steps=sol["continuation_steps"],
                       newton_max_iter=sol["newton_max_iter"],
                       residual_tolerance=sol["residual_tolerance"],
                       admissibility_floor=sol["admissibility_floor"],
                       min_continuation_step=sol["min_continuation_step"],
                       eps_schedule=sol["eps_schedule"],
                       degenerate_alpha=sol["degenerate_alpha"])
    return scfg, None


def cmd_solve(args) -> int:
    cfg = _load(args, require=("operator", "boundary"))
    out = _out_dir(args)
    _write_resolved(cfg, out)
    rep = Report("aughess solve", _common_metadata(cfg))

    scfg, prob = _build_solve_config(cfg)
    rep.line(f"operator: {scfg.operator.label()}")
    rep.line(f"grid: {scfg.grid.layout} with {scfg.grid.node_count} nodes")

    try:
        u, sol_rep = solve(scfg)
    except SeedError as ex:
        rep.line(f"seed error: {ex}")
        rep.line()
        rep.line(f"exit-status: {EXIT_FAIL}")
        rep.write(out / "report.txt")
        return EXIT_FAIL

    rep.line(f"homotopy: {sol_rep.homotopy}")
    rep.line(f"converged: {sol_rep.converged}")
    rep.line(f"final residual: {sol_rep.final_residual:.6e} "
             f"(tolerance {sol_rep.tolerance_used:.6e})")
    rep.line(f"final admissibility margin: {sol_rep.final_margin:.6e} "
             f"(floor {sol_rep.margin_floor:.6e})")
    rep.line(f"sup-norms: M0={sol_rep.m0:.6g} M1={sol_rep.m1:.6g} M2={sol_rep.m2:.6g}")
    if sol_rep.failure:
        rep.line(f"failure: {sol_rep.failure}")
    rep.csv_block("continuation",
                  ["t", "iterations", "final_residual", "min_margin", "converged"],
                  [[s.t, s.iterations, s.residuals[-1], s.min_margin, s.converged]
                   for s in sol_rep.steps])
    if sol_rep.eps_ladder:
        rep.csv_block("eps_ladder", ["eps", "diff_sup", "ratio"],
                      [[r["eps"], r["diff_sup"], r["ratio"]] for r in sol_rep.eps_ladder])

    comparison_ok = True
    off = cfg.get("solver", "comparison_offset")
    if prob is not None and off:
        exact = prob.exact_field(scfg.grid)
        flags = check_comparison(u, scfg.grid.field(exact - off),
                                 scfg.grid.field(exact + off))
        comparison_ok = flags.ok
        rep.verdict_line("comparison bound", flags.ok,
                         max(flags.worst_sub_gap, flags.worst_sup_gap), 1e-8)
    if prob is not None:
        err = float(np.abs(u.values - prob.exact_field(scfg.grid)).max())
        rep.line(f"manufactured reference error |u_h - u*|_inf = {err:.6e}")

    prob_d = None
    try:
        from .solver import DiscreteProblem
        prob_d = DiscreteProblem(scfg)
        grad = scfg.grid.gradient(u.values)
        hess = scfg.grid.hessian(u.values)
        margins = np.full(scfg.grid.node_count, np.nan)
        ii = scfg.grid.interior_idx
        A_int = scfg.A.evaluate_batch(scfg.grid.nodes[ii], u.values[ii], grad[ii])
        margins[ii] = margin_batch(hess[ii] - A_int, scfg.operator.cone)
        margins[scfg.grid.boundary_idx] = 0.0
    except AugHessError:
        margins = np.zeros(scfg.grid.node_count)
    write_fields_csv(out / "fields.csv", scfg.grid, u.values, margins)

    status = EXIT_OK if (sol_rep.converged and comparison_ok) else EXIT_FAIL
    rep.line()
    rep.line(f"exit-status: {status}")
    rep.write(out / "report.txt")

    if cfg.get("output", "figures"):
        from . import figures
        figures.solution_figure(out / "solution.png", scfg.grid, u.values,
                                np.nan_to_num(margins),
                                f"{scfg.operator.label()} on {scfg.grid.layout}")
        figures.convergence_figure(out / "convergence.png", sol_rep.steps,
                                   "Newton residual history")
        if sol_rep.eps_ladder:
            figures.eps_ladder_figure(out / "eps_ladder.png", sol_rep.eps_ladder,
                                      "regularization ladder")
    return status


def cmd_hoelder_probe(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    _write_resolved(cfg, out)
    sec = cfg.sections["probe"]
    rng = cfg.rng()
    rep = Report("aughess hoelder-probe", _common_metadata(cfg))
    pairs = []
    for chunk in sec["pairs"].split(";"):
        n_s, k_s = chunk.split(",")
        pairs.append((int(n_s), int(k_s)))

    all_pass = True
    rows = []
    radii_all, nulls_all = [], []
    for n, k in pairs:
        probe = HoelderProbe(n=n, k=k, center=(0.0,) * n, c=sec["c"])
        pts = rng.standard_normal((sec["points"], n))
        keep = np.linalg.norm(pts, axis=1) > 1e-5
        r = hoelder_null_check(probe, pts[keep], tolerance=sec["tolerance"])
        all_pass &= r.verdict
        rows.append([f"({n},{k})", probe.alpha, r.verdict, r.worst_rel_null,
                     r.tolerance, r.samples])
        rep.verdict_line(f"S_k null for (n,k)=({n},{k}), alpha={probe.alpha:.4g}",
                         r.verdict, r.worst_rel_null, r.tolerance)
        radii_all.append(np.linalg.norm(pts[keep], axis=1))
        nulls_all.append(np.asarray(r.values))
    rep.csv_block("hoelder",
                  ["pair", "alpha", "verdict", "worst_rel_null", "tolerance", "samples"],
                  rows)
    status = EXIT_OK if all_pass else EXIT_FAIL
    rep.line()
    rep.line(f"exit-status: {status}")
    rep.write(out / "report.txt")

    if cfg.get("output", "figures"):
        from . import figures
        figures.hoelder_figure(out / "hoelder.png",
                               np.concatenate(radii_all), np.concatenate(nulls_all),
                               "comparison-function null identity")
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aughess",
        description="Augmented Hessian equations with oblique boundary data: "
                    "certify structure conditions and solve on planar domains.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("check-operator", cmd_check_operator),
                     ("check-problem", cmd_check_problem),
                     ("solve", cmd_solve),
                     ("hoelder-probe", cmd_hoelder_probe)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to INI config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the sampler RNG seed")
        p.set_defaults(fn=fn)

    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if ex.code not in (0,) else 0
    try:
        return args.fn(args)
    except ConfigError as ex:
        loc = f" [{ex.location}]" if ex.location else ""
        print(f"config error{loc}: {ex}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_USAGE
    except AugHessError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
