"""Command-line interface.

Subcommands: kernel-table, curvature, potential, solve, functionals, end,
verify.  Tabular output is CSV on stdout unless --output is given;
``functionals`` emits JSON.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import calculus, endmodel, functionals, harness, kernels
from .potential import picard_solve, potential_from_density
from .profiles import (ConstantProfile, CounterexampleProfile,
                       QuadraticProfile, SphereProfile, bump_density,
                       density_from_profile, tabulated_density)


def _open_out(args):
    return open(args.output, "w", newline="") if args.output else sys.stdout


def _profile_from_args(args):
    fam = args.family
    if fam == "sphere":
        return SphereProfile(args.lam, args.n)
    if fam == "counterexample":
        return CounterexampleProfile(args.beta, args.n)
    if fam == "quadratic":
        return QuadraticProfile(args.coeff, args.n)
    if fam == "constant":
        return ConstantProfile(args.coeff, args.n)
    if fam == "potential-bump":
        return potential_from_density(bump_density(args.n, args.alpha0,
                                                   args.support_radius))
    raise SystemExit(f"unknown profile family: {fam}")


def _add_profile_args(sub):
    sub.add_argument("--family", required=True,
                     choices=["sphere", "counterexample", "quadratic",
                              "constant", "potential-bump"])
    sub.add_argument("--n", type=int, default=4, help="dimension (4 or 6)")
    sub.add_argument("--lam", type=float, default=1.0,
                     help="sphere scale lambda")
    sub.add_argument("--beta", type=float, default=1.0,
                     help="counterexample coefficient")
    sub.add_argument("--coeff", type=float, default=1.0,
                     help="quadratic/constant coefficient")
    sub.add_argument("--alpha0", type=float, default=0.5,
                     help="normalized total curvature for potential-bump")
    sub.add_argument("--support-radius", type=float, default=2.0)


def _density_from_args(args):
    if args.density_csv:
        rows = np.loadtxt(args.density_csv, delimiter=",", skiprows=1)
        return tabulated_density(args.n, rows[:, 0], rows[:, 1],
                                 support_radius=args.support_radius)
    if args.family == "bump":
        return bump_density(args.n, args.alpha0, args.support_radius)
    return density_from_profile(_profile_from_args(args))


def cmd_kernel_table(args):
    r = np.geomspace(args.r_min, args.r_max, args.num)
    table = kernels.build_kernel_table(args.n, args.kind, r,
                                       power=args.power)
    with _open_out(args) as fh:
        w = csv.writer(fh)
        w.writerow(["n", "kind", "r", "s", "value", "err_bound"])
        for i, ri in enumerate(table.r):
            for j, sj in enumerate(table.s):
                w.writerow([table.n, table.kind, f"{ri:.12g}", f"{sj:.12g}",
                            f"{table.values[i, j]:.15g}",
                            f"{table.err_bound[i, j]:.3g}"])
    return 0


def cmd_curvature(args):
    p = _profile_from_args(args)
    r = np.linspace(args.r_min, args.r_max, args.num)
    stack = calculus.operator_stack(p, r)
    with _open_out(args) as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u", "du", "lap_u", "Q", "R_g"])
        for i in range(len(r)):
            w.writerow([f"{r[i]:.12g}", f"{stack.u[i]:.15g}",
                        f"{stack.du[i]:.15g}", f"{stack.laplacian[i]:.15g}",
                        f"{stack.q[i]:.15g}", f"{stack.scalar[i]:.15g}"])
    return 0


def cmd_potential(args):
    density = _density_from_args(args)
    p = potential_from_density(density)
    r = np.linspace(args.r_min, args.r_max, args.num)
    u, du, ddu = p.eval(r, 0), p.eval(r, 1), p.eval(r, 2)
    with _open_out(args) as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u", "du", "ddu"])
        for i in range(len(r)):
            w.writerow([f"{r[i]:.12g}", f"{u[i]:.15g}", f"{du[i]:.15g}",
                        f"{ddu[i]:.15g}"])
    return 0


def cmd_solve(args):
    def q(s):
        s = np.asarray(s, dtype=float)
        return args.q_amplitude * np.exp(-(s / args.q_width) ** 2)

    res = picard_solve(args.n, q, r_cut=args.r_cut, tol=args.tol,
                       damping=args.damping)
    with _open_out(args) as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u"])
        for ri, ui in zip(res.grid, res.u_grid):
            w.writerow([f"{ri:.12g}", f"{ui:.15g}"])
    print(f"iterations={res.iterations} residual={res.residual:.3g} "
          f"converged={res.converged} alpha0={res.alpha0:.12g}",
          file=sys.stderr)
    return 0 if res.converged else 1


def cmd_functionals(args):
    p = _profile_from_args(args)
    if args.family in ("sphere", "counterexample"):
        a0 = functionals.alpha0(density_from_profile(p))
    elif args.family == "potential-bump":
        a0 = args.alpha0
    else:
        a0 = 0.0
    sm = functionals.sphere_mean_limits(p)
    ve = functionals.volume_entropy(p, a0)
    mass = functionals.conformal_mass(p, a0)

    def lim(e):
        return {"value": e.value, "error": e.error, "model": e.model}

    out = {
        "alpha0": a0,
        "tau": {**lim(ve.estimate), "prediction": ve.prediction,
                "completeness": ve.completeness},
        "mass": {"value": mass.value, "error": mass.error,
                 "prediction": mass.prediction,
                 "per_center": {str(c): lim(e)
                                for c, e in mass.per_center.items()}},
        "lemma_limits": {"laplacian": lim(sm.laplacian),
                         "slope": lim(sm.slope),
                         "gradient_sq": lim(sm.gradient_sq)},
    }
    with _open_out(args) as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_end(args):
    if args.a2 != 0.0:
        def raw(s):
            s = np.asarray(s, float)
            hi = args.support_radius
            return np.where((s >= 1.0) & (s <= hi),
                            (s - 1.0) ** 2 * (hi - s) ** 2, 0.0)

        probe = endmodel.EndProfile(f=raw, support_hi=args.support_radius)
        scale = args.a2 / probe.a2
        e = endmodel.EndProfile(f=lambda s: scale * raw(s),
                                support_hi=args.support_radius, a1=args.a1,
                                h0=args.h_const, h2=args.h_inv_sq)
    else:
        e = endmodel.EndProfile(a1=args.a1, h0=args.h_const,
                                h2=args.h_inv_sq)
    r = np.geomspace(args.r_min, args.r_max, args.num)
    ig = endmodel.isoperimetric_ratio(e, r)
    dw = np.asarray(e.eval(r, 1))
    with _open_out(args) as fh:
        w = csv.writer(fh)
        w.writerow(["r", "I_g", "r_dw"])
        for i in range(len(r)):
            w.writerow([f"{r[i]:.12g}", f"{ig[i]:.15g}",
                        f"{r[i] * dw[i]:.15g}"])
    nu = endmodel.end_nu(e)
    print(f"a1={e.a1:.12g} a2={e.a2:.12g} nu={nu.estimate.value:.12g} "
          f"error={nu.estimate.error:.3g} prediction={nu.prediction:.12g}",
          file=sys.stderr)
    return 0


def cmd_verify(args):
    cfg = (harness.SuiteConfig.from_file(args.config) if args.config
           else harness.SuiteConfig())
    if args.only:
        only = tuple(x.strip() for x in args.only.split(",") if x.strip())
        cfg = harness.SuiteConfig(seed=cfg.seed, output_dir=cfg.output_dir,
                                  parallelism=cfg.parallelism, only=only,
                                  roster=cfg.roster,
                                  tolerances=dict(cfg.tolerances))
    reports = harness.run_suite(cfg)
    out_dir = cfg.output_dir
    harness.emit_report(reports, "csv", os.path.join(out_dir, "verify.csv"))
    harness.emit_report(reports, "json", os.path.join(out_dir, "verify.json"))
    harness.emit_report(reports, "text", os.path.join(out_dir, "verify.txt"))
    if args.json:
        print(harness.render_json(reports))
    else:
        print(harness.render_text(reports), end="")
    return 0 if harness.suite_passed(reports) else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qconformal",
        description="Numerical laboratory for radial conformal metrics with "
                    "finite total curvature integral")
    subs = parser.add_subparsers(dest="command", required=True)

    kt = subs.add_parser("kernel-table",
                         help="tabulate angular-average kernels as CSV")
    kt.add_argument("--n", type=int, default=4)
    kt.add_argument("--kind", choices=["log", "pow"], default="log")
    kt.add_argument("--power", type=float, default=None)
    kt.add_argument("--r-min", type=float, default=0.1)
    kt.add_argument("--r-max", type=float, default=10.0)
    kt.add_argument("--num", type=int, default=20)
    kt.add_argument("--output")
    kt.set_defaults(func=cmd_kernel_table)

    cu = subs.add_parser("curvature",
                         help="curvature fields of a profile as CSV")
    _add_profile_args(cu)
    cu.add_argument("--r-min", type=float, default=0.0)
    cu.add_argument("--r-max", type=float, default=10.0)
    cu.add_argument("--num", type=int, default=101)
    cu.add_argument("--output")
    cu.set_defaults(func=cmd_curvature)

    po = subs.add_parser("potential",
                         help="log-potential of a density as CSV")
    _add_profile_args(po)
    po.add_argument("--density-csv",
                    help="tabulated density (CSV columns r,value)")
    po.add_argument("--r-min", type=float, default=0.0)
    po.add_argument("--r-max", type=float, default=10.0)
    po.add_argument("--num", type=int, default=101)
    po.add_argument("--output")
    po.set_defaults(func=cmd_potential)
    # allow "--family bump" for a direct bump density
    for action in po._actions:
        if "--family" in action.option_strings:
            action.choices = list(action.choices) + ["bump"]

    so = subs.add_parser("solve",
                         help="fixed-point solve for prescribed Gaussian Q")
    so.add_argument("--n", type=int, default=4)
    so.add_argument("--q-amplitude", type=float, default=0.1)
    so.add_argument("--q-width", type=float, default=1.0)
    so.add_argument("--r-cut", type=float, default=6.0)
    so.add_argument("--tol", type=float, default=1e-10)
    so.add_argument("--damping", type=float, default=1.0)
    so.add_argument("--output")
    so.set_defaults(func=cmd_solve)

    fu = subs.add_parser("functionals",
                         help="limit functionals of a profile as JSON")
    _add_profile_args(fu)
    fu.add_argument("--output")
    fu.set_defaults(func=cmd_functionals)

    en = subs.add_parser("end", help="end-model isoperimetric trace as CSV")
    en.add_argument("--a1", type=float, default=0.0)
    en.add_argument("--a2", type=float, default=0.0,
                    help="target exterior-density coefficient (bump shape)")
    en.add_argument("--support-radius", type=float, default=3.0)
    en.add_argument("--h-const", type=float, default=0.0)
    en.add_argument("--h-inv-sq", type=float, default=0.0)
    en.add_argument("--r-min", type=float, default=2.0)
    en.add_argument("--r-max", type=float, default=1e3)
    en.add_argument("--num", type=int, default=40)
    en.add_argument("--output")
    en.set_defaults(func=cmd_end)

    ve = subs.add_parser("verify", help="run the verification suite")
    ve.add_argument("--config", help="INI config path")
    ve.add_argument("--json", action="store_true",
                    help="print the JSON report to stdout")
    ve.add_argument("--only", help="comma-separated check ids")
    ve.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
