"""Command-line entry point: ``e1lab <command> ...``.

Every command writes its CSV outputs and a JSON run manifest into ``--out``.
Exit codes: 0 ok, 1 check failure or ambiguous fit, 2 domain error,
3 numerical halt.
"""

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import cauchy, checks, io, jets, rotsym, secondvar, surfaces, system
from .errors import AmbiguousFit, BlowUp, DomainError, NumericalHalt

EXIT_OK, EXIT_CHECK, EXIT_DOMAIN, EXIT_HALT = 0, 1, 2, 3

ROTSYM_HEADER = ("r", "w", "u", "family", "rho0")
CAUCHY_HEADER = ("r", "phi", "theta", "alpha", "H", "m")
SECONDVAR_HEADER = ("l", "Q")
CHECK_HEADER = ("suite", "name", "value", "op", "threshold", "result")

FAMILIES = ("parabola+", "parabola-", "type1", "type2")


class Run:
    """Collects outputs and results for one command, then writes the manifest."""

    def __init__(self, args, command):
        self.args = args
        self.command = command
        self.out = Path(args.out)
        self.outputs = []
        self.parameters = {}
        self.tolerances = {}
        self.results = {}
        self.status = "ok"
        self.t0 = time.perf_counter()

    def param(self, name, flag_value, default, cast=str):
        v = io.resolve(name, flag_value, self.args.config_values, default, cast)
        self.parameters[name] = v
        return v

    def csv(self, name, header, rows):
        path = io.write_csv(self.out / name, header, rows)
        self.outputs.append(path)
        return path

    def finish(self):
        ms = (time.perf_counter() - self.t0) * 1000.0
        name = self.command.replace(" ", "-") + ".manifest.json"
        io.write_manifest(
            self.out / name, self.command, self.parameters, self.tolerances, self.outputs, self.status, ms, self.results
        )


def _family(name, rho0):
    _, fam = surfaces.parse_surface(name, rho0)
    return fam


# --- invariants -------------------------------------------------------------------------


def cmd_invariants(args):
    run = Run(args, "invariants")
    surface = run.param("surface", args.surface, "parabola+")
    rho0 = run.param("rho0", args.rho0, 1.0, float)
    if args.r is not None:
        phi = args.phi if args.phi is not None else 0.0
        x, y = surfaces.polar_point(args.r, phi)
    else:
        x = args.x if args.x is not None else 0.0
        y = args.y if args.y is not None else 0.0
    run.parameters.update(x=x, y=y)
    sampler, _ = surfaces.parse_surface(surface, rho0)
    j = sampler(np.array([x]), np.array([y]))
    inv = jets.invariants_from_jet(j)
    res = float(jets.e1_residual(j)[0])
    row = (x, y, float(inv.D[0]), float(inv.alpha[0]), float(inv.theta[0]), float(inv.H[0]), res)
    for k, v in zip(("x", "y", "D", "alpha", "theta", "H", "E1_residual"), row):
        print(f"{k:12s} {io.fmt(v)}")
    run.csv("invariants.csv", ("x", "y", "D", "alpha", "theta", "H", "E1_residual"), [row])
    run.results = dict(zip(("D", "alpha", "theta", "H", "E1_residual"), row[2:]))
    run.finish()
    return EXIT_OK


# --- rotsym -----------------------------------------------------------------------------


def cmd_rotsym_integrate(args):
    run = Run(args, "rotsym integrate")
    fam = _family(run.param("family", args.family, "type1"), run.param("rho0", args.rho0, 1.0, float))
    h = run.param("h", args.h, 1e-3, float)
    scale = fam.rho0 if fam.is_sphere else 1.0
    r_start = run.param("r_start", args.r_start, 0.05 * scale, float)
    rb = rotsym.blowup_radius(fam)
    r_end = run.param("r_end", args.r_end, 0.99 * rb if math.isfinite(rb) else 2.0, float)
    # lower type I and upper type II hemispheres start at u = -rho0^2 / 4 and +rho0^2 / 4
    u0_default = {"TypeI": -0.25, "TypeII": 0.25}.get(fam.kind, 0.0) * scale**2
    u0 = run.param("u0", args.u0, u0_default, float)
    w0 = float(rotsym.closed_form_w(fam, r_start))
    run.tolerances = {"err_guard": 1e-6, "classify_tol": 1e-6}
    try:
        prof = rotsym.integrate_w(r_start, w0, r_end, h)
    except BlowUp as exc:
        if exc.profile is not None and len(exc.profile) > 1:
            run.csv("rotsym_profile.csv", ROTSYM_HEADER, rotsym.u_from_w(exc.profile, u0).rows())
        run.status = f"halted({exc})"
        run.finish()
        raise
    prof = rotsym.u_from_w(prof, u0)
    run.csv("rotsym_profile.csv", ROTSYM_HEADER, prof.rows())
    got = rotsym.classify(prof, tol=1e-6)
    run.results = {"classified": str(got), "n": len(prof), "r_end": float(prof.r[-1])}
    if fam.is_sphere:
        run.results["max_sphere_residual"] = float(np.max(np.abs(rotsym.sphere_residual(fam, prof.r, prof.u))))
    print(f"integrated {fam} on [{r_start:g}, {prof.r[-1]:.10g}] with {len(prof)} nodes")
    print(f"classified as {got}")
    run.finish()
    return EXIT_OK


def cmd_rotsym_classify(args):
    run = Run(args, "rotsym classify")
    path = run.param("input", args.input, None)
    tol = run.param("tol", args.tol, 1e-6, float)
    run.tolerances = {"classify_tol": tol}
    rows = io.read_csv(path)
    r = np.array([float(row["r"]) for row in rows])
    w = np.array([float(row["w"]) for row in rows])
    prof = rotsym.RadialProfile(rotsym.Family("Numeric"), r, w)
    try:
        got = rotsym.classify(prof, tol=tol)
    except AmbiguousFit as exc:
        run.status = f"halted({exc})"
        run.finish()
        raise
    run.results = {"classified": str(got)}
    print(f"classified as {got}")
    run.finish()
    return EXIT_OK


def cmd_rotsym_glue(args):
    run = Run(args, "rotsym glue")
    rho0 = run.param("rho0", args.rho0, 1.0, float)
    ruu1, ruu2, ratio = rotsym.gluing_second_derivatives(rho0)
    fd1, fd2 = checks.gluing_fd(rho0, h=1e-4 * rho0)
    run.results = {"ruu_typeI": ruu1, "ruu_typeII": ruu2, "ratio": ratio, "fd_typeI": fd1, "fd_typeII": fd2}
    print(f"r_uu type I    {io.fmt(ruu1)}   (finite difference {io.fmt(fd1)})")
    print(f"r_uu type II   {io.fmt(ruu2)}   (finite difference {io.fmt(fd2)})")
    print(f"ratio          {io.fmt(ratio)}   (7 + 4 sqrt3 = {io.fmt(7 + 4 * math.sqrt(3))})")
    run.finish()
    return EXIT_OK


def cmd_rotsym_figures(args):
    run = Run(args, "rotsym figures")
    n = run.param("n", args.n, 400, int)
    figs = rotsym.figure_profiles(n=n)
    for name, profiles in figs.items():
        rows = [row for p in profiles for row in p.rows()]
        path = run.csv(f"{name}.csv", ROTSYM_HEADER, rows)
        print(f"wrote {path} ({len(rows)} rows)")
    run.finish()
    return EXIT_OK


# --- cauchy -----------------------------------------------------------------------------


def cmd_cauchy_march(args):
    run = Run(args, "cauchy march")
    fam = _family(run.param("init", args.init, "parabola+"), run.param("rho0", args.rho0, 1.0, float))
    c = run.param("c", args.c, 1.0, float)
    r_end = run.param("to", args.to, 1.5, float)
    n_phi = run.param("nphi", args.nphi, 256, int)
    cfl = run.param("cfl", args.cfl, 0.8, float)
    scheme = run.param("scheme", args.scheme, "lax-wendroff")
    run.tolerances = {"det_ratio_min": cauchy.DET_RATIO_MIN, "alpha_min": cauchy.ALPHA_MIN}
    grid = cauchy.march_cauchy(cauchy.initial_data(fam), c, r_end, n_phi, cfl, scheme)
    run.csv("cauchy_grid.csv", CAUCHY_HEADER, grid.rows())
    err = cauchy.grid_error(grid, fam)
    run.results = {"levels": len(grid.r_values), "r_reached": float(grid.r_values[-1]), "max_error": err}
    print(f"{scheme}: {len(grid.r_values)} levels from r = {c:g} to r = {grid.r_values[-1]:.10g}")
    print(f"max error vs exact {fam}: {err:.3e}")
    if grid.halted:
        run.status = f"halted({grid.halt_reason})"
        print(f"march halted {grid.halt_reason}", file=sys.stderr)
        run.finish()
        return EXIT_HALT
    run.finish()
    return EXIT_OK


def cmd_cauchy_unique(args):
    run = Run(args, "cauchy unique")
    fam = _family(run.param("init", args.init, "parabola+"), run.param("rho0", args.rho0, 1.0, float))
    c = run.param("c", args.c, 1.0, float)
    r_end = run.param("to", args.to, 1.5, float)
    eps = tuple(args.eps) if args.eps else (1e-3, 1e-4, 1e-5)
    run.parameters["eps"] = list(eps)
    cfl = run.param("cfl", args.cfl, 0.8, float)
    rep = cauchy.uniqueness_experiment(cauchy.initial_data(fam), c, r_end, eps_values=eps, cfl=cfl)
    run.results = rep
    run.csv("cauchy_unique.csv", ("eps", "K"), zip(rep["eps"], rep["K"]))
    for n, d in zip(rep["n_phi"], rep["cross_scheme_distance"]):
        print(f"n_phi {n:5d}  cross-scheme distance {d:.3e}")
    for e, k in zip(rep["eps"], rep["K"]):
        print(f"eps {e:.1e}  K = {k:.10g}")
    print(f"K spread {rep['K_spread']:.6g}, deterministic {rep['deterministic']}")
    run.finish()
    return EXIT_OK


def cmd_cauchy_eigen(args):
    run = Run(args, "cauchy eigen")
    alpha = run.param("alpha", args.alpha, -0.25, float)
    H = run.param("H", args.H, math.sqrt(3) / 4, float)
    s = run.param("s", args.s, 0.5, float)
    c = run.param("c", args.c, math.sqrt(3) / 2, float)
    r = run.param("r", args.r, 2.0, float)
    norm = math.hypot(s, c)
    if norm == 0:
        raise DomainError("(s, c) must be nonzero")
    if abs(norm - 1.0) > 1e-12:
        print(f"note: (s, c) normalized by {norm:.12g}")
        s, c = s / norm, c / norm
    pairs, case = system.eigen_system_sc(r, s, c, alpha, H)
    a = system.a_matrix_sc(r, s, c, alpha, H)
    na = np.linalg.norm(a)
    rows = []
    for k, (lam, xi) in enumerate(pairs, 1):
        res = float(np.linalg.norm(a @ xi - lam * xi) / (na * np.linalg.norm(xi)))
        rows.append((k, lam, *xi, res))
        print(f"lambda_{k} = {io.fmt(lam)}  xi = [{', '.join(io.fmt(v) for v in xi)}]  residual {res:.2e}")
    print(f"regime: {case}")
    run.csv("cauchy_eigen.csv", ("k", "lambda", "xi1", "xi2", "xi3", "xi4", "residual"), rows)
    run.results = {"regime": case, "max_residual": max(row[-1] for row in rows)}
    run.finish()
    return EXIT_OK


# --- secondvar --------------------------------------------------------------------------


def cmd_secondvar(args):
    run = Run(args, "secondvar")
    lmax = run.param("lmax", args.lmax, 8, int)
    spectrum = secondvar.mode_spectrum(lmax)
    run.csv("secondvar.csv", SECONDVAR_HEADER, spectrum)
    for l, Q in spectrum:
        print(f"l = {l:2d}  Q = {io.fmt(Q)}")
    run.results["all_negative"] = all(Q < 0 for _, Q in spectrum)
    if args.check_ibp:
        seed = run.param("seed", args.seed, 0, int)
        rng = np.random.default_rng(seed)
        worst_svf = worst_ibp = 0.0
        for _ in range(100):
            f = secondvar.TorusField.random(rng, band=6, n_max=8)
            g = secondvar.TorusField.random(rng, band=6, n_max=8)
            Q = secondvar.second_variation(f)
            worst_svf = max(worst_svf, abs(secondvar.second_variation_pre_ibp(f) - Q) / abs(Q))
            scale = math.sqrt(secondvar.inner(f, f) * secondvar.inner(g, g)) * (2 * 8) ** 2
            worst_ibp = max(worst_ibp, *(abs(v) / scale for v in secondvar.ibp_adjointness(f, g)))
        run.results.update(svf_max_rel=worst_svf, ibp_max_rel=worst_ibp)
        print(f"before/after integration by parts: max relative difference {worst_svf:.3e}")
        print(f"adjointness residual: {worst_ibp:.3e}")
    if args.criticality:
        rho1 = run.param("rho1", args.rho1, secondvar.CLIFFORD_RHO1, float)
        e = secondvar.first_variation_density(secondvar.TorusBackground(rho1))
        run.results.update(rho1=rho1, E1=e)
        print(f"rho1 = {io.fmt(rho1)}  E1 = {io.fmt(e)}")
        sweep = secondvar.criticality_sweep(99)
        run.csv("criticality.csv", ("rho1", "E1"), sweep)
    run.finish()
    return EXIT_OK


# --- check ------------------------------------------------------------------------------


def cmd_check(args):
    run = Run(args, "check")
    names = None if args.all or args.suite is None else [args.suite]
    tol = run.param("tol", args.tol, 1.0, float)
    if not tol > 0:
        raise DomainError("--tol must be positive")
    run.parameters["suites"] = names or sorted(checks.SUITES)
    run.tolerances = {"threshold_scale": tol}
    results = checks.run(names)
    if tol != 1.0:
        results = [
            checks.CheckResult(r.suite, r.name, r.value, r.threshold * tol if r.op == "<=" else r.threshold, r.op)
            for r in results
        ]
    rows = [r.row() for r in results]
    run.csv("check.csv", CHECK_HEADER, rows)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.suite:10s} {r.name:{width}s}  {r.value:.3e} {r.op} {r.threshold:.1e}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    run.results = {"passed": len(results) - failed, "failed": failed}
    run.status = "ok" if failed == 0 else f"halted({failed} checks failed)"
    run.finish()
    return EXIT_OK if failed == 0 else EXIT_CHECK


# --- parser -----------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="e1lab", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value file; flags and E1LAB_* variables take precedence")
    p.add_argument("--out", default=None, help="output directory (default: e1lab_out)")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("invariants", help="invariants and E1 residual of a graph at one point")
    q.add_argument("--surface", help="parabola+, parabola-, type1, type2 or custom:u=<expr>")
    q.add_argument("--rho0", type=float)
    q.add_argument("--x", type=float)
    q.add_argument("--y", type=float)
    q.add_argument("--r", type=float)
    q.add_argument("--phi", type=float)
    q.set_defaults(func=cmd_invariants)

    rs = sub.add_parser("rotsym", help="rotationally symmetric solutions").add_subparsers(dest="action", required=True)
    q = rs.add_parser("integrate", help="RK4 profile from closed-form start data")
    q.add_argument("--family", choices=FAMILIES)
    q.add_argument("--rho0", type=float)
    q.add_argument("--h", type=float)
    q.add_argument("--r-start", dest="r_start", type=float)
    q.add_argument("--r-end", dest="r_end", type=float)
    q.add_argument("--u0", type=float, help="graph height at r = 0")
    q.set_defaults(func=cmd_rotsym_integrate)
    q = rs.add_parser("classify", help="match a CSV with r, w columns to a family")
    q.add_argument("--input")
    q.add_argument("--tol", type=float)
    q.set_defaults(func=cmd_rotsym_classify)
    q = rs.add_parser("glue", help="second derivatives where type I and type II hemispheres meet")
    q.add_argument("--rho0", type=float)
    q.set_defaults(func=cmd_rotsym_glue)
    q = rs.add_parser("figures", help="plot data for w profiles, graphs and closed spheres")
    q.add_argument("--n", type=int)
    q.set_defaults(func=cmd_rotsym_figures)

    cs = sub.add_parser("cauchy", help="Cauchy problem for the reduced system").add_subparsers(dest="action", required=True)
    q = cs.add_parser("march", help="march exact data off r = c and compare with the exact solution")
    q.add_argument("--init", choices=FAMILIES)
    q.add_argument("--rho0", type=float)
    q.add_argument("--c", type=float)
    q.add_argument("--to", type=float)
    q.add_argument("--nphi", type=int)
    q.add_argument("--cfl", type=float)
    q.add_argument("--scheme", choices=cauchy.SCHEMES)
    q.set_defaults(func=cmd_cauchy_march)
    q = cs.add_parser("unique", help="cross-scheme and linear-response report")
    q.add_argument("--init", choices=FAMILIES)
    q.add_argument("--rho0", type=float)
    q.add_argument("--c", type=float)
    q.add_argument("--to", type=float)
    q.add_argument("--cfl", type=float)
    q.add_argument("--eps", type=float, nargs="+")
    q.set_defaults(func=cmd_cauchy_unique)
    q = cs.add_parser("eigen", help="eigenvalues and eigenvectors of a at one state")
    for name in ("alpha", "H", "s", "c", "r"):
        q.add_argument(f"--{name}", type=float)
    q.set_defaults(func=cmd_cauchy_eigen)

    q = sub.add_parser("secondvar", help="second variation on the Clifford torus")
    q.add_argument("--lmax", type=int)
    q.add_argument("--check-ibp", dest="check_ibp", action="store_true")
    q.add_argument("--seed", type=int)
    q.add_argument("--criticality", action="store_true")
    q.add_argument("--rho1", type=float)
    q.set_defaults(func=cmd_secondvar)

    q = sub.add_parser("check", help="run invariant suites")
    q.add_argument("suite", nargs="?", choices=sorted(checks.SUITES))
    q.add_argument("--all", action="store_true")
    q.add_argument("--tol", type=float, help="scale factor applied to every upper-bound threshold")
    q.set_defaults(func=cmd_check)
    return p


def _add_out(parser):
    """Accept --out after the leaf subcommand as well as before it."""
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for child in action.choices.values():
                _add_out(child)
            return
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output directory")


def main(argv=None):
    parser = build_parser()
    _add_out(parser)
    args = parser.parse_args(argv)
    try:
        args.config_values = io.read_config(args.config)
        args.out = io.resolve("out", args.out, args.config_values, "e1lab_out")
        return args.func(args)
    except AmbiguousFit as exc:
        print(f"error: AmbiguousFit: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalHalt as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_HALT


if __name__ == "__main__":
    sys.exit(main())
