"""Invariant suites run by ``e1lab check``.

Each suite returns a list of :class:`CheckResult`; a check passes when its
measured ``value`` satisfies the comparison against ``threshold``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import cauchy, jets, rotsym, secondvar, surfaces, system
from .jets import SurfaceJet

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    value: float
    threshold: float
    op: str = "<="

    @property
    def passed(self):
        v = self.value
        if isinstance(v, float) and math.isnan(v):
            return False
        if self.op == "<=":
            return v <= self.threshold
        if self.op == ">=":
            return v >= self.threshold
        if self.op == "==":
            return v == self.threshold
        raise ValueError(self.op)

    def row(self):
        return (self.suite, self.name, float(self.value), self.op, float(self.threshold), "pass" if self.passed else "FAIL")


# --- random inputs ----------------------------------------------------------------------


def random_jets(rng, n, d_min=1e-2):
    """Seeded jets with D >= d_min."""
    x, y, u, ux, uy = (rng.uniform(-2, 2, n) for _ in range(5))
    uxx, uxy, uyy = (rng.normal(0, 2, n) for _ in range(3))
    keep = np.hypot(ux - y, uy + x) >= d_min
    return SurfaceJet(*(v[keep] for v in (x, y, u, ux, uy, uxx, uxy, uyy)))


def random_states(rng, n, margin=0.05):
    """Seeded (r, s, c, alpha, H) with |s|, |sigma|, |eta| >= margin (relative to 1 + |alpha| + |H|)."""
    r = rng.uniform(0.2, 3.0, n)
    ang = rng.uniform(0, 2 * np.pi, n)
    s, c = np.sin(ang), np.cos(ang)
    alpha = -rng.uniform(0.1, 3.0, n)
    H = rng.normal(0, 2.0, n)
    sigma, eta = system.sigma_eta(s, c, alpha, H)
    scale = 1.0 + np.abs(alpha) + np.abs(H)
    keep = (np.abs(s) >= margin) & (np.abs(sigma) >= margin * scale) & (np.abs(eta) >= margin * scale)
    return r[keep], s[keep], c[keep], alpha[keep], H[keep]


def _rel(a, b):
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


# --- suites -----------------------------------------------------------------------------


def suite_jets(seed=0, n=10_000):
    rng = np.random.default_rng(seed)
    j = random_jets(rng, n)
    *_, disc = jets.hyperbolicity_witness(j)
    inv = jets.invariants_from_jet(j)
    Fg, Ff, scale = jets.e1_residual_terms(j)
    out = [
        CheckResult("jets", "hyperbolicity |disc + 1/4|", float(np.max(np.abs(disc + 0.25))), 1e-12),
        CheckResult("jets", "cos^2 + sin^2 - 1", float(np.max(np.abs(inv.Ncomp[0] ** 2 + inv.Ncomp[1] ** 2 - 1))), 1e-14),
        CheckResult("jets", "graph vs frame form of F", float(np.max(np.abs(Fg - Ff) / scale)), 1e-12),
        CheckResult("jets", "alpha D + 1", float(np.max(np.abs(inv.alpha * inv.D + 1))), 1e-14),
    ]
    for fam, rr in _class_ranges():
        r = rng.uniform(*rr, 1000)
        p = rng.uniform(0, 2 * np.pi, 1000)
        jj = surfaces.family_sampler(fam)(r * np.cos(p), r * np.sin(p))
        out.append(CheckResult("jets", f"E1 residual on {fam.kind}", float(np.max(np.abs(jets.e1_residual(jj)))), 1e-10))
    out.append(CheckResult("jets", "max dilation deviation (rel)", dilation_deviation(), 1e-6))
    return out


def _class_ranges():
    return [
        (rotsym.PARABOLA_PLUS, (0.1, 3.0)),
        (rotsym.PARABOLA_MINUS, (0.1, 3.0)),
        (rotsym.type1(1.0), (0.01, 0.99 * rotsym.blowup_radius(rotsym.type1(1.0)))),
        (rotsym.type2(1.0), (0.01, 0.99 * rotsym.blowup_radius(rotsym.type2(1.0)))),
    ]


GENERIC_PATCH = "x*y + x**3/3 - y**2/2"


def dilation_deviation(expr=GENERIC_PATCH, rect=((1.0, 2.0), (1.0, 2.0)), grid=(200, 200), lams=(0.5, 2.0, 4.0)):
    """Largest relative change of the patch energy under the Heisenberg dilations."""
    base_sampler = surfaces.expression_sampler(expr)
    E0 = jets.integrate_E1_patch(base_sampler, rect, grid)
    worst = 0.0
    for lam in lams:
        (x0, x1), (y0, y1) = rect
        r_lam = ((lam * x0, lam * x1), (lam * y0, lam * y1))
        E = jets.integrate_E1_patch(surfaces.dilated_sampler(base_sampler, lam), r_lam, grid)
        worst = max(worst, abs(E - E0) / abs(E0))
    return worst


def suite_system(seed=1, n=10_000):
    rng = np.random.default_rng(seed)
    r, s, c, alpha, H = random_states(rng, n)
    A = system.A_sc(s, c, alpha, H)
    B = system.B_sc(r, s, c, alpha, H)
    det_cf = system.det_A_sc(s, c, alpha, H)
    det_lu = np.linalg.det(A)
    inv_cf = system.inverse_A_sc(s, c, alpha, H)
    inv_lu = np.linalg.inv(A)
    a_cf = system.a_matrix_sc(r, s, c, alpha, H)
    a_lu = inv_lu @ B
    nrm = lambda M: np.linalg.norm(M, axis=(-2, -1))  # noqa: E731
    out = [
        CheckResult("system", "det A closed form vs LU (rel)", float(np.max(_rel(det_cf, det_lu))), 1e-10),
        CheckResult("system", "A^-1 closed form vs LU (rel)", float(np.max(nrm(inv_cf - inv_lu) / nrm(inv_lu))), 1e-10),
        CheckResult("system", "A A^-1 - I", float(np.max(nrm(A @ inv_cf - np.eye(4)))), 1e-10),
        CheckResult("system", "a closed form vs A^-1 B (rel)", float(np.max(nrm(a_cf - a_lu) / nrm(a_lu))), 1e-10),
        CheckResult(
            "system",
            "B vs A rotated by (s, c) -> (-c, s), / r",
            float(np.max(np.abs(B - system.A_sc(-c, s, alpha, H) / r[:, None, None]))),
            1e-14,
        ),
    ]
    out += eigen_checks(rng)
    return out


def eigen_residual(r, s, c, alpha, H):
    """max_k |a xi_k - lambda_k xi_k| / (|a| |xi_k|) for one state."""
    a = system.a_matrix_sc(r, s, c, alpha, H)
    pairs, case = system.eigen_system_sc(r, s, c, alpha, H)
    na = np.linalg.norm(a)
    worst = max(float(np.linalg.norm(a @ xi - lam * xi) / (na * np.linalg.norm(xi))) for lam, xi in pairs)
    return worst, case


def eigen_checks(rng, n=500):
    out = []
    r, s, c, alpha, H = random_states(rng, n)
    regimes = {
        "generic": [(r[k], s[k], c[k], alpha[k], H[k]) for k in range(len(r))],
        "H_zero": [(r[k], s[k], c[k], alpha[k], 0.0) for k in range(len(r)) if abs(c[k]) > 0.05],
        "alpha_zero": [(r[k], s[k], c[k], 0.0, H[k]) for k in range(len(r)) if abs(H[k]) > 0.05],
    }
    for name, states in regimes.items():
        worst = 0.0
        tags = set()
        for st in states:
            res, case = eigen_residual(*st)
            worst = max(worst, res)
            tags.add(case)
        ok_tag = tags == {name}
        out.append(CheckResult("system", f"eigen residual ({name})", worst if ok_tag else math.nan, 1e-9))
    sigma, eta = system.sigma_eta(s, c, alpha, H)
    lam1, lam2, lam3, _ = system.eigenvalues_sc(r, s, c, alpha, H)
    d12 = _rel(lam1 - lam2, 2 * alpha / (s * r * sigma))
    d32 = _rel(lam3 - lam2, 2 * alpha / (s * r * eta))
    d13 = _rel(lam1 - lam3, 2 * alpha * H / (3 * r * sigma * eta))
    out.append(CheckResult("system", "lambda difference formulas (rel)", float(max(d12.max(), d32.max(), d13.max())), 1e-10))
    return out


def rk4_orders(fam=None, r_start=0.05, r_end=0.3, hs=(1e-2, 5e-3, 2.5e-3)):
    fam = fam or rotsym.type1(1.0)
    w0 = float(rotsym.closed_form_w(fam, r_start))
    errs = []
    for h in hs:
        prof = rotsym.integrate_w(r_start, w0, r_end, h)
        errs.append(abs(prof.w[-1] - float(rotsym.closed_form_w(fam, r_end))))
    return errs, [math.log2(errs[k] / errs[k + 1]) * math.log(2) / math.log(hs[k] / hs[k + 1]) for k in range(len(hs) - 1)]


def sphere_profile_residual(fam, h=1e-3):
    rs = 0.05 * fam.rho0
    prof = rotsym.integrate_w(rs, float(rotsym.closed_form_w(fam, rs)), 0.9 * rotsym.blowup_radius(fam), h * fam.rho0)
    u0 = (-0.25 if fam.kind == "TypeI" else 0.25) * fam.rho0**2
    p = rotsym.u_from_w(prof, u0)
    return float(np.max(np.abs(rotsym.sphere_residual(fam, p.r, p.u)))) / fam.rho0**4, prof


def gluing_fd(rho0=1.0, h=1e-4):
    """Centered second differences of r(u) at u = 0 for type I and for type II with b = r0."""
    f1 = rotsym.type1(rho0)
    r0 = rotsym.blowup_radius(f1)
    f2 = rotsym.type2(r0 / math.sqrt((2.0 + SQRT3) / 2.0))

    def d2(fam):
        g = lambda u: float(rotsym.sphere_r_of_u(fam, u))  # noqa: E731
        return (g(h) - 2.0 * g(0.0) + g(-h)) / h**2

    return d2(f1), d2(f2)


def suite_rotsym():
    out = []
    R, UR = np.meshgrid(np.linspace(0.1, 3.0, 40), np.linspace(-5.0, 5.0, 41), indexing="ij")
    worst = 0.0
    for b in ("Plus", "Minus"):
        urr = rotsym.branch_rhs(R, UR, b)
        scale = R**4 * urr**2 / 3.0 + UR**6 / (3.0 * R**2) + UR**4 + R**4
        worst = max(worst, float(np.max(np.abs(rotsym.ode_residual(R, UR, urr)) / scale)))
    out.append(CheckResult("rotsym", "branch roots zero the ODE (rel)", worst, 1e-12))
    out.append(
        CheckResult(
            "rotsym",
            "branch reflection",
            float(np.max(np.abs(rotsym.branch_rhs(R, -UR, "Minus") + rotsym.branch_rhs(R, UR, "Plus")))),
            1e-9,
        )
    )
    W = np.linspace(-5, 5, 1001)
    same_sign = np.all(np.sign(rotsym.w_rhs(1.3, W)) == np.sign(W - SQRT3))
    out.append(CheckResult("rotsym", "sign(w_rhs) = sign(w - sqrt3)", float(same_sign), 1.0, "=="))
    for fam in (rotsym.type1(1.0), rotsym.type2(1.0)):
        r = np.linspace(1e-4, 0.999, 2000) * rotsym.blowup_radius(fam)
        w = rotsym.closed_form_w(fam, r)
        margin = float(np.min(w - SQRT3)) if fam.kind == "TypeI" else float(np.min(SQRT3 - w))
        out.append(CheckResult("rotsym", f"{fam.kind} stays on its side of sqrt3", margin, 0.0, ">="))
    errs, orders = rk4_orders()
    out.append(CheckResult("rotsym", "RK4 observed order", min(orders), 3.7, ">="))
    errs, _ = rk4_orders(hs=(1e-3,))
    out.append(CheckResult("rotsym", "RK4 error at h = 1e-3", errs[0], 1e-8))
    for fam in (rotsym.type1(1.0), rotsym.type2(1.0), rotsym.type1(2.0), rotsym.type2(0.5)):
        res, prof = sphere_profile_residual(fam)
        out.append(CheckResult("rotsym", f"u_from_w sphere equation / rho0^4 {fam}", res, 1e-7))
        got = rotsym.classify(prof, tol=1e-6)
        dev = abs(got.rho0 - fam.rho0) if got.kind == fam.kind else math.inf
        out.append(CheckResult("rotsym", f"classify round trip {fam}", dev, 1e-6))
    ruu1, ruu2, ratio = rotsym.gluing_second_derivatives(1.0)
    fd1, fd2 = gluing_fd(1.0)
    out.append(CheckResult("rotsym", "gluing r_uu type I vs FD (rel)", abs(fd1 - ruu1) / abs(ruu1), 1e-5))
    out.append(CheckResult("rotsym", "gluing r_uu type II vs FD (rel)", abs(fd2 - ruu2) / abs(ruu2), 1e-5))
    out.append(CheckResult("rotsym", "gluing ratio - (7 + 4 sqrt3)", abs(ratio - (7 + 4 * SQRT3)), 1e-8))
    for kind in ("TypeI", "TypeII"):
        devs = rotsym.dilation_limit_check(0.1, kind, [1.0, 10.0, 100.0])
        mono = all(devs[k + 1] < devs[k] for k in range(len(devs) - 1))
        out.append(CheckResult("rotsym", f"{kind} dilation limit decreasing", float(mono), 1.0, "=="))
    return out


def march_orders(fam, c, r_end, scheme, n_values=(64, 128, 256)):
    errs = [cauchy.final_error(cauchy.march_cauchy(cauchy.initial_data(fam), c, r_end, n, scheme=scheme), fam) for n in n_values]
    return errs, cauchy.convergence_orders(errs)


def suite_cauchy():
    out = []
    for fam, rr in ((rotsym.PARABOLA_PLUS, (0.5, 2.0)), (rotsym.type1(1.0), (0.05, 0.3)), (rotsym.type2(1.0), (0.05, 0.3))):
        rep = cauchy.verify_identities(fam, rr)
        for name, v in rep.items():
            value = math.inf if v["exact"] else v["orders"][-1]
            out.append(CheckResult("cauchy", f"{name} FD order on {fam}", value, 1.8, ">="))
        st = cauchy.exact_state(fam, np.linspace(*rr, 50), np.linspace(0, 6, 50))
        out.append(CheckResult("cauchy", f"E1 relation on exact {fam}", float(np.max(np.abs(st.e1_relation()))), 1e-10))
    bad = cauchy.verify_identities(rotsym.PARABOLA_PLUS, (0.5, 2.0), corrupt_alpha=1.1)
    out.append(CheckResult("cauchy", "corrupted alpha breaks emini1", bad["emini1"]["residuals"][-1], 1e-2, ">="))
    for fam, c, r_end in ((rotsym.PARABOLA_PLUS, 1.0, 1.5), (rotsym.type1(1.0), 0.1, 0.05)):
        _, o_lw = march_orders(fam, c, r_end, "lax-wendroff")
        _, o_up = march_orders(fam, c, r_end, "upwind", (128, 256, 512))
        out.append(CheckResult("cauchy", f"Lax-Wendroff order {fam}", o_lw[-1], 1.8, ">="))
        out.append(CheckResult("cauchy", f"upwind order {fam}", o_up[-1], 0.9, ">="))
    rep = cauchy.uniqueness_experiment(cauchy.initial_data(rotsym.PARABOLA_PLUS), 1.0, 1.5)
    dist = rep["cross_scheme_distance"]
    out.append(CheckResult("cauchy", "cross-scheme distance decreasing", float(all(dist[k + 1] < dist[k] for k in range(len(dist) - 1))), 1.0, "=="))
    out.append(CheckResult("cauchy", "perturbation response spread", rep["K_spread"], 2.0))
    out.append(CheckResult("cauchy", "march determinism", float(rep["deterministic"]), 1.0, "=="))
    return out


def suite_secondvar(seed=2):
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    negative = True
    for l, Q in secondvar.mode_spectrum(8):
        ref = 3.0 * math.sqrt(2.0) * (1 - 3 * l * l) * math.pi**2
        worst = max(worst, abs(Q - ref) / abs(ref))
        negative &= Q < 0
    out.append(CheckResult("secondvar", "Q(v_l) vs 3 sqrt2 (1 - 3 l^2) pi^2 (rel)", worst, 1e-13))
    out.append(CheckResult("secondvar", "Q(v_l) < 0 for l = 1..8", float(negative), 1.0, "=="))
    out.append(CheckResult("secondvar", "measure factor - 1/2", abs(secondvar.measure_factor() - 0.5), 1e-15))
    w_ibp = w_asm = w_grid = w_quad = 0.0
    ibp = 0.0
    for _ in range(100):
        f = secondvar.TorusField.random(rng, band=6, n_max=8)
        g = secondvar.TorusField.random(rng, band=6, n_max=8)
        Q = secondvar.second_variation(f)
        w_ibp = max(w_ibp, abs(secondvar.second_variation_pre_ibp(f) - Q) / abs(Q))
        w_asm = max(w_asm, abs(secondvar.second_variation_assembled(f) - Q) / abs(Q))
        a = rng.normal()
        Qfg = secondvar.second_variation(f + g) + secondvar.second_variation(f - g)
        w_quad = max(
            w_quad,
            abs(Qfg - 2 * Q - 2 * secondvar.second_variation(g)) / abs(Qfg),
            abs(secondvar.second_variation(a * f) - a * a * Q) / abs(a * a * Q),
        )
        scale = math.sqrt(secondvar.inner(f, f) * secondvar.inner(g, g)) * (2 * 8) ** 2
        ibp = max(ibp, *(abs(v) / scale for v in secondvar.ibp_adjointness(f, g)))
    for _ in range(5):
        f = secondvar.TorusField.random(rng, band=6, n_max=8)
        Q = secondvar.second_variation(f)
        w_grid = max(w_grid, abs(secondvar.second_variation(f, inner=secondvar.quadrature_inner) - Q) / abs(Q))
    out.append(CheckResult("secondvar", "SVF vs SVF1 (rel, 100 fields)", w_ibp, 1e-10))
    out.append(CheckResult("secondvar", "SVF vs proof assembly (rel)", w_asm, 1e-10))
    out.append(CheckResult("secondvar", "Parseval vs 256^2 grid (rel)", w_grid, 1e-9))
    out.append(CheckResult("secondvar", "quadratic-form identities (rel)", w_quad, 1e-10))
    out.append(CheckResult("secondvar", "integration by parts residual (rel)", ibp, 1e-14))
    bg = secondvar.TorusBackground(secondvar.CLIFFORD_RHO1)
    out.append(CheckResult("secondvar", "Hcr - 1/2 at Clifford", abs(bg.Hcr - 0.5), 1e-15))
    out.append(CheckResult("secondvar", "|Hcr| f at Clifford", abs(secondvar.hcr_f(bg)), 0.0))
    sweep = secondvar.criticality_sweep(99)
    clifford = [e for rho, e in sweep if abs(rho - secondvar.CLIFFORD_RHO1) < 1e-12]
    others = [abs(e) for rho, e in sweep if abs(rho - secondvar.CLIFFORD_RHO1) >= 1e-12]
    out.append(CheckResult("secondvar", "E1 at Clifford (sweep midpoint)", abs(clifford[0]) if len(clifford) == 1 else math.nan, 1e-14))
    out.append(CheckResult("secondvar", "min |E1| away from Clifford", min(others), 1e-3, ">="))
    return out


SUITES = {
    "jets": suite_jets,
    "system": suite_system,
    "rotsym": suite_rotsym,
    "cauchy": suite_cauchy,
    "secondvar": suite_secondvar,
}


def run(names=None):
    names = list(SUITES) if names is None else names
    results = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
        results.extend(SUITES[name]())
    return results
