import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from e1lab import rotsym, surfaces
from e1lab.errors import AmbiguousFit, BlowUp, DomainExceeded

SQRT3 = math.sqrt(3)
K = SQRT3 / 2


@pytest.mark.parametrize("fam", [rotsym.type1(1.0), rotsym.type2(1.0), rotsym.type1(2.5), rotsym.type2(0.3)])
def test_closed_form_w_solves_ode(fam):
    r = np.linspace(0.05, 0.95, 50) * rotsym.blowup_radius(fam)
    h = 1e-5 * fam.rho0
    dw = (rotsym.closed_form_w(fam, r + h) - rotsym.closed_form_w(fam, r - h)) / (2 * h)
    rhs = rotsym.w_rhs(r, rotsym.closed_form_w(fam, r))
    assert np.max(np.abs(dw - rhs) / (1 + np.abs(rhs))) < 1e-6


@pytest.mark.parametrize("fam", [rotsym.type1(1.0), rotsym.type2(1.0), rotsym.PARABOLA_PLUS, rotsym.PARABOLA_MINUS])
def test_derivatives_match_differences(fam):
    rb = rotsym.blowup_radius(fam)
    r = np.linspace(0.1, 0.9, 30) * (rb if math.isfinite(rb) else 2.0)
    h = 1e-5
    u, ur, urr = rotsym.closed_form_derivatives(fam, r)
    up, _, _ = rotsym.closed_form_derivatives(fam, r + h)
    um, _, _ = rotsym.closed_form_derivatives(fam, r - h)
    assert np.allclose((up - um) / (2 * h), ur, rtol=1e-7, atol=1e-8)
    assert np.allclose((up - 2 * u + um) / h**2, urr, rtol=1e-4, atol=1e-4)
    # w = u_r / r
    assert np.allclose(ur / r, rotsym.closed_form_w(fam, r), rtol=1e-13)


@pytest.mark.parametrize("fam", [rotsym.type1(1.0), rotsym.type2(1.0), rotsym.PARABOLA_PLUS])
def test_closed_forms_solve_second_order_equation(fam):
    rb = rotsym.blowup_radius(fam)
    r = np.linspace(0.05, 0.95, 40) * (rb if math.isfinite(rb) else 3.0)
    _, ur, urr = rotsym.closed_form_derivatives(fam, r)
    scale = r**4 * urr**2 + ur**6 / r**2 + ur**4 + r**4
    assert np.max(np.abs(rotsym.ode_residual(r, ur, urr)) / scale) < 1e-12


@pytest.mark.parametrize(
    "fam, expr",
    [
        (rotsym.type1(1.0), f"-sqrt(1 - (x**2 + y**2 + {K!r})**2) / 2"),
        (rotsym.type2(1.0), f"sqrt(1 - (x**2 + y**2 - {K!r})**2) / 2"),
    ],
)
def test_radial_jet_matches_symbolic_sphere(fam, expr):
    rng = np.random.default_rng(1)
    r = rng.uniform(0.05, 0.95, 100) * rotsym.blowup_radius(fam)
    p = rng.uniform(0, 2 * np.pi, 100)
    x, y = r * np.cos(p), r * np.sin(p)
    a = surfaces.family_sampler(fam)(x, y)
    b = surfaces.expression_sampler(expr)(x, y)
    for name in ("u", "ux", "uy", "uxx", "uxy", "uyy"):
        assert np.allclose(getattr(a, name), getattr(b, name), rtol=1e-10, atol=1e-10), name


@pytest.mark.parametrize("fam", [rotsym.type1(1.0), rotsym.type2(1.0), rotsym.type2(3.0)])
def test_sphere_equation_and_inverse(fam):
    r = np.linspace(0.01, 0.99, 100) * rotsym.blowup_radius(fam)
    u = rotsym.closed_form_u(fam, r)
    assert np.max(np.abs(rotsym.sphere_residual(fam, r, u))) < 1e-13 * fam.rho0**4
    inner = r**2 < K * fam.rho0**2 if fam.kind == "TypeII" else np.zeros_like(r, dtype=bool)
    back = np.empty_like(r)
    back[inner] = rotsym.sphere_r_of_u(fam, u[inner], "inner")
    back[~inner] = rotsym.sphere_r_of_u(fam, u[~inner], "outer")
    far = np.abs(r**2 - K * fam.rho0**2) > 0.05 * fam.rho0**2
    assert np.allclose(back[far], r[far], rtol=1e-7)


@given(st.floats(0.05, 5), st.floats(-6, 6))
def test_branch_reflection(r, ur):
    assert rotsym.branch_rhs(r, -ur, "Minus") == pytest.approx(-rotsym.branch_rhs(r, ur, "Plus"), rel=1e-12, abs=1e-12)


@given(st.floats(0.05, 5), st.floats(-6, 6), st.sampled_from(["Plus", "Minus"]))
def test_branch_roots_solve_quadratic(r, ur, b):
    urr = rotsym.branch_rhs(r, ur, b)
    scale = r**4 * urr**2 + ur**6 / r**2 + ur**4 + r**4
    assert abs(rotsym.ode_residual(r, ur, urr)) <= 1e-11 * scale


@given(st.floats(0.01, 10), st.floats(-20, 20))
def test_w_rhs_sign(r, w):
    v = rotsym.w_rhs(r, w)
    if abs(w - SQRT3) > 1e-6:
        assert np.sign(v) == np.sign(w - SQRT3)


@given(st.floats(0.01, 10))
def test_fixed_point(r):
    assert abs(rotsym.w_rhs(r, SQRT3)) < 1e-14 / r


def test_blowup_and_zero_radii():
    assert rotsym.blowup_radius(rotsym.type1(1.0)) == pytest.approx(0.36602540378443865)
    assert rotsym.blowup_radius(rotsym.type2(1.0)) == pytest.approx(1.3660254037844386)
    assert rotsym.closed_form_w(rotsym.type2(1.0), rotsym.zero_radius(rotsym.type2(1.0))) == pytest.approx(0, abs=1e-12)
    assert rotsym.blowup_radius(rotsym.PARABOLA_PLUS) == math.inf


@pytest.mark.parametrize("r", [0.0, -1.0, 0.36603, 2.0])
def test_closed_form_outside_domain(r):
    with pytest.raises(DomainExceeded):
        rotsym.closed_form_w(rotsym.type1(1.0), r)


def test_rk4_fourth_order():
    fam = rotsym.type1(1.0)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        prof = rotsym.integrate_w(0.05, float(rotsym.closed_form_w(fam, 0.05)), 0.3, h)
        errs.append(abs(prof.w[-1] - rotsym.closed_form_w(fam, 0.3)))
    orders = [math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])]
    assert min(orders) > 3.7


def test_rk4_lands_on_r_end():
    prof = rotsym.integrate_w(0.05, SQRT3 + 1e-3, 0.31234, 1e-2)
    assert prof.r[-1] == 0.31234


def test_parabola_is_fixed_point_of_integrator():
    prof = rotsym.integrate_w(0.1, SQRT3, 3.0, 1e-2)
    assert np.max(np.abs(prof.w - SQRT3)) < 1e-14


@pytest.mark.parametrize("fam", [rotsym.type1(1.0), rotsym.type2(1.0)])
def test_blowup_detected_near_radius(fam):
    rb = rotsym.blowup_radius(fam)
    with pytest.raises(BlowUp) as exc:
        rotsym.integrate_w(0.05, float(rotsym.closed_form_w(fam, 0.05)), 2 * rb, 1e-3)
    prof = exc.value.profile
    assert prof.status == "blowup"
    assert abs(prof.r[-1] - rb) < 1e-6
    assert abs(prof.w[-1]) > 1e2


def test_integrate_rejects_bad_interval():
    with pytest.raises(ValueError):
        rotsym.integrate_w(0.5, 1.0, 0.1, 1e-3)
    with pytest.raises(ValueError):
        rotsym.integrate_w(0.1, 1.0, 0.5, 0.0)


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=30), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_quadrature_exact_on_quadratics(steps, a, b, c):
    x = np.concatenate([[0.0], np.cumsum(steps)])
    y = a + b * x + c * x**2
    exact = a * x + b * x**2 / 2 + c * x**3 / 3
    got = rotsym._cumulative_simpson(x, y) if len(x) > 2 else None
    if got is not None:
        assert np.allclose(got, exact, rtol=1e-11, atol=1e-11 * (1 + np.max(np.abs(exact))))


@pytest.mark.parametrize("fam", [rotsym.type1(1.0), rotsym.type2(1.0), rotsym.type1(0.2)])
@pytest.mark.parametrize("r0", [0.02, 0.05, 0.1])
def test_head_integral_matches_closed_form(fam, r0):
    r0 = r0 * fam.rho0
    exact = rotsym.closed_form_u(fam, r0) - {"TypeI": -0.25, "TypeII": 0.25}[fam.kind] * fam.rho0**2
    got = rotsym.head_integral(r0, float(rotsym.closed_form_w(fam, r0)))
    # the series is truncated at O(r0^8); the constant is about 32 / rho0^6
    assert abs(got - exact) <= 40 * (r0 / fam.rho0) ** 8 * fam.rho0**2


@pytest.mark.parametrize("fam", [rotsym.type1(1.0), rotsym.type2(1.0), rotsym.type1(3.0), rotsym.type2(0.5)])
def test_u_from_w_reproduces_sphere(fam):
    rs = 0.05 * fam.rho0
    prof = rotsym.integrate_w(rs, float(rotsym.closed_form_w(fam, rs)), 0.95 * rotsym.blowup_radius(fam), 1e-3 * fam.rho0)
    u0 = {"TypeI": -0.25, "TypeII": 0.25}[fam.kind] * fam.rho0**2
    p = rotsym.u_from_w(prof, u0)
    assert np.max(np.abs(rotsym.sphere_residual(fam, p.r, p.u))) < 1e-7 * fam.rho0**4


@pytest.mark.parametrize(
    "fam", [rotsym.type1(1.0), rotsym.type2(2.0), rotsym.type1(0.3), rotsym.type2(0.7), rotsym.PARABOLA_PLUS, rotsym.PARABOLA_MINUS]
)
def test_classify_closed_form(fam):
    rb = rotsym.blowup_radius(fam)
    r = np.linspace(0.05, 0.9, 200) * (rb if math.isfinite(rb) else 2.0)
    got = rotsym.classify(rotsym.profile_from_closed_form(fam, r))
    assert got.kind == fam.kind
    if fam.is_sphere:
        assert got.rho0 == pytest.approx(fam.rho0, abs=1e-6)


def test_classify_reflected_hemisphere():
    fam = rotsym.type1(1.0)
    r = np.linspace(0.02, 0.3, 100)
    prof = rotsym.RadialProfile(rotsym.Family("Numeric"), r, -rotsym.closed_form_w(fam, r))
    got = rotsym.classify(prof)
    assert got.kind == "TypeI"
    assert got.rho0 == pytest.approx(1.0, abs=1e-6)


def test_classify_unknown():
    r = np.linspace(0.1, 1.0, 50)
    prof = rotsym.RadialProfile(rotsym.Family("Numeric"), r, 0.3 + np.sin(5 * r))
    assert rotsym.classify(prof).kind == "Unknown"


def test_classify_ambiguous():
    r = np.linspace(0.1, 1.0, 50)
    prof = rotsym.RadialProfile(rotsym.Family("Numeric"), r, np.zeros_like(r))
    with pytest.raises(AmbiguousFit) as exc:
        rotsym.classify(prof, tol=10.0)
    assert len(exc.value.candidates) >= 2


def test_gluing_values():
    ruu1, ruu2, ratio = rotsym.gluing_second_derivatives(1.0)
    assert ruu1 == pytest.approx(-5.464101615137754, rel=1e-14)
    assert ruu2 == pytest.approx(-76.10511776651526, rel=1e-14)
    assert ratio == pytest.approx(7 + 4 * SQRT3, abs=1e-12)


@given(st.floats(0.1, 10))
def test_gluing_ratio_scale_free(rho0):
    ruu1, ruu2, ratio = rotsym.gluing_second_derivatives(rho0)
    assert ratio == pytest.approx(7 + 4 * SQRT3, rel=1e-12)
    assert ruu1 * rho0**3 == pytest.approx(-5.464101615137754, rel=1e-12)


@pytest.mark.parametrize("kind", ["TypeI", "TypeII"])
def test_dilation_limit_is_parabola(kind):
    devs = rotsym.dilation_limit_check(0.1, kind, [1.0, 10.0, 100.0, 1000.0])
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[-1] < 1e-7


def test_figure_profiles_shapes():
    figs = rotsym.figure_profiles(n=50)
    assert set(figs) == {"fig1_w", "fig2_graphs", "fig3_closed"}
    assert len(figs["fig3_closed"]) == 2 * len(figs["fig2_graphs"])
    for prof in figs["fig3_closed"]:
        fam = rotsym.Family(prof.family.kind, prof.family.rho0)
        assert np.max(np.abs(rotsym.sphere_residual(fam, prof.r, prof.u))) < 1e-12


def test_family_validation():
    with pytest.raises(ValueError):
        rotsym.Family("TypeI")
    with pytest.raises(ValueError):
        rotsym.Family("Cylinder")
    assert str(rotsym.type1(2)) == "TypeI(2)"
