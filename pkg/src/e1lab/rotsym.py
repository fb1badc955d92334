"""Rotationally symmetric vanishing-E1 graphs t = u(r).

The radial equation is quadratic in u_rr; its two branches are exchanged by
u -> -u, so everything reduces to the first-order equation for w = u_r / r::

    w_r = (2 w^3 + 2 w - sqrt(3) (1 + w^2)^(3/2)) / r

whose solutions are w = sqrt(3) (paraboloids) and the two one-parameter
families of shifted Heisenberg spheres, labelled by rho0 > 0.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import AmbiguousFit, BlowUp, DomainExceeded, StepTooLarge

SQRT3 = math.sqrt(3.0)
K = SQRT3 / 2.0  # the sqrt(3)/2 shift in the sphere equations

BLOWUP_W = 1e8


@dataclass(frozen=True)
class Family:
    """Solution family tag: ParabolaPlus, ParabolaMinus, TypeI, TypeII, Numeric or Unknown."""

    kind: str
    rho0: float = None

    def __post_init__(self):
        if self.kind not in ("ParabolaPlus", "ParabolaMinus", "TypeI", "TypeII", "Numeric", "Unknown"):
            raise ValueError(f"unknown family {self.kind!r}")
        if self.kind in ("TypeI", "TypeII") and not (self.rho0 is not None and self.rho0 > 0):
            raise ValueError(f"{self.kind} needs rho0 > 0")

    @property
    def is_sphere(self):
        return self.kind in ("TypeI", "TypeII")

    def __str__(self):
        return f"{self.kind}({self.rho0:.12g})" if self.is_sphere else self.kind


PARABOLA_PLUS = Family("ParabolaPlus")
PARABOLA_MINUS = Family("ParabolaMinus")


def type1(rho0):
    return Family("TypeI", float(rho0))


def type2(rho0):
    return Family("TypeII", float(rho0))


@dataclass
class RadialProfile:
    family: Family
    r: np.ndarray
    w: np.ndarray
    u: np.ndarray = None
    u0: float = None
    status: str = "ok"
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.r)

    def rows(self):
        rho0 = self.family.rho0 if self.family.rho0 is not None else float("nan")
        u = self.u if self.u is not None else np.full_like(self.r, np.nan)
        for ri, wi, ui in zip(self.r, self.w, u):
            yield (float(ri), float(wi), float(ui), self.family.kind, rho0)


def ode_residual(r, ur, urr):
    """Left side of the second-order radial equation; zero on solutions."""
    return (
        r**4 * urr**2 / 3.0
        - (4.0 * r * ur**3 / 3.0 + 2.0 * r**3 * ur) * urr
        + ur**6 / (3.0 * r**2)
        + ur**4
        - r**4
    )


def branch_rhs(r, ur, branch):
    """u_rr on the ``"Plus"`` or ``"Minus"`` root of the radial quadratic."""
    sign = {"Plus": 1.0, "Minus": -1.0}[branch]
    return (2.0 * ur**3 + 3.0 * r**2 * ur + sign * SQRT3 * (ur**2 + r**2) ** 1.5) / r**3


def w_rhs(r, w):
    return (2.0 * w**3 + 2.0 * w - SQRT3 * (1.0 + w**2) ** 1.5) / r


def blowup_radius(family):
    """r0 for type I, b for type II; inf for the paraboloids."""
    if family.kind == "TypeI":
        return math.sqrt((2.0 - SQRT3) / 2.0) * family.rho0
    if family.kind == "TypeII":
        return math.sqrt((2.0 + SQRT3) / 2.0) * family.rho0
    return math.inf


def zero_radius(family):
    """Radius a with w(a) = 0 on a type II profile."""
    return math.sqrt(K) * family.rho0


def _sphere_parts(family, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r >= blowup_radius(family)):
        raise DomainExceeded(f"r outside (0, {blowup_radius(family):.6g}) for {family}")
    rho2 = family.rho0**2
    q = r**2 + (K if family.kind == "TypeI" else -K) * rho2
    S = np.sqrt(rho2**2 - q**2)
    return r, q, S, rho2


def closed_form_w(family, r):
    if family.kind == "ParabolaPlus":
        return np.full_like(np.asarray(r, dtype=float), SQRT3)
    if family.kind == "ParabolaMinus":
        return np.full_like(np.asarray(r, dtype=float), -SQRT3)
    r, q, S, _ = _sphere_parts(family, r)
    return q / S if family.kind == "TypeI" else -q / S


def closed_form_u(family, r):
    """Graph heights: lower type I hemisphere and upper type II hemisphere."""
    if family.kind in ("ParabolaPlus", "ParabolaMinus"):
        sign = 1.0 if family.kind == "ParabolaPlus" else -1.0
        return sign * K * np.asarray(r, dtype=float) ** 2
    _, _, S, _ = _sphere_parts(family, r)
    return -0.5 * S if family.kind == "TypeI" else 0.5 * S


def closed_form_derivatives(family, r):
    """(u, u_r, u_rr) of the family's graph."""
    if family.kind in ("ParabolaPlus", "ParabolaMinus"):
        sign = 1.0 if family.kind == "ParabolaPlus" else -1.0
        r = np.asarray(r, dtype=float)
        return sign * K * r**2, sign * SQRT3 * r, sign * SQRT3 * np.ones_like(r)
    r, q, S, _ = _sphere_parts(family, r)
    sign = 1.0 if family.kind == "TypeI" else -1.0
    u = -0.5 * sign * S
    ur = sign * r * q / S
    urr = sign * (q / S + 2.0 * r**2 / S + 2.0 * r**2 * q**2 / S**3)
    return u, ur, urr


def sphere_residual(family, r, u):
    """(r^2 +- sqrt(3)/2 rho0^2)^2 + 4 u^2 - rho0^4."""
    shift = K if family.kind == "TypeI" else -K
    return (r**2 + shift * family.rho0**2) ** 2 + 4.0 * u**2 - family.rho0**4


def sphere_r_of_u(family, u, branch="outer"):
    """The closed sphere curve solved for r >= 0 as a function of the height u."""
    rho2 = family.rho0**2
    root = np.sqrt(rho2**2 - 4.0 * np.asarray(u, dtype=float) ** 2)
    if family.kind == "TypeI":
        return np.sqrt(root - K * rho2)
    if branch == "outer":
        return np.sqrt(K * rho2 + root)
    return np.sqrt(K * rho2 - root)


def integrate_w(r_start, w_start, r_end, h, err_guard=1e-6, blowup=BLOWUP_W):
    """Classical RK4 for w_r = w_rhs(r, w) on [r_start, r_end].

    Steps are fixed at ``h`` with a Richardson half-step error monitor;
    the step is halved only where |dw| per step reaches 0.1 |w|, i.e. near a
    blow-up radius. Raises :class:`BlowUp` (with the truncated profile) once
    |w| exceeds ``blowup`` or the halved step underflows the resolution of r,
    and :class:`StepTooLarge` when a regular step fails the error guard.
    """
    if not 0 < r_start < r_end:
        raise ValueError("need 0 < r_start < r_end")
    if not h > 0:
        raise ValueError("step must be positive")
    r, w, status, info = kernels.rk4_w(float(r_start), float(w_start), float(r_end), float(h), float(err_guard), float(blowup))
    profile = RadialProfile(Family("Numeric"), r, w, status=("ok", "blowup", "step_too_large")[status], info=info)
    if status == 1:
        raise BlowUp(f"|w| blew up near r = {r[-1]:.15g}", profile)
    if status == 2:
        raise StepTooLarge(f"Richardson error {info['err']:.3e} at r = {info['r_fail']:.6g} exceeds guard")
    return profile


def _cumulative_simpson(x, y):
    """Cumulative integral from x[0] by piecewise quadratics through node triples.

    On uniform spacing this is composite Simpson (with the 5/8/-1 rule at odd
    nodes); nonuniform panels, such as a truncated last step, use the exact
    weights of the quadratic interpolant.
    """
    n = len(x)
    out = np.zeros(n)
    if n == 2:
        out[1] = 0.5 * (x[1] - x[0]) * (y[0] + y[1])
        return out
    i = 0
    while i < n - 1:
        if i + 2 < n:
            h0 = x[i + 1] - x[i]
            h1 = x[i + 2] - x[i + 1]
            first = (
                h0 * (2 * h0 + 3 * h1) / (6 * (h0 + h1)) * y[i]
                + h0 * (h0 + 3 * h1) / (6 * h1) * y[i + 1]
                - h0**3 / (6 * h1 * (h0 + h1)) * y[i + 2]
            )
            second = (
                -(h1**3) / (6 * h0 * (h0 + h1)) * y[i]
                + h1 * (3 * h0 + h1) / (6 * h0) * y[i + 1]
                + h1 * (3 * h0 + 2 * h1) / (6 * (h0 + h1)) * y[i + 2]
            )
            out[i + 1] = out[i] + first
            out[i + 2] = out[i + 1] + second
            i += 2
        else:
            # one interval left: quadratic through the last three nodes
            h0 = x[i] - x[i - 1]
            h1 = x[i + 1] - x[i]
            out[i + 1] = out[i] + (
                -(h1**3) / (6 * h0 * (h0 + h1)) * y[i - 1]
                + h1 * (3 * h0 + h1) / (6 * h0) * y[i]
                + h1 * (3 * h0 + 2 * h1) / (6 * (h0 + h1)) * y[i + 1]
            )
            i += 1
    return out


def head_integral(r0, w0):
    """int_0^r0 s w(s) ds for the solution through (r0, w0).

    Expanding w_rhs about its fixed point gives
    w = sqrt(3) + C r^2 + D r^4 + O(r^6) with D = (3 sqrt(3) / 8) C^2;
    C is fitted to w0 and the truncation error is O(C^3 r0^8).
    """
    k = 3.0 * SQRT3 / 8.0
    d0 = w0 - SQRT3
    disc = 1.0 + 4.0 * k * d0
    if disc > 0:
        C = 2.0 * d0 / (r0**2 * (1.0 + math.sqrt(disc)))
    else:
        C = d0 / r0**2
    D = k * C**2
    return SQRT3 * r0**2 / 2.0 + C * r0**4 / 4.0 + D * r0**6 / 6.0


def u_from_w(profile, u0):
    """Heights u(r) = u0 + int_0^r s w(s) ds along the profile's samples.

    The profile starts at r_start > 0; the head [0, r_start] is integrated
    with the series of the solution about w = sqrt(3) (see :func:`head_integral`).
    """
    r = np.asarray(profile.r, dtype=float)
    w = np.asarray(profile.w, dtype=float)
    head = head_integral(r[0], w[0])
    u = u0 + head + _cumulative_simpson(r, r * w)
    return RadialProfile(profile.family, r, w, u=u, u0=u0, status=profile.status, info=dict(profile.info))


def profile_from_closed_form(family, r, u0=None):
    r = np.asarray(r, dtype=float)
    w = closed_form_w(family, r)
    u = closed_form_u(family, r)
    if u0 is None:
        u0 = {"TypeI": -0.25, "TypeII": 0.25}.get(family.kind, 0.0) * (family.rho0 or 0.0) ** 2
    return RadialProfile(family, r, w, u=u, u0=u0)


def _rho0_guess(kind, r, w):
    if kind == "TypeI":
        t = 2.0 * w / np.sqrt(1.0 + w**2) - SQRT3
    else:
        t = SQRT3 - 2.0 * w / np.sqrt(1.0 + w**2)
    ok = t > 1e-12
    if not np.any(ok):
        return None
    C = np.sqrt(t[ok]) / r[ok]
    # C = sqrt(2)/rho0 for type I and C = sqrt(sqrt(3))/a with a^2 = K rho0^2 for type II
    rho = math.sqrt(2.0) / C if kind == "TypeI" else np.sqrt(SQRT3) / (C * math.sqrt(K))
    return float(np.median(rho))


def _max_deviation(family, r, w):
    if r[-1] >= blowup_radius(family):
        return math.inf
    return float(np.max(np.abs(closed_form_w(family, r) - w)))


def golden_section(f, lo, hi, xtol=1e-14, maxiter=200):
    """Minimize a unimodal scalar function on [lo, hi]."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _fit_sphere(kind, r, w):
    """Best rho0 and max deviation for one sphere family (or its reflection w -> -w)."""
    best = (None, math.inf, False)
    for reflected in (False, True):
        ww = -w if reflected else w
        guess = _rho0_guess(kind, r, ww)
        if guess is None:
            continue
        factor = math.sqrt((2.0 - SQRT3) / 2.0) if kind == "TypeI" else math.sqrt((2.0 + SQRT3) / 2.0)
        lo = max(0.5 * guess, r[-1] / factor * (1.0 + 1e-12))
        hi = max(2.0 * guess, 2.0 * lo)
        rho, dev = golden_section(lambda p: _max_deviation(Family(kind, p), r, ww), lo, hi)
        if dev < best[1]:
            best = (rho, dev, reflected)
    return best


def classify(profile, tol=1e-6):
    """Match (r, w) samples to a closed-form family.

    Returns a :class:`Family` (``Unknown`` if nothing fits within ``tol``);
    the fitted sphere radius is refined by golden-section search on the max
    deviation. Sphere fits also try the reflected profile -w, which is the
    other hemisphere of the same sphere. Raises :class:`AmbiguousFit` when
    several families pass.
    """
    r = np.asarray(profile.r, dtype=float)
    w = np.asarray(profile.w, dtype=float)
    if len(r) < 10:
        raise ValueError("classification needs at least 10 samples")
    passing = []
    for fam in (PARABOLA_PLUS, PARABOLA_MINUS):
        dev = float(np.max(np.abs(closed_form_w(fam, r) - w)))
        if dev < tol:
            passing.append((fam, dev))
    for kind in ("TypeI", "TypeII"):
        rho, dev, _ = _fit_sphere(kind, r, w)
        if rho is not None and dev < tol:
            passing.append((Family(kind, rho), dev))
    if len(passing) > 1:
        raise AmbiguousFit(
            "profile matches " + ", ".join(f"{f} (dev {d:.2e})" for f, d in passing),
            candidates=passing,
        )
    return passing[0][0] if passing else Family("Unknown")


def gluing_second_derivatives(rho0):
    """r_uu at u = 0 for the type I sphere and for the type II sphere rescaled to the same radius.

    Returns ``(ruu_typeI, ruu_typeII_at_same_radius, ratio)``; the two
    hemispheres meet with a common vertical tangent but different curvature.
    """
    if not rho0 > 0:
        raise ValueError("rho0 must be positive")
    r0 = math.sqrt((2.0 - SQRT3) / 2.0) * rho0
    ruu1 = -2.0 * math.sqrt(2.0) / (math.sqrt(2.0 - SQRT3) * rho0**3)
    ruu2 = -(2.0 + SQRT3) / r0**3
    return ruu1, ruu2, ruu2 / ruu1


def dilation_limit_check(r_fixed, kind, rho0_sequence):
    """|w(r_fixed) - sqrt(3)| along a sequence of sphere radii."""
    devs = []
    for rho0 in rho0_sequence:
        fam = Family(kind, rho0)
        if r_fixed >= blowup_radius(fam):
            raise DomainExceeded(f"r = {r_fixed} outside the domain of {fam}")
        devs.append(float(abs(closed_form_w(fam, r_fixed) - SQRT3)))
    return devs


def figure_profiles(rho0_values=(0.5, 1.0, 2.0), n=400):
    """Plot-ready profiles: w curves, graph hemispheres, and full closed curves.

    Returns ``{"fig1_w": [...], "fig2_graphs": [...], "fig3_closed": [...]}``,
    each a list of :class:`RadialProfile`.
    """
    out = {"fig1_w": [], "fig2_graphs": [], "fig3_closed": []}
    for rho0 in rho0_values:
        for fam in (type1(rho0), type2(rho0)):
            rb = blowup_radius(fam)
            r = rb * (np.arange(1, n + 1) / (n + 1))
            prof = profile_from_closed_form(fam, r)
            out["fig1_w"].append(prof)
            out["fig2_graphs"].append(prof)
            # the mirror hemisphere (u -> -u, w -> -w) closes the sphere
            mirror = RadialProfile(Family(fam.kind, rho0), r, -prof.w, u=-prof.u, u0=-prof.u0, info={"hemisphere": "mirror"})
            out["fig3_closed"].extend([prof, mirror])
    r = np.linspace(0.0, 2.0, n + 1)[1:]
    out["fig1_w"].append(RadialProfile(PARABOLA_PLUS, r, np.full_like(r, SQRT3), u=K * r**2, u0=0.0))
    return out
