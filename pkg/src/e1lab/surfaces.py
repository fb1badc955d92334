"""Jet samplers for the graphs used throughout: paraboloids, shifted spheres, custom expressions.

A sampler is a callable ``(x, y) -> SurfaceJet`` that broadcasts over arrays.
"""

import math

import numpy as np

from . import rotsym
from .jets import SurfaceJet, dilate_jet


def radial_jet(x, y, u, ur, urr):
    """Cartesian second-order jet of a rotationally symmetric graph from its radial derivatives."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    cx, cy = x / r, y / r
    return SurfaceJet(
        x=x,
        y=y,
        u=u,
        ux=ur * cx,
        uy=ur * cy,
        uxx=urr * cx**2 + ur * cy**2 / r,
        uxy=(urr - ur / r) * cx * cy,
        uyy=urr * cy**2 + ur * cx**2 / r,
    )


def family_sampler(family):
    """Sampler for the graph of a closed-form family (lower type I / upper type II hemisphere)."""

    def sample(x, y):
        r = np.hypot(x, y)
        u, ur, urr = rotsym.closed_form_derivatives(family, r)
        return radial_jet(x, y, u, ur, urr)

    return sample


def polynomial_sampler(a=0.0, bx=0.0, by=0.0, cxx=0.0, cxy=0.0, cyy=0.0):
    """Sampler for u = a + bx x + by y + cxx x^2 / 2 + cxy x y + cyy y^2 / 2."""

    def sample(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        one = np.ones(np.broadcast(x, y).shape)
        return SurfaceJet(
            x=x * one,
            y=y * one,
            u=a + bx * x + by * y + 0.5 * cxx * x**2 + cxy * x * y + 0.5 * cyy * y**2,
            ux=bx + cxx * x + cxy * y,
            uy=by + cxy * x + cyy * y,
            uxx=cxx * one,
            uxy=cxy * one,
            uyy=cyy * one,
        )

    return sample


def expression_sampler(expr):
    """Sampler for u given as a sympy-parsable expression in x and y, e.g. ``"x*y"``."""
    import sympy

    x, y = sympy.symbols("x y", real=True)
    u = sympy.sympify(expr, locals={"x": x, "y": y})
    if not u.free_symbols <= {x, y}:
        raise ValueError(f"expression may only use x and y, got {sorted(map(str, u.free_symbols))}")
    parts = [u, u.diff(x), u.diff(y), u.diff(x, 2), u.diff(x, y), u.diff(y, 2)]
    funcs = [sympy.lambdify((x, y), p, "numpy") for p in parts]

    def sample(xv, yv):
        xv = np.asarray(xv, dtype=float)
        yv = np.asarray(yv, dtype=float)
        shape = np.broadcast(xv, yv).shape
        vals = [np.broadcast_to(np.asarray(f(xv, yv), dtype=float), shape) for f in funcs]
        return SurfaceJet(xv * np.ones(shape), yv * np.ones(shape), *vals)

    return sample


def dilated_sampler(sample, lam):
    """Sampler for u_lam(X, Y) = lam^2 u(X / lam, Y / lam)."""
    if not lam > 0:
        raise ValueError(f"dilation factor must be positive, got {lam}")

    def sample_lam(X, Y):
        return dilate_jet(sample(np.asarray(X) / lam, np.asarray(Y) / lam), lam)

    return sample_lam


_NAMED = {
    "parabola+": rotsym.PARABOLA_PLUS,
    "parabola-": rotsym.PARABOLA_MINUS,
}


def parse_surface(name, rho0=1.0):
    """Sampler and family from a CLI surface name.

    Accepts ``parabola+``, ``parabola-``, ``type1``, ``type2`` (with ``rho0``)
    and ``custom:u=<expression in x, y>``.
    """
    if name in _NAMED:
        fam = _NAMED[name]
        return family_sampler(fam), fam
    if name in ("type1", "type2"):
        fam = rotsym.Family("TypeI" if name == "type1" else "TypeII", rho0)
        return family_sampler(fam), fam
    if name.startswith("custom:"):
        body = name[len("custom:"):]
        if body.startswith("u="):
            body = body[2:]
        return expression_sampler(body), None
    raise ValueError(f"unknown surface {name!r}")


def polar_point(r, phi):
    return r * math.cos(phi), r * math.sin(phi)
