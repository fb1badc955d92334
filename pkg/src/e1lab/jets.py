"""Pointwise pseudohermitian invariants of graphs t = u(x, y) in the Heisenberg group.

Everything here is computed from the second-order jet of ``u`` at a point.
Functions accept scalars or equally shaped numpy arrays in every jet field.

Sign convention: the defining function is ``psi = t - u`` so the deviation
function is ``alpha = -1/D`` (always negative) and ``e1`` projects to
``-N_perp`` in the xy-plane.
"""

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureUnstable, SingularPoint

#: alpha = ALPHA_SIGN / D
ALPHA_SIGN = -1.0

#: jets with D below this are rejected rather than regularized
D_MIN = 1e-12

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SurfaceJet:
    """Second-order jet of ``u`` at ``(x, y)``."""

    x: float
    y: float
    u: float
    ux: float
    uy: float
    uxx: float
    uxy: float
    uyy: float

    @property
    def D(self):
        return np.hypot(self.ux - self.y, self.uy + self.x)


@dataclass(frozen=True)
class Invariants:
    D: float
    alpha: float
    theta: float
    H: float
    e1_planar: tuple
    Ncomp: tuple
    Nperp: tuple


def _checked_frame(j, d_min):
    p = np.asarray(j.ux - j.y, dtype=float)
    q = np.asarray(j.uy + j.x, dtype=float)
    D = np.hypot(p, q)
    if np.any(~(D >= d_min)):
        raise SingularPoint(f"D = {np.min(D):.3e} below threshold {d_min:.1e}")
    return D, p / D, q / D


def invariants_from_jet(j, d_min=D_MIN):
    """Return D, alpha, theta in [0, 2pi), the p-mean curvature H and the planar frames."""
    D, cos_t, sin_t = _checked_frame(j, d_min)
    theta = np.mod(np.arctan2(sin_t, cos_t), TWO_PI)
    # H D^3 = q^2 uxx - 2 p q uxy + p^2 uyy with p = D cos, q = D sin
    H = (sin_t**2 * j.uxx - 2.0 * sin_t * cos_t * j.uxy + cos_t**2 * j.uyy) / D
    return Invariants(
        D=D,
        alpha=ALPHA_SIGN / D,
        theta=theta,
        H=H,
        e1_planar=(-sin_t, cos_t),
        Ncomp=(cos_t, sin_t),
        Nperp=(sin_t, -cos_t),
    )


def _gradient_of_D(j, cos_t, sin_t):
    Dx = cos_t * j.uxx + sin_t * (j.uxy + 1.0)
    Dy = cos_t * (j.uxy - 1.0) + sin_t * j.uyy
    return Dx, Dy


def e1_residual_terms(j, d_min=D_MIN):
    """Both evaluations of F: the graph form and the (theta, D, H) form.

    Returns ``(F_graph, F_frame, scale)`` where ``scale`` bounds the size of
    the individual terms, for relative comparisons.
    """
    D, cos_t, sin_t = _checked_frame(j, d_min)
    Dx, Dy = _gradient_of_D(j, cos_t, sin_t)
    lap = j.uxx + j.uyy
    transport = sin_t * Dx - cos_t * Dy
    F_graph = transport - (lap - cos_t * Dx - sin_t * Dy) ** 2 / 6.0 - 0.5
    # A = D H, the quadratic form in the second derivatives
    A = sin_t**2 * j.uxx - 2.0 * sin_t * cos_t * j.uxy + cos_t**2 * j.uyy
    F_frame = transport - A**2 / 6.0 - 0.5
    scale = 1.0 + np.abs(transport) + A**2 / 6.0
    return F_graph, F_frame, scale


def e1_residual(j, d_min=D_MIN):
    """F(x, y, u, Du, D^2u); zero exactly on absolute E1-minimizers."""
    F_graph, F_frame, scale = e1_residual_terms(j, d_min)
    assert np.all(np.abs(F_graph - F_frame) <= 1e-12 * scale), "graph and frame forms of F disagree"
    return F_graph


def hcr_density(j, d_min=D_MIN):
    """e1(alpha) + alpha^2/2 + H^2/6 at the jet (W = 0, no torsion in H1).

    Related to the graph residual by F = -D^2 * hcr.
    """
    D, _, _ = _checked_frame(j, d_min)
    return -e1_residual(j, d_min) / D**2


def theta_wedge_e1(j, d_min=D_MIN):
    """Pullback of Theta ^ e^1 to the graph chart, as a multiple of dx ^ dy.

    The coordinate tangents X_x = d_x + u_x d_t and X_y = d_y + u_y d_t are
    paired with the coframe: Theta(X) is read off the contact form and e^1(X)
    is the Levi-metric component of the horizontal part of X along e1.
    """
    _, cos_t, sin_t = _checked_frame(j, d_min)
    theta_x = j.ux - j.y
    theta_y = j.uy + j.x
    e1_x = -sin_t  # <e1, d_x + y d_t>
    e1_y = cos_t  # <e1, d_y - x d_t>
    return theta_x * e1_y - theta_y * e1_x


def hyperbolicity_witness(j, d_min=D_MIN):
    """Principal symbol of F: (F_uxx, F_uxy, F_uyy, F_uxx F_uyy - F_uxy^2 / 4)."""
    D, cos_t, sin_t = _checked_frame(j, d_min)
    A = sin_t**2 * j.uxx - 2.0 * sin_t * cos_t * j.uxy + cos_t**2 * j.uyy
    F_uxx = sin_t * cos_t - A * sin_t**2 / 3.0
    F_uyy = -cos_t * sin_t - A * cos_t**2 / 3.0
    F_uxy = sin_t**2 - cos_t**2 + 2.0 * A * sin_t * cos_t / 3.0
    return F_uxx, F_uxy, F_uyy, F_uxx * F_uyy - 0.25 * F_uxy**2


def dilate_jet(j, lam):
    """Jet of u_lam(X, Y) = lam^2 u(X/lam, Y/lam) at (lam x, lam y)."""
    if not lam > 0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    return SurfaceJet(
        x=lam * j.x,
        y=lam * j.y,
        u=lam**2 * j.u,
        ux=lam * j.ux,
        uy=lam * j.uy,
        uxx=j.uxx,
        uxy=j.uxy,
        uyy=j.uyy,
    )


def integrate_E1_patch(surface, rect, grid, overflow=1e200, d_min=D_MIN):
    """Midpoint-rule E1 energy of the graph patch over ``rect = ((x0, x1), (y0, y1))``.

    ``surface(x, y)`` must return a vectorized :class:`SurfaceJet`. The density
    is |hcr|^(3/2) times the pulled-back Theta ^ e^1.
    """
    (x0, x1), (y0, y1) = rect
    n1, n2 = grid
    hx = (x1 - x0) / n1
    hy = (y1 - y0) / n2
    xs = x0 + hx * (np.arange(n1) + 0.5)
    ys = y0 + hy * (np.arange(n2) + 0.5)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    j = surface(X, Y)
    density = np.abs(hcr_density(j, d_min)) ** 1.5 * np.abs(theta_wedge_e1(j, d_min))
    if not np.all(np.isfinite(density)) or np.max(density) > overflow:
        raise QuadratureUnstable("E1 density exceeded the overflow guard")
    return float(np.sum(density) * hx * hy)
