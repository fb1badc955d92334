"""Closed forms for the quasi-linear first-order system A U_r + B U_phi + C U = 0.

The unknown is U = (theta, alpha, H, m) with m = -N_perp(alpha). The
coefficients depend on the point only through r and the pair
s = sin(theta - phi), c = cos(theta - phi); the ``*_sc`` functions take that
pair directly and broadcast over numpy arrays. Stacked matrices have their
4x4 block in the last two axes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NearCharacteristic

#: |s| below this is treated as a characteristic direction
S_MIN = 1e-8
#: sigma, eta below this (relative to 1 + |alpha| + |H|) make A singular
PIVOT_MIN = 1e-12


@dataclass(frozen=True)
class StateVector:
    theta: float
    alpha: float
    H: float
    m: float

    def as_array(self):
        return np.stack(np.broadcast_arrays(self.theta, self.alpha, self.H, self.m), axis=-1)

    @classmethod
    def from_array(cls, U):
        U = np.asarray(U, dtype=float)
        return cls(U[..., 0], U[..., 1], U[..., 2], U[..., 3])

    def e1_relation(self):
        """e1(alpha) + alpha^2/2 + H^2/6 with e1(alpha) = m; zero on minimizers."""
        return self.m + 0.5 * self.alpha**2 + self.H**2 / 6.0


@dataclass(frozen=True)
class SystemMatrices:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    s: float
    c: float
    r: float
    phi: float


def _stack(rows):
    return np.stack([np.stack(np.broadcast_arrays(*row), axis=-1) for row in rows], axis=-2)


def sin_cos(theta, phi):
    return np.sin(theta - phi), np.cos(theta - phi)


def sigma_eta(s, c, alpha, H):
    sigma = s * H / 3.0 + 2.0 * c * alpha
    eta = 2.0 * s * H / 3.0 + 2.0 * c * alpha
    return sigma, eta


def A_sc(s, c, alpha, H):
    z = np.zeros_like(np.asarray(s * alpha, dtype=float))
    return _stack(
        [
            [s * H / 3.0 + c * alpha, s + z, z, z],
            [-c * alpha, s + z, z, z],
            [z, 6.0 * s * alpha, -c * alpha, s + z],
            [2.0 * c * alpha**2, 2.0 * s * alpha, -2.0 * s * H / 3.0 - c * alpha, -s + z],
        ]
    )


def B_sc(r, s, c, alpha, H):
    z = np.zeros_like(np.asarray(s * alpha / r, dtype=float))
    return _stack(
        [
            [(-c * H / 3.0 + s * alpha) / r, -c / r + z, z, z],
            [-s * alpha / r, -c / r + z, z, z],
            [z, -6.0 * c * alpha / r, -s * alpha / r, -c / r + z],
            [2.0 * s * alpha**2 / r, -2.0 * c * alpha / r, (2.0 * c * H / 3.0 - s * alpha) / r, c / r + z],
        ]
    )


def C_of(alpha, H):
    z = np.zeros_like(np.asarray(alpha * H, dtype=float))
    return -_stack(
        [
            [z, -alpha + z, z, z],
            [z, 2.0 * alpha + z, z, z],
            [z, 4.0 * alpha**2 + z, alpha * H, z],
            [z, z, alpha * H, z],
        ]
    )


def assemble(r, phi, U):
    """Coefficient matrices of the system at (r, phi) for the state U."""
    s, c = sin_cos(U.theta, phi)
    return SystemMatrices(
        A=A_sc(s, c, U.alpha, U.H),
        B=B_sc(r, s, c, U.alpha, U.H),
        C=C_of(U.alpha, U.H),
        s=s,
        c=c,
        r=r,
        phi=phi,
    )


def det_A_sc(s, c, alpha, H):
    sigma, eta = sigma_eta(s, c, alpha, H)
    return s**2 * sigma * eta


def det_A(r, phi, U, check=__debug__):
    """Closed-form det A = s^2 sigma eta; cross-checked by LU when ``check``."""
    s, c = sin_cos(U.theta, phi)
    d = det_A_sc(s, c, U.alpha, U.H)
    if check:
        direct = np.linalg.det(A_sc(s, c, U.alpha, U.H))
        atol = 1e-13 * np.linalg.norm(A_sc(s, c, U.alpha, U.H), axis=(-2, -1)) ** 4
        assert np.all(np.abs(d - direct) <= 1e-9 * np.abs(direct) + atol), "det A mismatch"
    return d


def _require_invertible(s, c, alpha, H):
    sigma, eta = sigma_eta(s, c, alpha, H)
    scale = 1.0 + np.abs(alpha) + np.abs(H)
    bad = (np.abs(s) < S_MIN) | (np.abs(sigma) <= PIVOT_MIN * scale) | (np.abs(eta) <= PIVOT_MIN * scale)
    if np.any(bad):
        raise NearCharacteristic("A(r, phi, U) is singular: s, sigma or eta vanishes")
    return sigma, eta


def inverse_A_sc(s, c, alpha, H):
    sigma, eta = _require_invertible(s, c, alpha, H)
    ca = c * alpha
    ss = s * sigma * eta
    z = np.zeros_like(np.asarray(ss, dtype=float))
    return _stack(
        [
            [1.0 / sigma + z, -1.0 / sigma + z, z, z],
            [ca / (s * sigma), (sigma - ca) / (s * sigma), z, z],
            [
                10.0 * ca * alpha / (sigma * eta),
                (8.0 * sigma * alpha - 10.0 * ca * alpha) / (sigma * eta),
                -1.0 / eta + z,
                -1.0 / eta + z,
            ],
            [
                (-6.0 * eta * ca * alpha + 10.0 * ca**2 * alpha) / ss,
                (8.0 * sigma * ca * alpha - 10.0 * ca**2 * alpha - 6.0 * sigma * eta * alpha + 6.0 * eta * ca * alpha) / ss,
                (eta - ca) / (s * eta),
                -ca / (s * eta),
            ],
        ]
    )


def inverse_A(r, phi, U):
    s, c = sin_cos(U.theta, phi)
    return inverse_A_sc(s, c, U.alpha, U.H)


def eigenvalues_sc(r, s, c, alpha, H):
    """(lambda_1, lambda_2, lambda_3, lambda_4) with lambda_4 = lambda_2."""
    sigma, eta = _require_invertible(s, c, alpha, H)
    lam1 = (-c * H / 3.0 + 2.0 * s * alpha) / (r * sigma)
    lam2 = -c / (s * r)
    lam3 = (-2.0 * c * H / 3.0 + 2.0 * s * alpha) / (r * eta)
    return lam1, lam2, lam3, lam2


def a_entries_sc(r, s, c, alpha, H):
    """Nonzero entries of a = A^{-1} B: diagonal lambdas and the couplings to theta and H."""
    sigma, eta = _require_invertible(s, c, alpha, H)
    lam1, lam2, lam3, lam4 = eigenvalues_sc(r, s, c, alpha, H)
    l21 = -alpha * H / 3.0 / (s * r * sigma)
    l31 = -10.0 * H * alpha**2 / 3.0 / (r * sigma * eta)
    l41 = (4.0 * s * alpha**2 * H**2 / 3.0 + 2.0 * c * alpha**3 * H / 3.0) / (s * r * sigma * eta)
    l43 = -2.0 * alpha * H / 3.0 / (s * r * eta)
    return lam1, lam2, lam3, lam4, l21, l31, l41, l43


def a_matrix_sc(r, s, c, alpha, H):
    lam1, lam2, lam3, lam4, l21, l31, l41, l43 = a_entries_sc(r, s, c, alpha, H)
    z = np.zeros_like(np.asarray(lam1, dtype=float))
    return _stack(
        [
            [lam1, z, z, z],
            [l21, lam2, z, z],
            [l31, z, lam3, z],
            [l41, z, l43, lam4],
        ]
    )


def a_matrix(r, phi, U, check=__debug__):
    s, c = sin_cos(U.theta, phi)
    a = a_matrix_sc(r, s, c, U.alpha, U.H)
    if check:
        direct = inverse_A_sc(s, c, U.alpha, U.H) @ B_sc(r, s, c, U.alpha, U.H)
        scale = 1.0 + np.max(np.abs(direct))
        assert np.max(np.abs(a - direct)) <= 1e-8 * scale, "closed-form a disagrees with A^-1 B"
    return a


def source_sc(s, c, alpha, H):
    """b = A^{-1} C U; only alpha, H and the angle enter since C has a zero first column."""
    Ainv = inverse_A_sc(s, c, alpha, H)
    CU = np.stack(
        np.broadcast_arrays(alpha**2, -2.0 * alpha**2, -4.0 * alpha**3 - alpha * H**2, -alpha * H**2),
        axis=-1,
    )
    return np.einsum("...ij,...j->...i", Ainv, CU)


def eigenvector_matrices(alpha, H):
    """Right eigenvectors R = [xi1 xi2 xi3 xi4] and R^{-1}, both unit lower triangular."""
    one = np.ones_like(np.asarray(alpha * H, dtype=float))
    z = 0.0 * one
    R = _stack(
        [
            [one, z, z, z],
            [-H / 6.0 * one, one, z, z],
            [-5.0 * alpha * one, z, one, z],
            [11.0 * alpha * H / 6.0, z, -H / 3.0 * one, one],
        ]
    )
    L = _stack(
        [
            [one, z, z, z],
            [H / 6.0 * one, one, z, z],
            [5.0 * alpha * one, z, one, z],
            [-alpha * H / 6.0, z, H / 3.0 * one, one],
        ]
    )
    return R, L


def eigen_case(alpha, H, tol=1e-14):
    if abs(alpha) <= tol and abs(H) > tol:
        return "alpha_zero"
    if abs(H) <= tol and abs(alpha) > tol:
        return "H_zero"
    if abs(alpha) <= tol and abs(H) <= tol:
        return "alpha_zero"
    return "generic"


def eigen_system_sc(r, s, c, alpha, H):
    """List of (lambda_k, xi_k) for k = 1..4 plus the regime tag.

    The generic eigenvectors also span the eigenspaces in the degenerate
    regimes: with H = 0 they reduce to (1, 0, -5 alpha, 0) and e3 for the
    double eigenvalue lambda_1 = lambda_3; with alpha = 0 the matrix is a
    multiple of the identity and the standard basis is returned.
    """
    case = eigen_case(alpha, H)
    lams = eigenvalues_sc(r, s, c, alpha, H)
    if case == "alpha_zero":
        vecs = list(np.eye(4))
    else:
        R, _ = eigenvector_matrices(alpha, H)
        vecs = [R[:, k] for k in range(4)]
    return [(float(lam), np.array(v, dtype=float)) for lam, v in zip(lams, vecs)], case


def eigen_system(r, phi, U):
    s, c = sin_cos(U.theta, phi)
    return eigen_system_sc(r, s, c, U.alpha, U.H)


def characteristic_determinant(dr, dphi, r, s, c, alpha, H):
    """det(A dphi - B dr) together with a magnitude scale for relative tests."""
    M = A_sc(s, c, alpha, H) * dphi - B_sc(r, s, c, alpha, H) * dr
    return np.linalg.det(M), np.linalg.norm(M) ** 4


def is_characteristic(dr, dphi, r, phi, U, tol=1e-10):
    if dr == 0 and dphi == 0:
        raise ValueError("direction (dr, dphi) must be nonzero")
    s, c = sin_cos(U.theta, phi)
    d, scale = characteristic_determinant(dr, dphi, r, s, c, U.alpha, U.H)
    return bool(abs(d) < tol * scale)
