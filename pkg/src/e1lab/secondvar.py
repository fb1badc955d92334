"""First and second variation of E1 at the tori |z1| = rho1, |z2| = rho2 in the CR 3-sphere.

Fields on a torus are double Fourier series in (phi1, phi2). On the Clifford
torus (rho1 = rho2 = 1/sqrt(2)) the vector fields e1 = -d1 + d2 and
T = d1 + d2 act diagonally, so every functional here reduces to sums over
modes; a dense-grid quadrature serves as the independent check.
"""

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
CLIFFORD_RHO1 = 1.0 / math.sqrt(2.0)
N_MAX_DEFAULT = 64


@dataclass(frozen=True)
class TorusField:
    """f(phi1, phi2) = sum c[m, n] exp(i (m phi1 + n phi2)), |m|, |n| <= n_max.

    ``coeffs[m + n_max, n + n_max]`` holds c[m, n].
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2 != 1:
            raise ValueError("coefficients must be a square array of odd size")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_max(self):
        return (self.coeffs.shape[0] - 1) // 2

    @classmethod
    def zeros(cls, n_max=N_MAX_DEFAULT):
        return cls(np.zeros((2 * n_max + 1, 2 * n_max + 1), dtype=complex))

    @classmethod
    def constant(cls, k, n_max=N_MAX_DEFAULT):
        f = cls.zeros(n_max)
        f.coeffs[n_max, n_max] = k
        return f

    @classmethod
    def from_modes(cls, modes, n_max=N_MAX_DEFAULT):
        """Field from {(m, n): c}; conjugate partners are not added automatically."""
        f = cls.zeros(n_max)
        for (m, n), c in modes.items():
            if max(abs(m), abs(n)) > n_max:
                raise ValueError(f"mode ({m}, {n}) beyond n_max = {n_max}")
            f.coeffs[m + n_max, n + n_max] += c
        return f

    @classmethod
    def mode(cls, l, n_max=N_MAX_DEFAULT):
        """v_l = cos l(phi1 + phi2)."""
        if l == 0:
            return cls.constant(1.0, n_max)
        return cls.from_modes({(l, l): 0.5, (-l, -l): 0.5}, n_max)

    @classmethod
    def cosine(cls, m, n, n_max=N_MAX_DEFAULT):
        """cos(m phi1 + n phi2)."""
        if m == 0 and n == 0:
            return cls.constant(1.0, n_max)
        return cls.from_modes({(m, n): 0.5, (-m, -n): 0.5}, n_max)

    @classmethod
    def random(cls, rng, band=6, n_max=N_MAX_DEFAULT):
        """Real band-limited field with Gaussian coefficients on |m|, |n| <= band."""
        if band > n_max:
            raise ValueError("band exceeds n_max")
        z = np.zeros((2 * n_max + 1, 2 * n_max + 1), dtype=complex)
        k = 2 * band + 1
        block = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        z[n_max - band : n_max + band + 1, n_max - band : n_max + band + 1] = block
        return cls(0.5 * (z + np.conj(z[::-1, ::-1])))

    @classmethod
    def from_samples(cls, values, n_max=N_MAX_DEFAULT):
        """Coefficients from samples on the uniform M x M grid (M > 2 n_max)."""
        values = np.asarray(values, dtype=float)
        M = values.shape[0]
        if values.shape != (M, M) or M <= 2 * n_max:
            raise ValueError("need a square grid with more than 2 n_max points per side")
        F = np.fft.fft2(values) / M**2
        idx = np.arange(-n_max, n_max + 1) % M
        return cls(F[np.ix_(idx, idx)])

    def to_grid(self, M=256):
        """Samples on the uniform M x M grid, phi_k = 2 pi k / M."""
        N = self.n_max
        if M <= 2 * N:
            raise ValueError("grid too coarse for the stored modes")
        F = np.zeros((M, M), dtype=complex)
        idx = np.arange(-N, N + 1) % M
        F[np.ix_(idx, idx)] = self.coeffs
        return np.real(np.fft.ifft2(F) * M**2)

    def reality_defect(self):
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1, ::-1]))))

    def _mn(self):
        k = np.arange(-self.n_max, self.n_max + 1)
        return np.meshgrid(k, k, indexing="ij")

    def __add__(self, other):
        return TorusField(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return TorusField(self.coeffs - other.coeffs)

    def __mul__(self, a):
        return TorusField(self.coeffs * a)

    __rmul__ = __mul__

    def __neg__(self):
        return TorusField(-self.coeffs)


def apply_e1(f):
    """e1 = -d/dphi1 + d/dphi2: mode (m, n) times i (n - m)."""
    m, n = f._mn()
    return TorusField(f.coeffs * 1j * (n - m))


def apply_T(f):
    """T = d/dphi1 + d/dphi2: mode (m, n) times i (m + n)."""
    m, n = f._mn()
    return TorusField(f.coeffs * 1j * (m + n))


def measure_factor(rho1=CLIFFORD_RHO1):
    """(Theta ^ e^1)(d/dphi1, d/dphi2) on the torus with radii (rho1, rho2).

    Writes d/dphi1 and d/dphi2 in the frame (e1, T) and pairs them with the
    dual coframe: Theta(T) = 1, Theta(e1) = 0, e^1(e1) = 1, e^1(T) = 0.
    """
    rho2 = math.sqrt(1.0 - rho1**2)
    # rows: components of e1 and T along (d1, d2)
    frame = np.array([[-rho2 / rho1, rho1 / rho2], [1.0, 1.0]])
    # columns of X: (e1, T)-components of d1 and d2
    X = np.linalg.solve(frame.T, np.eye(2))
    e1_dual, theta_dual = X[0], X[1]
    return float(theta_dual[0] * e1_dual[1] - theta_dual[1] * e1_dual[0])


def integrate(f):
    """int f Theta ^ e^1 over the Clifford torus."""
    N = f.n_max
    return float(np.real(f.coeffs[N, N])) * measure_factor() * TWO_PI**2


def inner(f, g):
    """int f g Theta ^ e^1 for real fields, by Parseval."""
    return float(np.real(np.sum(f.coeffs * np.conj(g.coeffs)))) * measure_factor() * TWO_PI**2


def quadrature_inner(f, g, M=256):
    """Grid oracle for :func:`inner`: trapezoid rule on the periodic M x M grid."""
    return float(np.mean(f.to_grid(M) * g.to_grid(M))) * measure_factor() * TWO_PI**2


SQRT2_4 = math.sqrt(2.0) / 4.0


def second_variation(f, inner=inner):
    """sqrt(2)/4 int [(e1e1 f)^2 + 3 (e1T f)^2 - 7 (e1 f)^2 + 9 f TT f + 12 f^2] Theta ^ e^1."""
    e1f = apply_e1(f)
    e1e1f = apply_e1(e1f)
    e1Tf = apply_T(e1f)
    TTf = apply_T(apply_T(f))
    return SQRT2_4 * (
        inner(e1e1f, e1e1f) + 3.0 * inner(e1Tf, e1Tf) - 7.0 * inner(e1f, e1f) + 9.0 * inner(f, TTf) + 12.0 * inner(f, f)
    )


def second_variation_pre_ibp(f, inner=inner):
    """sqrt(2)/4 int [e1e1e1e1 h + 3 e1Te1T h + 7 e1e1 h + 9 TT h + 12 h] h Theta ^ e^1 with h = f."""
    h = f
    e1e1h = apply_e1(apply_e1(h))
    e1Th = apply_T(apply_e1(h))
    integrand = apply_e1(apply_e1(e1e1h)) + 3.0 * apply_T(apply_e1(e1Th)) + 7.0 * e1e1h + 9.0 * apply_T(apply_T(h)) + 12.0 * h
    return SQRT2_4 * inner(integrand, h)


def mode_symbol(m, n):
    """Per-mode multiplier of the second variation, kappa = n - m, tau = m + n."""
    kappa = n - m
    tau = m + n
    return kappa**4 + 3 * kappa**2 * tau**2 - 7 * kappa**2 - 9 * tau**2 + 12


def ibp_adjointness(f1, f2, inner=inner):
    """(int f1 e1 f2 + int e1 f1 f2, int f1 T f2 + int T f1 f2); both vanish on the torus."""
    return (
        inner(f1, apply_e1(f2)) + inner(apply_e1(f1), f2),
        inner(f1, apply_T(f2)) + inner(apply_T(f1), f2),
    )


@dataclass(frozen=True)
class TorusBackground:
    """The torus |z1| = rho1 with alpha = 0, constant H and W = 2."""

    rho1: float
    W: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.rho1 < 1.0:
            raise ValueError("rho1 must lie in (0, 1)")

    @property
    def rho2(self):
        return math.sqrt(1.0 - self.rho1**2)

    @property
    def alpha(self):
        return 0.0

    @property
    def H(self):
        return self.rho1 / self.rho2 - self.rho2 / self.rho1

    @property
    def Hcr(self):
        # e1(alpha) = 0 and alpha = 0
        return self.H**2 / 6.0 + self.W / 4.0


def hcr_f(bg, e1_H=0.0, V_Hcr=0.0, e1_Hcr=0.0):
    """|Hcr| f = e1(H) Hcr + 3/2 V(Hcr) + 1/2 H e1(Hcr) - alpha H Hcr; derivatives vanish on the tori."""
    return e1_H * bg.Hcr + 1.5 * V_Hcr + 0.5 * bg.H * e1_Hcr - bg.alpha * bg.H * bg.Hcr


def first_variation_density(bg):
    """E1 density of the first variation on a constant background.

    |Hcr|^(-1/2) {3/2 |Hcr| f alpha + Hcr [9/2 V(alpha) + 3 H Hcr - H^3 / 6]}
    once the e1 derivatives of Hcr and |Hcr| f are dropped; with alpha = 0 and
    V(alpha) = 0 this is Hcr^(1/2) H (3 Hcr - H^2 / 6).
    """
    Hcr = bg.Hcr
    V_alpha = 0.0
    inner_terms = 1.5 * hcr_f(bg) * bg.alpha + Hcr * (4.5 * V_alpha + 3.0 * bg.H * Hcr - bg.H**3 / 6.0)
    return abs(Hcr) ** -0.5 * inner_terms


def criticality_sweep(n=99):
    """(rho1, E1 density) on rho1 = sin(k pi / (2 (n + 1))), k = 1..n; odd n puts 1/sqrt(2) in the middle."""
    out = []
    for k in range(1, n + 1):
        rho1 = math.sin(k * math.pi / (2 * (n + 1)))
        out.append((rho1, first_variation_density(TorusBackground(rho1))))
    return out


def ddt_quantities(f):
    """First-order changes along the normal variation f e2 of the Clifford torus (g = 0, h = f)."""
    e1f = apply_e1(f)
    e1e1f = apply_e1(e1f)
    Tf = apply_T(f)
    e1Tf = apply_T(e1f)
    return {
        "dH": e1e1f + 4.0 * f,
        "dAlpha": Tf,
        "dValpha": apply_T(Tf),
        "dHcr": e1Tf,
        "d_e1Hcrf": 0.5 * apply_e1(apply_e1(e1e1f)) + 2.0 * e1e1f + 1.5 * apply_e1(apply_T(e1Tf)),
    }


def second_variation_assembled(f, inner=inner):
    """sqrt(2) int [1/2 d(e1(|Hcr| f)) + 9/4 d(V alpha) + 3/4 dH] f Theta ^ e^1."""
    d = ddt_quantities(f)
    integrand = 0.5 * d["d_e1Hcrf"] + 2.25 * d["dValpha"] + 0.75 * d["dH"]
    return math.sqrt(2.0) * inner(integrand, f)


def mode_spectrum(l_max):
    """[(l, Q(v_l))] for l = 1..l_max."""
    if l_max < 1:
        raise ValueError("l_max must be at least 1")
    n_max = max(l_max, 1)
    return [(l, second_variation(TorusField.mode(l, n_max))) for l in range(1, l_max + 1)]
