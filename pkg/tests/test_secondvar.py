import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from e1lab import secondvar as sv
from e1lab.secondvar import TorusField

N = 8
seeds = st.integers(0, 2**32 - 1)


def rand_field(seed, band=6):
    return TorusField.random(np.random.default_rng(seed), band=band, n_max=N)


@pytest.mark.parametrize("m, n", [(1, 0), (0, 1), (2, 3), (-1, 4), (3, 3)])
def test_e1_and_T_on_cosines(m, n):
    """e1 cos(m p1 + n p2) = -(n - m) sin(...), T cos(...) = -(m + n) sin(...)."""
    M = 32
    p = 2 * np.pi * np.arange(M) / M
    P1, P2 = np.meshgrid(p, p, indexing="ij")
    arg = m * P1 + n * P2
    f = TorusField.cosine(m, n, N)
    assert np.allclose(sv.apply_e1(f).to_grid(M), -(n - m) * np.sin(arg), atol=1e-12)
    assert np.allclose(sv.apply_T(f).to_grid(M), -(m + n) * np.sin(arg), atol=1e-12)


def test_e1_matches_grid_differences():
    f = rand_field(11, band=3)
    M = 256
    g = f.to_grid(M)
    h = 2 * np.pi / M
    d1 = (np.roll(g, -1, 0) - np.roll(g, 1, 0)) / (2 * h)
    d2 = (np.roll(g, -1, 1) - np.roll(g, 1, 1)) / (2 * h)
    assert np.max(np.abs(sv.apply_e1(f).to_grid(M) - (-d1 + d2))) < 1e-2 * np.max(np.abs(g))


def test_measure_factor_clifford():
    assert sv.measure_factor() == 0.5


@given(st.floats(0.05, 0.95))
def test_measure_factor_is_rho1_rho2(rho1):
    assert sv.measure_factor(rho1) == pytest.approx(rho1 * math.sqrt(1 - rho1**2), rel=1e-12)


@pytest.mark.parametrize("l", range(1, 9))
def test_mode_values(l):
    Q = sv.second_variation(TorusField.mode(l, N))
    assert Q == pytest.approx(3 * math.sqrt(2) * (1 - 3 * l * l) * math.pi**2, rel=1e-14)
    assert sv.inner(TorusField.mode(l, N), TorusField.mode(l, N)) == pytest.approx(math.pi**2, rel=1e-15)


def test_first_mode_value():
    assert sv.second_variation(TorusField.mode(1, N)) == pytest.approx(-83.74637039566656, rel=1e-14)


@given(st.integers(-6, 6), st.integers(-6, 6))
def test_mode_symbol_matches_functional(m, n):
    f = TorusField.cosine(m, n, N)
    Q = sv.second_variation(f)
    norm = sv.inner(f, f)
    assert Q == pytest.approx(math.sqrt(2) / 4 * sv.mode_symbol(m, n) * norm, rel=1e-12, abs=1e-10)


@given(seeds)
def test_pre_and_post_integration_by_parts(seed):
    f = rand_field(seed)
    Q = sv.second_variation(f)
    assert sv.second_variation_pre_ibp(f) == pytest.approx(Q, rel=1e-10)
    assert sv.second_variation_assembled(f) == pytest.approx(Q, rel=1e-10)


@given(seeds)
def test_parseval_vs_quadrature(seed):
    f, g = rand_field(seed), rand_field(seed + 1)
    assert sv.quadrature_inner(f, g, M=64) == pytest.approx(sv.inner(f, g), rel=1e-10, abs=1e-10)


def test_second_variation_grid_route():
    f = rand_field(3)
    assert sv.second_variation(f, inner=sv.quadrature_inner) == pytest.approx(sv.second_variation(f), rel=1e-10)


@given(seeds, st.floats(-3, 3))
def test_quadratic_form(seed, a):
    f, g = rand_field(seed), rand_field(seed + 7)
    Qf, Qg = sv.second_variation(f), sv.second_variation(g)
    assert sv.second_variation(a * f) == pytest.approx(a * a * Qf, rel=1e-10, abs=1e-9)
    parallelogram = sv.second_variation(f + g) + sv.second_variation(f - g)
    assert parallelogram == pytest.approx(2 * Qf + 2 * Qg, rel=1e-10)


@given(seeds)
def test_adjointness(seed):
    f, g = rand_field(seed), rand_field(seed + 3)
    scale = math.sqrt(sv.inner(f, f) * sv.inner(g, g)) * (2 * N) ** 2
    for v in sv.ibp_adjointness(f, g):
        assert abs(v) <= 1e-13 * scale


@given(seeds)
def test_random_fields_real(seed):
    assert rand_field(seed).reality_defect() == 0.0


@given(seeds)
def test_grid_round_trip(seed):
    f = rand_field(seed)
    back = TorusField.from_samples(f.to_grid(32), N)
    assert np.allclose(back.coeffs, f.coeffs, atol=1e-12)


def test_integrate_constant():
    assert sv.integrate(TorusField.constant(1.0, N)) == pytest.approx(0.5 * 4 * math.pi**2)


def test_clifford_background():
    bg = sv.TorusBackground(sv.CLIFFORD_RHO1)
    assert bg.H == pytest.approx(0.0, abs=1e-15)
    assert bg.Hcr == pytest.approx(0.5, abs=1e-15)
    assert sv.hcr_f(bg) == 0.0
    assert sv.first_variation_density(bg) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0.01, 0.99))
def test_e1_density_vanishes_only_at_clifford(rho1):
    e = sv.first_variation_density(sv.TorusBackground(rho1))
    H = rho1 / math.sqrt(1 - rho1**2) - math.sqrt(1 - rho1**2) / rho1
    Hcr = H * H / 6 + 0.5
    assert e == pytest.approx(math.sqrt(Hcr) * H * (3 * Hcr - H * H / 6), rel=1e-12, abs=1e-15)
    if abs(rho1 - sv.CLIFFORD_RHO1) > 1e-6:
        assert abs(e) > 0


def test_criticality_sweep():
    sweep = sv.criticality_sweep(99)
    assert len(sweep) == 99
    rho, e = sweep[49]
    assert rho == pytest.approx(sv.CLIFFORD_RHO1, abs=1e-15)
    assert abs(e) < 1e-14
    others = [abs(v) for k, (_, v) in enumerate(sweep) if k != 49]
    assert min(others) > 1e-3
    signs = np.sign([v for _, v in sweep])
    assert np.all(signs[:49] < 0) and np.all(signs[50:] > 0)


def test_background_validation():
    with pytest.raises(ValueError):
        sv.TorusBackground(1.0)
    with pytest.raises(ValueError):
        sv.mode_spectrum(0)


def test_field_validation():
    with pytest.raises(ValueError):
        TorusField(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        TorusField.from_modes({(9, 0): 1.0}, N)
