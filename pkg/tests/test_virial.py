import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from fracks.fractional import riesz_constant
from fracks.grid import Grid, integrate
from fracks.initial import gaussian
from fracks.virial import (WeightFunction, convexity_gap, convexity_infimum, frac_laplacian_weight,
                           frac_laplacian_weight_radial, gaussian_fractional_laplacian,
                           gaussian_fractional_laplacian_spectral, holder_exponents, levy_khintchine_constant,
                           moment_rhs, phi_phi_ratio, proof_constants, regularized_moment, self_cell_factor,
                           weight_gradient, weight_hessian, weight_laplacian_field, weight_sup_norm, weight_value)


def hypergeometric_weight(r, alpha, gamma, d):
    # (-Delta)^{alpha/2} (1+|x|^2)^{gamma/2} in closed form
    pre = 2 ** alpha * special.gamma((alpha - gamma) / 2) * special.gamma((d + alpha) / 2) / (
        special.gamma(-gamma / 2) * special.gamma(d / 2))
    return pre * special.hyp2f1((alpha - gamma) / 2, (d + alpha) / 2, d / 2, -np.asarray(r) ** 2)


def lk_closed_form(d, alpha):
    return -alpha * 2 ** (alpha - 1) * math.gamma((d + alpha) / 2) / (math.pi ** (d / 2) * math.gamma(1 - alpha / 2))


# --- weight function --------------------------------------------------------

def test_weight_values():
    assert weight_value([0.0, 0.0], 1.5) == 0.0
    assert weight_value([3.0, 4.0], 2.0) == pytest.approx(25.0)
    assert weight_value([1.0, 0.0], 1.0 + 1e-9) == pytest.approx(math.sqrt(2) - 1, rel=1e-8)
    with pytest.raises(ValueError):
        WeightFunction(2.5)


@given(st.floats(1.05, 2.0), st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_gradient_and_hessian_by_differences(gamma, x):
    x = np.array(x)
    h = 1e-5
    fd = np.array([(weight_value(x + h * e, gamma) - weight_value(x - h * e, gamma)) / (2 * h) for e in np.eye(2)])
    assert np.allclose(weight_gradient(x, gamma), fd, atol=1e-7)
    fh = np.array([(weight_gradient(x + h * e, gamma) - weight_gradient(x - h * e, gamma)) / (2 * h)
                   for e in np.eye(2)])
    assert np.allclose(weight_hessian(x, gamma), fh, atol=1e-6)
    lap = WeightFunction(gamma).laplacian_radial(np.linalg.norm(x), 2)
    assert lap == pytest.approx(np.trace(weight_hessian(x, gamma)), rel=1e-12)


@given(st.floats(1.05, 2.0), st.floats(1e-3, 1.0))
def test_sandwich_constant(gamma, eps):
    w = WeightFunction(gamma)
    c = w.sandwich_constant(eps)
    r = np.geomspace(1e-4, 1e6, 2001)
    assert np.all(r ** gamma <= eps + c * w.radial(r) * (1 + 1e-12))


# --- singular-integral representation -------------------------------------

@pytest.mark.parametrize("d,alpha", [(1, 1.5), (2, 1.2), (2, 1.8), (3, 1.5)])
def test_lk_constant_closed_form(d, alpha):
    assert levy_khintchine_constant(d, alpha) == pytest.approx(lk_closed_form(d, alpha), rel=1e-9)
    assert levy_khintchine_constant(d, alpha) < 0


@pytest.mark.parametrize("r", [0.0, 0.4, 1.3, 3.0])
def test_gaussian_lk_against_spectral(r):
    assert gaussian_fractional_laplacian(r, 1.5, 2) == pytest.approx(
        gaussian_fractional_laplacian_spectral(r, 1.5, 2), rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("alpha,gamma,d", [(1.5, 1.2, 2), (1.8, 1.5, 2), (1.5, 1.3, 3), (1.3, 1.1, 1)])
def test_weight_against_hypergeometric(alpha, gamma, d):
    r = np.array([0.0, 0.3, 1.0, 2.5, 10.0, 200.0])
    got = frac_laplacian_weight_radial(r, alpha, gamma, d)
    assert np.max(np.abs(got / hypergeometric_weight(r, alpha, gamma, d) - 1)) < 1e-8


def test_weight_pointwise_matches_radial():
    x = np.array([[0.6, -0.8], [3.0, 4.0]])
    got = frac_laplacian_weight(x, 1.5, 1.2)
    assert np.allclose(got, frac_laplacian_weight_radial([1.0, 5.0], 1.5, 1.2, 2), rtol=1e-14)


def test_weight_sup_norm_at_origin():
    for alpha, gamma in ((1.5, 1.2), (1.8, 1.5)):
        sup = weight_sup_norm(alpha, gamma, 2)
        assert sup.location == pytest.approx(0.0, abs=1e-6)
        assert sup.value == pytest.approx(abs(hypergeometric_weight(0.0, alpha, gamma, 2)), rel=1e-8)
    # alpha = 2: |Delta phi| peaks at the origin with value d*gamma
    assert weight_sup_norm(2.0, 1.5, 2).value == pytest.approx(3.0)


def test_wedge_is_enforced():
    with pytest.raises(ValueError):
        frac_laplacian_weight_radial([1.0], 1.5, 1.6, 2)
    with pytest.raises(ValueError):
        frac_laplacian_weight_radial([1.0], 2.0, 1.5, 2)


def test_weight_field_classical_case():
    g = Grid(2, 16, 4.0)
    f = weight_laplacian_field(g, 2.0, 1.5)
    assert np.allclose(f, -WeightFunction(1.5).laplacian_radial(g.distance(), 2))


def test_weight_field_spline():
    g = Grid(2, 16, 4.0)
    f = weight_laplacian_field(g, 1.5, 1.2)
    assert np.allclose(f, hypergeometric_weight(g.distance(), 1.5, 1.2, 2), rtol=1e-5)


# --- convexity and Hoelder exponents --------------------------------------

@given(st.lists(st.floats(-50, 50), min_size=4, max_size=4))
def test_quadratic_convexity_ratio(v):
    x, y = np.array(v[:2]), np.array(v[2:])
    lhs, rhs = convexity_gap(x, y, 2.0)
    if rhs > 1e-12:
        assert lhs / rhs == pytest.approx(6.0, rel=1e-10)


@pytest.mark.parametrize("gamma", [1.2, 1.8])
def test_convexity_infimum_positive_and_seeded(gamma):
    a = convexity_infimum(gamma, 2, pairs=20000, seed=3)
    assert a > 0
    assert a == convexity_infimum(gamma, 2, pairs=20000, seed=3)


def test_holder_exponents():
    e = holder_exponents(2, 1.5, 1.3)
    assert max(abs(v) for v in e.residuals(2, 1.5, 1.3)) < 1e-12
    assert e.p == pytest.approx(2.5 / 1.3)
    with pytest.raises(ValueError):
        holder_exponents(2, 2.0, 2.0)


def test_phi_phi_ratio_bounded():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((5000, 2)) * 100
    y = rng.standard_normal((5000, 2)) * 100
    assert np.all(np.isfinite(phi_phi_ratio(x, y, 2, 1.5, 1.3)))


def test_proof_constants_structure():
    pc = proof_constants(2, 1.5, 2.0, 1.3, samples=20000)
    assert pc.C1 > 0 and pc.K > 0 and pc.C2 > 0
    m = pc.mass_threshold
    assert pc.C4(0.5 * m) == 0.0
    assert pc.C4(2 * m) > 0
    c, m0 = pc.best_concentration_constant()
    assert c > 0 and m0 > m
    assert c >= pc.concentration_constant(3 * m)


# --- moment identity ------------------------------------------------------

def test_self_cell_factor():
    assert self_cell_factor(2, 2.0) == 1.0
    rng = np.random.default_rng(1)
    u, v = rng.random((2, 400000, 2))
    mc = np.mean(np.linalg.norm(u - v, axis=1) ** (1.5 - 2))
    assert self_cell_factor(2, 1.5) == pytest.approx(mc, rel=5e-3)


@pytest.mark.parametrize("d,n", [(2, 32), (3, 16)])
def test_quadratic_moment_identity(d, n):
    g = Grid(d, n, 6.0)
    u = gaussian(g, 2.0, 0.9, center=(0.4,) + (0.0,) * (d - 1))
    M = integrate(u)
    s = riesz_constant(d, float(d))
    exact = 2 * d * M - s * M * M
    for method in ("direct", "fft"):
        assert moment_rhs(u, 2.0, float(d), 2.0, method=method) == pytest.approx(exact, rel=1e-12)


def test_direct_and_fft_agree_fractional():
    g = Grid(2, 32, 6.0)
    u = gaussian(g, 3.0, 0.8) + gaussian(g, 1.0, 0.5, center=(1.0, 1.0))
    a = moment_rhs(u, 1.5, 1.7, 1.3, method="direct")
    b = moment_rhs(u, 1.5, 1.7, 1.3, method="fft")
    assert a == pytest.approx(b, rel=1e-10)


def test_moment_rhs_edge_cases():
    g = Grid(2, 16, 4.0)
    assert moment_rhs(g.zeros(), 2.0, 2.0, 1.5) == 0.0
    with pytest.raises(ValueError):
        moment_rhs(gaussian(g, 1.0, 0.5), 2.0, 2.0, 1.5, method="bogus")
    big = Grid(2, 256, 4.0)
    with pytest.raises(ValueError):
        moment_rhs(gaussian(big, 1.0, 0.5), 2.0, 2.0, 1.5, method="direct")


def test_regularized_moment_translation():
    g = Grid(2, 64, 8.0)
    a = gaussian(g, 1.0, 0.7)
    b = gaussian(g, 1.0, 0.7, center=(1.0, -2.0))
    assert regularized_moment(a, 1.5) == pytest.approx(regularized_moment(b, 1.5, (1.0, -2.0)), rel=1e-12)
