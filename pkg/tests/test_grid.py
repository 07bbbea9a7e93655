import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracks.grid import (Grid, ball_stencil, center_of_mass, effective_radius, integrate, irfft, lp_norm,
                         morrey_norm, morrey_search, rfft, unit_ball_volume, unit_sphere_area, weighted_moment)


def test_unit_ball_and_sphere():
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert unit_sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert unit_sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)


@pytest.mark.parametrize("kw", [dict(d=4, n=16, half_width=1.0), dict(d=2, n=12, half_width=1.0),
                                dict(d=2, n=16, half_width=0.0)])
def test_grid_rejects_bad_shapes(kw):
    with pytest.raises(ValueError):
        Grid(**kw)


def test_grid_geometry():
    g = Grid(2, 16, 4.0)
    assert g.h == 0.5
    assert g.axis[0] == -4.0 and g.axis[-1] == 3.5
    assert g.points().shape == (256, 2)
    assert g.spectral_shape == (16, 9)
    assert g.scaled(2.0).half_width == 2.0


def test_gaussian_mass_is_spectrally_accurate():
    g = Grid(2, 64, 8.0)
    f = g.sample(lambda x, y: np.exp(-(x * x + y * y) / 2))
    assert integrate(f) == pytest.approx(2 * math.pi, rel=1e-13)


def test_second_moment_and_center():
    g = Grid(2, 128, 10.0)
    f = g.sample(lambda x, y: np.exp(-((x - 1) ** 2 + (y + 0.5) ** 2) / 2) / (2 * math.pi))
    assert center_of_mass(f) == pytest.approx([1.0, -0.5], abs=1e-12)
    assert weighted_moment(f, 2.0, (1.0, -0.5)) == pytest.approx(2.0, rel=1e-12)


def test_lp_norm_closed_forms():
    g = Grid(1, 256, 20.0)
    f = g.sample(lambda x: np.exp(-x * x))
    assert lp_norm(f, 2) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-12)
    assert lp_norm(f, math.inf) == 1.0
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


@given(st.floats(1.0, 8.0), st.floats(1.0, 8.0), st.integers(0, 2 ** 31 - 1))
def test_lp_interpolation(p, q, seed):
    # log-convexity of p -> |f|_p (Riesz-Thorin for a single function)
    g = Grid(2, 16, 2.0)
    f = g.field(np.random.default_rng(seed).random(g.shape))
    lo, hi = sorted((p, q))
    mid = 2 / (1 / lo + 1 / hi)
    bound = math.sqrt(lp_norm(f, lo) * lp_norm(f, hi))
    assert lp_norm(f, mid) <= bound * (1 + 1e-12)


def test_fft_roundtrip():
    g = Grid(3, 16, 1.0)
    v = np.random.default_rng(0).standard_normal(g.shape)
    assert np.allclose(irfft(rfft(v), g.shape), v, atol=1e-14)


def test_ball_stencil_volume_converges():
    g = Grid(2, 256, 8.0)
    st_ = ball_stencil(g, 2.0)
    assert st_.sum() * g.cell_volume == pytest.approx(math.pi * 4, rel=1e-2)
    assert effective_radius(g, st_) == pytest.approx(2.0, rel=5e-3)


def test_morrey_of_constant_disc():
    # u = 1 on the disc of radius 1: sup_R R^{d(1/p-1)} |B_R cap B_1| is attained at R = 1
    g = Grid(2, 128, 4.0)
    f = g.field((g.distance() <= 1.0).astype(float))
    p = 2.0
    m = morrey_search(f, p)
    assert m.value == pytest.approx(math.pi, rel=0.05)
    assert m.value <= unit_ball_volume(2) ** 0.5 * lp_norm(f, p) * (1 + 1e-12)


@given(st.floats(1.1, 6.0), st.integers(0, 2 ** 31 - 1))
def test_morrey_below_lp(p, seed):
    g = Grid(2, 16, 2.0)
    f = g.field(np.random.default_rng(seed).random(g.shape) ** 4)
    assert morrey_norm(f, p) <= unit_ball_volume(2) ** (1 - 1 / p) * lp_norm(f, p) * (1 + 1e-12)


def test_zero_field_has_no_center():
    with pytest.raises(ValueError):
        center_of_mass(Grid(2, 8, 1.0).zeros())
