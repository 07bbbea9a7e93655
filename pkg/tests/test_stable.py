import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracks.stable import stable_kernel, stable_kernel_profile, tail_exponent


def poisson_kernel(d, t, r):
    # alpha = 1 closed form
    return math.gamma((d + 1) / 2) / math.pi ** ((d + 1) / 2) * t / (t * t + r * r) ** ((d + 1) / 2)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_cauchy_closed_form(d):
    r = np.array([0.0, 0.05, 0.4, 1.0, 3.0, 11.0])
    for t in (0.5, 2.0):
        got = stable_kernel_profile(1.0, d, t, r)
        assert np.max(np.abs(got / poisson_kernel(d, t, r) - 1)) < 1e-8


@pytest.mark.parametrize("d", [1, 2, 3])
def test_gaussian_closed_form(d):
    t = 0.7
    r = np.linspace(0, 5, 21)
    exact = (4 * math.pi * t) ** (-d / 2) * np.exp(-r ** 2 / (4 * t))
    assert np.max(np.abs(stable_kernel_profile(2.0, d, t, r) - exact)) < 1e-10


@pytest.mark.parametrize("alpha", [0.8, 1.3, 1.7])
def test_self_similarity_between_quadratures(alpha):
    r = np.geomspace(1e-2, 30, 9)
    t = 3.7
    a = stable_kernel_profile(alpha, 2, t, r * t ** (1 / alpha))
    b = t ** (-2 / alpha) * stable_kernel_profile(alpha, 2, 1.0, r)
    assert np.max(np.abs(a / b - 1)) < 1e-9


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_tail_exponent(alpha):
    fit = tail_exponent(alpha, 2)
    assert fit.expected == -(alpha + 2)
    assert fit.relative_error < 0.01
    # the plain slope is pulled down by the next terms of the far-field series
    assert fit.power_law_exponent < fit.expected


def test_tail_exponent_gaussian_rejected():
    with pytest.raises(ValueError):
        tail_exponent(2.0, 2)


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
def test_table_mass_and_scaling(alpha):
    k = stable_kernel(alpha, 2)
    assert k.mass == pytest.approx(1.0, abs=1e-7)
    nodes = k.radii[1:40]
    assert np.allclose(k(nodes), k.values[1:40], rtol=1e-13)
    t = 2.0 ** alpha
    assert np.allclose(k.at_time(t, 2 * nodes), k.values[1:40] / 4, rtol=1e-12)
    assert k.decay_constant >= k.values[0]


@given(st.floats(0.3, 2.0))
def test_profile_positive_and_decreasing(alpha):
    r = np.array([0.0, 0.3, 1.0, 2.5, 6.0])
    p = stable_kernel_profile(alpha, 2, 1.0, r)
    assert np.all(p > 0)
    assert np.all(np.diff(p) < 0)


def test_argument_checks():
    with pytest.raises(ValueError):
        stable_kernel_profile(2.5, 2, 1.0, [1.0])
    with pytest.raises(ValueError):
        stable_kernel_profile(1.5, 4, 1.0, [1.0])
    with pytest.raises(ValueError):
        stable_kernel_profile(1.5, 2, 0.0, [1.0])
    with pytest.raises(ValueError):
        stable_kernel_profile(1.5, 2, 1.0, [-1.0])
