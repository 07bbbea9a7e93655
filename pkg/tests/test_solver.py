import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracks.fractional import interaction, semigroup_apply, symbol_table
from fracks.grid import Grid, integrate, lp_norm
from fracks.initial import gaussian
from fracks.solver import (MomentSeries, SimParams, evolve_fixed, initial_state, picard_exponent,
                           picard_iterate, picard_window, positivity_monitor, run, step, step_size)


def params(**kw):
    base = dict(d=2, alpha=2.0, beta=2.0, gamma=1.5, n=32, half_width=6.0, dt=1e-2, T=0.2)
    base.update(kw)
    return SimParams(**base)


@pytest.mark.parametrize("kw", [dict(alpha=1.0), dict(alpha=2.2), dict(beta=2.5), dict(beta=1.0),
                                dict(alpha=1.5, gamma=1.6), dict(gamma=2.1), dict(dt=0.0),
                                dict(cfl_safety=1.5), dict(blowup_linf_factor=1.0), dict(scheme="rk4"),
                                dict(record_every=0), dict(n=30)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        params(**kw)


def test_pure_diffusion_is_exact():
    p = params(interaction=False, alpha=1.5, gamma=1.2, T=0.5, dt=0.05)
    u0 = gaussian(p.grid, 1.0, 0.6)
    res = run(p, u0, evaluate_criteria=False)
    ref = semigroup_apply(u0, 1.5, 0.5)
    assert res.state.status == "completed"
    assert np.max(np.abs(res.state.u.values - ref.values)) < 1e-13


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([1.5, 2.0]))
def test_mass_is_conserved(seed, alpha):
    p = params(alpha=alpha, gamma=1.2, n=16, half_width=4.0)
    rng = np.random.default_rng(seed)
    u0 = p.grid.field(rng.random(p.grid.shape))
    u = evolve_fixed(p, u0, 5, 1e-3)
    assert integrate(u) == pytest.approx(integrate(u0), rel=1e-12)


def _error_at(scheme, dt, ref):
    p = params(scheme=scheme, adaptive=False, T=0.1, dt=dt)
    u0 = gaussian(p.grid, 12.0, 0.8)
    u = evolve_fixed(p, u0, int(round(0.1 / dt)), dt)
    return lp_norm(u - ref, 2)


@pytest.mark.parametrize("scheme,order", [("etd1", 1), ("etd2", 2)])
def test_convergence_order(scheme, order):
    p = params(adaptive=False, T=0.1)
    ref = evolve_fixed(p, gaussian(p.grid, 12.0, 0.8), 800, 0.1 / 800)
    errs = [_error_at(scheme, dt, ref) for dt in (0.02, 0.01, 0.005)]
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert rates[-1] == pytest.approx(order, abs=0.15)


def test_translation_equivariance():
    p = params()
    u0 = gaussian(p.grid, 8.0, 0.7)
    shifted = p.grid.field(np.roll(u0.values, (3, -5), axis=(0, 1)))
    a = evolve_fixed(p, u0, 4, 0.01)
    b = evolve_fixed(p, shifted, 4, 0.01)
    assert np.max(np.abs(np.roll(a.values, (3, -5), axis=(0, 1)) - b.values)) < 1e-12


def test_step_size_rule():
    p = params(dt_max=1.0, cfl_safety=0.4)
    u0 = gaussian(p.grid, 20.0, 0.5)
    st0 = initial_state(p, u0)
    size = step_size(st0, p)
    bsup = max(np.max(np.abs(c.values)) for c in interaction(u0, 2.0))
    tab = symbol_table(p.grid)
    div = np.max(np.abs(u0.values))  # beta = 2: div B = -u
    assert size.b_sup == pytest.approx(bsup, rel=1e-12)
    assert size.div_sup == pytest.approx(div, rel=1e-12)
    assert size.dt == pytest.approx(min(0.4 * p.grid.h / bsup, 0.4 / div), rel=1e-12)
    assert not size.at_floor
    assert tab.modulus.shape == p.grid.spectral_shape


def test_blowup_needs_growth_and_floor():
    base = params(n=64, half_width=4.0, T=1.0, dt=1e-3, dt_max=1e-2)
    u0 = gaussian(base.grid, 40.0, 0.4)
    # floor high enough that every step counts as floored: the growth factor alone decides
    fired = run(base.with_(blowup_dt_floor=0.02, T=0.2, blowup_linf_factor=1.05), u0, evaluate_criteria=False)
    assert fired.state.status == "blowup_detected"
    assert "floor" in fired.state.message
    # growth without the floor is not enough
    quiet = run(base.with_(blowup_dt_floor=1e-300, blowup_linf_factor=1.05, T=0.01), u0, evaluate_criteria=False)
    assert quiet.state.status == "completed"


def test_recording_observer_and_budget():
    p = params(record_every=3, adaptive=False, dt=0.01, T=0.1)
    u0 = gaussian(p.grid, 1.0, 0.8)
    seen = []
    res = run(p, u0, observer=lambda s: seen.append(s.steps), evaluate_criteria=False)
    assert seen == [3, 6, 9, 10]
    assert len(res.series) == 5
    assert res.series.columns()[:3] == ["t", "dt", "M"]
    out = run(p.with_(max_steps=4), u0, evaluate_criteria=False)
    assert out.state.status == "diverged"


def test_grid_mismatch_rejected():
    p = params()
    with pytest.raises(ValueError):
        initial_state(p, gaussian(Grid(2, 16, 6.0), 1.0, 1.0))


def test_step_refuses_finished_state():
    p = params()
    st0 = initial_state(p, gaussian(p.grid, 1.0, 1.0))
    from dataclasses import replace

    with pytest.raises(ValueError):
        step(replace(st0, status="completed"), p, 0.01)


def test_positivity_monitor():
    s = MomentSeries((2.0,))
    s.t += [0.0, 1.0]
    s.min += [0.0, -0.5]
    s.linf += [1.0, 2.0]
    rep = positivity_monitor(s)
    assert rep.flagged and rep.relative_min == -0.25 and rep.time_of_min == 1.0
    with pytest.raises(ValueError):
        positivity_monitor(MomentSeries())


def test_picard_window_and_exponent():
    lo, hi = picard_window(2, 2.0, 2.0)
    assert (lo, hi) == (pytest.approx(4 / 3), 2.0)
    assert picard_exponent(2, 2.0, 2.0, 2.0) == pytest.approx(0.5)
    p = params()
    with pytest.raises(ValueError):
        picard_iterate(p, p.grid.zeros(), 0.1, p=1.2)


def test_picard_small_data_converges_to_stepper():
    p = params(n=32)
    u0 = gaussian(p.grid, 0.5, 0.8)
    res = picard_iterate(p, u0, 0.1, nodes=16)
    assert res.converged and res.contracting
    assert all(r < 1 for r in res.contraction_factors)
    ref = evolve_fixed(p, u0, 64, 0.1 / 64)
    assert lp_norm(res.final - ref, 2) / lp_norm(ref, 2) < 1e-5
