"""Exponential time stepping of the mild formulation.

``u_t = -(-Delta)^{alpha/2} u + N(u)`` with ``N(u) = -div(u B(u))``. In Fourier
variables the linear part is diagonal, ``z = -dt |xi|^alpha``, and the
two-stage exponential Runge-Kutta rule (Cox-Matthews ETD2RK) reads

    a     = e^z u + dt phi1(z) N(u)
    u_new = a + dt phi2(z) (N(a) - N(u))

with ``phi1(z) = (e^z - 1)/z`` and ``phi2(z) = (e^z - 1 - z)/z^2``. The
derivative symbol vanishes at the zero mode, so the discrete mass is
untouched by the nonlinear update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fractional import symbol_table
from .grid import Field, Grid, center_of_mass, integrate, irfft, lp_norm, morrey_norm, rfft, weighted_moment
from .virial import regularized_moment

RUNNING, COMPLETED, BLOWUP, DIVERGED = "running", "completed", "blowup_detected", "diverged"


@dataclass(frozen=True)
class SimParams:
    d: int
    alpha: float
    beta: float
    gamma: float
    n: int
    half_width: float
    dt: float
    T: float
    dt_max: float | None = None
    cfl_safety: float = 0.5
    blowup_linf_factor: float = 1e4
    blowup_dt_floor: float = 1e-7
    dealias: bool = True
    interaction: bool = True
    adaptive: bool = True
    scheme: str = "etd2"
    record_every: int = 1
    lp: tuple[float, ...] = (2.0,)
    morrey_every: int = 0
    morrey_p: float = 2.0
    morrey_stride: int = 4
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not 1 < self.alpha <= 2:
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not 1 < self.beta <= self.d:
            raise ValueError(f"beta must lie in (1, d] = (1, {self.d}], got {self.beta}")
        if self.alpha < 2 and not 1 < self.gamma < self.alpha:
            raise ValueError(
                f"gamma must lie in (1, alpha) = (1, {self.alpha}): the moment of order gamma >= alpha "
                "is infinite for solutions with stable-law tails")
        if self.alpha == 2 and not 1 < self.gamma <= 2:
            raise ValueError(f"gamma must lie in (1, 2], got {self.gamma}")
        if not (self.dt > 0 and self.T > 0):
            raise ValueError("dt and T must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if not self.blowup_linf_factor > 1:
            raise ValueError("blowup_linf_factor must exceed 1")
        if not self.blowup_dt_floor > 0:
            raise ValueError("blowup_dt_floor must be positive")
        if self.scheme not in ("etd1", "etd2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        object.__setattr__(self, "lp", tuple(float(p) for p in self.lp))
        Grid(self.d, self.n, self.half_width)

    @property
    def grid(self) -> Grid:
        return Grid(self.d, self.n, self.half_width)

    @property
    def step_cap(self) -> float:
        return self.dt if self.dt_max is None else self.dt_max

    def with_(self, **kw) -> "SimParams":
        return replace(self, **kw)


@dataclass
class MomentSeries:
    lp_orders: tuple[float, ...] = ()
    t: list[float] = field(default_factory=list)
    dt: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    w_gamma: list[float] = field(default_factory=list)
    w: list[float] = field(default_factory=list)
    linf: list[float] = field(default_factory=list)
    min: list[float] = field(default_factory=list)
    lp: list[tuple[float, ...]] = field(default_factory=list)
    morrey: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    def columns(self) -> list[str]:
        return (["t", "dt", "M", "w_gamma", "w", "linf", "min"]
                + [f"L{p:g}" for p in self.lp_orders] + ["morrey"])

    def rows(self) -> list[list[float]]:
        out = []
        for i in range(len(self.t)):
            out.append([self.t[i], self.dt[i], self.mass[i], self.w_gamma[i], self.w[i], self.linf[i],
                        self.min[i], *self.lp[i], self.morrey[i]])
        return out

    def array(self, name: str) -> np.ndarray:
        key = {"M": "mass"}.get(name, name)
        if key.startswith("L") and key[1:] and key not in ("linf",):
            j = [f"L{p:g}" for p in self.lp_orders].index(key)
            return np.array([row[j] for row in self.lp])
        return np.asarray(getattr(self, key), dtype=float)


@dataclass(frozen=True)
class SimState:
    t: float
    u: Field
    series: MomentSeries
    status: str = RUNNING
    steps: int = 0
    dt_last: float = 0.0
    at_floor: bool = False
    linf0: float = 0.0
    center: tuple[float, ...] = ()
    message: str = ""


def _phis(z: np.ndarray):
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    em = np.expm1(zs)
    p1 = np.where(small, 1 + z * (1 / 2 + z * (1 / 6 + z * (1 / 24 + z / 120))), em / zs)
    p2 = np.where(small, 1 / 2 + z * (1 / 6 + z * (1 / 24 + z * (1 / 120 + z / 720))), (em - zs) / zs ** 2)
    return p1, p2


def _nonlinear(uh: np.ndarray, params: SimParams, u: np.ndarray | None = None,
               fields: list[np.ndarray] | None = None) -> np.ndarray:
    """Spectrum of ``-div(u B(u))`` with the product masked by the 2/3 rule."""
    grid = params.grid
    st = symbol_table(grid, params.alpha, params.beta)
    if u is None:
        u = irfft(uh, grid.shape)
    if fields is None:
        fields = [irfft(b * uh, grid.shape) for b in st.beta_symbol]
    out = np.zeros_like(uh)
    for D, bj in zip(st.derivative, fields):
        flux = rfft(u * bj)
        if params.dealias:
            flux = flux * st.dealias_mask
        out -= D * flux
    return out


@dataclass(frozen=True, eq=False)
class _Stage:
    # quantities of the current state shared by the step-size rule and the step
    uh: np.ndarray
    nu: np.ndarray | None
    b_sup: float
    div_sup: float


def _stage(state: SimState, params: SimParams) -> _Stage:
    grid = params.grid
    uh = rfft(state.u.values)
    if not params.interaction:
        return _Stage(uh, None, 0.0, 0.0)
    st = symbol_table(grid, params.alpha, params.beta)
    fields = [irfft(b * uh, grid.shape) for b in st.beta_symbol]
    nu = _nonlinear(uh, params, state.u.values, fields)
    bsup = max(float(np.max(np.abs(c))) for c in fields)
    div = irfft(-st.modulus ** (2 - params.beta) * uh, grid.shape)
    return _Stage(uh, nu, bsup, float(np.max(np.abs(div))))


def _record(state: SimState, params: SimParams, dt: float, morrey: bool):
    s, u = state.series, state.u
    c = np.asarray(state.center)
    s.t.append(state.t)
    s.dt.append(dt)
    s.mass.append(integrate(u))
    s.w_gamma.append(weighted_moment(u, params.gamma, c))
    s.w.append(regularized_moment(u, params.gamma, c))
    s.linf.append(lp_norm(u, math.inf))
    s.min.append(float(u.values.min()))
    s.lp.append(tuple(lp_norm(u, p) for p in params.lp))
    s.morrey.append(morrey_norm(u, params.morrey_p, stride=params.morrey_stride) if morrey else math.nan)


def initial_state(params: SimParams, u0: Field, center=None) -> SimState:
    if u0.grid != params.grid:
        raise ValueError("initial field does not live on the configured grid")
    if center is None:
        center = center_of_mass(u0) if np.any(u0.values) else np.zeros(params.d)
    state = SimState(0.0, u0, MomentSeries(params.lp), linf0=lp_norm(u0, math.inf),
                     center=tuple(float(v) for v in center))
    _record(state, params, 0.0, params.morrey_every > 0)
    return state


def step(state: SimState, params: SimParams, dt: float, stage: _Stage | None = None) -> SimState:
    """One exponential-integrator step of length ``dt``."""
    if state.status != RUNNING:
        raise ValueError(f"cannot step a state with status {state.status!r}")
    grid = params.grid
    st = symbol_table(grid, params.alpha, params.beta if params.interaction else None)
    uh = rfft(state.u.values) if stage is None else stage.uh
    if not params.interaction:
        new = np.exp(-dt * st.alpha_symbol) * uh
    else:
        z = -dt * st.alpha_symbol
        e = np.exp(z)
        p1, p2 = _phis(z)
        nu = _nonlinear(uh, params, state.u.values) if stage is None else stage.nu
        new = e * uh + dt * p1 * nu
        if params.scheme == "etd2":
            new = new + dt * p2 * (_nonlinear(new, params) - nu)
    vals = irfft(new, grid.shape)
    t = state.t + dt
    if not np.all(np.isfinite(vals)):
        return replace(state, t=t, status=DIVERGED, steps=state.steps + 1, dt_last=dt,
                       message=f"non-finite values at t={t:.17g}")
    return replace(state, t=t, u=Field(grid, vals), steps=state.steps + 1, dt_last=dt)


@dataclass(frozen=True)
class StepSize:
    dt: float
    at_floor: bool
    b_sup: float
    div_sup: float


def step_size(state: SimState, params: SimParams, stage: _Stage | None = None) -> StepSize:
    """``min(cfl h/|B|_inf, cfl/|div B|_inf, dt_max)``, clamped at the floor.

    ``div B = -(-Delta)^{1-beta/2} u`` is the compression rate of the drift;
    bounding ``dt`` by its inverse keeps the explicit part of the step from
    overshooting a collapsing peak.
    """
    cap = params.step_cap
    if not params.adaptive:
        return StepSize(params.dt, False, math.nan, math.nan)
    if not params.interaction:
        return StepSize(cap, cap <= params.blowup_dt_floor, 0.0, 0.0)
    if stage is None:
        stage = _stage(state, params)
    bsup, dsup = stage.b_sup, stage.div_sup
    dt = cap
    if bsup > 0:
        dt = min(dt, params.cfl_safety * params.grid.h / bsup)
    if dsup > 0:
        dt = min(dt, params.cfl_safety / dsup)
    floor = params.blowup_dt_floor
    if dt <= floor:
        return StepSize(floor, True, bsup, dsup)
    return StepSize(dt, False, bsup, dsup)


def adapt_dt(state: SimState, params: SimParams) -> float:
    return step_size(state, params).dt


@dataclass
class RunResult:
    series: MomentSeries
    report: object
    state: SimState


def run(params: SimParams, u0: Field, constants=None, center=None, evaluate_criteria: bool = True,
        observer=None) -> RunResult:
    """Integrate to ``T`` or until the blow-up surrogate fires.

    ``observer(state)`` is called after every recorded step; it must not
    mutate the state.
    """
    from .criteria import build_report

    state = initial_state(params, u0, center)
    tol = 1e-12 * params.T
    while state.status == RUNNING:
        stage = _stage(state, params)
        size = step_size(state, params, stage)
        linf = lp_norm(state.u, math.inf)
        if size.at_floor and state.linf0 > 0 and linf >= params.blowup_linf_factor * state.linf0:
            state = replace(state, status=BLOWUP, at_floor=True,
                            message=f"L-infinity grew by {linf / state.linf0:.6g} with dt at the floor")
            break
        dt = min(size.dt, params.T - state.t)
        state = step(state, params, dt, stage)
        state = replace(state, at_floor=size.at_floor)
        if state.status != RUNNING:
            break
        done = state.t >= params.T - tol
        if done or state.steps % params.record_every == 0:
            morrey = params.morrey_every > 0 and (done or state.steps % params.morrey_every == 0)
            _record(state, params, dt, morrey)
            if observer is not None:
                observer(state)
        if done:
            state = replace(state, status=COMPLETED)
        elif state.steps >= params.max_steps:
            state = replace(state, status=DIVERGED, message=f"step budget of {params.max_steps} exhausted")
    report = build_report(u0, params, state, constants) if evaluate_criteria else None
    return RunResult(state.series, report, state)


def evolve_fixed(params: SimParams, u0: Field, steps: int, dt: float) -> Field:
    """``steps`` equal steps of length ``dt`` without diagnostics."""
    state = SimState(0.0, u0, MomentSeries(params.lp))
    for _ in range(steps):
        state = step(state, params, dt)
        if state.status != RUNNING:
            raise ArithmeticError(state.message)
    return state.u


# ---------------------------------------------------------------------------
# positivity

@dataclass(frozen=True)
class PositivityReport:
    min_value: float
    relative_min: float
    time_of_min: float
    flagged: bool
    threshold: float


def positivity_monitor(source, threshold: float = 1e-6) -> PositivityReport:
    """Smallest value over a run, relative to the sup norm at that time.

    A flag is raised when ``min u < -threshold * |u|_inf``; the continuous
    problem preserves nonnegativity, so a flagged run points at
    discretization error rather than at the model.
    """
    series = source.series if hasattr(source, "series") else source
    mins = np.asarray(series.min, dtype=float)
    linf = np.asarray(series.linf, dtype=float)
    if mins.size == 0:
        raise ValueError("empty series")
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(linf > 0, mins / linf, 0.0)
    i = int(np.argmin(rel))
    return PositivityReport(float(mins.min()), float(rel[i]), float(series.t[i]),
                            bool(rel[i] < -threshold), threshold)


# ---------------------------------------------------------------------------
# Picard iteration of the mild formulation

def picard_window(d: int, alpha: float, beta: float) -> tuple[float, float]:
    """Open-closed interval of admissible Lebesgue exponents for the data."""
    lo = max(d / (alpha + beta - 2), 2 * d / (d + beta - 1))
    return lo, float(d)


def picard_exponent(d: int, alpha: float, beta: float, p: float) -> float:
    """Power of ``T`` in the bilinear estimate, ``1 - 1/a - (d/a)(1/r - 1/p)``."""
    inv_r = 2 / p - (beta - 1) / d
    return 1 - 1 / alpha - (d / alpha) * (inv_r - 1 / p)


@dataclass
class PicardResult:
    times: np.ndarray
    iterates: list[list[Field]]
    distances: list[float]
    contraction_factors: list[float]
    p: float
    converged: bool
    contracting: bool

    @property
    def final(self) -> Field:
        return self.iterates[-1][-1]


def picard_iterate(params: SimParams, u0: Field, T_local: float, max_iter: int = 30, nodes: int = 32,
                   p: float | None = None, tol: float = 1e-13, keep: str = "last") -> PicardResult:
    """Fixed-point iterates ``u <- S(t)u0 + H(u, u)`` on ``nodes`` time steps.

    The Duhamel integral of each iterate is evaluated by product integration
    of the linear-in-time interpolant of the nonlinearity, exactly in the
    Fourier variables. Distances are sup-in-time ``L^p`` norms of successive
    differences; a ratio at or above one is reported as non-contraction.
    """
    grid = params.grid
    lo, hi = picard_window(params.d, params.alpha, params.beta)
    p = hi if p is None else float(p)
    if not lo < p <= hi:
        raise ValueError(f"data exponent p={p} outside the window ({lo:.6g}, {hi:.6g}]")
    if not T_local > 0 or nodes < 1:
        raise ValueError("T_local must be positive and nodes >= 1")
    st = symbol_table(grid, params.alpha, params.beta)
    delta = T_local / nodes
    z = -delta * st.alpha_symbol
    e = np.exp(z)
    p1, p2 = _phis(z)
    times = delta * np.arange(nodes + 1)
    u0h = rfft(u0.values)
    current = [np.zeros(grid.shape) for _ in times]
    history: list[list[Field]] = []
    distances: list[float] = []
    converged = False
    for _ in range(max_iter):
        forcing = [_nonlinear(rfft(v), params) for v in current]
        vh = u0h
        new = [irfft(vh, grid.shape)]
        for j in range(nodes):
            vh = e * vh + delta * (p1 * forcing[j] + p2 * (forcing[j + 1] - forcing[j]))
            new.append(irfft(vh, grid.shape))
        dist = max(lp_norm(Field(grid, a - b), p) for a, b in zip(new, current))
        distances.append(dist)
        current = new
        if keep == "all" or not history:
            history.append([Field(grid, v) for v in current])
        else:
            history[-1] = [Field(grid, v) for v in current]
        scale = max(lp_norm(Field(grid, v), p) for v in current)
        if dist <= tol * max(scale, 1e-300) or dist == 0.0:
            converged = True
            break
    ratios = [b / a for a, b in zip(distances[:-1], distances[1:]) if a > 0]
    contracting = all(r < 1 for r in ratios)
    return PicardResult(times, history, distances, ratios, p, converged, contracting)
