"""Virial weight ``phi(x) = (1+|x|^2)^{gamma/2} - 1`` and the moment identity.

Contents:

* closed-form value, gradient and Hessian of ``phi``;
* ``(-Delta)^{alpha/2} phi`` through the singular-integral (Levy-Khintchine)
  representation, with the normalizing constant calibrated against the
  Fourier multiplier on a Gaussian;
* the convexity ratio, the moment right-hand side, the Hoelder exponents of
  the concentration argument and the resulting explicit constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, optimize, signal, special

from .grid import Field, center_of_mass, unit_sphere_area

DIRECT_NODE_LIMIT = 2 ** 14


def _as_points(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def _check_gamma(gamma: float):
    if not 1 < gamma <= 2:
        raise ValueError(f"gamma must lie in (1, 2], got {gamma}")


@dataclass(frozen=True)
class WeightFunction:
    gamma: float

    def __post_init__(self):
        _check_gamma(self.gamma)

    def value(self, x) -> np.ndarray:
        x = _as_points(x)
        r2 = np.sum(x * x, axis=-1)
        return np.expm1(0.5 * self.gamma * np.log1p(r2))

    def radial(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.expm1(0.5 * self.gamma * np.log1p(r * r))

    def gradient(self, x) -> np.ndarray:
        x = _as_points(x)
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        return self.gamma * (1 + r2) ** (self.gamma / 2 - 1) * x

    def hessian(self, x) -> np.ndarray:
        x = _as_points(x)
        d = x.shape[-1]
        r2 = np.sum(x * x, axis=-1)[..., None, None]
        g = self.gamma
        outer = x[..., :, None] * x[..., None, :]
        return (g * (1 + r2) * np.eye(d) - g * (2 - g) * outer) * (1 + r2) ** (g / 2 - 2)

    def laplacian_radial(self, r, d: int) -> np.ndarray:
        r2 = np.asarray(r, dtype=float) ** 2
        g = self.gamma
        return g * (1 + r2) ** (g / 2 - 2) * (d * (1 + r2) - (2 - g) * r2)

    def sandwich_constant(self, eps: float) -> float:
        """Smallest ``C`` with ``|x|^gamma <= eps + C phi(x)`` for all ``x``."""
        if not eps > 0:
            raise ValueError("eps must be positive")
        g = self.gamma
        r0 = eps ** (1 / g)

        def neg(lr):
            r = math.exp(lr)
            return -(r ** g - eps) / float(self.radial(r))

        lr = np.linspace(math.log(r0), math.log(r0) + 30, 3001)
        vals = np.array([-neg(v) for v in lr])
        i = int(np.argmax(vals))
        lo, hi = lr[max(i - 1, 0)], lr[min(i + 1, lr.size - 1)]
        best = max(vals.max(), 1.0)
        if hi > lo:
            res = optimize.minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            best = max(best, -res.fun)
        # ratio tends to 1 from below at infinity; a relative pad covers the search
        return best * (1 + 1e-9)


def weight_value(x, gamma: float) -> np.ndarray:
    return WeightFunction(gamma).value(x)


def weight_gradient(x, gamma: float) -> np.ndarray:
    return WeightFunction(gamma).gradient(x)


def weight_hessian(x, gamma: float) -> np.ndarray:
    return WeightFunction(gamma).hessian(x)


# ---------------------------------------------------------------------------
# singular-integral representation, radial integrands

_GL16_X, _GL16_W = np.polynomial.legendre.leggauss(16)
_ANGLE_LEVELS = 16
_TAYLOR_EPS = 1e-4


def _gl_nodes(edges: np.ndarray):
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    x = ((a + b) * 0.5)[:, None] + half[:, None] * _GL16_X[None, :]
    w = half[:, None] * _GL16_W[None, :]
    return x.ravel(), w.ravel()


def _angle_nodes(r: float, s: np.ndarray, d: int):
    """Polar-angle nodes graded geometrically towards theta = pi.

    Near ``theta = pi`` the point ``x + y`` passes closest to the origin,
    where the integrand varies on the angular scale
    ``sqrt((1 + (r-s)^2) / (r s))``.
    """
    with np.errstate(divide="ignore"):
        psi = np.sqrt((1 + (r - s) ** 2) / (r * s))
    psi = np.minimum(np.nan_to_num(psi, nan=np.pi, posinf=np.pi), np.pi)
    j = np.arange(_ANGLE_LEVELS)
    edges = np.pi - psi[:, None] * 2.0 ** j[None, :]
    edges = np.clip(edges, 0.0, np.pi)
    edges = np.concatenate([np.zeros((s.size, 1)), edges[:, ::-1], np.full((s.size, 1), np.pi)], axis=1)
    a, b = edges[:, :-1], edges[:, 1:]
    half = 0.5 * (b - a)
    theta = ((a + b) * 0.5)[..., None] + half[..., None] * _GL16_X
    w = half[..., None] * _GL16_W
    theta = theta.reshape(s.size, -1)
    w = w.reshape(s.size, -1) * np.sin(theta) ** (d - 2)
    return np.cos(theta), w * unit_sphere_area(d - 1)


def _sphere_average(remainder, r: float, s: np.ndarray, d: int) -> np.ndarray:
    """``int_{S^{d-1}} remainder(s, omega . e1) d sigma`` for each ``s``."""
    if d == 1:
        return remainder(s, np.ones_like(s)) + remainder(s, -np.ones_like(s))
    mu, w = _angle_nodes(r, s, d)
    return np.sum(remainder(s[:, None], mu) * w, axis=1)


def _s_edges(r: float, upper: float) -> np.ndarray:
    octaves = math.log2(upper / _TAYLOR_EPS)
    geo = np.geomspace(_TAYLOR_EPS, upper, int(math.ceil(4 * octaves)) + 1)
    near = []
    if r > 0:
        for k in range(-2, 40):
            w = 2.0 ** k
            if w > r and w > upper:
                break
            near += [r - w, r + w]
        near.append(r)
    e = np.concatenate([geo, np.asarray(near)])
    e = e[(e > _TAYLOR_EPS) & (e < upper)]
    return np.unique(np.concatenate([[_TAYLOR_EPS], e, [upper]]))


def _lk_integral(remainder, laplacian: float, tail: float, r: float, alpha: float, d: int, upper: float) -> float:
    """``int_{R^d} remainder / |y|^{d+alpha} dy`` without the normalizing constant."""
    s, w = _gl_nodes(_s_edges(r, upper))
    body = float(np.sum(w * s ** (-1 - alpha) * _sphere_average(remainder, r, s, d)))
    area = unit_sphere_area(d) if d > 1 else 2.0
    inner = area * laplacian / (2 * d) * _TAYLOR_EPS ** (2 - alpha) / (2 - alpha)
    return inner + body + tail


def _excess_exp(z):
    # exp(z) - 1 - z without cancellation
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-2
    zs = np.where(small, z, 0.0)
    series = zs * zs * (0.5 + zs * (1 / 6 + zs * (1 / 24 + zs * (1 / 120 + zs / 720))))
    return np.where(small, series, np.expm1(z) - z)


def _excess_power(e, g: float):
    # (1+e)^g - 1 - g e without cancellation
    e = np.asarray(e, dtype=float)
    small = np.abs(e) < 1e-2
    es = np.where(small, e, 0.0)
    series = np.zeros_like(es)
    term = np.ones_like(es)
    coef = 1.0
    for k in range(1, 9):
        coef *= (g - k + 1) / k
        term = term * es
        if k >= 2:
            series = series + coef * term
    with np.errstate(invalid="ignore"):
        direct = np.expm1(g * np.log1p(np.where(small, 0.0, e))) - g * e
    return np.where(small, series, direct)


def _gaussian_lk_integral(r: float, alpha: float, d: int) -> float:
    # f(z) = exp(-|z|^2/2)
    f0 = math.exp(-r * r / 2)

    def rem(s, mu):
        z = -(2 * r * s * mu + s * s) / 2
        return f0 * (_excess_exp(z) - s * s / 2)

    lap = f0 * (r * r - d)
    upper = r + 40.0
    area = unit_sphere_area(d) if d > 1 else 2.0
    tail = -area * f0 * upper ** (-alpha) / alpha
    return _lk_integral(rem, lap, tail, r, alpha, d, upper)


def gaussian_fractional_laplacian_spectral(r: float, alpha: float, d: int) -> float:
    """``(-Delta)^{alpha/2} exp(-|x|^2/2)`` at ``|x| = r`` by Hankel inversion."""
    if r == 0:
        return 2 ** (alpha / 2) * math.gamma((alpha + d) / 2) / math.gamma(d / 2)
    nu = d / 2 - 1
    f = lambda k: k ** (alpha + d / 2) * math.exp(-k * k / 2) * special.jv(nu, k * r)
    val, _ = integrate.quad(f, 0, 40.0, limit=400, epsabs=1e-14, epsrel=1e-12)
    return r ** (-nu) * val


@dataclass(frozen=True)
class LevyKhintchineCalibration:
    d: int
    alpha: float
    radii: tuple[float, ...]
    ratios: tuple[float, ...]

    @property
    def value(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def spread(self) -> float:
        r = np.asarray(self.ratios)
        return float((r.max() - r.min()) / abs(r.mean()))


@lru_cache(maxsize=None)
def levy_khintchine_calibration(d: int, alpha: float,
                                radii: tuple[float, ...] = (0.0, 0.7, 1.5)) -> LevyKhintchineCalibration:
    """Normalizing constant of the singular integral, matched to ``|xi|^alpha``.

    With the convention ``(-Delta)^{alpha/2} f = C int [f(x+y) - f(x) -
    grad f(x).y] |y|^{-d-alpha} dy`` the constant is negative.
    """
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    ratios = tuple(gaussian_fractional_laplacian_spectral(r, alpha, d) / _gaussian_lk_integral(r, alpha, d)
                   for r in radii)
    return LevyKhintchineCalibration(d, float(alpha), tuple(radii), ratios)


def levy_khintchine_constant(d: int, alpha: float) -> float:
    return levy_khintchine_calibration(d, float(alpha)).value


def gaussian_fractional_laplacian(r: float, alpha: float, d: int) -> float:
    """``(-Delta)^{alpha/2} exp(-|x|^2/2)`` at ``|x| = r`` via the singular integral."""
    return levy_khintchine_constant(d, alpha) * _gaussian_lk_integral(r, alpha, d)


def _sphere_moment(d: int, k: int) -> float:
    # int_{S^{d-1}} mu^{2k} d sigma
    if d == 1:
        return 2.0
    return unit_sphere_area(d) * math.gamma(k + 0.5) * math.gamma(d / 2) / (math.sqrt(math.pi) * math.gamma(k + d / 2))


def _weight_tail(r: float, alpha: float, gamma: float, d: int, upper: float) -> float:
    """``int_{|y|>S} (phi(x+y) - phi(x)) |y|^{-d-alpha} dy`` by binomial expansion."""
    g = gamma / 2
    c = 1 + r * r
    total = 0.0
    for k in range(0, 40):
        bk = special.binom(g, 2 * k) * _sphere_moment(d, k) * (2 * r) ** (2 * k)
        if bk == 0 and k > 0:
            break
        inner = 0.0
        for j in range(0, 60):
            e = 2 * g - 2 * k - 2 * j - alpha
            term = special.binom(g - 2 * k, j) * c ** j * upper ** e / (-e)
            inner += term
            if abs(term) < 1e-18 * abs(inner) + 1e-300:
                break
        contrib = bk * inner
        total += contrib
        if k > 0 and abs(contrib) < 1e-18 * abs(total) + 1e-300:
            break
    area = unit_sphere_area(d) if d > 1 else 2.0
    return total - area * c ** g * upper ** (-alpha) / alpha


def _weight_lk_integral(r: float, alpha: float, gamma: float, d: int) -> float:
    g = gamma / 2
    a = 1 + r * r

    def rem(s, mu):
        e = (2 * r * s * mu + s * s) / a
        return a ** g * (_excess_power(e, g) + g * s * s / a)

    lap = float(WeightFunction(gamma).laplacian_radial(r, d))
    upper = 20 * (1 + r)
    return _lk_integral(rem, lap, _weight_tail(r, alpha, gamma, d, upper), r, alpha, d, upper)


def _check_wedge(alpha: float, gamma: float):
    if not 1 < alpha < 2:
        raise ValueError(f"alpha must lie in (1, 2), got {alpha}")
    if not 1 < gamma < alpha:
        raise ValueError(f"need 1 < gamma < alpha; gamma={gamma} is not below alpha={alpha}")


def frac_laplacian_weight_radial(r, alpha: float, gamma: float, d: int) -> np.ndarray:
    """``(-Delta)^{alpha/2} phi`` at ``|x| = r``."""
    _check_wedge(alpha, gamma)
    c = levy_khintchine_constant(d, alpha)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return np.array([c * _weight_lk_integral(float(v), alpha, gamma, d) for v in r])


def frac_laplacian_weight(x, alpha: float, gamma: float) -> np.ndarray:
    """``(-Delta)^{alpha/2} phi(x)`` for points ``x`` of shape ``(..., d)``."""
    x = _as_points(x)
    r = np.sqrt(np.sum(x * x, axis=-1))
    flat = np.atleast_1d(r).ravel()
    out = frac_laplacian_weight_radial(flat, alpha, gamma, x.shape[-1])
    return out.reshape(np.shape(r)) if np.ndim(r) else out[0]


@lru_cache(maxsize=32)
def _radial_table(alpha: float, gamma: float, d: int, rmax: float):
    r = np.unique(np.concatenate([np.linspace(0, 4, 41), np.geomspace(4, max(rmax, 8.0), 40)]))
    v = frac_laplacian_weight_radial(r, alpha, gamma, d)
    return interpolate.CubicSpline(r, v, bc_type=((1, 0.0), "not-a-knot"))


def weight_laplacian_field(grid, alpha: float, gamma: float, center=None) -> np.ndarray:
    """``(-Delta)^{alpha/2} phi(x - center)`` on the nodes of ``grid``."""
    r = grid.distance(center)
    if alpha == 2:
        return -WeightFunction(gamma).laplacian_radial(r, grid.d)
    spline = _radial_table(float(alpha), float(gamma), grid.d, float(2 * math.sqrt(grid.d) * grid.half_width))
    return spline(r)


@dataclass(frozen=True)
class SupNorm:
    value: float
    location: float


def weight_sup_norm(alpha: float, gamma: float, d: int = 2, density: int = 1) -> SupNorm:
    """Largest ``|(-Delta)^{alpha/2} phi|`` over a radial search grid.

    The grid is uniform on ``[0, 4]`` and logarithmic on ``[4, 1e3]``; the best
    node is then refined by a bounded scalar search.
    """
    if alpha == 2:
        _check_gamma(gamma)
        f = lambda r: float(np.abs(WeightFunction(gamma).laplacian_radial(r, d)))
    else:
        _check_wedge(alpha, gamma)
        c = levy_khintchine_constant(d, alpha)
        f = lambda r: abs(c * _weight_lk_integral(float(r), alpha, gamma, d))
    r = np.unique(np.concatenate([np.linspace(0, 4, 40 * density + 1), np.geomspace(4, 1e3, 30 * density)]))
    v = np.array([f(x) for x in r])
    i = int(np.argmax(v))
    best, where = float(v[i]), float(r[i])
    lo, hi = r[max(i - 1, 0)], r[min(i + 1, r.size - 1)]
    res = optimize.minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
    if -res.fun > best:
        best, where = float(-res.fun), float(res.x)
    return SupNorm(best, where)


# ---------------------------------------------------------------------------
# convexity

def convexity_gap(x, y, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """``((grad phi(x) - grad phi(y)).(x-y), |x-y|^2 / (1 + |x|^{2-g} + |y|^{2-g}))``."""
    w = WeightFunction(gamma)
    x, y = _as_points(x), _as_points(y)
    diff = x - y
    lhs = np.sum((w.gradient(x) - w.gradient(y)) * diff, axis=-1)
    nx = np.sqrt(np.sum(x * x, axis=-1))
    ny = np.sqrt(np.sum(y * y, axis=-1))
    rhs = np.sum(diff * diff, axis=-1) / (1 + nx ** (2 - gamma) + ny ** (2 - gamma))
    return lhs, rhs


def _random_pairs(rng, count: int, d: int):
    # radii log-uniform on [1e-3, 1e3] so that both the core and the far field are probed
    def pts():
        r = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), size=count))
        v = rng.standard_normal((count, d))
        return v / np.linalg.norm(v, axis=1, keepdims=True) * r[:, None]

    x = pts()
    # half of the partners are close to x to probe the Hessian regime
    y = pts()
    near = rng.random(count) < 0.5
    scale = np.exp(rng.uniform(math.log(1e-4), 0.0, size=count))[:, None] * (1 + np.linalg.norm(x, axis=1))[:, None]
    y[near] = x[near] + scale[near] * rng.standard_normal((int(near.sum()), d))
    return x, y


def convexity_infimum(gamma: float, d: int = 2, pairs: int = 10 ** 6, seed: int = 0, chunk: int = 10 ** 5) -> float:
    """Randomized infimum of the convexity ratio lhs / rhs_over_K."""
    rng = np.random.default_rng(seed)
    best = math.inf
    done = 0
    while done < pairs:
        m = min(chunk, pairs - done)
        x, y = _random_pairs(rng, m, d)
        lhs, rhs = convexity_gap(x, y, gamma)
        ok = rhs > 0
        best = min(best, float(np.min(lhs[ok] / rhs[ok])))
        done += m
    return best


# ---------------------------------------------------------------------------
# moment identity

def regularized_moment(u: Field, gamma: float, center=None) -> float:
    """``int phi(x - center) u(x) dx``."""
    w = WeightFunction(gamma)
    r = u.grid.distance(center)
    return float(u.grid.cell_volume * np.sum(w.radial(r) * u.values))


@lru_cache(maxsize=None)
def self_cell_factor(d: int, beta: float) -> float:
    """``E |U - V|^{beta - d}`` for independent uniform points of the unit cube.

    Differences of uniform points have the product tent density, and on the
    sector where the first coordinate is the largest the power of the radius
    factors out; the radial integral is done in closed form and the remaining
    ``d - 1`` coordinates by Gauss-Legendre quadrature.
    """
    if beta == d:
        return 1.0
    q = beta - d
    x, w = np.polynomial.legendre.leggauss(40)
    t = 0.5 * (x + 1)
    wt = 0.5 * w
    grids = np.meshgrid(*([t] * (d - 1)), indexing="ij")
    weights = np.ones_like(grids[0])
    for g, wg in zip(grids, np.meshgrid(*([wt] * (d - 1)), indexing="ij")):
        weights = weights * wg
    rho = np.sqrt(1 + sum(g ** 2 for g in grids)) ** q
    # coefficients in a of (1 - a) prod_j (1 - a t_j), integrated against a^{beta-1}
    polys = np.ones(grids[0].shape + (1,))
    for factor in list(grids) + [np.ones_like(grids[0])]:
        nxt = np.zeros(polys.shape[:-1] + (polys.shape[-1] + 1,))
        nxt[..., :-1] += polys
        nxt[..., 1:] -= polys * factor[..., None]
        polys = nxt
    m = np.arange(polys.shape[-1])
    radial = np.sum(polys / (m + beta), axis=-1)
    total = np.sum(weights * rho * radial)
    return float(2 ** d * d * total)


def _interaction_kernel(grid, beta: float, d: int) -> list[np.ndarray]:
    # G(z) = z |z|^{-(d-beta+2)} on lattice offsets, G(0) = 0
    off = np.arange(-(grid.n - 1), grid.n) * grid.h
    mesh = np.meshgrid(*([off] * d), indexing="ij")
    r2 = sum(m ** 2 for m in mesh)
    with np.errstate(divide="ignore"):
        k = np.where(r2 > 0, r2 ** (-(d - beta + 2) / 2), 0.0)
    return [m * k for m in mesh]


def _pair_sum_direct(u: Field, beta: float, grad: np.ndarray, chunk: int = 512) -> float:
    grid = u.grid
    d = grid.d
    pts = grid.points()
    uv = u.flat()
    keep = uv != 0
    pts, uv, grad = pts[keep], uv[keep], grad[keep]
    total = 0.0
    for i0 in range(0, uv.size, chunk):
        sl = slice(i0, i0 + chunk)
        diff = pts[sl, None, :] - pts[None, :, :]
        r2 = np.sum(diff * diff, axis=-1)
        gd = np.sum((grad[sl, None, :] - grad[None, :, :]) * diff, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(r2 > 0, gd * r2 ** (-(d - beta + 2) / 2), 0.0)
        total += float(np.sum(uv[sl, None] * k * uv[None, :]))
    return total


def _pair_sum_fft(u: Field, beta: float, grad: np.ndarray) -> float:
    grid = u.grid
    kern = _interaction_kernel(grid, beta, grid.d)
    total = 0.0
    for j in range(grid.d):
        conv = signal.fftconvolve(u.values, kern[j], mode="same")
        total += float(np.sum(u.values * grad[..., j].reshape(grid.shape) * conv))
    return 2.0 * total


def moment_rhs(u: Field, alpha: float, beta: float, gamma: float, center=None,
               method: str = "auto", riesz: float | None = None) -> float:
    """Right-hand side of ``d/dt int phi u`` evaluated on the grid.

    ``-int (-Delta)^{alpha/2} phi u - (s/2) iint (grad phi(x) - grad phi(y)).(x-y)
    u(x) u(y) |x-y|^{-(d-beta+2)}``. The off-diagonal double sum is either
    direct (``method="direct"``, at most ``DIRECT_NODE_LIMIT`` nodes) or the
    same sum through a zero-padded linear convolution (``"fft"``). The
    diagonal cells are added back with their exact cell average for the
    locally quadratic part of ``phi``.
    """
    from .fractional import riesz_constant

    grid = u.grid
    d = grid.d
    if center is None:
        center = center_of_mass(u) if np.any(u.values) else np.zeros(d)
    if not np.any(u.values):
        return 0.0
    c = np.asarray(center, dtype=float)
    s = riesz_constant(d, beta) if riesz is None else riesz
    w = WeightFunction(gamma)
    if alpha != 2:
        _check_wedge(alpha, gamma)
    lap = weight_laplacian_field(grid, alpha, gamma, c)
    linear = -grid.cell_volume * float(np.sum(lap * u.values))
    pts = np.stack([np.broadcast_to(x - cj, grid.shape).ravel() for x, cj in zip(grid.coords, c)], axis=-1)
    grad = w.gradient(pts)
    if method == "auto":
        method = "direct" if grid.size <= 4096 else "fft"
    if method == "direct":
        if grid.size > DIRECT_NODE_LIMIT:
            raise ValueError(f"direct double sum refused for {grid.size} > {DIRECT_NODE_LIMIT} nodes")
        pair = _pair_sum_direct(u, beta, grad)
    elif method == "fft":
        pair = _pair_sum_fft(u, beta, grad)
    else:
        raise ValueError(f"unknown method {method!r}")
    r = np.sqrt(np.sum(pts * pts, axis=-1))
    diag_lap = w.laplacian_radial(r, d)
    diag = grid.h ** (beta - d) * self_cell_factor(d, beta) * float(np.sum(u.flat() ** 2 * diag_lap)) / d
    quad = grid.cell_volume ** 2 * (pair + diag)
    return linear - 0.5 * s * quad


# ---------------------------------------------------------------------------
# exponents and constants of the concentration argument

@dataclass(frozen=True)
class HolderExponents:
    nu: float
    delta: float
    p: float
    p_conj: float

    def residuals(self, d: int, beta: float, gamma: float) -> tuple[float, float, float]:
        return (self.nu * self.p - (d - beta), self.delta * self.p - 1.0,
                self.nu * self.p_conj + (2 - gamma) * self.delta * self.p_conj - gamma)


def holder_exponents(d: int, beta: float, gamma: float) -> HolderExponents:
    if not 1 < beta <= d:
        raise ValueError(f"beta must lie in (1, d], got {beta}")
    if not 1 < gamma < 2:
        raise ValueError(f"gamma must lie in (1, 2), got {gamma}")
    p = (d - beta + 2) / gamma
    if not p > 1:
        raise ValueError(f"Hoelder exponent p = {p} is not above 1")
    e = HolderExponents((d - beta) / p, 1 / p, p, p / (p - 1))
    if max(abs(v) for v in e.residuals(d, beta, gamma)) > 1e-12:
        raise ArithmeticError("Hoelder exponent relations not satisfied")
    return e


def phi_phi_ratio(x, y, d: int, beta: float, gamma: float) -> np.ndarray:
    """``|x-y|^{nu p'} (1+|x|^{2-g}+|y|^{2-g})^{delta p'} / (1 + phi(x) + phi(y))``."""
    e = holder_exponents(d, beta, gamma)
    w = WeightFunction(gamma)
    x, y = _as_points(x), _as_points(y)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    dist = np.linalg.norm(x - y, axis=-1)
    num = dist ** (e.nu * e.p_conj) * (1 + nx ** (2 - gamma) + ny ** (2 - gamma)) ** (e.delta * e.p_conj)
    return num / (1 + w.value(x) + w.value(y))


@dataclass(frozen=True)
class ProofConstants:
    d: int
    alpha: float
    beta: float
    gamma: float
    s: float
    C1: float
    C2: float
    K: float
    exponents: HolderExponents

    @property
    def C3(self) -> float:
        e = self.exponents
        return 0.5 * self.s * self.K * self.C1 ** (-e.p / e.p_conj)

    @property
    def mass_threshold(self) -> float:
        """Smallest ``M0`` with ``C2 M0 < C3 M0^2``."""
        return self.C2 / self.C3

    def C4(self, M0: float) -> float:
        """Largest ``w(0)`` keeping the moment bound negative at mass ``M0``."""
        e = self.exponents
        if M0 <= self.mass_threshold:
            return 0.0
        base = (self.C3 * M0 ** (2 * e.p - 1) / self.C2) ** (e.p_conj / e.p)
        return (base - M0 * M0) / (2 * M0)

    def concentration_constant(self, M0: float) -> float:
        """``c`` in ``w/M <= c M^{gamma/(d+2-alpha-beta)}`` implied by ``M0``."""
        a = self.d + 2 - self.alpha - self.beta
        return self.C4(M0) * M0 ** (-1 - self.gamma / a)

    def best_concentration_constant(self) -> tuple[float, float]:
        """Maximize over ``M0``; returns ``(c, M0)``."""
        lo = math.log(self.mass_threshold)
        f = lambda t: -self.concentration_constant(math.exp(t))
        grid = np.linspace(lo + 1e-6, lo + 12, 400)
        vals = np.array([f(t) for t in grid])
        i = int(np.argmin(vals))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        res = optimize.minimize_scalar(f, bounds=(a, b), method="bounded")
        t = res.x if res.fun < vals[i] else grid[i]
        return -f(t), math.exp(t)


def proof_constants(d: int, alpha: float, beta: float, gamma: float, samples: int = 200000,
                    seed: int = 0) -> ProofConstants:
    """Explicit versions of the constants in the moment inequality.

    ``C1`` and ``K`` are sampled extremes over random pairs (a sup and an
    inf respectively), ``C2`` is :func:`weight_sup_norm`.
    """
    from .fractional import riesz_constant

    e = holder_exponents(d, beta, gamma)
    rng = np.random.default_rng(seed)
    x, y = _random_pairs(rng, samples, d)
    c1 = float(np.max(phi_phi_ratio(x, y, d, beta, gamma)))
    k = convexity_infimum(gamma, d, pairs=samples, seed=seed + 1)
    c2 = weight_sup_norm(alpha, gamma, d).value
    return ProofConstants(d, float(alpha), float(beta), float(gamma), riesz_constant(d, beta), c1, c2, k, e)
