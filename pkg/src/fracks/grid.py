"""Periodic box discretization of R^d, sampled densities and their integral norms.

The box is ``[-L, L)^d`` with ``n`` nodes per axis. Quadrature is the periodic
trapezoid rule, so every node carries the weight ``h**d``. All reductions go
through ``numpy.sum`` on the row-major flattened array, which uses pairwise
summation with a fixed blocking; results are therefore deterministic for a
given array.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft
from scipy import signal


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def unit_sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True)
class Grid:
    d: int
    n: int
    half_width: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n ** self.d

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.d

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Node coordinates, one broadcastable array per axis."""
        out = []
        for j in range(self.d):
            shape = [1] * self.d
            shape[j] = self.n
            out.append(self.axis.reshape(shape))
        return tuple(out)

    def points(self) -> np.ndarray:
        """All nodes as an ``(n**d, d)`` array in row-major order."""
        mesh = np.meshgrid(*([self.axis] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def distance(self, center=None) -> np.ndarray:
        """Unwrapped Euclidean distance of every node from ``center``."""
        c = self._center(center)
        r2 = sum((x - cj) ** 2 for x, cj in zip(self.coords, c))
        return np.sqrt(np.broadcast_to(r2, self.shape))

    def _center(self, center) -> np.ndarray:
        if center is None:
            return np.zeros(self.d)
        c = np.atleast_1d(np.asarray(center, dtype=float))
        if c.shape != (self.d,):
            raise ValueError(f"center must have {self.d} components")
        if np.any(np.abs(c) > self.half_width):
            raise ValueError("center must lie inside the box")
        return c

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers on the real-FFT lattice (last axis halved).

        Integer frequencies scaled by pi/L; each array broadcasts against the
        spectrum returned by :func:`rfft`.
        """
        out = []
        for j in range(self.d):
            if j == self.d - 1:
                k = sfft.rfftfreq(self.n, d=1.0 / self.n)
            else:
                k = sfft.fftfreq(self.n, d=1.0 / self.n)
            shape = [1] * self.d
            shape[j] = k.size
            out.append((k * math.pi / self.half_width).reshape(shape))
        return tuple(out)

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.n,) * (self.d - 1) + (self.n // 2 + 1,)

    def scaled(self, lam: float) -> "Grid":
        """Same node count on the box of half-width ``L / lam``."""
        return Grid(self.d, self.n, self.half_width / lam)

    def field(self, values) -> "Field":
        return Field(self, values)

    def sample(self, func: Callable[..., np.ndarray]) -> "Field":
        """Evaluate ``func(*coords)`` on the nodes."""
        vals = np.broadcast_to(func(*self.coords), self.shape)
        return Field(self, np.array(vals, dtype=float))

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape))


def _workers() -> int:
    import os

    try:
        return max(1, int(os.environ.get("FRACKS_THREADS", "1")))
    except ValueError:
        return 1


def rfft(values: np.ndarray) -> np.ndarray:
    return sfft.rfftn(values, workers=_workers())


def irfft(spectrum: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    return sfft.irfftn(spectrum, s=shape, workers=_workers())


@dataclass(frozen=True, eq=False)
class Field:
    """Real density sampled on a :class:`Grid`; values are read-only."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def _check(self, other: "Field"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, a):
        if isinstance(a, Field):
            self._check(a)
            return self.with_values(self.values * a.values)
        return self.with_values(self.values * a)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return self.with_values(-self.values)


def integrate(f: Field) -> float:
    """Trapezoid-rule integral, i.e. the discrete mass."""
    return float(f.grid.cell_volume * np.sum(f.values))


def center_of_mass(f: Field) -> np.ndarray:
    m = np.sum(f.values)
    if m == 0:
        raise ValueError("center of mass undefined for zero-mass field")
    return np.array([np.sum(x * f.values) / m for x in f.grid.coords])


def weighted_moment(f: Field, gamma: float, center=None) -> float:
    """Discrete ``int |x - center|^gamma f(x) dx`` with unwrapped distances.

    Only meaningful for fields supported well inside the box.
    """
    if not gamma > 0:
        raise ValueError(f"moment order must be positive, got {gamma}")
    if gamma > 2:
        raise ValueError(f"moment order must be at most 2, got {gamma}")
    r = f.grid.distance(center)
    return float(f.grid.cell_volume * np.sum(r ** gamma * f.values))


def lp_norm(f: Field, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(f.grid.cell_volume * np.sum(a))
    # scale out the max to avoid overflow for large p
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * (f.grid.cell_volume * np.sum((a / top) ** p)) ** (1.0 / p))


def radius_ladder(grid: Grid, per_octave: int = 8) -> np.ndarray:
    """Geometric ladder of radii from h to L."""
    octaves = math.log2(grid.half_width / grid.h)
    count = int(math.ceil(octaves * per_octave)) + 1
    return np.geomspace(grid.h, grid.half_width, count)


def ball_stencil(grid: Grid, radius: float) -> np.ndarray:
    """Indicator of lattice offsets within ``radius`` of the origin node."""
    m = int(math.floor(radius / grid.h + 1e-12))
    off = np.arange(-m, m + 1) * grid.h
    mesh = np.meshgrid(*([off] * grid.d), indexing="ij")
    r2 = sum(c ** 2 for c in mesh)
    return (r2 <= radius ** 2 * (1 + 1e-12)).astype(float)


def effective_radius(grid: Grid, stencil: np.ndarray) -> float:
    """Radius of the Euclidean ball whose volume equals the discrete ball's."""
    return (stencil.sum() * grid.cell_volume / unit_ball_volume(grid.d)) ** (1.0 / grid.d)


def _ball_mass(a: np.ndarray, grid: Grid, node, radius: float) -> float:
    r2 = sum((x - grid.axis[i]) ** 2 for x, i in zip(grid.coords, node))
    inside = np.broadcast_to(r2 <= radius ** 2 * (1 + 1e-12), grid.shape)
    return float(grid.cell_volume * np.sum(a[inside]))


@dataclass(frozen=True)
class MorreySearch:
    value: float
    radius: float
    effective_radius: float
    center: np.ndarray


def morrey_search(f: Field, p: float, stride: int = 1, per_octave: int = 8,
                  radii: Sequence[float] | None = None) -> MorreySearch:
    """Brute-force maximization of ``R^{d(1/p-1)} int_{B_R(x0)} |f|``.

    Candidate centers are grid nodes (every ``stride``-th per axis) and radii
    a geometric ladder. Each discrete ball is weighted with the radius of the
    Euclidean ball of equal volume, which keeps the Hoelder bound
    ``<= |B_1|^{1-1/p} ||f||_p`` exact on the lattice. Fields are treated as
    zero outside the box (no periodic wrap). The result is a lower bound of
    the supremum over all balls.
    """
    if not p > 1:
        raise ValueError(f"Morrey exponent must exceed 1, got {p}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    grid = f.grid
    a = np.abs(f.values)
    best = MorreySearch(0.0, float("nan"), float("nan"), np.zeros(grid.d))
    if not a.any():
        return best
    if radii is None:
        radii = radius_ladder(grid, per_octave)
    power = grid.d * (1.0 / p - 1.0)
    sl = (slice(None, None, stride),) * grid.d
    for R in radii:
        st = ball_stencil(grid, R)
        sums = signal.fftconvolve(a, st, mode="same")[sl] * grid.cell_volume
        idx = np.unravel_index(np.argmax(sums), sums.shape)
        node = tuple(i * stride for i in idx)
        reff = effective_radius(grid, st)
        # the FFT sum only locates the ball; its mass is re-summed directly
        val = reff ** power * _ball_mass(a, grid, node, R)
        if val > best.value:
            center = np.array([grid.axis[i] for i in node])
            best = MorreySearch(val, float(R), reff, center)
    return best


def morrey_norm(f: Field, p: float, stride: int = 1, per_octave: int = 8) -> float:
    return morrey_search(f, p, stride=stride, per_octave=per_octave).value
