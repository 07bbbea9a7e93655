"""Initial-condition recipes. Every recipe is scaled to the requested discrete mass."""
from __future__ import annotations

import math

import numpy as np

from .grid import Field, Grid


def _normalize(grid: Grid, vals: np.ndarray, mass: float) -> Field:
    if mass < 0:
        raise ValueError(f"mass must be nonnegative, got {mass}")
    total = grid.cell_volume * vals.sum()
    if mass == 0:
        return grid.zeros()
    if not total > 0:
        raise ValueError("profile vanishes on the grid; refine it or enlarge the feature")
    return Field(grid, vals * (mass / total))


def _offset(grid: Grid, center) -> list[np.ndarray]:
    c = np.zeros(grid.d) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
    if c.shape != (grid.d,):
        raise ValueError(f"center must have {grid.d} components")
    return [x - cj for x, cj in zip(grid.coords, c)]


def gaussian(grid: Grid, mass: float, width: float, center=None) -> Field:
    if not width > 0:
        raise ValueError("width must be positive")
    r2 = sum(x ** 2 for x in _offset(grid, center))
    return _normalize(grid, np.broadcast_to(np.exp(-r2 / (2 * width ** 2)), grid.shape).copy(), mass)


def ring(grid: Grid, mass: float, radius: float, width: float, center=None) -> Field:
    if not (radius > 0 and width > 0):
        raise ValueError("radius and width must be positive")
    r = np.sqrt(sum(x ** 2 for x in _offset(grid, center)))
    return _normalize(grid, np.broadcast_to(np.exp(-(r - radius) ** 2 / (2 * width ** 2)), grid.shape).copy(),
                      mass)


def two_bump(grid: Grid, mass: float, separation: float, width: float, ratio: float = 1.0) -> Field:
    """Two Gaussians on the first axis at ``+-separation/2``; ``ratio`` is the mass ratio right/left."""
    if not (separation >= 0 and width > 0 and ratio > 0):
        raise ValueError("separation >= 0, width > 0 and ratio > 0 required")
    shift = np.zeros(grid.d)
    shift[0] = separation / 2
    a = gaussian(grid, 1.0, width, -shift).values
    b = gaussian(grid, ratio, width, shift).values
    return _normalize(grid, a + b, mass)


def from_recipe(grid: Grid, recipe: dict) -> Field:
    kind = recipe.get("kind", "gaussian")
    args = {k: v for k, v in recipe.items() if k != "kind"}
    if kind == "gaussian":
        return gaussian(grid, float(args["mass"]), float(args.get("width", 1.0)), args.get("center"))
    if kind == "ring":
        return ring(grid, float(args["mass"]), float(args["radius"]), float(args.get("width", 0.25)),
                    args.get("center"))
    if kind == "two-bump":
        return two_bump(grid, float(args["mass"]), float(args["separation"]), float(args.get("width", 0.5)),
                        float(args.get("ratio", 1.0)))
    if kind == "file":
        from .fieldio import read_field

        f, _ = read_field(args["path"])
        if f.grid != grid:
            raise ValueError(f"field file grid {f.grid} differs from the configured grid {grid}")
        return f
    raise ValueError(f"unknown initial-condition kind {kind!r}")


def peak_for(mass: float, width: float, d: int) -> float:
    """Continuum peak of a Gaussian with the given mass and width."""
    return mass / ((2 * math.pi) ** (d / 2) * width ** d)
