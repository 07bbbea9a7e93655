"""Field files: little-endian float64 payload plus a JSON sidecar ``{d, n, L, time}``."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import Field, Grid


def _stem(path) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix in (".raw", ".json") else p


def write_field(path, f: Field, time: float = 0.0, digest: str | None = None) -> tuple[Path, Path]:
    stem = _stem(path)
    raw, side = stem.with_suffix(".raw"), stem.with_suffix(".json")
    f.values.astype("<f8").tofile(raw)
    header = {"d": f.grid.d, "n": f.grid.n, "L": f.grid.half_width, "time": float(time)}
    if digest is not None:
        header["config_digest"] = digest
    from .report import dumps

    side.write_text(dumps(header) + "\n")
    return raw, side


def read_field(path) -> tuple[Field, dict]:
    stem = _stem(path)
    header = json.loads(stem.with_suffix(".json").read_text())
    grid = Grid(int(header["d"]), int(header["n"]), float(header["L"]))
    vals = np.fromfile(stem.with_suffix(".raw"), dtype="<f8")
    if vals.size != grid.size:
        raise ValueError(f"payload holds {vals.size} values, header announces {grid.size}")
    return Field(grid, vals.reshape(grid.shape)), header


def slice_csv(f: Field, axis: int = 0, digest: str | None = None) -> str:
    """Values along ``axis`` through the box center, as ``x,u`` rows."""
    g = f.grid
    if not 0 <= axis < g.d:
        raise ValueError("axis out of range")
    idx = [g.n // 2] * g.d
    idx[axis] = slice(None)
    vals = f.values[tuple(idx)]
    lines = []
    if digest is not None:
        lines.append(f"# config_digest={digest}")
    lines.append("x,u")
    lines += [f"{x:.17g},{v:.17g}" for x, v in zip(g.axis, vals)]
    return "\n".join(lines) + "\n"
