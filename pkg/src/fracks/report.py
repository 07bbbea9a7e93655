"""Deterministic text output: 17-significant-digit JSON and CSV."""
from __future__ import annotations

import hashlib
import json
import math

import numpy as np


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_emit(v, indent, level) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and every float written with 17 significant digits."""
    return _emit(obj, indent, 0)


def digest(obj) -> str:
    """SHA-256 of the canonical JSON form."""
    return hashlib.sha256(dumps(obj, indent=0).encode()).hexdigest()


def csv_text(columns, rows, digest_value: str | None = None) -> str:
    lines = []
    if digest_value is not None:
        lines.append(f"# config_digest={digest_value}")
    lines.append(",".join(columns))
    for r in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v for v in r))
    return "\n".join(lines) + "\n"
