"""SVG line plots of a moment series. Output is deterministic: no dates, fixed hash salt."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_PANELS = (
    ("mass", "M", "M(t)", False),
    ("w_gamma", "w_gamma", "w_gamma(t)", False),
    ("log_linf", "linf", "log10 |u|_inf", True),
    ("dt", "dt", "dt", False),
)


def emit_plots(series, directory, digest: str | None = None) -> list[Path]:
    if len(series) == 0:
        raise ValueError("empty series, nothing to plot")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    t = series.array("t")
    figures = []
    with plt.rc_context({"svg.hashsalt": "fracks", "svg.fonttype": "none"}):
        for stem, column, label, log in _PANELS:
            y = series.array(column)
            if log:
                y = np.log10(np.maximum(y, np.finfo(float).tiny))
            fig, ax = plt.subplots(figsize=(5, 3.2))
            ax.plot(t, y, lw=1.2)
            ax.set_xlabel("t")
            ax.set_ylabel(label)
            fig.tight_layout()
            figures.append((out / f"{stem}.svg", fig))
        meta = {"Date": None, "Creator": "fracks"}
        if digest is not None:
            meta["Description"] = f"config_digest={digest}"
        written = []
        try:
            for path, fig in figures:
                fig.savefig(path, format="svg", metadata=meta)
                written.append(path)
        finally:
            for _, fig in figures:
                plt.close(fig)
    return written
