"""Shared figure styling, pinned in one place for regression-friendly images."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")  # headless, deterministic backend

RC = {
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.5,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "legend.fontsize": 8,
    "legend.framealpha": 0.9,
    "svg.hashsalt": "plotkit",  # byte-stable SVG ids
    "path.simplify": False,
}

# fixed, color-blind-friendly cycle shared by all figure kinds
COLORS = ["#0173b2", "#de8f05", "#029e73", "#d55e00", "#cc78bc", "#ca9161",
          "#fbafe4", "#949494", "#ece133", "#56b4e9"]

FIGSIZE_SINGLE = (4.2, 3.0)
FIGSIZE_WIDE = (6.5, 3.0)

# metadata that varies between runs (timestamps) is stripped at save time
SAVEFIG_KWARGS = {"bbox_inches": "tight", "metadata": {"Software": "plotkit"}}


def rc_context():
    """Context manager applying the pinned style."""
    return matplotlib.rc_context(RC)


def color(i: int) -> str:
    return COLORS[i % len(COLORS)]
