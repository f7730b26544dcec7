"""Renderers for the five supported figure kinds.

Each renderer consumes parsed ``csvio.Table`` objects plus the recipe's label
overrides and returns a matplotlib Figure.  All styling comes from the shared
style module; recipes only choose data and axis labels.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np
from matplotlib.figure import Figure

from plotkit import style
from plotkit.csvio import SchemaError, Table


def _labels(ax, recipe, default_x, default_y):
    ax.set_xlabel(recipe.xlabel or default_x)
    ax.set_ylabel(recipe.ylabel or default_y)
    if recipe.title:
        ax.set_title(recipe.title)


def render_lqts_curves(tables: list[Table], recipe) -> Figure:
    """One curve of s_A versus the model parameter per block size n_A.

    The monotonicity of the LQTS in nested blocks stacks the curves in n_A
    order, with the n_A = L curve coinciding with the global energy variance
    (drawn dashed on top).
    """
    table = tables[0]
    groups: dict[int, list[tuple[float, float]]] = defaultdict(list)
    var_curve: dict[float, float] = {}
    for row in table.rows:
        param = float(row["param"])
        groups[int(row["n_A"])].append((param, float(row["s_A"])))
        var_curve[param] = float(row["variance_H"])
    fig = Figure(figsize=style.FIGSIZE_SINGLE)
    ax = fig.add_subplot()
    for i, n_a in enumerate(sorted(groups)):
        pts = sorted(groups[n_a])
        ax.plot([p for p, _ in pts], [s for _, s in pts],
                color=style.color(i), label=f"$n_A={n_a}$")
    pts = sorted(var_curve.items())
    ax.plot([p for p, _ in pts], [v for _, v in pts],
            color="black", linestyle="--", linewidth=1.0, label="Var$(H)$")
    ax.legend(ncols=2)
    _labels(ax, recipe, "model parameter", r"$s_A$")
    return fig


def render_lqts_scaling(tables: list[Table], recipe) -> Figure:
    """Log-log extremal s_A versus block fraction n_A/L with a power-law fit."""
    fig = Figure(figsize=style.FIGSIZE_SINGLE)
    ax = fig.add_subplot()
    xs_all, ys_all = [], []
    series: dict[int, list[tuple[float, float]]] = defaultdict(list)
    for table in tables:
        for row in table.rows:
            s_a = float(row["s_A_at_extremum"])
            if s_a <= 0.0:
                continue
            length = int(row["L"])
            series[length].append((int(row["n_A"]) / length, s_a))
    if not series:
        raise SchemaError("no positive s_A_at_extremum values to plot")
    for i, length in enumerate(sorted(series)):
        pts = sorted(series[length])
        xs = [x for x, _ in pts]
        ys = [y for _, y in pts]
        xs_all += xs
        ys_all += ys
        ax.plot(xs, ys, "o", color=style.color(i), label=f"$L={length}$")
    slope, intercept = np.polyfit(np.log(xs_all), np.log(ys_all), 1)
    xf = np.geomspace(min(xs_all), max(xs_all), 50)
    ax.plot(xf, np.exp(intercept) * xf**slope, "-", color="black",
            linewidth=1.0, label=f"slope {slope:.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend()
    _labels(ax, recipe, r"$n_A/L$", r"extremal $s_A$")
    return fig


def _fisher_series(table: Table):
    """(protocol, N) -> {T: {input_class: value}} from a fisher-compare table."""
    out: dict[tuple[str, int], dict[float, dict[str, float]]] = defaultdict(dict)
    for row in table.rows:
        key = (row["protocol"], int(row["N"]))
        out[key].setdefault(float(row["T"]), {})[row["input_class"]] = float(row["fisher_value"])
    return out


def render_fi_panels(tables: list[Table], recipe) -> Figure:
    """FI versus temperature, one panel per N, shaded max-min input band."""
    panels: dict[int, dict[str, dict[float, dict[str, float]]]] = defaultdict(dict)
    for table in tables:
        for (protocol, n), curve in _fisher_series(table).items():
            panels[n].setdefault(protocol, {}).update(curve)
    ns = sorted(panels)
    fig = Figure(figsize=(3.0 * len(ns), 2.8))
    axes = fig.subplots(1, len(ns), squeeze=False)[0]
    for ax, n in zip(axes, ns):
        for i, protocol in enumerate(sorted(panels[n])):
            curve = panels[n][protocol]
            temps = sorted(curve)
            lo = [min(curve[t].values()) for t in temps]
            hi = [max(curve[t].values()) for t in temps]
            mid = [curve[t].get("mean", 0.5 * (a + b)) for t, a, b in zip(temps, lo, hi)]
            ax.fill_between(temps, lo, hi, color=style.color(i), alpha=0.25, linewidth=0)
            ax.plot(temps, mid, color=style.color(i), label=protocol)
        ax.set_title(f"$N={n}$")
        ax.legend()
        _labels(ax, recipe, "$T$", "Fisher information")
    return fig


def render_gap_ratio(tables: list[Table], recipe) -> Figure:
    """Sequential-to-i.i.d. input-sensitivity gap ratio versus N."""
    ns, ratios = gap_ratio_curve(tables)
    fig = Figure(figsize=style.FIGSIZE_SINGLE)
    ax = fig.add_subplot()
    ax.plot(ns, ratios, "o-", color=style.color(0))
    ax.axhline(1.0, color="black", linewidth=0.8, linestyle=":")
    ax.set_ylim(0.0, 1.1)
    _labels(ax, recipe, "$N$", r"$\Delta F_{\rm sms}/\Delta F_{\rm iid}$")
    return fig


def gap_ratio_curve(tables: list[Table]) -> tuple[list[int], list[float]]:
    """Per-N ratio of input-extremes gaps, averaged over the temperature grid."""
    gaps: dict[tuple[str, int], list[float]] = defaultdict(list)
    for table in tables:
        for (protocol, n), curve in _fisher_series(table).items():
            for values in curve.values():
                gaps[(protocol, n)].append(max(values.values()) - min(values.values()))
    ns = sorted({n for _, n in gaps})
    ratios = []
    for n in ns:
        iid = gaps.get(("iid", n))
        seq = gaps.get(("sequential", n))
        if not iid or not seq or len(iid) != len(seq):
            raise SchemaError(f"gap-ratio needs matching iid and sequential rows for N={n}")
        ratios.append(float(np.mean([s / i for s, i in zip(seq, iid)])))
    return ns, ratios


def render_discrimination(tables: list[Table], recipe) -> Figure:
    """Normalized discrimination distance versus t*gamma, one curve per input."""
    table = tables[0]
    curves: dict[str, list[tuple[float, float]]] = defaultdict(list)
    for row in table.rows:
        curves[row["r0_class"]].append((float(row["t_gamma"]), float(row["distance"])))
    fig = Figure(figsize=style.FIGSIZE_SINGLE)
    ax = fig.add_subplot()
    for i, label in enumerate(sorted(curves)):
        pts = sorted(curves[label])
        ax.plot([t for t, _ in pts], [d for _, d in pts],
                color=style.color(i), label=label)
    ax.axhline(1.0, color="black", linewidth=0.8, linestyle=":")
    ax.legend()
    _labels(ax, recipe, r"$t\,\gamma$", r"$D(t)/D(\infty)$")
    return fig


RENDERERS = {
    "lqts-curves": (render_lqts_curves, "lqts-sweep"),
    "lqts-scaling": (render_lqts_scaling, "lqts-scaling"),
    "fi-panels": (render_fi_panels, "fisher-compare"),
    "gap-ratio": (render_gap_ratio, "fisher-compare"),
    "discrimination": (render_discrimination, "discrimination"),
}
