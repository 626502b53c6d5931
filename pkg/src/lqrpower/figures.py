"""Render sweep and comparison reports as figure files.

Used by the CLI report commands: the delimited output stays the primary
artifact, the figures are rendered next to it for a quick look.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_METHOD_STYLE = {
    "exact": dict(color="#1f77b4", marker="o", label="exact"),
    "closed_form": dict(color="#d62728", marker="s", label="closed form"),
    "water_filling": dict(color="#2ca02c", marker="^", label="water-filling"),
}


def _apply_style() -> None:
    plt.rcParams.update({
        "font.size": 10,
        "axes.labelsize": 11,
        "legend.fontsize": 9,
        "lines.linewidth": 1.4,
        "lines.markersize": 4,
        "grid.alpha": 0.35,
        "figure.dpi": 150,
    })


def plot_cost_sweep(rows: list[dict], floor_total: float, out_path: str) -> None:
    """Sum LQR cost versus power budget, one line per method.

    ``rows`` carry keys p_max_dbw, method and total_cost (None or inf for
    points a method cannot serve).
    """
    _apply_style()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    methods = []
    for row in rows:
        if row["method"] not in methods:
            methods.append(row["method"])
    for method in methods:
        xs, ys = [], []
        for row in rows:
            if row["method"] != method:
                continue
            total = row["total_cost"]
            if total is None or not math.isfinite(total):
                continue
            xs.append(row["p_max_dbw"])
            ys.append(total)
        style = _METHOD_STYLE.get(method, dict(label=method))
        ax.semilogy(xs, ys, **style)
    ax.axhline(floor_total, color="0.4", linestyle="--", linewidth=1.0,
               label="cost floor")
    ax.set_xlabel("Power budget (dBW)")
    ax.set_ylabel("Sum LQR cost")
    ax.grid(True, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_allocation_comparison(channels: list[dict], p_max_dbw: float,
                               out_path: str) -> None:
    """Grouped bars of per-channel power for each method.

    ``channels`` are ordered rows with keys gain and one entry per
    method name.
    """
    _apply_style()
    methods = [m for m in _METHOD_STYLE if m in channels[0]]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    idx = range(1, len(channels) + 1)
    width = 0.8 / max(len(methods), 1)
    for j, method in enumerate(methods):
        offs = [i + (j - (len(methods) - 1) / 2.0) * width for i in idx]
        vals = [row[method] for row in channels]
        style = _METHOD_STYLE[method]
        ax.bar(offs, vals, width=width, color=style["color"],
               label=style["label"])
    ax.set_xticks(list(idx))
    ax.set_xticklabels([f"ch {i}" for i in idx])
    ax.set_xlabel("Channel (sorted by descending gain)")
    ax.set_ylabel("Allocated power (W)")
    ax.set_title(f"Budget {p_max_dbw:g} dBW")
    ax.grid(True, axis="y")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
