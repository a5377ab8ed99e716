"""Matplotlib figure rendering for the report path.

Figures are written next to the delimited artifacts.  The Agg backend is
forced so rendering works headless, and PNG metadata is pinned so repeated
runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .montecarlo import CLAUSES
from .report import ReportBundle

__all__ = [
    "comparison_figure",
    "violation_figure",
    "occupancy_figure",
    "explore_figure",
    "render_figures",
]

_PNG_META = {"metadata": {"Software": "lnayield"}}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight", **_PNG_META)
    plt.close(fig)


def comparison_figure(comparisons: dict, path) -> None:
    """Grouped bars of compliance delta (pp) and power delta (%) per baseline.

    One panel per strategy, mirroring the programmable-vs-fixed comparison.
    """
    strategies = list(comparisons)
    fig, axes = plt.subplots(len(strategies) or 1, 1,
                             figsize=(7, 2.8 * max(len(strategies), 1)),
                             squeeze=False)
    for ax, label in zip(axes[:, 0], strategies):
        rows = comparisons[label]
        names = [r.baseline_name for r in rows]
        x = np.arange(len(names))
        ax.bar(x - 0.18, [100 * r.delta_compliance for r in rows], width=0.36,
               label="compliance delta (pp)", color="#2b6cb0")
        ax.bar(x + 0.18, [100 * r.delta_power for r in rows], width=0.36,
               label="power delta (%)", color="#c05621")
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.set_xticks(x)
        ax.set_xticklabels(names, fontsize=8)
        ax.set_title(f"PLNA ({label}) vs fixed designs", fontsize=10)
        ax.legend(fontsize=8)
        ax.grid(axis="y", alpha=0.3)
    if not strategies:
        axes[0, 0].set_axis_off()
        axes[0, 0].text(0.5, 0.5, "no comparisons", ha="center", va="center")
    fig.tight_layout()
    _save(fig, path)


def violation_figure(violations: dict, path) -> None:
    """Spec-violation fractions per clause, grouped by design/mode column."""
    columns = []
    for name, modes in violations.items():
        for mode, rates in modes.items():
            label = name if mode == "NOM" else f"{name}:{mode}"
            columns.append((label, [rates[c] for c in CLAUSES]))
    fig, ax = plt.subplots(figsize=(8, 3.2))
    x = np.arange(len(CLAUSES))
    width = 0.8 / max(len(columns), 1)
    for i, (label, vals) in enumerate(columns):
        ax.bar(x + (i - (len(columns) - 1) / 2) * width,
               [100 * v for v in vals], width=width, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(CLAUSES, fontsize=7, rotation=20)
    ax.set_ylabel("violations (%)")
    if columns:
        ax.legend(fontsize=7)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def occupancy_figure(selections: dict, path) -> None:
    """Stacked mode-occupancy bars plus compliance markers per strategy."""
    fig, ax = plt.subplots(figsize=(6, 3))
    labels = list(selections)
    bottoms = np.zeros(len(labels))
    modes = list(next(iter(selections.values())).mode_order) if selections else []
    colors = {"HG": "#2f855a", "MG-LP": "#2b6cb0", "LG": "#c05621"}
    for mode in modes:
        vals = np.array([selections[s].occupancy[mode] for s in labels])
        ax.bar(labels, vals, bottom=bottoms, label=mode,
               color=colors.get(mode))
        bottoms += vals
    for i, s in enumerate(labels):
        ax.plot(i, selections[s].compliance_fraction, "k_", markersize=18)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("mode occupancy / compliance")
    if modes:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def explore_figure(points, selected, constraints, path) -> None:
    """NF and IIP3 versus device width, one trace per current level."""
    fig, (ax_nf, ax_i3) = plt.subplots(2, 1, figsize=(6.5, 5.5), sharex=True)
    currents = sorted({p.i_d_ma for p in points if p.valid})
    for c in currents:
        pts = [p for p in points if p.valid and p.i_d_ma == c]
        w = [p.w1_um for p in pts]
        ax_nf.plot(w, [p.rf.nf_db for p in pts], marker=".", label=f"{c:g} mA")
        ax_i3.plot(w, [p.rf.iip3_dbm for p in pts], marker=".")
    ax_nf.axhline(constraints.nf_max_db, color="gray", linestyle="--", linewidth=0.9)
    ax_i3.axhline(constraints.iip3_min_dbm, color="gray", linestyle="--", linewidth=0.9)
    for p in selected.values():
        ax_i3.plot(p.w1_um, p.rf.iip3_dbm, "k*", markersize=10)
    ax_nf.set_ylabel("NF (dB)")
    ax_i3.set_ylabel("IIP3 (dBm)")
    ax_i3.set_xlabel("device width (um)")
    ax_nf.legend(fontsize=8, ncol=3)
    for ax in (ax_nf, ax_i3):
        ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def render_figures(bundle: ReportBundle, out_dir) -> dict:
    """Render the figures a bundle supports; returns the path mapping."""
    out = Path(out_dir)
    paths = {}
    if bundle.comparisons:
        paths["comparison_png"] = out / "comparison.png"
        comparison_figure(bundle.comparisons, paths["comparison_png"])
    if bundle.violations:
        paths["violations_png"] = out / "violations.png"
        violation_figure(bundle.violations, paths["violations_png"])
    if bundle.selections:
        paths["occupancy_png"] = out / "occupancy.png"
        occupancy_figure(bundle.selections, paths["occupancy_png"])
    return paths
