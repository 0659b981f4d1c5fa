"""Report figures for dataset QC (matplotlib, file output only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 7,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
}
BAR = "#2980b9"
WARN = "#c0392b"


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    # no Software/date metadata so reruns give identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def class_balance_figure(histogram: dict, path, tolerance: float = 0.25) -> Path:
    names = list(histogram)
    counts = np.array([histogram[n] for n in names], dtype=float)
    mean = counts.mean() if counts.size else 0.0
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(10, 3.2))
        off = np.abs(counts - mean) > tolerance * mean if mean else np.zeros(len(names), bool)
        ax.bar(range(len(names)), counts, color=[WARN if o else BAR for o in off], width=0.8)
        if mean:
            ax.axhline(mean, color="k", lw=0.8)
            ax.axhspan(mean * (1 - tolerance), mean * (1 + tolerance), color="0.9", zorder=0)
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=90, family="monospace")
        ax.set_xlim(-0.6, len(names) - 0.4)
        ax.set_ylabel("labels")
        ax.set_title(f"labels per class (band: mean ± {tolerance:.0%})")
        return _save(fig, path)


def labels_per_scene_figure(distribution: dict, path) -> Path:
    keys = sorted(int(k) for k in distribution)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 3))
        ax.bar(keys, [distribution[k] for k in keys], color=BAR, width=0.8)
        ax.set_xlabel("labels in scene")
        ax.set_ylabel("scenes")
        return _save(fig, path)


def visibility_figure(fractions, path, threshold: float | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 3))
        if len(fractions):
            ax.hist(fractions, bins=np.linspace(0, 1, 41), color=BAR)
        if threshold is not None:
            ax.axvline(threshold, color=WARN, lw=1)
        ax.set_xlim(0, 1)
        ax.set_xlabel("visible fraction of labeled cards")
        ax.set_ylabel("cards")
        return _save(fig, path)
