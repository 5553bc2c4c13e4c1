"""Figure rendering for reports: sina-style attribution scatters and sweep
line plots, written next to the delimited output files."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import atomic_write_bytes
from .shapley import AttributionReport


def _save(fig, path: str | Path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=120, bbox_inches="tight")
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def render_sina(reports: Sequence[AttributionReport], path: str | Path) -> None:
    """Per-feature scatter of attributions across instances, colored by the
    (normalized) feature value."""
    names = reports[0].feature_names
    n = len(names)
    rng = np.random.default_rng(0)  # jitter only, fixed for reproducibility
    fig, ax = plt.subplots(figsize=(7, 0.6 * n + 1.5))
    for i, name in enumerate(names):
        phis = np.array([r.phi[i] for r in reports])
        vals = np.array(
            [r.feature_values[i] for r in reports], dtype=object
        )
        try:
            colors = vals.astype(float)
            spread = colors.max() - colors.min()
            colors = (colors - colors.min()) / spread if spread > 0 else 0.5 * np.ones(len(colors))
        except (TypeError, ValueError):
            levels = sorted(set(vals), key=repr)
            colors = np.array([levels.index(v) for v in vals], dtype=float)
            colors /= max(len(levels) - 1, 1)
        jitter = rng.uniform(-0.25, 0.25, size=len(phis))
        ax.scatter(phis, np.full(len(phis), n - 1 - i) + jitter, c=colors,
                   cmap="coolwarm", s=12, alpha=0.8)
    ax.axvline(0.0, color="gray", lw=0.8)
    ax.set_yticks(range(n))
    ax.set_yticklabels(list(reversed(names)))
    ax.set_xlabel("attribution")
    sm = plt.cm.ScalarMappable(cmap="coolwarm")
    fig.colorbar(sm, ax=ax, label="feature value (scaled)")
    _save(fig, path)


def render_sweep(
    rows: Sequence[Mapping],
    x_key: str,
    y_keys: Sequence[str],
    group_key: str | None,
    path: str | Path,
    xlabel: str,
    ylabel: str,
) -> None:
    """Line plot of one or more series over a swept parameter; one panel per
    group when a group key is given."""
    groups = sorted({r[group_key] for r in rows}, key=str) if group_key else [None]
    fig, axes = plt.subplots(
        1, len(groups), figsize=(4 * len(groups), 3.2), sharey=True, squeeze=False
    )
    for ax, group in zip(axes[0], groups):
        sub = [r for r in rows if group_key is None or r[group_key] == group]
        xs = sorted({r[x_key] for r in sub})
        for key in y_keys:
            ys = []
            for x in xs:
                matching = [r[key] for r in sub if r[x_key] == x]
                ys.append(matching[0])
            ax.plot(xs, ys, marker=".", label=key)
        ax.set_xlabel(xlabel)
        ax.set_title(str(group) if group is not None else "")
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel(ylabel)
    _save(fig, path)
