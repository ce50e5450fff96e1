"""SVG figures: return/volatility overlays and replication boxplots.

Output is deterministic (fixed hash salt, no date stamp) so files can be
compared byte for byte across runs.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["volatility_overlay", "estimate_boxplots", "save_svg"]

_SVG_META = {"Date": None, "Creator": "svolkit"}


def save_svg(fig, path) -> Path:
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "svolkit", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def volatility_overlay(path, returns, estimates: Mapping[str, np.ndarray],
                       truth: Optional[np.ndarray] = None, title: str = "Volatility estimates"):
    """Returns on top; estimated volatility paths (and the truth, if known) below."""
    y = np.asarray(returns)
    t = np.arange(y.size)
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    ax0.plot(t, y, lw=0.6, color="0.3")
    ax0.set_ylabel("return")
    ax0.set_title(title)
    if truth is not None:
        ax1.plot(t, truth, lw=1.2, color="black", label="true")
    for name, h in estimates.items():
        ax1.plot(t, h, lw=0.9, label=name)
    ax1.set_ylabel("volatility")
    ax1.set_xlabel("t")
    ax1.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return save_svg(fig, path)


def estimate_boxplots(path, estimates: Mapping[str, Mapping[str, Sequence[float]]],
                      truth: float, param: str = ""):
    """One panel per model; boxes for the mean, median and mode estimates.

    ``estimates`` maps model label -> stat -> per-replication values.
    """
    models = list(estimates)
    fig, axes = plt.subplots(1, len(models), figsize=(3.2 * len(models), 3.6),
                             sharey=True, squeeze=False)
    for ax, m in zip(axes[0], models):
        stats = list(estimates[m])
        ax.boxplot([np.asarray(estimates[m][s]) for s in stats])
        ax.set_xticks(range(1, len(stats) + 1), stats)
        ax.axhline(truth, ls="--", color="red", lw=1)
        ax.set_title(m)
    axes[0][0].set_ylabel(param)
    fig.tight_layout()
    return save_svg(fig, path)
