"""Matplotlib figures written next to the report CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}
RANK_COLORS = {"min": "tab:blue", "median": "tab:orange", "max": "tab:green"}


def _band(ax, mean, std, label, color=None):
    x = np.arange(len(mean))
    line, = ax.plot(x, mean, label=label, color=color, lw=1.2)
    ax.fill_between(x, mean - std, mean + std, color=line.get_color(), alpha=0.2, lw=0)


def reward_curves(summaries: dict, path: str | Path, title: str = "", chance: float | None = None):
    """One band per label: across-seed mean of the windowed reward, +/- one std."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        for label, s in summaries.items():
            _band(ax, s.mean, s.std, label)
        if chance is not None:
            ax.axhline(chance, color="0.5", ls=":", lw=0.8, label="chance")
        ax.set_xlabel("game")
        ax.set_ylabel("mean reward")
        ax.set_ylim(0, 1)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)


def agent_trajectories(trajs: dict, path: str | Path, title: str = ""):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        for rank, t in trajs.items():
            if len(t.mean):
                _band(ax, t.mean, t.std, f"{rank} centrality", RANK_COLORS.get(rank))
        ax.set_xlabel("games played by agent")
        ax.set_ylabel("mean reward")
        ax.set_ylim(0, 1)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)


def degree_histogram(dists: dict, path: str | Path):
    """Side-by-side bar charts of degree -> node count, one panel per label."""
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, len(dists), figsize=(2.4 * len(dists), 2.2), squeeze=False)
        for ax, (label, hist) in zip(axes[0], dists.items()):
            ax.bar(list(hist), list(hist.values()), width=0.8)
            ax.set_title(label)
            ax.set_xlabel("degree")
        axes[0][0].set_ylabel("nodes")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
