"""Figure rendering for training reports.

The CSV trace and text confusion matrix are the canonical outputs;
these helpers render companion PNG figures next to them so a run's
progress can be eyeballed without further tooling.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import ConfusionCounts
from .training import TrainingTrace


def render_trace_figure(trace: TrainingTrace, path: str) -> None:
    """Loss per logged step, with accuracy overlaid where it exists.

    Steps are numbered globally across phases; phase boundaries are
    drawn as vertical lines.
    """
    fig, ax_loss = plt.subplots(figsize=(8, 4.5))
    ax_loss.set_xlabel("logged step")
    ax_loss.set_ylabel("loss")
    ax_acc = ax_loss.twinx()
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0.0, 1.05)

    steps = np.arange(len(trace))
    losses = [p.loss for p in trace]
    ax_loss.plot(steps, losses, color="tab:blue", label="loss")

    train_pts = [(s, p.train_accuracy) for s, p in zip(steps, trace) if p.train_accuracy is not None]
    val_pts = [(s, p.val_accuracy) for s, p in zip(steps, trace) if p.val_accuracy is not None]
    if train_pts:
        xs, ys = zip(*train_pts)
        ax_acc.plot(xs, ys, color="tab:green", label="train accuracy")
    if val_pts:
        xs, ys = zip(*val_pts)
        ax_acc.plot(xs, ys, color="tab:orange", label="val accuracy")

    boundaries = [s for s in range(1, len(trace)) if trace[s].phase != trace[s - 1].phase]
    for s in boundaries:
        ax_loss.axvline(s - 0.5, color="gray", linestyle=":", linewidth=0.8)
    seen: list[str] = []
    for p in trace:
        if p.phase not in seen:
            seen.append(p.phase)
    ax_loss.set_title(" / ".join(seen) if seen else "training trace")

    handles1, labels1 = ax_loss.get_legend_handles_labels()
    handles2, labels2 = ax_acc.get_legend_handles_labels()
    if handles1 or handles2:
        ax_loss.legend(handles1 + handles2, labels1 + labels2, loc="center right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_confusion_figure(
    counts: ConfusionCounts, path: str, class_names: tuple[str, str] = ("defective", "healthy")
) -> None:
    """2x2 confusion heatmap with counts printed in each cell."""
    grid = np.array([[counts.tp, counts.fn], [counts.fp, counts.tn]], dtype=float)
    fig, ax = plt.subplots(figsize=(4.2, 3.8))
    ax.imshow(grid, cmap="Blues")
    pos, neg = class_names
    ax.set_xticks([0, 1], [f"pred {pos}", f"pred {neg}"])
    ax.set_yticks([0, 1], [f"actual {pos}", f"actual {neg}"])
    peak = grid.max() if grid.max() > 0 else 1.0
    for i in range(2):
        for j in range(2):
            color = "white" if grid[i, j] > peak / 2 else "black"
            ax.text(j, i, f"{int(grid[i, j])}", ha="center", va="center", color=color)
    ax.set_title("confusion matrix")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
