"""Figure rendering for previews and experiment reports (Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_preview", "save_training_curves", "save_series"]


def save_preview(path, panels: list[tuple[str, np.ndarray]]) -> None:
    """Side-by-side display-space images, one titled panel each."""
    if not panels:
        raise ValueError("preview needs at least one panel")
    fig, axes = plt.subplots(1, len(panels), figsize=(3.0 * len(panels), 3.3))
    if len(panels) == 1:
        axes = [axes]
    for ax, (title, img) in zip(axes, panels):
        ax.imshow(np.clip(img, 0.0, 1.0))
        ax.set_title(title, fontsize=9)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_training_curves(path, rows: list[dict]) -> None:
    """Loss and validation-metric curves from per-epoch stats rows."""
    epochs = [r["epoch"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(epochs, [r["g_loss"] for r in rows], label="generator")
    ax1.plot(epochs, [r["d_loss"] for r in rows], label="discriminator")
    ax1.plot(epochs, [r["l1"] for r in rows], label="L1 term")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("loss")
    ax1.set_yscale("log")
    ax1.legend(fontsize=8)
    have_val = [r for r in rows if np.isfinite(r["val_mse"])]
    if have_val:
        ve = [r["epoch"] for r in have_val]
        ax2.plot(ve, [r["val_mse"] for r in have_val], label="val MSE")
        ax2.plot(ve, [r["val_ssim"] for r in have_val], label="val SSIM")
        ax2.set_xlabel("epoch")
        ax2.legend(fontsize=8)
    else:
        ax2.set_axis_off()
        ax2.text(0.5, 0.5, "no validation frames", ha="center", va="center")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_series(path, x, series: dict[str, list], xlabel: str, ylabel: str, title: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, ys in series.items():
        ax.plot(x, ys, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
