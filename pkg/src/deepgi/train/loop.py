"""Adversarial training loop with per-epoch stats, checkpoints, and resume.

Each step runs one generator forward shared by both updates: the
discriminator trains on (real, detached fake) first, then the generator
trains against the freshly updated discriminator plus an L1 pull toward the
ground truth. All shuffling and dropout randomness is derived from
(seed, epoch, step), so a resumed run retraces the interrupted one.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from ..autodiff import Adam, Tensor, add, backward, bce_loss, l1_loss, scale
from ..nets import (
    Discriminator,
    Generator,
    apply_state,
    collect_state,
    load_checkpoint,
    save_checkpoint,
)
from ..metrics import mse as metric_mse
from ..metrics import ssim as metric_ssim
from .data import FramePair, load_split, net_to_radiance, radiance_to_display

__all__ = [
    "TrainConfig",
    "StepStats",
    "train_step",
    "validate",
    "train",
    "infer",
    "STATS_COLUMNS",
    "CHECKPOINT_NAME",
]

STATS_COLUMNS = ("epoch", "g_loss", "d_loss", "l1", "val_mse", "val_ssim", "seconds")
CHECKPOINT_NAME = "checkpoint_latest.ckpt"

_SHUFFLE_STREAM = 17
_DROPOUT_STREAM = 29


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 4
    lr: float = 2e-4
    beta1: float = 0.5
    lambda_l1: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lambda_l1 < 0:
            raise ValueError(f"lambda_l1 must be >= 0, got {self.lambda_l1}")


@dataclass(frozen=True)
class StepStats:
    g_loss: float
    d_loss: float
    g_adv: float
    l1: float


def _ones_like(t: Tensor) -> Tensor:
    return Tensor(np.ones_like(t.data))


def _zeros_like(t: Tensor) -> Tensor:
    return Tensor(np.zeros_like(t.data))


def train_step(
    generator: Generator,
    discriminator: Discriminator,
    gen_opt: Adam,
    disc_opt: Adam,
    x: Tensor,
    y: Tensor,
    lambda_l1: float,
    rng: np.random.Generator,
) -> StepStats:
    fake = generator.forward(x, training=True, rng=rng)
    fake_detached = fake.detach()

    disc_opt.zero_grad()
    d_real = discriminator.forward(x, y, training=True)
    d_fake = discriminator.forward(x, fake_detached, training=True)
    d_loss = scale(
        add(bce_loss(d_real, _ones_like(d_real)), bce_loss(d_fake, _zeros_like(d_fake))), 0.5
    )
    backward(d_loss)
    disc_opt.step()

    gen_opt.zero_grad()
    d_on_fake = discriminator.forward(x, fake, training=True)
    g_adv = bce_loss(d_on_fake, _ones_like(d_on_fake))
    l1 = l1_loss(fake, y)
    g_loss = add(g_adv, scale(l1, lambda_l1))
    backward(g_loss)
    gen_opt.step()

    return StepStats(
        g_loss=g_loss.item(), d_loss=d_loss.item(), g_adv=g_adv.item(), l1=l1.item()
    )


def infer(generator: Generator, x: np.ndarray) -> np.ndarray:
    """Eval-mode prediction: (12,H,W) network input to (H,W,3) radiance."""
    out = generator.forward(Tensor(x[None]), training=False)
    return net_to_radiance(np.transpose(out.data[0], (1, 2, 0)))


def validate(generator: Generator, pairs: list[FramePair]) -> tuple[float, float]:
    """Mean display-space MSE and SSIM over the given frames."""
    if not pairs:
        return float("nan"), float("nan")
    mses, ssims = [], []
    for p in pairs:
        pred = radiance_to_display(infer(generator, p.x))
        mses.append(metric_mse(pred, p.gt_display))
        ssims.append(metric_ssim(pred, p.gt_display))
    return float(np.mean(mses)), float(np.mean(ssims))


def _write_stats(path, rows: list[dict]) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=STATS_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    os.replace(tmp, path)


def train(
    dataset_root,
    manifest,
    generator: Generator,
    discriminator: Discriminator,
    config: TrainConfig,
    out_dir,
    resume_from=None,
    log=None,
) -> list[dict]:
    """Runs (or resumes) training; returns the per-epoch stats rows.

    Writes stats.csv and an atomic checkpoint into out_dir after every epoch.
    With resume_from, optimizer state and the completed-epoch count come from
    the checkpoint and training continues up to config.epochs total.
    """
    say = log or (lambda msg: None)
    os.makedirs(out_dir, exist_ok=True)
    train_pairs = load_split(dataset_root, manifest, "train")
    val_pairs = load_split(dataset_root, manifest, "val")
    if not train_pairs:
        raise ValueError("no frames labeled train in the manifest")

    gen_opt = Adam(generator.parameters(), lr=config.lr, beta1=config.beta1)
    disc_opt = Adam(discriminator.parameters(), lr=config.lr, beta1=config.beta1)
    start_epoch = 0
    if resume_from is not None:
        meta = apply_state(
            load_checkpoint(resume_from),
            generator=generator,
            discriminator=discriminator,
            gen_opt=gen_opt,
            disc_opt=disc_opt,
        )
        start_epoch = int(meta["epoch"])
        say(f"resumed from {resume_from} at epoch {start_epoch}")
    if start_epoch >= config.epochs:
        raise ValueError(
            f"checkpoint already covers {start_epoch} epochs, requested {config.epochs}"
        )

    rows: list[dict] = []
    stats_path = os.path.join(out_dir, "stats.csv")
    if start_epoch > 0 and os.path.exists(stats_path):
        with open(stats_path, newline="", encoding="utf-8") as f:
            for old in csv.DictReader(f):
                if int(old["epoch"]) <= start_epoch:
                    rows.append({k: (int(old[k]) if k == "epoch" else float(old[k]))
                                 for k in STATS_COLUMNS})
    for epoch in range(start_epoch + 1, config.epochs + 1):
        t0 = time.perf_counter()
        order_rng = np.random.default_rng(
            np.random.SeedSequence([config.seed, _SHUFFLE_STREAM, epoch])
        )
        order = order_rng.permutation(len(train_pairs))
        stats: list[StepStats] = []
        for step, lo in enumerate(range(0, len(order), config.batch_size)):
            batch = [train_pairs[i] for i in order[lo : lo + config.batch_size]]
            x = Tensor(np.stack([p.x for p in batch]))
            y = Tensor(np.stack([p.y for p in batch]))
            rng = np.random.default_rng(
                np.random.SeedSequence([config.seed, _DROPOUT_STREAM, epoch, step])
            )
            st = train_step(
                generator, discriminator, gen_opt, disc_opt, x, y, config.lambda_l1, rng
            )
            if not all(np.isfinite(v) for v in (st.g_loss, st.d_loss, st.l1)):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch} step {step}: "
                    f"g={st.g_loss} d={st.d_loss} l1={st.l1}"
                )
            stats.append(st)

        val_mse, val_ssim = validate(generator, val_pairs)
        row = {
            "epoch": epoch,
            "g_loss": float(np.mean([s.g_loss for s in stats])),
            "d_loss": float(np.mean([s.d_loss for s in stats])),
            "l1": float(np.mean([s.l1 for s in stats])),
            "val_mse": val_mse,
            "val_ssim": val_ssim,
            "seconds": time.perf_counter() - t0,
        }
        rows.append(row)
        _write_stats(stats_path, rows)
        save_checkpoint(
            os.path.join(out_dir, CHECKPOINT_NAME),
            collect_state(
                generator,
                discriminator,
                gen_opt=gen_opt,
                disc_opt=disc_opt,
                epoch=epoch,
                seed=config.seed,
            ),
        )
        say(
            f"epoch {epoch}/{config.epochs} g={row['g_loss']:.4f} d={row['d_loss']:.4f} "
            f"l1={row['l1']:.4f} val_mse={val_mse:.5f} val_ssim={val_ssim:.4f} "
            f"({row['seconds']:.1f}s)"
        )
    return rows
