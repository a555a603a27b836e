"""Trend experiments: training length, dataset size, and base-layer width.

Each harness writes a CSV of its measurements and a rendered figure next to
it, then returns the rows so callers can assert on the trends directly.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import replace

import numpy as np

from ..nets import Discriminator, DiscriminatorConfig, Generator, GeneratorConfig
from ..render import DatasetManifest, cornell_box, path_trace
from .data import load_frame
from .figures import save_series, save_training_curves
from .loop import TrainConfig, infer, train

__all__ = [
    "run_epochs_experiment",
    "run_dataset_size_experiment",
    "run_base_layer_experiment",
]

_SUBSET_STREAM = 71


def _write_csv(path, fieldnames, rows) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=fieldnames)
        w.writeheader()
        w.writerows(rows)
    os.replace(tmp, path)


def _build_nets(base_layer_k: int, depth: int, disc_k: int | None, seed: int):
    gen = Generator(GeneratorConfig(base_layer_k, depth=depth), init_seed=seed)
    disc = Discriminator(DiscriminatorConfig(base_layer_k=disc_k or base_layer_k),
                         init_seed=seed + 1)
    return gen, disc


def run_epochs_experiment(
    dataset_root,
    manifest: DatasetManifest,
    out_dir,
    epochs: int = 20,
    base_layer_k: int = 32,
    depth: int = 6,
    batch_size: int = 4,
    seed: int = 0,
    lambda_l1: float = 100.0,
    lr: float = 2e-4,
    disc_k: int | None = None,
    log=None,
) -> list[dict]:
    """Trains once and plots how losses and validation metrics move."""
    os.makedirs(out_dir, exist_ok=True)
    gen, disc = _build_nets(base_layer_k, depth, disc_k, seed)
    config = TrainConfig(epochs=epochs, batch_size=batch_size, lr=lr,
                         lambda_l1=lambda_l1, seed=seed)
    rows = train(dataset_root, manifest, gen, disc, config, out_dir, log=log)
    save_training_curves(os.path.join(out_dir, "epochs_curve.png"), rows)
    return rows


def run_dataset_size_experiment(
    dataset_root,
    manifest: DatasetManifest,
    sizes: list[int],
    out_dir,
    epochs: int = 6,
    base_layer_k: int = 16,
    depth: int = 6,
    batch_size: int = 4,
    seed: int = 0,
    lambda_l1: float = 100.0,
    lr: float = 2e-4,
    disc_k: int | None = None,
    log=None,
) -> list[dict]:
    """Trains on nested training subsets and reports final validation scores.

    Subsets are prefixes of one fixed shuffled order, so every smaller set is
    contained in the larger ones; the validation split stays identical.
    """
    if sorted(sizes) != list(sizes):
        raise ValueError(f"sizes must be ascending, got {sizes}")
    train_frames = manifest.by_split("train")
    if not sizes or sizes[-1] > len(train_frames):
        raise ValueError(
            f"sizes up to {sizes[-1] if sizes else 0} requested "
            f"but only {len(train_frames)} train frames available"
        )
    os.makedirs(out_dir, exist_ok=True)
    order = np.random.default_rng(
        np.random.SeedSequence([manifest.seed, _SUBSET_STREAM])
    ).permutation(len(train_frames))
    val_frames = manifest.by_split("val")
    rows = []
    for size in sizes:
        subset = [train_frames[i] for i in order[:size]]
        sub_manifest = replace(manifest, frames=subset + val_frames)
        run_dir = os.path.join(out_dir, f"size_{size}")
        gen, disc = _build_nets(base_layer_k, depth, disc_k, seed)
        config = TrainConfig(epochs=epochs, batch_size=batch_size, lr=lr,
                             lambda_l1=lambda_l1, seed=seed)
        history = train(dataset_root, sub_manifest, gen, disc, config, run_dir, log=log)
        final = history[-1]
        rows.append(
            {
                "size": size,
                "val_mse": final["val_mse"],
                "val_ssim": final["val_ssim"],
                "seconds": sum(h["seconds"] for h in history),
            }
        )
        if log:
            log(f"size {size}: val_mse={final['val_mse']:.5f} val_ssim={final['val_ssim']:.4f}")
    _write_csv(os.path.join(out_dir, "dataset_size.csv"),
               ("size", "val_mse", "val_ssim", "seconds"), rows)
    save_series(
        os.path.join(out_dir, "dataset_size.png"),
        [r["size"] for r in rows],
        {"val MSE": [r["val_mse"] for r in rows], "val SSIM": [r["val_ssim"] for r in rows]},
        xlabel="training frames",
        ylabel="score",
        title="validation quality vs training set size",
    )
    return rows


def run_base_layer_experiment(
    dataset_root,
    manifest: DatasetManifest,
    ks: list[int],
    out_dir,
    depth: int = 6,
    repeats: int = 3,
    trace_spp: int = 64,
    trace_bounces: int = 8,
    seed: int = 0,
    log=None,
) -> list[dict]:
    """Times per-frame inference across widths against path tracing one frame."""
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    resolution = manifest.resolution
    if resolution != 2**depth:
        raise ValueError(
            f"dataset resolution {resolution} does not match depth {depth} (needs {2**depth})"
        )
    os.makedirs(out_dir, exist_ok=True)
    record = manifest.frames[0]
    pair = load_frame(dataset_root, record)
    scene, camera = cornell_box(
        record.light_angle, record.object_angle, record.object_kind, resolution
    )
    trace_times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        path_trace(scene, camera, spp=trace_spp, max_bounces=trace_bounces, seed=manifest.seed)
        trace_times.append(time.perf_counter() - t0)
    trace_seconds = float(np.median(trace_times))

    rows = []
    for k in ks:
        gen = Generator(GeneratorConfig(k, depth=depth), init_seed=seed)
        infer(gen, pair.x)  # warm caches before timing
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            infer(gen, pair.x)
            times.append(time.perf_counter() - t0)
        infer_seconds = float(np.median(times))
        rows.append(
            {
                "base_layer_k": k,
                "parameters": gen.num_parameters(),
                "infer_seconds": infer_seconds,
                "trace_seconds": trace_seconds,
                "speedup_vs_trace": trace_seconds / infer_seconds,
            }
        )
        if log:
            log(f"K={k}: {infer_seconds*1000:.0f} ms/frame, "
                f"{rows[-1]['speedup_vs_trace']:.1f}x over {trace_spp} spp tracing")
    _write_csv(
        os.path.join(out_dir, "base_layer.csv"),
        ("base_layer_k", "parameters", "infer_seconds", "trace_seconds", "speedup_vs_trace"),
        rows,
    )
    save_series(
        os.path.join(out_dir, "base_layer.png"),
        [r["base_layer_k"] for r in rows],
        {
            "inference": [r["infer_seconds"] for r in rows],
            f"path trace {trace_spp} spp": [r["trace_seconds"] for r in rows],
        },
        xlabel="base layer K",
        ylabel="seconds per frame",
        title="inference cost vs network width",
    )
    return rows
