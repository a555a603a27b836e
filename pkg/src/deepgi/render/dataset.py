"""Dataset generation: frame rendering, raster IO, manifest, and splits.

A dataset is a directory of little-endian float32 rasters plus a manifest
text file listing one frame per line. The manifest is written last and
atomically, so a directory containing one is complete by construction.
Frames are seeded individually from (dataset seed, frame index), which makes
regeneration bit-identical no matter how many workers rendered it.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .scene import OBJECT_KINDS, cornell_box
from .trace import path_trace, raycast_gbuffers, render_direct

__all__ = [
    "BUFFER_NAMES",
    "GBufferFrame",
    "FrameRecord",
    "DatasetManifest",
    "write_dib",
    "read_dib",
    "render_frame",
    "generate_dataset",
    "split_dataset",
    "write_manifest",
    "read_manifest",
    "MANIFEST_NAME",
]

BUFFER_NAMES = ("depth", "normal", "diffuse", "direct", "gt")
MANIFEST_NAME = "manifest.txt"
MANIFEST_HEADER = "# deepgi-dataset v1"

DIB_MAGIC = b"DIB1"
_DIB_HEADER = struct.Struct("<4sIII")
_MAX_PIXELS = 1 << 30

SPLITS = ("train", "val", "test")
UNSPLIT = "-"

_VAL_STREAM = 1_000_003  # keeps val selection decoupled from render sampling


def write_dib(path, array: np.ndarray) -> None:
    a = np.asarray(array, dtype=np.float32)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3:
        raise ValueError(f"raster must be (H,W) or (H,W,C), got shape {array.shape}")
    h, w, c = a.shape
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(_DIB_HEADER.pack(DIB_MAGIC, h, w, c))
        f.write(np.ascontiguousarray(a, dtype="<f4").tobytes())
    os.replace(tmp, path)


def read_dib(path) -> np.ndarray:
    """Returns (H,W,C) float32. Raises ValueError on any malformed file."""
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < _DIB_HEADER.size:
        raise ValueError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, h, w, c = _DIB_HEADER.unpack_from(blob)
    if magic != DIB_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if h < 1 or w < 1 or c < 1 or h * w * c > _MAX_PIXELS:
        raise ValueError(f"{path}: implausible dimensions {h}x{w}x{c}")
    expected = _DIB_HEADER.size + h * w * c * 4
    if len(blob) < expected:
        raise ValueError(f"{path}: truncated payload, {len(blob)} of {expected} bytes")
    if len(blob) > expected:
        raise ValueError(f"{path}: {len(blob) - expected} trailing bytes")
    return (
        np.frombuffer(blob, dtype="<f4", offset=_DIB_HEADER.size)
        .reshape(h, w, c)
        .astype(np.float32)
    )


@dataclass
class GBufferFrame:
    """One rendered frame: inputs, direct pass, and path-traced ground truth."""

    depth: np.ndarray    # (H,W) in [0,1]
    normal: np.ndarray   # (H,W,3) encoded to [0,1], zero on background
    diffuse: np.ndarray  # (H,W,3) albedo, zero on background
    direct: np.ndarray   # (H,W,3) linear radiance
    gt: np.ndarray       # (H,W,3) linear radiance


@dataclass
class FrameRecord:
    index: int
    light_angle: float
    object_angle: float
    object_kind: str
    split: str
    paths: dict[str, str]  # buffer name -> relative file name


@dataclass
class DatasetManifest:
    seed: int
    spp: int
    resolution: int
    scene_hash: str
    frames: list[FrameRecord]

    def by_split(self, split: str) -> list[FrameRecord]:
        return [f for f in self.frames if f.split == split]


def render_frame(
    light_angle: float,
    object_angle: float,
    object_kind: str,
    resolution: int,
    spp: int,
    max_bounces: int,
    frame_seed: int,
) -> GBufferFrame:
    scene, camera = cornell_box(light_angle, object_angle, object_kind, resolution)
    depth, normal, diffuse = raycast_gbuffers(scene, camera)
    direct = render_direct(scene, camera)
    gt = path_trace(scene, camera, spp=spp, max_bounces=max_bounces, seed=frame_seed)
    return GBufferFrame(depth=depth, normal=normal, diffuse=diffuse, direct=direct, gt=gt)


def _frame_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _render_job(args) -> int:
    (out_dir, index, light_angle, object_angle, kind, resolution, spp, max_bounces, seed) = args
    frame = render_frame(
        light_angle, object_angle, kind, resolution, spp, max_bounces, _frame_seed(seed, index)
    )
    for name in BUFFER_NAMES:
        write_dib(os.path.join(out_dir, f"{index:05d}_{name}.dib"), getattr(frame, name))
    return index


def _worker_count(n_jobs: int, workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("DEEPGI_THREADS", "")
        workers = int(env) if env.strip() else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return min(workers, n_jobs)


def sweep_angles(light_steps: int, object_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Light covers [0,180] inclusive; object rotation wraps so 360 is excluded.

    A single light step sits at mid-arc instead of the grazing 0-degree end.
    """
    if light_steps < 1 or object_steps < 1:
        raise ValueError("light_steps and object_steps must be >= 1")
    lights = np.array([90.0]) if light_steps == 1 else np.linspace(0.0, 180.0, light_steps)
    objects = np.arange(object_steps) * (360.0 / object_steps)
    return lights, objects


def generate_dataset(
    out_dir,
    light_steps: int,
    object_steps: int,
    object_kinds=("sphere", "cube"),
    spp: int = 64,
    resolution: int = 64,
    seed: int = 0,
    max_bounces: int = 8,
    workers: int | None = None,
) -> DatasetManifest:
    """Renders the full sweep grid and writes the manifest last."""
    kinds = tuple(object_kinds)
    if not kinds:
        raise ValueError("object_kinds must not be empty")
    for k in kinds:
        if k not in OBJECT_KINDS:
            raise ValueError(f"unknown object kind {k!r}, expected one of {OBJECT_KINDS}")
    lights, objects = sweep_angles(light_steps, object_steps)

    os.makedirs(out_dir, exist_ok=True)
    jobs = []
    records = []
    index = 0
    for kind in kinds:
        for la in lights:
            for oa in objects:
                jobs.append(
                    (str(out_dir), index, float(la), float(oa), kind,
                     resolution, spp, max_bounces, seed)
                )
                records.append(
                    FrameRecord(
                        index=index,
                        light_angle=float(la),
                        object_angle=float(oa),
                        object_kind=kind,
                        split=UNSPLIT,
                        paths={n: f"{index:05d}_{n}.dib" for n in BUFFER_NAMES},
                    )
                )
                index += 1

    nworkers = _worker_count(len(jobs), workers)
    if nworkers == 1:
        for job in jobs:
            _render_job(job)
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            for _ in pool.map(_render_job, jobs):
                pass

    scene, camera = cornell_box(float(lights[0]), float(objects[0]), kinds[0], resolution)
    manifest = DatasetManifest(
        seed=seed,
        spp=spp,
        resolution=resolution,
        scene_hash=scene.hash(camera),
        frames=records,
    )
    write_manifest(manifest, os.path.join(out_dir, MANIFEST_NAME))
    return manifest


def split_dataset(
    manifest: DatasetManifest,
    holdout: tuple[float, float] | None,
    val_fraction: float,
) -> DatasetManifest:
    """Assigns splits: light angles inside the holdout interval become test,
    a deterministic fraction of the rest becomes val, the remainder train."""
    if not 0.0 <= val_fraction < 1.0:
        raise ValueError(f"val_fraction must be in [0, 1), got {val_fraction}")
    if holdout is not None and holdout[0] > holdout[1]:
        raise ValueError(f"holdout interval is empty: {holdout}")
    frames = [replace(f) for f in manifest.frames]
    remaining = []
    for f in frames:
        if holdout is not None and holdout[0] <= f.light_angle <= holdout[1]:
            f.split = "test"
        else:
            remaining.append(f)
    if not remaining:
        raise ValueError("holdout interval covers every frame, nothing left to train on")
    rng = np.random.default_rng(np.random.SeedSequence([manifest.seed, _VAL_STREAM]))
    order = rng.permutation(len(remaining))
    n_val = int(round(val_fraction * len(remaining)))
    val_slots = set(order[:n_val].tolist())
    for i, f in enumerate(remaining):
        f.split = "val" if i in val_slots else "train"
    return replace(manifest, frames=frames)


def write_manifest(manifest: DatasetManifest, path) -> None:
    lines = [
        MANIFEST_HEADER,
        f"# seed {manifest.seed}",
        f"# spp {manifest.spp}",
        f"# resolution {manifest.resolution}",
        f"# scene {manifest.scene_hash}",
    ]
    for f in manifest.frames:
        fields = [
            str(f.index), repr(f.light_angle), repr(f.object_angle), f.object_kind, f.split,
        ] + [f.paths[n] for n in BUFFER_NAMES]
        lines.append(" ".join(fields))
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def _header_int(line: str, key: str, path) -> int:
    parts = line.split()
    if len(parts) != 3 or parts[0] != "#" or parts[1] != key:
        raise ValueError(f"{path}: expected '# {key} <value>' line, got {line!r}")
    return int(parts[2])


def read_manifest(path) -> DatasetManifest:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if len(lines) < 5 or lines[0] != MANIFEST_HEADER:
        raise ValueError(f"{path}: not a dataset manifest (missing '{MANIFEST_HEADER}')")
    seed = _header_int(lines[1], "seed", path)
    spp = _header_int(lines[2], "spp", path)
    resolution = _header_int(lines[3], "resolution", path)
    scene_parts = lines[4].split()
    if len(scene_parts) != 3 or scene_parts[:2] != ["#", "scene"]:
        raise ValueError(f"{path}: expected '# scene <hash>' line, got {lines[4]!r}")
    frames = []
    for ln in lines[5:]:
        parts = ln.split()
        if len(parts) != 5 + len(BUFFER_NAMES):
            raise ValueError(f"{path}: malformed record {ln!r}")
        index, la, oa, kind, split = parts[:5]
        if split not in SPLITS and split != UNSPLIT:
            raise ValueError(f"{path}: unknown split label {split!r}")
        frames.append(
            FrameRecord(
                index=int(index),
                light_angle=float(la),
                object_angle=float(oa),
                object_kind=kind,
                split=split,
                paths=dict(zip(BUFFER_NAMES, parts[5:])),
            )
        )
    return DatasetManifest(
        seed=seed, spp=spp, resolution=resolution, scene_hash=scene_parts[2], frames=frames
    )
