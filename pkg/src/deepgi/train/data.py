"""Frame loading and range mapping between buffers and network tensors.

The generator eats a 12-channel stack: depth replicated to 3 channels, then
encoded normal, diffuse albedo, and the direct pass. Unit-range buffers map
to [-1,1] linearly; radiance buffers clamp to [0,4] first so the tanh output
can represent up to 4x the display peak. Display space for metrics is the
radiance clipped to [0,1].
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..render import FrameRecord, read_dib

__all__ = [
    "INPUT_CHANNELS",
    "unit_to_net",
    "net_to_unit",
    "radiance_to_net",
    "net_to_radiance",
    "radiance_to_display",
    "assemble_input",
    "FramePair",
    "load_frame",
    "load_split",
]

INPUT_CHANNELS = 12
RADIANCE_CLAMP = 4.0


def unit_to_net(x: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=np.float32) * 2.0 - 1.0).astype(np.float32)


def net_to_unit(y: np.ndarray) -> np.ndarray:
    return ((np.asarray(y, dtype=np.float32) + 1.0) * 0.5).astype(np.float32)


def radiance_to_net(x: np.ndarray) -> np.ndarray:
    clamped = np.clip(np.asarray(x, dtype=np.float32), 0.0, RADIANCE_CLAMP)
    return (clamped / (RADIANCE_CLAMP / 2.0) - 1.0).astype(np.float32)


def net_to_radiance(y: np.ndarray) -> np.ndarray:
    return ((np.asarray(y, dtype=np.float32) + 1.0) * (RADIANCE_CLAMP / 2.0)).astype(np.float32)


def radiance_to_display(x: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=np.float32), 0.0, 1.0)


def _chw(img: np.ndarray) -> np.ndarray:
    return np.transpose(img, (2, 0, 1))


def assemble_input(
    depth: np.ndarray, normal: np.ndarray, diffuse: np.ndarray, direct: np.ndarray
) -> np.ndarray:
    """Stacks the four buffers into a (12,H,W) network-range tensor."""
    if depth.ndim == 3:
        depth = depth[:, :, 0]
    h, w = depth.shape
    for name, buf in (("normal", normal), ("diffuse", diffuse), ("direct", direct)):
        if buf.shape != (h, w, 3):
            raise ValueError(f"{name} buffer is {buf.shape}, expected {(h, w, 3)}")
    depth3 = np.repeat(depth[:, :, None], 3, axis=2)
    parts = [
        _chw(unit_to_net(depth3)),
        _chw(unit_to_net(normal)),
        _chw(unit_to_net(diffuse)),
        _chw(radiance_to_net(direct)),
    ]
    return np.concatenate(parts, axis=0).astype(np.float32)


@dataclass
class FramePair:
    index: int
    x: np.ndarray            # (12,H,W) network range
    y: np.ndarray            # (3,H,W) network range
    gt_display: np.ndarray   # (H,W,3) clipped radiance
    direct_display: np.ndarray


def load_frame(root, record: FrameRecord) -> FramePair:
    bufs = {name: read_dib(os.path.join(root, record.paths[name])) for name in record.paths}
    gt = bufs["gt"]
    direct = bufs["direct"]
    x = assemble_input(bufs["depth"], bufs["normal"], bufs["diffuse"], direct)
    return FramePair(
        index=record.index,
        x=x,
        y=_chw(radiance_to_net(gt)),
        gt_display=radiance_to_display(gt),
        direct_display=radiance_to_display(direct),
    )


def load_split(root, manifest, split: str) -> list[FramePair]:
    records = manifest.by_split(split)
    return [load_frame(root, r) for r in records]
