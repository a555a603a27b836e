"""Binary checkpoints: configs, parameters, batchnorm buffers, Adam moments.

Layout (little-endian): magic ``DICP``, u32 format version, u32 JSON length
plus a JSON blob holding both configs / epoch / seed / optimizer step counts,
u32 tensor count, then per tensor a u16 name length, the UTF-8 name, a u8
rank, u32 dims, and the raw float32 payload. Tensors are written in sorted
name order so identical state produces identical bytes.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Adam
from .config import DiscriminatorConfig, GeneratorConfig
from .discriminator import Discriminator
from .generator import Generator

__all__ = [
    "Checkpoint",
    "CheckpointError",
    "collect_state",
    "apply_state",
    "save_checkpoint",
    "load_checkpoint",
    "build_from_checkpoint",
]

MAGIC = b"DICP"
FORMAT_VERSION = 1
MAX_RANK = 8


class CheckpointError(Exception):
    """Raised for unreadable, mismatched, or corrupt checkpoint data."""


@dataclass
class Checkpoint:
    meta: dict
    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    version: int = FORMAT_VERSION


def _net_tensors(prefix: str, net: Generator | Discriminator, opt: Adam | None) -> dict:
    out: dict[str, np.ndarray] = {}
    for name, p in net.params.items():
        out[f"{prefix}.{name}"] = p.data
    for name, rs in net.stats.items():
        out[f"{prefix}.stats.{name}.mean"] = rs.mean
        out[f"{prefix}.stats.{name}.var"] = rs.var
    if opt is not None:
        ordered = sorted(net.params)
        if len(ordered) != len(opt.state.m):
            raise CheckpointError(
                f"{prefix}: optimizer tracks {len(opt.state.m)} tensors, "
                f"network has {len(ordered)}"
            )
        for pname, m, v in zip(ordered, opt.state.m, opt.state.v):
            out[f"{prefix}.adam.m.{pname}"] = m
            out[f"{prefix}.adam.v.{pname}"] = v
    return out


def collect_state(
    generator: Generator,
    discriminator: Discriminator | None = None,
    gen_opt: Adam | None = None,
    disc_opt: Adam | None = None,
    epoch: int = 0,
    seed: int = 0,
) -> Checkpoint:
    meta = {
        "generator": generator.config.to_dict(),
        "discriminator": discriminator.config.to_dict() if discriminator else None,
        "epoch": epoch,
        "seed": seed,
        "gen_opt_steps": gen_opt.step_count if gen_opt else None,
        "disc_opt_steps": disc_opt.step_count if disc_opt else None,
    }
    tensors = _net_tensors("gen", generator, gen_opt)
    if discriminator is not None:
        tensors.update(_net_tensors("disc", discriminator, disc_opt))
    return Checkpoint(meta=meta, tensors=tensors)


def save_checkpoint(path: str | os.PathLike, ckpt: Checkpoint) -> None:
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", ckpt.version)
    meta_bytes = json.dumps(ckpt.meta, sort_keys=True, separators=(",", ":")).encode()
    blob += struct.pack("<I", len(meta_bytes))
    blob += meta_bytes
    blob += struct.pack("<I", len(ckpt.tensors))
    for name in sorted(ckpt.tensors):
        arr = np.ascontiguousarray(ckpt.tensors[name], dtype="<f4")
        nb = name.encode()
        blob += struct.pack("<H", len(nb))
        blob += nb
        blob += struct.pack("<B", arr.ndim)
        for dim in arr.shape:
            blob += struct.pack("<I", dim)
        blob += arr.tobytes()
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(blob)
    os.replace(tmp, path)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise CheckpointError(
                f"truncated checkpoint: wanted {n} bytes at offset {self.pos}, "
                f"file has {len(self.buf)}"
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]


def load_checkpoint(path: str | os.PathLike) -> Checkpoint:
    with open(path, "rb") as f:
        buf = f.read()
    r = _Reader(buf)
    if r.take(4) != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: format version {version} unsupported (expected {FORMAT_VERSION})"
        )
    meta_len = r.u32()
    try:
        meta = json.loads(r.take(meta_len).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt metadata block: {e}") from None
    count = r.u32()
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        name = r.take(r.u16()).decode()
        rank = r.u8()
        if rank > MAX_RANK:
            raise CheckpointError(f"{path}: tensor {name!r} has implausible rank {rank}")
        dims = tuple(r.u32() for _ in range(rank))
        n_items = int(np.prod(dims, dtype=np.int64)) if dims else 1
        payload = r.take(4 * n_items)
        tensors[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    if r.pos != len(buf):
        raise CheckpointError(f"{path}: {len(buf) - r.pos} trailing bytes after last tensor")
    return Checkpoint(meta=meta, tensors=tensors, version=version)


def _apply_net(prefix: str, net: Generator | Discriminator, opt: Adam | None, ckpt: Checkpoint):
    expected = _net_tensors(prefix, net, opt)
    stored = {k for k in ckpt.tensors if k.startswith(f"{prefix}.")}
    if opt is None:
        # restoring without an optimizer leaves stored moments untouched
        stored = {k for k in stored if not k.startswith(f"{prefix}.adam.")}
    unknown = stored - expected.keys()
    if unknown:
        raise CheckpointError(f"checkpoint holds unknown tensor names: {sorted(unknown)[:5]}")
    for name, dst in expected.items():
        if name not in ckpt.tensors:
            raise CheckpointError(f"checkpoint missing tensor {name!r}")
        src = ckpt.tensors[name]
        if src.shape != dst.shape:
            raise CheckpointError(
                f"shape mismatch for tensor {name!r}: checkpoint {src.shape}, "
                f"network {dst.shape}"
            )
        dst[...] = src


def apply_state(
    ckpt: Checkpoint,
    generator: Generator | None = None,
    discriminator: Discriminator | None = None,
    gen_opt: Adam | None = None,
    disc_opt: Adam | None = None,
) -> dict:
    """Copy checkpoint tensors into the given nets/optimizers in place.

    Only the provided targets are touched, so a generator-only restore from
    a full training checkpoint is fine. Returns the metadata dict.
    """
    if generator is not None:
        _apply_net("gen", generator, gen_opt, ckpt)
        if gen_opt is not None and ckpt.meta.get("gen_opt_steps") is not None:
            gen_opt.state.step_count = int(ckpt.meta["gen_opt_steps"])
    if discriminator is not None:
        _apply_net("disc", discriminator, disc_opt, ckpt)
        if disc_opt is not None and ckpt.meta.get("disc_opt_steps") is not None:
            disc_opt.state.step_count = int(ckpt.meta["disc_opt_steps"])
    return ckpt.meta


def build_from_checkpoint(ckpt: Checkpoint) -> tuple[Generator, Discriminator | None]:
    """Reconstruct networks from stored configs and load their tensors."""
    if not isinstance(ckpt.meta.get("generator"), dict):
        raise CheckpointError("checkpoint metadata lacks a generator config")
    gen = Generator(GeneratorConfig.from_dict(ckpt.meta["generator"]), init_seed=0)
    disc = None
    if ckpt.meta.get("discriminator"):
        disc = Discriminator(DiscriminatorConfig.from_dict(ckpt.meta["discriminator"]), 0)
    apply_state(ckpt, generator=gen, discriminator=disc)
    return gen, disc
