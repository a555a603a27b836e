"""U-shaped generator: 12-channel buffers in, 3-channel image out."""

from __future__ import annotations

import numpy as np

from ..autodiff import (
    Tensor,
    RunningStats,
    batch_norm2d,
    concat,
    conv2d,
    conv_transpose2d,
    dropout,
    leaky_relu,
    relu,
    scale,
    tanh,
)
from .config import GeneratorConfig

__all__ = ["Generator", "build_generator", "generator_forward"]

DROPOUT_STAGES = 3  # first decoder stages carrying dropout 0.5 in train mode
DROPOUT_P = 0.5


def _init_conv(rng: np.random.Generator, out_c: int, in_c: int, k: int) -> Tensor:
    w = rng.normal(0.0, 0.02, size=(out_c, in_c, k, k)).astype(np.float32)
    return Tensor(w, requires_grad=True)


def _init_bn(rng: np.random.Generator, c: int) -> tuple[Tensor, Tensor]:
    gamma = Tensor(rng.normal(1.0, 0.02, size=c).astype(np.float32), requires_grad=True)
    beta = Tensor(np.zeros(c, dtype=np.float32), requires_grad=True)
    return gamma, beta


def _zero_bias(c: int) -> Tensor:
    return Tensor(np.zeros(c, dtype=np.float32), requires_grad=True)


class Generator:
    """Parameter set plus forward pass for the encoder/decoder network.

    Parameters live in ``params`` under stable names (enc0.w, dec3.gamma, ...)
    and batchnorm running statistics in ``stats``; checkpointing flattens
    both by name.
    """

    def __init__(self, config: GeneratorConfig, init_seed: int = 0):
        self.config = config
        rng = np.random.default_rng(init_seed)
        self.params: dict[str, Tensor] = {}
        self.stats: dict[str, RunningStats] = {}

        enc = config.encoder_channels()
        prev = config.in_channels
        for i, c in enumerate(enc):
            self.params[f"enc{i}.w"] = _init_conv(rng, c, prev, 4)
            self.params[f"enc{i}.b"] = _zero_bias(c)
            if i > 0:
                self.params[f"enc{i}.gamma"], self.params[f"enc{i}.beta"] = _init_bn(rng, c)
                self.stats[f"enc{i}"] = RunningStats(c)
            prev = c

        dec = config.decoder_channels()
        d = config.depth
        prev = enc[d - 1]
        for j, c in enumerate(dec):
            in_c = prev if j == 0 else prev + enc[d - 1 - j]
            # transposed-conv weights are (in, out, k, k)
            w = rng.normal(0.0, 0.02, size=(in_c, c, 4, 4)).astype(np.float32)
            self.params[f"dec{j}.w"] = Tensor(w, requires_grad=True)
            self.params[f"dec{j}.b"] = _zero_bias(c)
            if j < d - 1:
                self.params[f"dec{j}.gamma"], self.params[f"dec{j}.beta"] = _init_bn(rng, c)
                self.stats[f"dec{j}"] = RunningStats(c)
            prev = c

    def parameters(self) -> list[Tensor]:
        return [self.params[name] for name in sorted(self.params)]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(
        self,
        x: Tensor,
        training: bool = False,
        rng: np.random.Generator | None = None,
        skip_mask: tuple[bool, ...] | None = None,
    ) -> Tensor:
        cfg = self.config
        if x.data.ndim != 4 or x.data.shape[1] != cfg.in_channels:
            raise ValueError(
                f"generator expects N x {cfg.in_channels} x S x S input, got {x.data.shape}"
            )
        s = cfg.resolution
        if x.data.shape[2] != s or x.data.shape[3] != s:
            raise ValueError(
                f"input {x.data.shape[2]}x{x.data.shape[3]} incompatible with depth "
                f"{cfg.depth} (needs {s}x{s})"
            )
        if training and rng is None:
            raise ValueError("train-mode forward needs an rng for dropout")
        n_skips = cfg.depth - 1
        if skip_mask is None:
            skip_mask = (True,) * n_skips
        elif len(skip_mask) != n_skips:
            raise ValueError(f"skip_mask needs {n_skips} entries, got {len(skip_mask)}")

        enc_outs: list[Tensor] = []
        h = x
        for i in range(cfg.depth):
            h = conv2d(h, self.params[f"enc{i}.w"], self.params[f"enc{i}.b"], stride=2, pad=1)
            if i > 0:
                h = batch_norm2d(
                    h,
                    self.params[f"enc{i}.gamma"],
                    self.params[f"enc{i}.beta"],
                    self.stats[f"enc{i}"],
                    training,
                )
            h = leaky_relu(h, 0.2)
            enc_outs.append(h)

        for j in range(cfg.depth):
            if j > 0:
                skip = enc_outs[cfg.depth - 1 - j]
                if not skip_mask[j - 1]:
                    skip = scale(skip, 0.0)
                h = concat([h, skip], axis=1)
            h = conv_transpose2d(
                h, self.params[f"dec{j}.w"], self.params[f"dec{j}.b"], stride=2, pad=1
            )
            if j < cfg.depth - 1:
                h = batch_norm2d(
                    h,
                    self.params[f"dec{j}.gamma"],
                    self.params[f"dec{j}.beta"],
                    self.stats[f"dec{j}"],
                    training,
                )
                if j < DROPOUT_STAGES:
                    h = dropout(h, DROPOUT_P, training, rng)
                h = relu(h)
            else:
                h = tanh(h)
        return h


def build_generator(config: GeneratorConfig, init_seed: int = 0) -> Generator:
    return Generator(config, init_seed)


def generator_forward(
    gen: Generator,
    x: Tensor,
    training: bool = False,
    rng: np.random.Generator | None = None,
    skip_mask: tuple[bool, ...] | None = None,
) -> Tensor:
    return gen.forward(x, training=training, rng=rng, skip_mask=skip_mask)
