"""Patch discriminator over a condition/image pair."""

from __future__ import annotations

import numpy as np

from ..autodiff import Tensor, RunningStats, batch_norm2d, concat, conv2d, leaky_relu, sigmoid
from .config import DiscriminatorConfig
from .generator import _init_bn, _init_conv, _zero_bias

__all__ = ["Discriminator", "build_discriminator", "discriminator_forward"]

BN_STAGES = (1, 2, 3)  # first and last stages run without batchnorm


class Discriminator:
    """Five conv stages ending in a sigmoid patch-probability map."""

    def __init__(self, config: DiscriminatorConfig, init_seed: int = 0):
        self.config = config
        rng = np.random.default_rng(init_seed)
        self.params: dict[str, Tensor] = {}
        self.stats: dict[str, RunningStats] = {}
        prev = config.in_channels
        for i, c in enumerate(config.stage_channels()):
            self.params[f"d{i}.w"] = _init_conv(rng, c, prev, 4)
            self.params[f"d{i}.b"] = _zero_bias(c)
            if i in BN_STAGES:
                self.params[f"d{i}.gamma"], self.params[f"d{i}.beta"] = _init_bn(rng, c)
                self.stats[f"d{i}"] = RunningStats(c)
            prev = c

    def parameters(self) -> list[Tensor]:
        return [self.params[name] for name in sorted(self.params)]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, condition: Tensor, image: Tensor, training: bool = False) -> Tensor:
        """Patch probability map for (condition, image); mean it for a score."""
        if condition.data.ndim != 4 or image.data.ndim != 4:
            raise ValueError("discriminator inputs must be 4D (N,C,H,W)")
        if condition.data.shape[0] != image.data.shape[0]:
            raise ValueError(
                f"batch sizes differ: condition {condition.data.shape[0]}, "
                f"image {image.data.shape[0]}"
            )
        if condition.data.shape[2:] != image.data.shape[2:]:
            raise ValueError(
                f"spatial sizes differ: condition {condition.data.shape[2:]}, "
                f"image {image.data.shape[2:]}"
            )
        total_c = condition.data.shape[1] + image.data.shape[1]
        if total_c != self.config.in_channels:
            raise ValueError(
                f"condition+image carry {total_c} channels, expected {self.config.in_channels}"
            )
        h = concat([condition, image], axis=1)
        strides = self.config.stage_strides()
        n_stages = len(strides)
        for i in range(n_stages):
            h = conv2d(h, self.params[f"d{i}.w"], self.params[f"d{i}.b"], stride=strides[i], pad=1)
            if i in BN_STAGES:
                h = batch_norm2d(
                    h,
                    self.params[f"d{i}.gamma"],
                    self.params[f"d{i}.beta"],
                    self.stats[f"d{i}"],
                    training,
                )
            h = leaky_relu(h, 0.2) if i < n_stages - 1 else sigmoid(h)
        return h


def build_discriminator(config: DiscriminatorConfig, init_seed: int = 0) -> Discriminator:
    return Discriminator(config, init_seed)


def discriminator_forward(
    disc: Discriminator, condition: Tensor, image: Tensor, training: bool = False
) -> Tensor:
    return disc.forward(condition, image, training=training)
