"""Architecture hyperparameters and the channel ladders they induce."""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["GeneratorConfig", "DiscriminatorConfig"]


@dataclass(frozen=True)
class GeneratorConfig:
    """U-shaped encoder/decoder for 12-channel inputs, 3-channel outputs.

    ``depth`` encoder stages halve a 2^depth square input down to 1x1; the
    decoder mirrors them back up through skip connections. Stage widths are
    base_layer_k doubled per stage and clamped at channel_cap (8x base by
    default), so depth-8 nets do not explode.
    """

    base_layer_k: int
    depth: int = 8
    in_channels: int = 12
    out_channels: int = 3
    channel_cap: int = field(default=0)  # 0 means 8 * base_layer_k

    def __post_init__(self):
        if self.base_layer_k < 1:
            raise ValueError(f"base_layer_k must be >= 1, got {self.base_layer_k}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.in_channels < 1 or self.out_channels < 1:
            raise ValueError("channel counts must be >= 1")
        if self.channel_cap == 0:
            object.__setattr__(self, "channel_cap", 8 * self.base_layer_k)
        if self.channel_cap < self.base_layer_k:
            raise ValueError(
                f"channel_cap {self.channel_cap} below base_layer_k {self.base_layer_k}"
            )

    @property
    def resolution(self) -> int:
        return 2**self.depth

    def encoder_channels(self) -> list[int]:
        return [min(self.base_layer_k * 2**i, self.channel_cap) for i in range(self.depth)]

    def decoder_channels(self) -> list[int]:
        enc = self.encoder_channels()
        return [enc[self.depth - 2 - j] for j in range(self.depth - 1)] + [self.out_channels]

    def to_dict(self) -> dict:
        return {
            "base_layer_k": self.base_layer_k,
            "depth": self.depth,
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "channel_cap": self.channel_cap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(**d)


@dataclass(frozen=True)
class DiscriminatorConfig:
    """Five-stage patch classifier over condition+image (12+3 channels).

    Channel ladder k, 2k, 4k, 8k, 1 with strides 2,2,2,1,1: three halvings
    then two stride-1 stages, so each output cell judges one receptive-field
    patch of the input pair.
    """

    base_layer_k: int = 64
    num_encoders: int = 5
    in_channels: int = 15

    def __post_init__(self):
        if self.base_layer_k < 1:
            raise ValueError(f"base_layer_k must be >= 1, got {self.base_layer_k}")
        if self.num_encoders != 5:
            raise ValueError(
                f"only the 5-stage ladder (k,2k,4k,8k,1) is defined, got {self.num_encoders}"
            )
        if self.in_channels < 1:
            raise ValueError("in_channels must be >= 1")

    def stage_channels(self) -> list[int]:
        k = self.base_layer_k
        return [k, 2 * k, 4 * k, 8 * k, 1]

    def stage_strides(self) -> list[int]:
        return [2, 2, 2, 1, 1]

    def to_dict(self) -> dict:
        return {
            "base_layer_k": self.base_layer_k,
            "num_encoders": self.num_encoders,
            "in_channels": self.in_channels,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiscriminatorConfig":
        return cls(**d)
