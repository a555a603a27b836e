"""Generator / discriminator architectures and their checkpoint format."""

from .config import DiscriminatorConfig, GeneratorConfig
from .generator import Generator, build_generator, generator_forward
from .discriminator import Discriminator, build_discriminator, discriminator_forward
from .checkpoint import (
    Checkpoint,
    CheckpointError,
    apply_state,
    build_from_checkpoint,
    collect_state,
    load_checkpoint,
    save_checkpoint,
)

__all__ = [
    "GeneratorConfig",
    "DiscriminatorConfig",
    "Generator",
    "build_generator",
    "generator_forward",
    "Discriminator",
    "build_discriminator",
    "discriminator_forward",
    "Checkpoint",
    "CheckpointError",
    "collect_state",
    "apply_state",
    "save_checkpoint",
    "load_checkpoint",
    "build_from_checkpoint",
]
