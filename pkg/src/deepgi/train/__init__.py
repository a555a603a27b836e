"""Training pipeline: data loading, the adversarial loop, and experiments."""

from .data import (
    INPUT_CHANNELS,
    FramePair,
    assemble_input,
    load_frame,
    load_split,
    net_to_radiance,
    net_to_unit,
    radiance_to_display,
    radiance_to_net,
    unit_to_net,
)
from .experiments import (
    run_base_layer_experiment,
    run_dataset_size_experiment,
    run_epochs_experiment,
)
from .figures import save_preview, save_series, save_training_curves
from .loop import (
    CHECKPOINT_NAME,
    STATS_COLUMNS,
    StepStats,
    TrainConfig,
    infer,
    train,
    train_step,
    validate,
)

__all__ = [
    "CHECKPOINT_NAME",
    "INPUT_CHANNELS",
    "FramePair",
    "STATS_COLUMNS",
    "StepStats",
    "TrainConfig",
    "assemble_input",
    "infer",
    "load_frame",
    "load_split",
    "net_to_radiance",
    "net_to_unit",
    "radiance_to_display",
    "radiance_to_net",
    "run_base_layer_experiment",
    "run_dataset_size_experiment",
    "run_epochs_experiment",
    "save_preview",
    "save_series",
    "save_training_curves",
    "train",
    "train_step",
    "unit_to_net",
    "validate",
]
