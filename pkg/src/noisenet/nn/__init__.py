"""From-scratch tensor layers, the classification network, Adam, and checkpoints."""

from .adam import AdamState, adam_step
from .checkpoint import load_checkpoint, load_checkpoint_full, save_checkpoint
from .gradcheck import GradCheckReport, gradient_check
from .network import (
    INFER,
    PARAM_NAMES,
    STAT_NAMES,
    TRAIN,
    Network,
    NetworkConfig,
    backward,
    batch_arrays,
    forward,
    forward_arrays,
    init_network,
    training_loss,
)

__all__ = [
    "AdamState",
    "adam_step",
    "load_checkpoint",
    "load_checkpoint_full",
    "save_checkpoint",
    "GradCheckReport",
    "gradient_check",
    "INFER",
    "PARAM_NAMES",
    "STAT_NAMES",
    "TRAIN",
    "Network",
    "NetworkConfig",
    "backward",
    "batch_arrays",
    "forward",
    "forward_arrays",
    "init_network",
    "training_loss",
]
