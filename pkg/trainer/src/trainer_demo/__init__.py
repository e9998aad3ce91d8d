"""Toy dual-branch contrastive trainer driven by a twin-dictionary file."""

from .config import TrainerConfig
from .data import (
    PairedDataset,
    dataset_from_twin_file,
    load_twin_pairs,
    two_cluster_dataset,
)
from .model import MLP
from .objectives import nt_xent
from .train import StepRecord, TrainingLog, evaluate_twin_alignment, train

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "TrainerConfig",
    "PairedDataset",
    "load_twin_pairs",
    "two_cluster_dataset",
    "dataset_from_twin_file",
    "MLP",
    "nt_xent",
    "StepRecord",
    "TrainingLog",
    "train",
    "evaluate_twin_alignment",
]
