from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TrainerConfig:
    """Hyperparameters for the dual-branch demo trainer.

    lam weights the twin branch against the view branch; single_branch
    routes both branches through one shared projection head instead of
    two independently updated ones.
    """

    lam: float = 1.0
    temperature: float = 0.1
    learning_rate: float = 0.02
    steps: int = 200
    batch_size: int = 16
    encoder_width: int = 16
    head_depth: int = 2
    seed: int = 0
    single_branch: bool = False

    def __post_init__(self):
        if not (self.lam >= 0):
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if not (self.temperature > 0):
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if not (self.learning_rate > 0):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.batch_size < 2:
            raise ValueError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.encoder_width < 1:
            raise ValueError(f"encoder_width must be >= 1, got {self.encoder_width}")
        if self.head_depth < 1:
            raise ValueError(f"head_depth must be >= 1, got {self.head_depth}")
