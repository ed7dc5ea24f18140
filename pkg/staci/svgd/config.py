"""
SVGD configuration.
"""

from dataclasses import dataclass
from typing import Optional

from ..utils.errors import ParameterError

OPTIMIZERS = ("adam", "sgd")


@dataclass
class SVGDConfig:
    """
    Sampler settings.

    Attributes:
        M: Number of particles
        step_size: Learning rate
        epochs: Passes over the training data
        batch_size: Minibatch size
        kernel_bandwidth: Fixed squared bandwidth h^2; None uses the median heuristic
        optimizer: 'adam' (adaptive moments, decoupled weight decay) or 'sgd' (plain step)
        beta1: First-moment decay
        beta2: Second-moment decay
        eps: Denominator floor of the adaptive step
        weight_decay: Decoupled weight decay; never applied to log-hyperparameters
        hyper_step_scale: Step-size multiplier for the log-hyperparameter block
        seed: Master seed for initialization and minibatch order
    """

    M: int = 5
    step_size: float = 1e-3
    epochs: int = 50
    batch_size: int = 256
    kernel_bandwidth: Optional[float] = None
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    hyper_step_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise ParameterError(f"M must be at least 1, got {self.M}")
        if not self.step_size > 0:
            raise ParameterError(f"step_size must be positive, got {self.step_size}")
        if self.epochs < 0:
            raise ParameterError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.kernel_bandwidth is not None and not self.kernel_bandwidth > 0:
            raise ParameterError("kernel_bandwidth must be positive")
        if self.optimizer not in OPTIMIZERS:
            raise ParameterError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ParameterError("beta1 and beta2 must lie in [0, 1)")
        if self.eps <= 0 or self.weight_decay < 0:
            raise ParameterError("eps must be positive and weight_decay non-negative")
        if not self.hyper_step_scale > 0:
            raise ParameterError(f"hyper_step_scale must be positive, got {self.hyper_step_scale}")
