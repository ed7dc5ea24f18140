"""
SVGD Updates and Training Loop

Each step moves every particle along

    phi(theta_i) = (1/M) sum_j [k(theta_j, theta_i) grad log p(theta_j)
                                + grad_{theta_j} k(theta_j, theta_i)]

either directly (``sgd``) or through adaptive moments that treat -phi as the
gradient (``adam``).
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import pandas as pd

from ..model.config import ModelConfig
from ..model.network import StaciModel
from ..utils.config import derive_seeds
from ..utils.errors import NumericalError, ParameterError
from .config import SVGDConfig
from .ensemble import Ensemble, init_ensemble
from .kernel import rbf_kernel
from .targets import ModelTarget

logger = logging.getLogger(__name__)

Schedule = Callable[[int], float]


def stein_direction(theta: np.ndarray, scores: np.ndarray,
                    bandwidth: Optional[float] = None) -> np.ndarray:
    """
    Stein perturbation for every particle.

    Args:
        theta: (M, dim) particles
        scores: (M, dim) log-density gradients at the particles
        bandwidth: Fixed squared bandwidth, or None for the median heuristic

    Returns:
        (M, dim) directions
    """
    terms = rbf_kernel(theta, bandwidth)
    return (terms.K @ scores + terms.repulsion) / theta.shape[0]


def svgd_direction(ensemble: Ensemble, target, idx=None,
                   bandwidth: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Score the ensemble on a minibatch and form the Stein perturbation.

    Args:
        ensemble: Current particles
        target: Log-density target
        idx: Minibatch row indices into the target's data
        bandwidth: Fixed squared bandwidth, or None for the median heuristic

    Returns:
        (phi, per-particle log densities)
    """
    values, scores = target.score(ensemble.theta, idx)
    for i in range(ensemble.M):
        if not np.isfinite(values[i]) or not np.all(np.isfinite(scores[i])):
            raise NumericalError("non-finite log joint or gradient", where=f"particle {i}")
    return stein_direction(ensemble.theta, scores, bandwidth), values


def apply_update(ensemble: Ensemble, phi: np.ndarray, config: SVGDConfig,
                 lr: Optional[float] = None, trainable_mask: Optional[np.ndarray] = None,
                 decay_mask: Optional[np.ndarray] = None,
                 lr_scale: Optional[np.ndarray] = None) -> Ensemble:
    """
    Move the particles along phi with the configured optimizer.

    Args:
        ensemble: Current particles; left untouched
        phi: (M, dim) perturbation
        config: Sampler settings
        lr: Step size for this update; defaults to ``config.step_size``
        trainable_mask: Entries allowed to move
        decay_mask: Entries subject to weight decay
        lr_scale: Per-entry multiplier of the step size

    Returns:
        Updated copy of the ensemble
    """
    lr = config.step_size if lr is None else lr
    if lr_scale is not None:
        lr = lr * lr_scale
    out = ensemble.copy()
    out.step += 1
    if trainable_mask is not None:
        phi = phi * trainable_mask

    if config.optimizer == "sgd":
        out.theta = out.theta + lr * phi
    else:
        g = -phi
        t = out.step
        out.m = config.beta1 * out.m + (1.0 - config.beta1) * g
        out.v = config.beta2 * out.v + (1.0 - config.beta2) * g * g
        m_hat = out.m / (1.0 - config.beta1 ** t)
        v_hat = out.v / (1.0 - config.beta2 ** t)
        update = lr * m_hat / (np.sqrt(v_hat) + config.eps)
        if config.weight_decay > 0:
            decay = lr * config.weight_decay * out.theta
            if decay_mask is not None:
                decay = decay * decay_mask
            if trainable_mask is not None:
                decay = decay * trainable_mask
            update = update + decay
        out.theta = out.theta - update

    bad = ~np.all(np.isfinite(out.theta), axis=1)
    if bad.any():
        raise NumericalError("particle diverged", where=f"particle {int(np.argmax(bad))}")
    return out


def svgd_step(ensemble: Ensemble, target, idx, config: SVGDConfig,
              lr: Optional[float] = None) -> Ensemble:
    """
    One SVGD iteration on a minibatch.

    Entries flagged by the target's ``hyper_mask`` move with the step size
    multiplied by ``config.hyper_step_scale``.

    Returns:
        Updated ensemble carrying the log densities seen by this step
    """
    phi, values = svgd_direction(ensemble, target, idx, config.kernel_bandwidth)
    hyper = getattr(target, "hyper_mask", None)
    lr_scale = None
    if hyper is not None and config.hyper_step_scale != 1.0:
        lr_scale = np.where(hyper, config.hyper_step_scale, 1.0)
    out = apply_update(ensemble, phi, config, lr, getattr(target, "trainable_mask", None),
                       getattr(target, "decay_mask", None), lr_scale)
    out.log_joint = values
    return out


@dataclass
class TrainResult:
    """Trained ensemble and per-epoch trace."""

    ensemble: Ensemble
    trace: pd.DataFrame


class Trainer:
    """
    Epoch loop over shuffled minibatches.

    Attributes:
        target: Log-density target
        config: Sampler settings
        schedule: Optional map from step number to step size
    """

    def __init__(self, target, config: SVGDConfig, schedule: Optional[Schedule] = None):
        self.target = target
        self.config = config
        self.schedule = schedule

    def _lr(self, step: int) -> float:
        if self.schedule is None:
            return self.config.step_size
        lr = float(self.schedule(step))
        if not lr > 0:
            raise ParameterError(f"schedule returned a non-positive step size at step {step}")
        return lr

    def batches(self, rng: np.random.Generator):
        """Index arrays covering one shuffled pass over the target's rows."""
        n = self.target.n
        order = rng.permutation(n)
        size = min(self.config.batch_size, n)
        for start in range(0, n, size):
            yield order[start:start + size]

    def run(self, ensemble: Ensemble, epochs: Optional[int] = None) -> TrainResult:
        """
        Train for a number of epochs.

        Args:
            ensemble: Starting particles
            epochs: Overrides ``config.epochs``

        Returns:
            TrainResult; zero epochs return the starting ensemble unchanged
        """
        epochs = self.config.epochs if epochs is None else epochs
        shuffle_seq = np.random.SeedSequence(self.config.seed).spawn(2)[1]
        epoch_seqs = shuffle_seq.spawn(epochs) if epochs else []
        rows = []
        for epoch, seq in enumerate(epoch_seqs, start=1):
            rng = np.random.default_rng(seq)
            seen = []
            for idx in self.batches(rng):
                ensemble = svgd_step(ensemble, self.target, idx, self.config,
                                     self._lr(ensemble.step))
                seen.append(ensemble.log_joint.mean())
            row = {"epoch": epoch, "mean_log_joint": float(np.mean(seen))}
            row.update(self.target.summarize(ensemble.theta))
            rows.append(row)
            logger.info("epoch %d/%d: mean log joint %.6g", epoch, epochs, row["mean_log_joint"])
        columns = ["epoch", "mean_log_joint"]
        trace = pd.DataFrame(rows) if rows else pd.DataFrame(columns=columns)
        return TrainResult(ensemble, trace)


def train(data, config: SVGDConfig, model_config: Optional[ModelConfig] = None, y=None,
          schedule: Optional[Schedule] = None, workers: Optional[int] = None,
          ensemble: Optional[Ensemble] = None) -> Tuple[StaciModel, TrainResult]:
    """
    Fit a STACI model by SVGD.

    Args:
        data: Training STPoints, or coordinates together with y
        config: Sampler settings
        model_config: Network configuration; defaults to ``ModelConfig()``
        y: Responses when data is a coordinate array
        schedule: Optional step-size schedule
        workers: Threads for per-particle gradients; defaults to STACI_WORKERS
        ensemble: Resume from this ensemble instead of a fresh initialization

    Returns:
        (model, TrainResult)
    """
    model = StaciModel(model_config)
    if ensemble is None:
        init_seed = derive_seeds(config.seed, 2)[0]
        ensemble = init_ensemble(model, config.M, init_seed)
    target = ModelTarget(model, data, y, ensemble.encodings, workers)
    if target.n == 0:
        raise ParameterError("training data is empty")
    logger.info("training %s with M=%d on %d points", model.describe(), ensemble.M, target.n)
    return model, Trainer(target, config, schedule).run(ensemble)
