"""
Train/validation/test split protocols.
"""

import logging
import warnings
from typing import Sequence, Tuple

import numpy as np

from ..utils.errors import ParameterError
from .dataset import Dataset

logger = logging.getLogger(__name__)


def split_random(dataset: Dataset, fractions: Tuple[float, float, float] = (0.8, 0.1, 0.1),
                 seed: int = 0) -> Dataset:
    """
    Random row partition.

    Validation and test receive floor(f n) rows each; the remainder trains.

    Args:
        dataset: Unsplit dataset
        fractions: (train, val, test) fractions summing to 1
        seed: Random seed

    Returns:
        Tagged copy of the dataset
    """
    if len(fractions) != 3 or any(f < 0 for f in fractions):
        raise ParameterError("fractions must be three non-negative numbers")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ParameterError(f"fractions must sum to 1, got {sum(fractions)}")
    n = len(dataset)
    if n < 3:
        raise ParameterError(f"need at least 3 rows to split, got {n}")
    n_val = int(np.floor(fractions[1] * n + 1e-9))
    n_test = int(np.floor(fractions[2] * n + 1e-9))
    order = np.random.default_rng(seed).permutation(n)
    tags = np.full(n, "train", dtype=object)
    tags[order[:n_val]] = "val"
    tags[order[n_val:n_val + n_test]] = "test"
    split = dataset.with_split(tags)
    logger.info("random split: %s", split.split_sizes())
    return split


def split_per_time(dataset: Dataset, train_frac: float = 0.1,
                   val_times: Sequence[float] = (), test_times: Sequence[float] = (),
                   seed: int = 0) -> Dataset:
    """
    Per-time-step sampling protocol.

    Rows at ``val_times`` / ``test_times`` are tagged val / test. At every
    other time step round(train_frac * count) rows are drawn for training and
    the rest are tagged 'unused'.

    Args:
        dataset: Unsplit dataset with repeated exact time values
        train_frac: Training fraction per time step
        val_times: Time values held out for validation
        test_times: Time values held out for testing
        seed: Random seed

    Returns:
        Tagged copy of the dataset
    """
    if not 0 < train_frac <= 1:
        raise ParameterError(f"train_frac must lie in (0, 1], got {train_frac}")
    overlap = set(val_times) & set(test_times)
    if overlap:
        raise ParameterError(f"times {sorted(overlap)} are both validation and test")
    t = dataset.coords[:, 2]
    tags = np.full(len(dataset), "unused", dtype=object)
    tags[np.isin(t, list(val_times))] = "val"
    tags[np.isin(t, list(test_times))] = "test"
    held = set(val_times) | set(test_times)
    for time in held:
        if not np.any(t == time):
            warnings.warn(f"time step {time} has no rows; skipped", RuntimeWarning)
            logger.warning("time step %s has no rows", time)

    rng = np.random.default_rng(seed)
    for time in dataset.times:
        if time in held:
            continue
        rows = np.flatnonzero(t == time)
        count = int(round(train_frac * rows.size))
        if count == 0:
            warnings.warn(f"time step {time} yields no training rows", RuntimeWarning)
            logger.warning("time step %s yields no training rows", time)
            continue
        tags[rng.choice(rows, size=count, replace=False)] = "train"
    split = dataset.with_split(tags)
    logger.info("per-time split: %s", split.split_sizes())
    return split
