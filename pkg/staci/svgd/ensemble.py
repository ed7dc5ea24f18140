"""
Particle ensembles and their on-disk form.
"""

import struct
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..model.network import StaciModel
from ..model.particle import Particle
from ..utils.config import config_hash, derive_seeds
from ..utils.errors import DataError, ShapeError
from ..utils.serialization import (pack_array, pack_bytes, pack_header, unpack_array,
                                   unpack_bytes, unpack_header)

ENSEMBLE_MAGIC = b"STACIENS"
_COUNTS = struct.Struct("<QQ")


@dataclass
class Ensemble:
    """
    M particles stored as rows of a matrix, with the optimizer state.

    Attributes:
        theta: (M, dim) flat particles
        m: First-moment accumulators
        v: Second-moment accumulators
        step: Number of updates applied
        encodings: Per-particle frozen encodings (ffng), outside the flat vector
        log_joint: Per-particle log joint seen by the latest update
    """

    theta: np.ndarray
    m: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    step: int = 0
    encodings: List[Optional[np.ndarray]] = field(default_factory=list)
    log_joint: Optional[np.ndarray] = None

    def __post_init__(self):
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        if self.theta.shape[0] < 1:
            raise ShapeError("an ensemble needs at least one particle")
        if self.m is None:
            self.m = np.zeros_like(self.theta)
        if self.v is None:
            self.v = np.zeros_like(self.theta)
        if self.m.shape != self.theta.shape or self.v.shape != self.theta.shape:
            raise ShapeError("optimizer state must match the particle matrix")
        if not self.encodings:
            self.encodings = [None] * self.M
        if len(self.encodings) != self.M:
            raise ShapeError("one encoding slot per particle required")

    @property
    def M(self) -> int:
        return self.theta.shape[0]

    @property
    def dim(self) -> int:
        return self.theta.shape[1]

    def copy(self) -> 'Ensemble':
        return Ensemble(self.theta.copy(), self.m.copy(), self.v.copy(), self.step,
                        [None if e is None else e.copy() for e in self.encodings],
                        None if self.log_joint is None else self.log_joint.copy())

    @classmethod
    def from_particles(cls, model: StaciModel, particles: Sequence[Particle]) -> 'Ensemble':
        """Stack particles into an ensemble with fresh optimizer state."""
        theta = np.vstack([model.to_vector(p) for p in particles])
        encodings = [None if p.inr is None else p.inr.encoding for p in particles]
        return cls(theta, encodings=encodings)

    def particles(self, model: StaciModel) -> List[Particle]:
        """Unflatten every row into a Particle."""
        return [model.from_vector(self.theta[i], self.encodings[i]) for i in range(self.M)]


def init_ensemble(model: StaciModel, M: int, seed: int) -> Ensemble:
    """Draw M initial particles with seeds split from the master seed."""
    seeds = derive_seeds(seed, M)
    return Ensemble.from_particles(model, [model.init_particle(s) for s in seeds])


def save_ensemble(path: str, model: StaciModel, ensemble: Ensemble) -> None:
    """
    Write an ensemble file: header, counts, one particle blob per particle,
    then the optimizer moments so training can resume.
    """
    parts = [pack_header(ENSEMBLE_MAGIC, config_hash(model.config)),
             _COUNTS.pack(ensemble.M, ensemble.step)]
    for particle in ensemble.particles(model):
        parts.append(pack_bytes(model.save_particle(particle)))
    parts.append(pack_array(ensemble.m))
    parts.append(pack_array(ensemble.v))
    with open(path, "wb") as f:
        f.write(b"".join(parts))


def load_ensemble(path: str, model: StaciModel) -> Ensemble:
    """Read an ensemble file written by :func:`save_ensemble`."""
    with open(path, "rb") as f:
        blob = f.read()
    digest, offset = unpack_header(blob, ENSEMBLE_MAGIC)
    if digest != config_hash(model.config):
        raise DataError(f"{path} was written for a different model configuration")
    if len(blob) < offset + _COUNTS.size:
        raise DataError("blob is truncated")
    M, step = _COUNTS.unpack_from(blob, offset)
    offset += _COUNTS.size
    particles = []
    for _ in range(M):
        payload, offset = unpack_bytes(blob, offset)
        particle, _ = model.load_particle(payload)
        particles.append(particle)
    ensemble = Ensemble.from_particles(model, particles)
    m, offset = unpack_array(blob, offset)
    v, offset = unpack_array(blob, offset)
    if m.size != ensemble.theta.size or v.size != ensemble.theta.size:
        raise DataError("optimizer state does not match the ensemble")
    ensemble.m = m.reshape(ensemble.theta.shape)
    ensemble.v = v.reshape(ensemble.theta.shape)
    ensemble.step = int(step)
    return ensemble
