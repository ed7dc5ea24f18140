"""
Coordinate scaling and response normalization.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np

from ..utils.errors import ParameterError


@dataclass
class CoordinateScaler:
    """
    Min-max scaling of s1, s2 and t to [0, 1].

    Both spatial axes share one scale so spatial distances stay isotropic.
    A constant axis is shifted but not stretched.
    """

    s_min: tuple = (0.0, 0.0)
    s_span: float = 1.0
    t_min: float = 0.0
    t_span: float = 1.0

    @classmethod
    def fit(cls, coords: np.ndarray) -> 'CoordinateScaler':
        coords = np.asarray(coords, dtype=float)
        if coords.shape[0] == 0:
            raise ParameterError("cannot fit a scaler on no rows")
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        s_span = float(max(hi[0] - lo[0], hi[1] - lo[1]))
        t_span = float(hi[2] - lo[2])
        return cls((float(lo[0]), float(lo[1])), s_span if s_span > 0 else 1.0,
                   float(lo[2]), t_span if t_span > 0 else 1.0)

    def _offset_scale(self):
        offset = np.array([self.s_min[0], self.s_min[1], self.t_min])
        scale = np.array([self.s_span, self.s_span, self.t_span])
        return offset, scale

    def transform(self, coords: np.ndarray) -> np.ndarray:
        offset, scale = self._offset_scale()
        return (np.asarray(coords, dtype=float) - offset) / scale

    def inverse(self, coords: np.ndarray) -> np.ndarray:
        offset, scale = self._offset_scale()
        return np.asarray(coords, dtype=float) * scale + offset

    def to_dict(self) -> Dict[str, float]:
        return {"s1_min": self.s_min[0], "s2_min": self.s_min[1], "s_span": self.s_span,
                "t_min": self.t_min, "t_span": self.t_span}

    @classmethod
    def from_dict(cls, values: Dict[str, float]) -> 'CoordinateScaler':
        return cls((float(values["s1_min"]), float(values["s2_min"])), float(values["s_span"]),
                   float(values["t_min"]), float(values["t_span"]))


@dataclass
class ResponseNormalizer:
    """
    Standardization of responses with statistics from the training rows.

    Attributes:
        mean: Training mean
        sd: Training standard deviation (population form)
    """

    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not self.sd > 0:
            raise ParameterError(f"sd must be positive, got {self.sd}")

    @classmethod
    def fit(cls, y: np.ndarray, mask: Optional[np.ndarray] = None) -> 'ResponseNormalizer':
        """
        Fit on the rows selected by mask (all rows when omitted).
        """
        y = np.asarray(y, dtype=float)
        rows = y if mask is None else y[mask]
        if rows.size == 0:
            raise ParameterError("no training rows to normalize on")
        sd = float(np.std(rows))
        return cls(float(np.mean(rows)), sd if sd > 0 else 1.0)

    def transform(self, y):
        return (np.asarray(y, dtype=float) - self.mean) / self.sd

    def inverse(self, z):
        return np.asarray(z, dtype=float) * self.sd + self.mean

    def inverse_scale(self, sd):
        """Map standard deviations or widths back to response units."""
        return np.asarray(sd, dtype=float) * self.sd

    def to_dict(self) -> Dict[str, float]:
        return {f"y_{k}": v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, values: Dict[str, float]) -> 'ResponseNormalizer':
        return cls(float(values["y_mean"]), float(values["y_sd"]))
