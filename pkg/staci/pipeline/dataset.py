"""
Space-Time Datasets

Loading, validation and export of (s1, s2, t, y) tables with optional
train/val/test tags.
"""

import logging
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from ..kernels.matern import STPoint, as_coords
from ..utils.errors import DataError, ParameterError, ShapeError

logger = logging.getLogger(__name__)

COLUMNS = ("s1", "s2", "t", "y")
SPLIT_TAGS = ("train", "val", "test", "unused")


class Dataset:
    """
    A table of space-time observations.

    Attributes:
        coords: (n, 3) coordinates (s1, s2, t)
        y: Responses
        split: Per-row tag from SPLIT_TAGS, or None when unsplit
        name: Description
        metadata: Provenance (simulation parameters, source file, ...)
    """

    def __init__(self,
                 coords,
                 y,
                 split: Optional[np.ndarray] = None,
                 name: str = "Unnamed Dataset",
                 metadata: Optional[Dict] = None):
        """
        Initialize a dataset.

        Args:
            coords: (n, 3) coordinates or STPoints
            y: Responses
            split: Optional per-row tags
            name: Description
            metadata: Provenance information
        """
        self.coords = as_coords(coords) if len(coords) else np.empty((0, 3))
        self.y = np.asarray(y, dtype=float).ravel()
        if self.y.size != self.coords.shape[0]:
            raise ShapeError("coords and y must have the same number of rows")
        if not np.all(np.isfinite(self.coords)) or not np.all(np.isfinite(self.y)):
            raise ParameterError("coordinates and responses must be finite")
        if split is not None:
            split = np.asarray(split, dtype=object)
            if split.shape != self.y.shape:
                raise ShapeError("split must tag every row")
            unknown = set(split.tolist()) - set(SPLIT_TAGS)
            if unknown:
                raise ParameterError(f"unknown split tags {sorted(unknown)}")
        self.split = split
        self.name = name
        self.metadata = metadata or {}

    def __len__(self) -> int:
        return self.y.size

    @property
    def points(self) -> List[STPoint]:
        """Rows as STPoints."""
        return [STPoint((c[0], c[1]), c[2], float(v)) for c, v in zip(self.coords, self.y)]

    @property
    def times(self) -> np.ndarray:
        """Distinct time values, sorted."""
        return np.unique(self.coords[:, 2])

    def mask(self, tag: str) -> np.ndarray:
        if self.split is None:
            raise ParameterError("dataset has not been split")
        if tag not in SPLIT_TAGS:
            raise ParameterError(f"unknown split tag '{tag}'")
        return self.split == tag

    def subset(self, tag: str) -> 'Dataset':
        """Rows carrying one split tag."""
        m = self.mask(tag)
        return Dataset(self.coords[m], self.y[m], self.split[m], f"{self.name} [{tag}]",
                       dict(self.metadata))

    def with_split(self, split) -> 'Dataset':
        return Dataset(self.coords, self.y, split, self.name, dict(self.metadata))

    def with_responses(self, y) -> 'Dataset':
        return Dataset(self.coords, y, self.split, self.name, dict(self.metadata))

    def split_sizes(self) -> Dict[str, int]:
        if self.split is None:
            return {}
        return {tag: int(np.sum(self.split == tag)) for tag in SPLIT_TAGS}

    @classmethod
    def from_dataframe(cls, df: pd.DataFrame, name: str = "Unnamed Dataset") -> 'Dataset':
        """
        Build a dataset from a DataFrame with columns s1, s2, t, y and an
        optional split column.

        Rows with missing or non-numeric values are rejected with their file
        line numbers (header = line 1).
        """
        missing = [c for c in COLUMNS if c not in df.columns]
        if missing:
            raise DataError(f"missing columns {missing}; expected header {','.join(COLUMNS)}")
        if len(df) == 0:
            raise DataError("no data rows")
        values = df[list(COLUMNS)].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
        bad = ~np.all(np.isfinite(values), axis=1)
        if bad.any():
            lines = (np.flatnonzero(bad) + 2).tolist()
            raise DataError("non-numeric or non-finite values", lines=lines)
        split = None
        if "split" in df.columns:
            split = df["split"].astype(str).to_numpy(dtype=object)
            bad_tags = ~np.isin(split, SPLIT_TAGS)
            if bad_tags.any():
                raise DataError("unknown split tags", lines=(np.flatnonzero(bad_tags) + 2).tolist())
        return cls(values[:, :3], values[:, 3], split, name)

    @classmethod
    def from_csv(cls, filepath: str, name: Optional[str] = None) -> 'Dataset':
        """
        Load a dataset from CSV.

        Args:
            filepath: Path to a file with header s1,s2,t,y[,split]
            name: Optional name (defaults to the file path)

        Returns:
            Dataset
        """
        try:
            df = pd.read_csv(filepath, float_precision="round_trip")
        except pd.errors.EmptyDataError as exc:
            raise DataError(f"{filepath} is empty") from exc
        except OSError as exc:
            raise DataError(f"cannot read {filepath}: {exc}") from exc
        df.columns = [c.strip() for c in df.columns]
        dataset = cls.from_dataframe(df, name or filepath)
        dataset.metadata["source"] = filepath
        logger.info("loaded %d rows from %s", len(dataset), filepath)
        return dataset

    def to_dataframe(self) -> pd.DataFrame:
        """Columns s1, s2, t, y (and split when tagged)."""
        df = pd.DataFrame({"s1": self.coords[:, 0], "s2": self.coords[:, 1],
                           "t": self.coords[:, 2], "y": self.y})
        if self.split is not None:
            df["split"] = self.split
        return df

    def to_csv(self, filepath: str) -> None:
        """Write the dataset with full float precision."""
        self.to_dataframe().to_csv(filepath, index=False, float_format="%.17g")

    def __repr__(self):
        sizes = self.split_sizes()
        tags = ", ".join(f"{k}={v}" for k, v in sizes.items() if v) if sizes else "unsplit"
        return f"Dataset('{self.name}', n={len(self)}, {tags})"


def load_csv(path: str) -> Dataset:
    """Read an unsplit, unnormalized dataset from CSV."""
    return Dataset.from_csv(path)
