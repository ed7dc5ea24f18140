"""
Evaluation reports.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import pandas as pd

from .scores import coverage_and_width, crps_gaussian, gaussian_nll, interval_score, rmse

logger = logging.getLogger(__name__)


@dataclass
class EvalReport:
    """
    Verification scores of one set of predictions.

    Attributes:
        rmse: Root mean squared error
        nll: Gaussian negative log likelihood
        crps: Continuous ranked probability score
        coverage: Interval coverage
        interval_score: Interval score at level alpha
        mean_width: Mean interval width
        n: Number of observations
        alpha: Miscoverage level
        nll_mode: NLL variant used
        label: Name of the interval source (e.g. 'conformal', 'bayes')
    """

    rmse: float
    nll: float
    crps: float
    coverage: float
    interval_score: float
    mean_width: float
    n: int
    alpha: float
    nll_mode: str = "pointwise"
    label: str = ""

    def to_frame(self) -> pd.DataFrame:
        """One-row DataFrame."""
        return pd.DataFrame([asdict(self)])

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)

    def to_text(self) -> str:
        """Aligned two-column table."""
        rows = asdict(self)
        width = max(len(k) for k in rows)
        lines = []
        for key, value in rows.items():
            text = f"{value:.6f}" if isinstance(value, float) else str(value)
            lines.append(f"{key:<{width}}  {text}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return (f"EvalReport({self.label or 'intervals'}: rmse={self.rmse:.4f}, "
                f"coverage={self.coverage:.3f}, interval_score={self.interval_score:.4f})")


def evaluate(y, mean, sd, lower, upper, alpha: float = 0.05, nll_mode: str = "pointwise",
             label: str = "") -> EvalReport:
    """
    Score predictions and one set of intervals.

    Args:
        y: Observations
        mean, sd: Predictive means and standard deviations
        lower, upper: Interval bounds
        alpha: Miscoverage level of the intervals
        nll_mode: 'pointwise' or 'literal'
        label: Name recorded in the report

    Returns:
        EvalReport
    """
    coverage, width = coverage_and_width(y, lower, upper)
    report = EvalReport(
        rmse=rmse(y, mean),
        nll=gaussian_nll(y, mean, sd, nll_mode),
        crps=crps_gaussian(y, mean, sd),
        coverage=coverage,
        interval_score=interval_score(y, lower, upper, alpha),
        mean_width=width,
        n=len(y),
        alpha=alpha,
        nll_mode=nll_mode,
        label=label,
    )
    logger.info("%r", report)
    return report


def reports_frame(*reports: EvalReport) -> pd.DataFrame:
    """Stack several reports into one table."""
    return pd.concat([r.to_frame() for r in reports], ignore_index=True)


def write_reports(csv_path: str, text_path: Optional[str], *reports: EvalReport) -> None:
    """Write reports as CSV and, optionally, as text blocks."""
    reports_frame(*reports).to_csv(csv_path, index=False)
    if text_path is not None:
        with open(text_path, "w") as f:
            f.write("\n".join(r.to_text() for r in reports))
