"""Evaluation metrics for held-out regression predictions.

The five reported quantities, in fixed column order: correlation coefficient,
mean absolute error, root mean squared error, relative absolute error (%),
root relative squared error (%).  The relative errors compare against a
baseline that always predicts a reference mean, by default the mean of the
training targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

METRIC_HEADERS = (
    "Correlation coefficient",
    "Mean absolute error",
    "Root mean squared error",
    "Relative absolute error (%)",
    "Root relative squared error (%)",
)

# Rendered in place of a correlation that is undefined because one side of the
# comparison is constant.
UNDEFINED_MARKER = "n/a"


@dataclass(frozen=True)
class BaselinePredictor:
    """The trivial model that predicts reference_mean for every instance."""

    reference_mean: float


@dataclass(frozen=True)
class EvaluationReport:
    """One learner's scores on a test set, in report column order."""

    learner_name: str
    correlation: float | None
    mean_absolute_error: float
    root_mean_squared_error: float
    relative_absolute_error_pct: float
    root_relative_squared_error_pct: float
    n_test: int

    def metric_values(self) -> tuple[float | None, float, float, float, float]:
        return (self.correlation, self.mean_absolute_error,
                self.root_mean_squared_error, self.relative_absolute_error_pct,
                self.root_relative_squared_error_pct)

    def metric_cells(self, precision: int = 4) -> tuple[str, ...]:
        """Formatted metric columns; an undefined correlation renders a marker."""
        cells = []
        for v in self.metric_values():
            cells.append(UNDEFINED_MARKER if v is None else f"{v:.{precision}f}")
        return tuple(cells)


def correlation_coefficient(predicted, actual) -> float | None:
    """Sample Pearson correlation, or None when either side is constant."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("predicted and actual must be equal-length vectors")
    if p.size == 1:
        return None
    dp = p - p.mean()
    da = a - a.mean()
    sp = math.sqrt(float(dp @ dp))
    sa = math.sqrt(float(da @ da))
    if sp == 0.0 or sa == 0.0:
        return None
    return float(dp @ da) / (sp * sa)


def evaluate(predicted, actual, baseline: BaselinePredictor,
             learner_name: str = "") -> EvaluationReport:
    """Score predictions against actual targets.

    Relative errors are percentages of the corresponding baseline error; a
    baseline error of zero (constant actuals equal to the reference mean)
    cannot be normalised against and raises ValueError.
    """
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("predicted and actual must be equal-length vectors")
    if not np.all(np.isfinite(p)):
        raise ValueError("predictions contain non-finite values")
    residual = p - a
    base_residual = baseline.reference_mean - a
    abs_base = float(np.sum(np.abs(base_residual)))
    sq_base = float(base_residual @ base_residual)
    if abs_base == 0.0 or sq_base == 0.0:
        raise ValueError("baseline error is zero; relative errors are undefined")
    mae = float(np.mean(np.abs(residual)))
    rmse = math.sqrt(float(residual @ residual) / p.size)
    rae = 100.0 * float(np.sum(np.abs(residual))) / abs_base
    rrse = 100.0 * math.sqrt(float(residual @ residual) / sq_base)
    return EvaluationReport(learner_name, correlation_coefficient(p, a),
                            mae, rmse, rae, rrse, int(p.size))
