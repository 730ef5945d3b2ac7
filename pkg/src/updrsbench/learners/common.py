"""Interfaces and helpers shared by all learners."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class Regressor:
    """A fitted model: maps raw predictor rows to target estimates."""

    def predict_many(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.predict_many(x[None, :])[0])


@dataclass(frozen=True)
class RangeScaler:
    """Column-wise min-max map onto [0, 1], fitted on training data.

    A constant column maps to 0.  Out-of-range values extrapolate unless
    clamp is requested.
    """

    minimum: np.ndarray
    maximum: np.ndarray

    @classmethod
    def from_data(cls, X) -> "RangeScaler":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("scaler needs a non-empty matrix")
        return cls(X.min(axis=0), X.max(axis=0))

    @property
    def spread(self) -> np.ndarray:
        return self.maximum - self.minimum

    def transform(self, X, clamp: bool = False) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        spread = self.spread
        safe = np.where(spread > 0, spread, 1.0)
        out = (X - self.minimum) / safe
        out = np.where(spread > 0, out, 0.0)
        if clamp:
            out = np.clip(out, 0.0, 1.0)
        return out
