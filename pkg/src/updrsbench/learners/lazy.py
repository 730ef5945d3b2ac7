"""Lazy learners: nearest-neighbor lookup and locally weighted stumps.

Both defer all real work to query time; training just normalizes and stores
the instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import TaskView
from .common import RangeScaler, Regressor
from .trees import fit_stump, predict_tree


def similarity(x, y) -> float:
    """Negated Euclidean distance between two normalized instances."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("instances must be vectors of equal dimension")
    return -math.sqrt(float(np.sum((x - y) ** 2)))


class InstanceStore:
    """Training instances with predictors min-max normalized to [0, 1]."""

    def __init__(self, normalized: np.ndarray, targets: np.ndarray,
                 scaler: RangeScaler, predictor_names):
        self.normalized = normalized
        self.targets = targets
        self.scaler = scaler
        self.predictor_names = tuple(predictor_names)

    @classmethod
    def from_task(cls, task: TaskView) -> "InstanceStore":
        if task.n_rows < 1:
            raise ValueError("cannot build a store from an empty task")
        scaler = RangeScaler.from_data(task.predictors)
        normalized = np.ascontiguousarray(scaler.transform(task.predictors))
        return cls(normalized, task.target.astype(float), scaler,
                   task.predictor_names)

    @property
    def n_rows(self) -> int:
        return int(self.normalized.shape[0])

    def transform_queries(self, X) -> np.ndarray:
        """Normalize raw queries with the training stats, clamped to [0, 1]."""
        X = np.asarray(X, dtype=float)
        return self.scaler.transform(X, clamp=True)


def _squared_distances(store: InstanceStore, queries_normalized: np.ndarray) -> np.ndarray:
    """(n_queries, n_store) squared distances, clipped against cancellation."""
    X = store.normalized
    Q = queries_normalized
    d2 = (np.sum(Q * Q, axis=1)[:, None] + np.sum(X * X, axis=1)[None, :]
          - 2.0 * (Q @ X.T))
    return np.maximum(d2, 0.0)


def predict_ibk_many(store: InstanceStore, X) -> np.ndarray:
    """Target of the most similar stored instance per query; exact ties go to
    the lowest training-row index.
    """
    Q = store.transform_queries(X)
    d2 = _squared_distances(store, Q)
    return store.targets[np.argmin(d2, axis=1)]


def predict_ibk(store: InstanceStore, query) -> float:
    return float(predict_ibk_many(store, np.asarray(query, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class LwlParams:
    """Fixed to the configuration the benchmark uses: every training point in
    the neighborhood, a linear falloff, and a weighted stump underneath.
    """

    neighborhood: str = "all"
    weight_kernel: str = "linear"
    base_learner: str = "stump"

    def __post_init__(self):
        if self.neighborhood != "all":
            raise ValueError("only the all-points neighborhood is supported")
        if self.weight_kernel != "linear":
            raise ValueError("only the linear weight kernel is supported")
        if self.base_learner != "stump":
            raise ValueError("only the stump base learner is supported")


def linear_weights(distances: np.ndarray) -> np.ndarray:
    """w_i = max(0, 1 - d_i/d_max).  All points at one distance (zero or not)
    carry full weight, so the base learner degenerates to its unweighted fit.
    """
    distances = np.asarray(distances, dtype=float)
    d_max = float(distances.max())
    if d_max == 0.0 or bool(np.all(distances == d_max)):
        return np.ones(distances.size)
    return np.maximum(0.0, 1.0 - distances / d_max)


def predict_lwl(store: InstanceStore, params: LwlParams, query,
                _orders=None) -> float:
    """Fit a distance-weighted stump around the query, then evaluate it there."""
    q = store.transform_queries(np.asarray(query, dtype=float)[None, :])[0]
    d2 = _squared_distances(store, q[None, :])[0]
    weights = linear_weights(np.sqrt(d2))
    if float(weights.sum()) == 0.0:
        return float(store.targets.mean())
    stump = fit_stump(store.normalized, store.targets, weights=weights,
                      presorted=_orders)
    return float(predict_tree(stump, q[None, :])[0])


class IbkRegressor(Regressor):
    def __init__(self, store: InstanceStore):
        self.store = store

    def predict_many(self, X):
        return predict_ibk_many(self.store, X)

    def describe(self) -> str:
        return f"nearest neighbor over {self.store.n_rows} stored instances"


class LwlRegressor(Regressor):
    def __init__(self, store: InstanceStore, params: LwlParams):
        self.store = store
        self.params = params
        # one argsort per column, shared by every per-query stump fit
        self._orders = np.argsort(store.normalized, axis=0, kind="stable")

    def predict_many(self, X):
        X = np.asarray(X, dtype=float)
        return np.array([predict_lwl(self.store, self.params, X[i],
                                     _orders=self._orders)
                         for i in range(X.shape[0])])

    def describe(self) -> str:
        return (f"locally weighted stumps over {self.store.n_rows} stored "
                f"instances, linear kernel")


def train_ibk(task: TaskView) -> IbkRegressor:
    return IbkRegressor(InstanceStore.from_task(task))


def train_lwl(task: TaskView, params: LwlParams = LwlParams()) -> LwlRegressor:
    return LwlRegressor(InstanceStore.from_task(task), params)
