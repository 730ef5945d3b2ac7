"""Regression by discretization: the target is cut into equal-width bins, a
gain-ratio classification tree predicts a probability per bin, and the
prediction is the probability-weighted combination of bin representatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import TaskView
from ..numeric import normal_quantile
from .common import Regressor

DENSITY_MODES = ("expected", "histogram")


# ---------------------------------------------------------------------------
# Target discretization


class TargetDiscretizer:
    """Equal-width bins over the training target range.

    A bin's representative is the mean of the training targets inside it;
    empty bins fall back to the bin midpoint.  The maximum target belongs to
    the last bin.
    """

    def __init__(self, edges: np.ndarray, representatives: np.ndarray,
                 bin_counts: np.ndarray):
        self.edges = edges
        self.representatives = representatives
        self.bin_counts = bin_counts

    @property
    def n_bins(self) -> int:
        return int(self.representatives.size)

    def labels(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        raw = np.searchsorted(self.edges, y, side="right") - 1
        return np.clip(raw, 0, self.n_bins - 1)


def discretize_target(y, n_bins: int = 10) -> TargetDiscretizer:
    y = np.asarray(y, dtype=float)
    if n_bins < 2:
        raise ValueError("n_bins must be at least 2")
    if y.size < 1:
        raise ValueError("cannot discretize an empty target")
    lo, hi = float(y.min()), float(y.max())
    if lo == hi:
        raise ValueError("target range is zero; nothing to discretize")
    edges = np.linspace(lo, hi, n_bins + 1)
    discretizer = TargetDiscretizer(edges, np.empty(n_bins), np.empty(n_bins, dtype=int))
    labels = discretizer.labels(y)
    counts = np.bincount(labels, minlength=n_bins)
    sums = np.bincount(labels, weights=y, minlength=n_bins)
    midpoints = (edges[:-1] + edges[1:]) / 2.0
    with np.errstate(invalid="ignore"):
        representatives = np.where(counts > 0,
                                   sums / np.maximum(counts, 1), midpoints)
    discretizer.representatives = representatives
    discretizer.bin_counts = counts
    return discretizer


# ---------------------------------------------------------------------------
# Gain-ratio classification tree


@dataclass(frozen=True)
class ClassLeaf:
    counts: np.ndarray  # per-class training counts


@dataclass(frozen=True)
class ClassInternal:
    attribute: int
    threshold: float
    counts: np.ndarray
    left: "ClassNode"
    right: "ClassNode"


ClassNode = ClassLeaf | ClassInternal


@dataclass(frozen=True)
class ClassTreeParams:
    confidence: float = 0.25
    min_instances: int = 2
    pruning: bool = True

    def __post_init__(self):
        if not 0.0 < self.confidence <= 0.5:
            raise ValueError("confidence must be in (0, 0.5]")
        if self.min_instances < 1:
            raise ValueError("min_instances must be at least 1")


def _entropy_rows(counts) -> np.ndarray:
    """Base-2 entropy of each row of a count matrix."""
    counts = np.asarray(counts, dtype=float)
    totals = counts.sum(axis=1, keepdims=True)
    safe_totals = np.maximum(totals, 1.0)
    p = counts / safe_totals
    plogp = np.where(counts > 0, p * np.log2(np.where(counts > 0, p, 1.0)), 0.0)
    return -plogp.sum(axis=1)


def _best_class_split(X, labels, n_classes, min_leaf):
    """C4.5 attribute selection: within an attribute the threshold maximizes
    information gain; across attributes the winner has the best gain ratio
    among those whose gain reaches the average over all splittable attributes.

    Returns (attribute, threshold) or None.
    """
    n, d = X.shape
    total = np.bincount(labels, minlength=n_classes).astype(float)
    h_total = float(_entropy_rows(total[None, :])[0])
    candidates = []
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        if xs[0] == xs[-1]:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), labels[order]] = 1.0
        left_counts = np.cumsum(onehot, axis=0)
        cuts = np.flatnonzero(xs[:-1] < xs[1:])
        n_l = cuts + 1
        keep = (n_l >= min_leaf) & (n - n_l >= min_leaf)
        cuts = cuts[keep]
        if cuts.size == 0:
            continue
        n_l = cuts + 1.0
        n_r = n - n_l
        h_l = _entropy_rows(left_counts[cuts])
        h_r = _entropy_rows(total[None, :] - left_counts[cuts])
        gains = h_total - (n_l * h_l + n_r * h_r) / n
        i = int(np.argmax(gains))
        gain = float(gains[i])
        split_info = float(_entropy_rows(np.array([[n_l[i], n_r[i]]]))[0])
        threshold = float((xs[cuts[i]] + xs[cuts[i] + 1]) / 2.0)
        ratio = gain / split_info if split_info > 0 else 0.0
        candidates.append((j, threshold, gain, ratio))
    if not candidates:
        return None
    average_gain = sum(c[2] for c in candidates) / len(candidates)
    best = None
    for j, threshold, gain, ratio in candidates:
        if gain < average_gain - 1e-9:
            continue
        if ratio <= 0.0:
            continue
        if best is None or ratio > best[3]:
            best = (j, threshold, gain, ratio)
    if best is None:
        return None
    return best[0], best[1]


class _CtBuild:
    __slots__ = ("counts", "idx", "attribute", "threshold", "left", "right")

    def __init__(self, counts, idx):
        self.counts = counts
        self.idx = idx
        self.attribute = -1
        self.threshold = 0.0
        self.left = None
        self.right = None

    @property
    def is_leaf(self):
        return self.left is None


def _ct_grow(X, labels, idx, n_classes, params):
    counts = np.bincount(labels[idx], minlength=n_classes)
    node = _CtBuild(counts, idx)
    n = idx.size
    if n < 2 * params.min_instances or counts.max() == n:
        return node
    found = _best_class_split(X[idx], labels[idx], n_classes,
                              params.min_instances)
    if found is None:
        return node
    j, threshold = found
    goes_left = X[idx, j] <= threshold
    node.attribute = j
    node.threshold = threshold
    node.left = _ct_grow(X, labels, idx[goes_left], n_classes, params)
    node.right = _ct_grow(X, labels, idx[~goes_left], n_classes, params)
    return node


def _add_errs(n: float, e: float, confidence: float) -> float:
    """Upper confidence bound correction on e observed errors out of n."""
    if e < 1.0:
        base = n * (1.0 - confidence ** (1.0 / n))
        if e == 0.0:
            return base
        return base + e * (_add_errs(n, 1.0, confidence) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = normal_quantile(1.0 - confidence)
    f = (e + 0.5) / n
    r = ((f + z * z / (2.0 * n)
          + z * math.sqrt(f / n - f * f / n + z * z / (4.0 * n * n)))
         / (1.0 + z * z / n))
    return r * n - e


def _node_error_estimate(counts, confidence) -> float:
    n = float(counts.sum())
    e = n - float(counts.max())
    return e + _add_errs(n, e, confidence)


def _ct_prune(node, confidence) -> float:
    """Bottom-up error-based pruning; returns the node's estimated error."""
    own = _node_error_estimate(node.counts, confidence)
    if node.is_leaf:
        return own
    subtree = _ct_prune(node.left, confidence) + _ct_prune(node.right, confidence)
    if own <= subtree + 0.1:
        node.left = None
        node.right = None
        node.attribute = -1
        return own
    return subtree


def _ct_freeze(node) -> ClassNode:
    counts = node.counts.copy()
    counts.setflags(write=False)
    if node.is_leaf:
        return ClassLeaf(counts)
    return ClassInternal(node.attribute, node.threshold, counts,
                         _ct_freeze(node.left), _ct_freeze(node.right))


def class_tree_size(node: ClassNode) -> int:
    if isinstance(node, ClassLeaf):
        return 1
    return 1 + class_tree_size(node.left) + class_tree_size(node.right)


def class_tree_leaves(node: ClassNode) -> list[ClassLeaf]:
    if isinstance(node, ClassLeaf):
        return [node]
    return class_tree_leaves(node.left) + class_tree_leaves(node.right)


class ClassTree:
    """Binary-threshold classification tree with Laplace-smoothed leaf
    probabilities.
    """

    def __init__(self, root: ClassNode, n_classes: int, predictor_names):
        self.root = root
        self.n_classes = n_classes
        self.predictor_names = tuple(predictor_names)

    def predict_probabilities_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty((X.shape[0], self.n_classes))

        def walk(node, rows):
            if rows.size == 0:
                return
            if isinstance(node, ClassLeaf):
                n = float(node.counts.sum())
                out[rows] = (node.counts + 1.0) / (n + self.n_classes)
                return
            goes_left = X[rows, node.attribute] <= node.threshold
            walk(node.left, rows[goes_left])
            walk(node.right, rows[~goes_left])

        walk(self.root, np.arange(X.shape[0]))
        return out

    @property
    def n_nodes(self) -> int:
        return class_tree_size(self.root)

    @property
    def n_leaves(self) -> int:
        return len(class_tree_leaves(self.root))

    def describe(self) -> str:
        lines: list[str] = []

        def walk(node, depth):
            pad = "|   " * depth
            if isinstance(node, ClassLeaf):
                majority = int(np.argmax(node.counts))
                lines.append(f"{pad}bin {majority} ({int(node.counts.sum())})")
                return
            name = self.predictor_names[node.attribute]
            lines.append(f"{pad}{name} <= {node.threshold:.6g}")
            walk(node.left, depth + 1)
            lines.append(f"{pad}{name} > {node.threshold:.6g}")
            walk(node.right, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines)


def train_class_tree(task: TaskView, discretizer: TargetDiscretizer,
                     params: ClassTreeParams = ClassTreeParams()) -> ClassTree:
    labels = discretizer.labels(task.target)
    if np.unique(labels).size < 2:
        raise ValueError("need at least two distinct bin labels")
    root = _ct_grow(task.predictors, labels, np.arange(task.n_rows),
                    discretizer.n_bins, params)
    if params.pruning:
        _ct_prune(root, params.confidence)
    return ClassTree(_ct_freeze(root), discretizer.n_bins,
                     task.predictor_names)


# ---------------------------------------------------------------------------
# Recombination


def combine_probabilities(probabilities, discretizer: TargetDiscretizer,
                          mode: str = "expected") -> np.ndarray:
    """Turn per-bin probabilities into real predictions.

    expected: plain expectation over bin representatives.  histogram: the
    probabilities are reweighted by the training density of each bin before
    taking the expectation.
    """
    P = np.atleast_2d(np.asarray(probabilities, dtype=float))
    reps = discretizer.representatives
    if mode == "expected":
        return P @ reps
    if mode == "histogram":
        W = P * discretizer.bin_counts
        return (W @ reps) / W.sum(axis=1)
    raise ValueError(f"unknown density mode {mode!r}")


def predict_reg_by_disc(tree: ClassTree, discretizer: TargetDiscretizer,
                        query, mode: str = "expected") -> float:
    probabilities = tree.predict_probabilities_many(
        np.asarray(query, dtype=float)[None, :])
    return float(combine_probabilities(probabilities, discretizer, mode)[0])


class RegByDiscRegressor(Regressor):
    def __init__(self, tree: ClassTree, discretizer: TargetDiscretizer,
                 mode: str):
        self.tree = tree
        self.discretizer = discretizer
        self.mode = mode

    def predict_many(self, X):
        probabilities = self.tree.predict_probabilities_many(X)
        return combine_probabilities(probabilities, self.discretizer, self.mode)

    def describe(self) -> str:
        return (f"{self.discretizer.n_bins}-bin discretization, {self.mode} "
                f"combination over a tree with {self.tree.n_leaves} leaves:\n"
                + self.tree.describe())


def train_reg_by_disc(task: TaskView, n_bins: int = 10,
                      mode: str = "expected",
                      tree_params: ClassTreeParams = ClassTreeParams()
                      ) -> RegByDiscRegressor:
    if mode not in DENSITY_MODES:
        raise ValueError(f"unknown density mode {mode!r}")
    discretizer = discretize_target(task.target, n_bins)
    tree = train_class_tree(task, discretizer, tree_params)
    return RegByDiscRegressor(tree, discretizer, mode)
