"""Tree learners: M5 model trees, reduced-error-pruned regression trees, and
one-split decision stumps.

All three share the same split machinery: candidate thresholds are midpoints
between consecutive distinct values of an attribute, scanned with prefix sums.
Standard deviations and variances inside split criteria use the population
(weight) denominator.  Ties are always broken towards the lower attribute
index and then the lower threshold, so trees are deterministic functions of
their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..dataset import TaskView
from ..numeric import LinearModel, RngStream, fit_least_squares
from .common import Regressor

# Ridge applied to every node-level linear fit; keeps collinear attribute
# subsets (a real occurrence: some jitter measures are exact multiples) from
# producing wild coefficient pairs.
NODE_RIDGE = 1e-8
SMOOTHING_CONSTANT = 15.0
SD_STOP_FRACTION = 0.05


# ---------------------------------------------------------------------------
# Tree structure


@dataclass(frozen=True)
class Leaf:
    model: LinearModel
    n_instances: int
    estimated_error: float = float("nan")


@dataclass(frozen=True)
class Internal:
    attribute: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Leaf | Internal


def predict_tree(node: TreeNode, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0])
    _predict_into(node, X, np.arange(X.shape[0]), out)
    return out


def _predict_into(node, X, idx, out):
    if idx.size == 0:
        return
    if isinstance(node, Leaf):
        out[idx] = node.model.predict_many(X[idx])
        return
    goes_left = X[idx, node.attribute] <= node.threshold
    _predict_into(node.left, X, idx[goes_left], out)
    _predict_into(node.right, X, idx[~goes_left], out)


def tree_leaves(node: TreeNode) -> list[Leaf]:
    if isinstance(node, Leaf):
        return [node]
    return tree_leaves(node.left) + tree_leaves(node.right)


def tree_size(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + tree_size(node.left) + tree_size(node.right)


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def format_linear(model: LinearModel, names) -> str:
    parts = [f"{model.intercept:.4g}"]
    for coef, name in zip(model.coefficients, names):
        if coef == 0.0:
            continue
        sign = "+" if coef > 0 else "-"
        parts.append(f"{sign} {abs(coef):.4g}*{name}")
    return " ".join(parts)


def format_tree(node: TreeNode, names) -> str:
    lines: list[str] = []

    def walk(nd, depth):
        pad = "|   " * depth
        if isinstance(nd, Leaf):
            lines.append(f"{pad}{format_linear(nd.model, names)} ({nd.n_instances})")
            return
        name = names[nd.attribute]
        lines.append(f"{pad}{name} <= {nd.threshold:.6g}")
        walk(nd.left, depth + 1)
        lines.append(f"{pad}{name} > {nd.threshold:.6g}")
        walk(nd.right, depth + 1)

    walk(node, 0)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Split scanning


@dataclass
class ThresholdScan:
    """Aggregates on both sides of every candidate threshold of one attribute."""

    thresholds: np.ndarray
    count_left: np.ndarray
    count_right: np.ndarray
    weight_left: np.ndarray
    weight_right: np.ndarray
    sum_left: np.ndarray
    sum_right: np.ndarray
    sumsq_left: np.ndarray
    sumsq_right: np.ndarray
    total_weight: float
    total_sum: float
    total_sumsq: float
    n: int


def threshold_scan(x, y, weights=None, min_child: int = 1, order=None) -> ThresholdScan | None:
    """Scan all midpoint thresholds of one attribute in a single sorted pass.

    order, when given, must be an argsort of x (saves the sort for callers
    that score one attribute many times).  Returns None when no threshold
    leaves at least min_child rows on each side.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if order is None:
        order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    w = None if weights is None else np.asarray(weights, dtype=float)[order]

    if n < 2 * min_child or xs[0] == xs[-1]:
        return None
    cuts = np.flatnonzero(xs[:-1] < xs[1:])
    counts = cuts + 1
    keep = (counts >= min_child) & (n - counts >= min_child)
    cuts = cuts[keep]
    if cuts.size == 0:
        return None
    counts = cuts + 1

    wy = ys if w is None else w * ys
    wyy = ys * ys if w is None else w * ys * ys
    cum_wy = np.cumsum(wy)
    cum_wyy = np.cumsum(wyy)
    cum_w = counts.astype(float) if w is None else np.cumsum(w)[cuts]
    total_w = float(n) if w is None else float(np.sum(w))
    total_s = float(cum_wy[-1])
    total_ss = float(cum_wyy[-1])

    sum_left = cum_wy[cuts]
    sumsq_left = cum_wyy[cuts]
    return ThresholdScan(
        thresholds=(xs[cuts] + xs[cuts + 1]) / 2.0,
        count_left=counts,
        count_right=n - counts,
        weight_left=cum_w,
        weight_right=total_w - cum_w,
        sum_left=sum_left,
        sum_right=total_s - sum_left,
        sumsq_left=sumsq_left,
        sumsq_right=total_ss - sumsq_left,
        total_weight=total_w,
        total_sum=total_s,
        total_sumsq=total_ss,
        n=n,
    )


def _sse(weight, s, ss):
    # sum of squared deviations from the (weighted) mean; clipped against
    # cancellation noise
    return np.maximum(ss - np.where(weight > 0, s * s / np.where(weight > 0, weight, 1.0), 0.0), 0.0)


def best_split(x, y, criterion: str = "sdr", min_child: int = 1,
               weights=None, order=None) -> tuple[float, float] | None:
    """Best threshold of one attribute under a split criterion.

    criterion: "sdr" (standard deviation reduction), "variance" (variance
    reduction) or "sse" (squared-error reduction).  Returns (threshold, gain),
    or None when the attribute admits no split.  Among equal gains the lowest
    threshold wins.
    """
    scan = threshold_scan(x, y, weights=weights, min_child=min_child, order=order)
    if scan is None:
        return None
    sse_l = _sse(scan.weight_left, scan.sum_left, scan.sumsq_left)
    sse_r = _sse(scan.weight_right, scan.sum_right, scan.sumsq_right)
    sse_t = float(_sse(np.asarray(scan.total_weight), np.asarray(scan.total_sum),
                       np.asarray(scan.total_sumsq)))
    if criterion == "sse":
        gains = sse_t - (sse_l + sse_r)
    elif criterion == "variance":
        var_t = sse_t / scan.total_weight
        weighted = (sse_l + sse_r) / scan.total_weight
        gains = var_t - weighted
    elif criterion == "sdr":
        sd_t = math.sqrt(sse_t / scan.total_weight)
        sd_l = np.sqrt(sse_l / np.maximum(scan.weight_left, 1e-300))
        sd_r = np.sqrt(sse_r / np.maximum(scan.weight_right, 1e-300))
        gains = sd_t - (scan.weight_left * sd_l + scan.weight_right * sd_r) / scan.total_weight
    else:
        raise ValueError(f"unknown split criterion {criterion!r}")
    best = int(np.argmax(gains))
    return float(scan.thresholds[best]), float(gains[best])


_CRITERION_CODES = {"sdr": 0, "variance": 1, "sse": 2}


@njit(cache=True)
def _scan_all_attributes(X, y, min_child, criterion):
    n, d = X.shape
    best_attr = -1
    best_thr = 0.0
    best_gain = 0.0
    sum_tot = 0.0
    ss_tot = 0.0
    for i in range(n):
        sum_tot += y[i]
        ss_tot += y[i] * y[i]
    sse_tot = ss_tot - sum_tot * sum_tot / n
    if sse_tot < 0.0:
        sse_tot = 0.0
    sd_tot = math.sqrt(sse_tot / n)
    var_tot = sse_tot / n
    for a in range(d):
        order = np.argsort(X[:, a])
        sum_l = 0.0
        ss_l = 0.0
        for i in range(n - 1):
            yi = y[order[i]]
            sum_l += yi
            ss_l += yi * yi
            if X[order[i], a] == X[order[i + 1], a]:
                continue
            n_l = i + 1
            n_r = n - n_l
            if n_l < min_child or n_r < min_child:
                continue
            sse_l = ss_l - sum_l * sum_l / n_l
            if sse_l < 0.0:
                sse_l = 0.0
            sum_r = sum_tot - sum_l
            sse_r = (ss_tot - ss_l) - sum_r * sum_r / n_r
            if sse_r < 0.0:
                sse_r = 0.0
            # expression shapes mirror best_split exactly so equal gains
            # round identically and ties resolve the same way
            if criterion == 0:
                gain = sd_tot - (n_l * math.sqrt(sse_l / n_l)
                                 + n_r * math.sqrt(sse_r / n_r)) / n
            elif criterion == 1:
                gain = var_tot - (sse_l + sse_r) / n
            else:
                gain = sse_tot - (sse_l + sse_r)
            if best_attr < 0 or gain > best_gain:
                best_attr = a
                best_thr = (X[order[i], a] + X[order[i + 1], a]) / 2.0
                best_gain = gain
    return best_attr, best_thr, best_gain


def best_split_all(X, y, criterion: str = "sdr",
                   min_child: int = 1) -> tuple[int, float, float] | None:
    """Best (attribute, threshold, gain) across every column at once.

    Semantics match looping best_split over the columns: among equal gains
    the lowest attribute index wins, then the lowest threshold.  The scan is
    compiled, which matters for the tree growers that call it at every node.
    """
    if criterion not in _CRITERION_CODES:
        raise ValueError(f"unknown split criterion {criterion!r}")
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    attr, threshold, gain = _scan_all_attributes(X, y, min_child,
                                                 _CRITERION_CODES[criterion])
    if attr < 0:
        return None
    return int(attr), float(threshold), float(gain)


def _constant_leaf(y_subset, n_predictors, estimated_error=float("nan")) -> Leaf:
    model = LinearModel(float(np.mean(y_subset)), np.zeros(n_predictors))
    return Leaf(model, int(y_subset.size), estimated_error)


# ---------------------------------------------------------------------------
# M5 model trees


@dataclass(frozen=True)
class M5Params:
    min_instances: int = 2
    smoothing: bool = True
    pruning: bool = True

    def __post_init__(self):
        if self.min_instances < 1:
            raise ValueError("min_instances must be at least 1")


class _M5Build:
    __slots__ = ("idx", "attribute", "threshold", "left", "right",
                 "model", "n_params", "estimate")

    def __init__(self, idx):
        self.idx = idx
        self.attribute = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.model = None
        self.n_params = 1
        self.estimate = float("inf")

    @property
    def is_leaf(self):
        return self.left is None


def _m5_grow(X, y, idx, params, root_sd):
    node = _M5Build(idx)
    n = idx.size
    if n < 2 * params.min_instances:
        return node
    y_sub = y[idx]
    sd_here = float(np.std(y_sub))
    if sd_here < SD_STOP_FRACTION * root_sd or sd_here == 0.0:
        return node
    best = best_split_all(X[idx], y_sub, criterion="sdr",
                          min_child=params.min_instances)
    if best is None or best[2] <= 0.0:
        return node
    j, threshold, _ = best
    goes_left = X[idx, j] <= threshold
    node.attribute = j
    node.threshold = threshold
    node.left = _m5_grow(X, y, idx[goes_left], params, root_sd)
    node.right = _m5_grow(X, y, idx[~goes_left], params, root_sd)
    return node


def _subtree_attributes(node) -> set[int]:
    if node.is_leaf:
        return set()
    return {node.attribute} | _subtree_attributes(node.left) | _subtree_attributes(node.right)


def _fit_node_models(node, X, y, names):
    """Give every node a linear model over the attributes its subtree tests.

    Leaves reference no attributes, so they get an intercept-only model (the
    subset mean).  Fitted coefficients are expanded to full width with zeros
    in unused positions.
    """
    used = sorted(_subtree_attributes(node))
    y_sub = y[node.idx]
    d = X.shape[1]
    if not used:
        node.model = LinearModel(float(np.mean(y_sub)), np.zeros(d), names)
        node.n_params = 1
    else:
        fitted = fit_least_squares(X[np.ix_(node.idx, used)], y_sub, ridge=NODE_RIDGE)
        coefficients = np.zeros(d)
        coefficients[used] = fitted.coefficients
        node.model = LinearModel(fitted.intercept, coefficients, names)
        node.n_params = len(used) + 1
    if not node.is_leaf:
        _fit_node_models(node.left, X, y, names)
        _fit_node_models(node.right, X, y, names)


def _error_factor(n, n_params):
    if n <= n_params:
        return float("inf")
    return (n + n_params) / (n - n_params)


def _m5_prune(node, X, y, do_prune):
    """Bottom-up pessimistic-error pruning; returns the node's error estimate."""
    y_sub = y[node.idx]
    residual = y_sub - node.model.predict_many(X[node.idx])
    own = float(np.mean(np.abs(residual))) * _error_factor(node.idx.size, node.n_params)
    if node.is_leaf:
        node.estimate = own
        return own
    n_l = node.left.idx.size
    n_r = node.right.idx.size
    sub = (n_l * _m5_prune(node.left, X, y, do_prune)
           + n_r * _m5_prune(node.right, X, y, do_prune)) / node.idx.size
    if do_prune and own <= sub:
        node.left = None
        node.right = None
        node.attribute = -1
        node.estimate = own
        return own
    node.estimate = sub
    return sub


def _combine_models(n_below, below: LinearModel, above: LinearModel, k) -> LinearModel:
    w_b = n_below / (n_below + k)
    w_a = k / (n_below + k)
    return LinearModel(w_b * below.intercept + w_a * above.intercept,
                       w_b * below.coefficients + w_a * above.coefficients,
                       below.predictor_names)


def _freeze(node, path, smoothing) -> TreeNode:
    if node.is_leaf:
        model = node.model
        if smoothing:
            n_below = node.idx.size
            for ancestor in reversed(path):
                model = _combine_models(n_below, model, ancestor.model, SMOOTHING_CONSTANT)
                n_below = ancestor.idx.size
        return Leaf(model, int(node.idx.size), node.estimate)
    path = path + [node]
    return Internal(node.attribute, float(node.threshold),
                    _freeze(node.left, path, smoothing),
                    _freeze(node.right, path, smoothing))


class ModelTree(Regressor):
    """A binary tree with a linear model in every leaf."""

    def __init__(self, root: TreeNode, predictor_names):
        self.root = root
        self.predictor_names = tuple(predictor_names)

    def predict_many(self, X):
        return predict_tree(self.root, X)

    @property
    def n_leaves(self) -> int:
        return len(tree_leaves(self.root))

    def describe(self) -> str:
        return format_tree(self.root, self.predictor_names)


def train_m5p(task: TaskView, params: M5Params = M5Params()) -> ModelTree:
    """Grow an M5 model tree: SDR splits, per-node linear models, bottom-up
    pruning against adjusted training error, and optional smoothing that
    blends each leaf model with its ancestors.
    """
    X, y = task.predictors, task.target
    if task.n_rows < 1:
        raise ValueError("cannot train on an empty task")
    root_sd = float(np.std(y))
    build = _m5_grow(X, y, np.arange(task.n_rows), params, root_sd)
    _fit_node_models(build, X, y, task.predictor_names)
    _m5_prune(build, X, y, params.pruning)
    root = _freeze(build, [], params.smoothing)
    return ModelTree(root, task.predictor_names)


# ---------------------------------------------------------------------------
# Reduced-error-pruned regression tree


@dataclass(frozen=True)
class RepTreeParams:
    max_depth: int = -1
    min_instances: int = 2
    min_variance_proportion: float = 1e-3
    pruning_folds: int = 3

    def __post_init__(self):
        if not 0.0 < self.min_variance_proportion < 1.0:
            raise ValueError("min_variance_proportion must lie in (0, 1)")
        if self.pruning_folds < 2:
            raise ValueError("pruning_folds must be at least 2")


class _RepBuild:
    __slots__ = ("mean", "n", "attribute", "threshold", "left", "right")

    def __init__(self, mean, n):
        self.mean = mean
        self.n = n
        self.attribute = -1
        self.threshold = 0.0
        self.left = None
        self.right = None

    @property
    def is_leaf(self):
        return self.left is None


def _rep_grow(X, y, idx, depth, params, root_var):
    node = _RepBuild(float(np.mean(y[idx])), idx.size)
    if idx.size < 2 * params.min_instances:
        return node
    if params.max_depth >= 0 and depth >= params.max_depth:
        return node
    y_sub = y[idx]
    if float(np.var(y_sub)) < params.min_variance_proportion * root_var:
        return node
    best = best_split_all(X[idx], y_sub, criterion="variance",
                          min_child=params.min_instances)
    if best is None or best[2] <= 0.0:
        return node
    j, threshold, _ = best
    goes_left = X[idx, j] <= threshold
    node.attribute = j
    node.threshold = threshold
    node.left = _rep_grow(X, y, idx[goes_left], depth + 1, params, root_var)
    node.right = _rep_grow(X, y, idx[~goes_left], depth + 1, params, root_var)
    return node


def _rep_prune(root, X, y, hold_idx):
    """Reduced-error pruning against the held-out rows.

    Repeatedly collapses the internal node whose replacement by its
    (grow-set) mean most reduces held-out squared error, measured against the
    tree as it currently stands, until no replacement avoids an increase.
    Zero-reduction replacements (for example subtrees no held-out row
    reaches) are collapsed too; equal reductions resolve to the node earliest
    in preorder, so collapsing chains go from the top.
    """
    nodes: list[_RepBuild] = []
    parents: list[int] = []
    hold_at: list[np.ndarray] = []

    def flatten(node, parent, idx):
        i = len(nodes)
        nodes.append(node)
        parents.append(parent)
        hold_at.append(idx)
        if not node.is_leaf:
            goes_left = X[idx, node.attribute] <= node.threshold
            flatten(node.left, i, idx[goes_left])
            flatten(node.right, i, idx[~goes_left])
        return i

    flatten(root, -1, hold_idx)
    n = len(nodes)
    children: list[list[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        children[parents[i]].append(i)
    # preorder subtrees are contiguous: a node's range ends where its last
    # child's range does
    subtree_end = np.arange(1, n + 1)
    for i in range(n - 1, -1, -1):
        if children[i]:
            subtree_end[i] = subtree_end[children[i][-1]]

    leaf_sse = np.array([float(np.sum((y[hold_at[i]] - nodes[i].mean) ** 2))
                         if hold_at[i].size else 0.0 for i in range(n)])
    subtree_sse = leaf_sse.copy()
    for i in range(n - 1, -1, -1):
        if children[i]:
            subtree_sse[i] = sum(subtree_sse[k] for k in children[i])

    internal = np.array([bool(children[i]) for i in range(n)])
    active = internal.copy()
    while active.any():
        reduction = np.where(active, subtree_sse - leaf_sse, -np.inf)
        i = int(np.argmax(reduction))
        if reduction[i] < 0.0:
            break
        nodes[i].left = None
        nodes[i].right = None
        nodes[i].attribute = -1
        active[i:subtree_end[i]] = False
        delta = subtree_sse[i] - leaf_sse[i]
        subtree_sse[i] = leaf_sse[i]
        j = parents[i]
        while j != -1:
            subtree_sse[j] -= delta
            j = parents[j]


def _rep_freeze(node, d) -> TreeNode:
    if node.is_leaf:
        return Leaf(LinearModel(node.mean, np.zeros(d)), node.n)
    return Internal(node.attribute, float(node.threshold),
                    _rep_freeze(node.left, d), _rep_freeze(node.right, d))


class RepTree(Regressor):
    def __init__(self, root: TreeNode, predictor_names, grown_size: int):
        self.root = root
        self.predictor_names = tuple(predictor_names)
        self.grown_size = grown_size

    def predict_many(self, X):
        return predict_tree(self.root, X)

    @property
    def size(self) -> int:
        return tree_size(self.root)

    def describe(self) -> str:
        return format_tree(self.root, self.predictor_names)


def train_reptree(task: TaskView, params: RepTreeParams = RepTreeParams(),
                  rng: RngStream | None = None) -> RepTree:
    """Variance-reduction tree grown on two thirds of the training rows and
    pruned against the held-out third (reduced-error pruning).
    """
    if task.n_rows < 2:
        raise ValueError("need at least two rows")
    rng = rng if rng is not None else RngStream(1)
    X, y = task.predictors, task.target
    perm = rng.permutation(task.n_rows)
    n_hold = task.n_rows // params.pruning_folds
    hold_idx = np.sort(perm[:n_hold])
    grow_idx = np.sort(perm[n_hold:])
    root_var = float(np.var(y[grow_idx]))
    if root_var == 0.0:
        build = _RepBuild(float(np.mean(y[grow_idx])), grow_idx.size)
    else:
        build = _rep_grow(X, y, grow_idx, 0, params, root_var)
    grown_size = _build_size(build)
    if n_hold > 0:
        _rep_prune(build, X, y, hold_idx)
    return RepTree(_rep_freeze(build, task.n_predictors), task.predictor_names, grown_size)


def _build_size(node) -> int:
    if node.is_leaf:
        return 1
    return 1 + _build_size(node.left) + _build_size(node.right)


# ---------------------------------------------------------------------------
# Decision stump


def fit_stump(X, y, weights=None, presorted=None) -> TreeNode:
    """Single best (attribute, threshold) split under squared error.

    Falls back to one global-mean leaf when no split strictly beats it.
    weights, when given, turn every mean and error into its weighted version;
    leaf counts stay row counts.  presorted may carry per-column argsort
    orders to skip the sorts.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    w = None if weights is None else np.asarray(weights, dtype=float)
    total_w = float(n) if w is None else float(np.sum(w))
    if total_w <= 0:
        raise ValueError("total weight must be positive")
    wy = y if w is None else w * y
    global_mean = float(np.sum(wy)) / total_w
    global_sse = float(np.sum(wy * y)) - total_w * global_mean ** 2

    best = None  # (sse, attribute, threshold, cut_stats)
    for j in range(d):
        order = None if presorted is None else presorted[:, j]
        scan = threshold_scan(X[:, j], y, weights=w, order=order)
        if scan is None:
            continue
        sse = (_sse(scan.weight_left, scan.sum_left, scan.sumsq_left)
               + _sse(scan.weight_right, scan.sum_right, scan.sumsq_right))
        k = int(np.argmin(sse))
        if best is None or sse[k] < best[0]:
            # a side with no weight carries no information: predict the
            # global mean there
            mean_l = scan.sum_left[k] / scan.weight_left[k] \
                if scan.weight_left[k] > 0 else global_mean
            mean_r = scan.sum_right[k] / scan.weight_right[k] \
                if scan.weight_right[k] > 0 else global_mean
            best = (float(sse[k]), j, float(scan.thresholds[k]),
                    (float(mean_l), int(scan.count_left[k]),
                     float(mean_r), int(scan.count_right[k])))
    if best is None or best[0] >= global_sse:
        return Leaf(LinearModel(global_mean, np.zeros(d)), n)
    _, j, threshold, (mean_l, n_l, mean_r, n_r) = best
    return Internal(j, threshold,
                    Leaf(LinearModel(mean_l, np.zeros(d)), n_l),
                    Leaf(LinearModel(mean_r, np.zeros(d)), n_r))


class DecisionStump(Regressor):
    def __init__(self, root: TreeNode, predictor_names):
        self.root = root
        self.predictor_names = tuple(predictor_names)

    def predict_many(self, X):
        return predict_tree(self.root, X)

    def describe(self) -> str:
        return format_tree(self.root, self.predictor_names)


def train_decision_stump(task: TaskView) -> DecisionStump:
    return DecisionStump(fit_stump(task.predictors, task.target), task.predictor_names)
