"""Rule learners: M5Rules (tree-to-rule extraction) and the decision table
with best-first feature-subset search.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..dataset import TaskView
from ..numeric import LinearModel
from .common import Regressor
from .trees import Internal, Leaf, M5Params, format_linear, train_m5p

M5RULES_DEFAULTS = M5Params(min_instances=4)


# ---------------------------------------------------------------------------
# M5Rules


@dataclass(frozen=True)
class Condition:
    attribute: int
    op: str  # "<=" or ">"
    threshold: float

    def matches(self, X) -> np.ndarray:
        column = np.asarray(X, dtype=float)[:, self.attribute]
        if self.op == "<=":
            return column <= self.threshold
        return column > self.threshold


@dataclass(frozen=True)
class Rule:
    """One extracted branch: its path conditions and the leaf's model."""

    conditions: tuple[Condition, ...]
    model: LinearModel
    coverage: int

    def matches(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.ones(X.shape[0], dtype=bool)
        for condition in self.conditions:
            out &= condition.matches(X)
        return out


def _leaf_paths(node, conditions=()):
    """(path conditions, leaf) pairs in left-to-right order."""
    if isinstance(node, Leaf):
        return [(conditions, node)]
    left = _leaf_paths(node.left, conditions + (Condition(node.attribute, "<=", node.threshold),))
    right = _leaf_paths(node.right, conditions + (Condition(node.attribute, ">", node.threshold),))
    return left + right


class RuleListModel(Regressor):
    """Ordered rules; the first whose conditions all hold makes the prediction.

    Queries matching no rule fall back to the default model (the mean of the
    final residual set; unreachable in practice because the last extracted
    rule is unconditional).
    """

    def __init__(self, rules: tuple[Rule, ...], default_model: LinearModel,
                 predictor_names):
        self.rules = tuple(rules)
        self.default_model = default_model
        self.predictor_names = tuple(predictor_names)

    def predict_many(self, X):
        X = np.asarray(X, dtype=float)
        out = self.default_model.predict_many(X)
        unclaimed = np.ones(X.shape[0], dtype=bool)
        for rule in self.rules:
            hit = unclaimed & rule.matches(X)
            if hit.any():
                out[hit] = rule.model.predict_many(X[hit])
                unclaimed &= ~hit
            if not unclaimed.any():
                break
        return out

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    def describe(self) -> str:
        lines = []
        for rule in self.rules:
            if rule.conditions:
                conds = " ∧ ".join(
                    f"{self.predictor_names[c.attribute]} {c.op} {c.threshold:.6g}"
                    for c in rule.conditions)
            else:
                conds = "true"
            lines.append(f"{conds} → {format_linear(rule.model, self.predictor_names)}"
                         f" ({rule.coverage})")
        lines.append(f"default → {format_linear(self.default_model, self.predictor_names)}")
        return "\n".join(lines)


def train_m5rules(task: TaskView, params: M5Params = M5RULES_DEFAULTS) -> RuleListModel:
    """Extract a decision list from repeated M5 trees.

    Each pass builds a pruned tree on the rows no earlier rule covered, turns
    the best leaf (largest coverage, ties to the lowest estimated error, then
    leftmost) into a rule, and drops the rows it covers.  The last pass always
    ends in an unconditional rule, so the list covers everything.
    """
    if task.n_rows < 1:
        raise ValueError("cannot train on an empty task")
    remaining = np.arange(task.n_rows)
    rules: list[Rule] = []
    residual_mean = float(np.mean(task.target))
    while remaining.size:
        residual_mean = float(np.mean(task.target[remaining]))
        subtask = task.restrict(remaining)
        tree = train_m5p(subtask, params)
        best = None
        for conditions, leaf in _leaf_paths(tree.root):
            key = (leaf.n_instances, -leaf.estimated_error)
            if best is None or key > (best[1].n_instances, -best[1].estimated_error):
                best = (conditions, leaf)
        conditions, leaf = best
        covered = np.ones(remaining.size, dtype=bool)
        for condition in conditions:
            covered &= condition.matches(subtask.predictors)
        n_covered = int(covered.sum())
        if n_covered == 0:
            raise AssertionError("extracted rule covers no rows")
        rules.append(Rule(conditions, leaf.model, n_covered))
        remaining = remaining[~covered]
    default = LinearModel(residual_mean, np.zeros(task.n_predictors),
                          task.predictor_names)
    return RuleListModel(tuple(rules), default, task.predictor_names)


# ---------------------------------------------------------------------------
# Decision table


class DecisionTableModel(Regressor):
    """Lookup table over equal-width-binned values of a learned feature subset."""

    def __init__(self, selected: tuple[int, ...], selected_names, n_bins: int,
                 bin_minimum: np.ndarray, bin_width: np.ndarray,
                 cells: dict[tuple[int, ...], float], global_mean: float,
                 loo_score: float, trace: tuple[tuple[tuple[int, ...], float], ...]):
        self.selected = selected
        self.selected_names = tuple(selected_names)
        self.n_bins = n_bins
        self.bin_minimum = bin_minimum
        self.bin_width = bin_width
        self.cells = cells
        self.global_mean = global_mean
        self.loo_score = loo_score
        self.trace = trace

    def bin_codes(self, X) -> np.ndarray:
        """Bin index of every selected feature, clamped to the fitted range."""
        X = np.asarray(X, dtype=float)
        sub = X[:, list(self.selected)]
        width = np.where(self.bin_width > 0, self.bin_width, 1.0)
        codes = np.floor((sub - self.bin_minimum) / width).astype(int)
        return np.clip(codes, 0, self.n_bins - 1)

    def predict_many(self, X):
        codes = self.bin_codes(X)
        out = np.empty(codes.shape[0])
        for i in range(codes.shape[0]):
            out[i] = self.cells.get(tuple(codes[i]), self.global_mean)
        return out

    def describe(self) -> str:
        header = ", ".join(self.selected_names) if self.selected_names else "(no features)"
        lines = [f"key: {header}; {len(self.cells)} cells; global mean "
                 f"{self.global_mean:.6g}"]
        for key in sorted(self.cells):
            lines.append(f"  {key} → {self.cells[key]:.6g}")
        return "\n".join(lines)


def _grouped_loo_rmse(codes: np.ndarray, y: np.ndarray) -> float:
    """Leave-one-out RMSE of the cell-mean table keyed by the given codes.

    Removing a row from a singleton cell leaves no cell behind, so that row
    falls back to the leave-one-out global mean.
    """
    n = y.size
    if codes.shape[1] == 0:
        group = np.zeros(n, dtype=int)
    elif codes.shape[1] <= 15:
        weights = (codes.max() + 1 if codes.size else 1) ** np.arange(codes.shape[1])
        _, group = np.unique(codes @ weights, return_inverse=True)
    else:
        _, group = np.unique(codes, axis=0, return_inverse=True)
    counts = np.bincount(group)
    sums = np.bincount(group, weights=y)
    m = counts[group]
    s = sums[group]
    total = float(y.sum())
    with np.errstate(invalid="ignore"):
        prediction = np.where(m > 1, (s - y) / np.maximum(m - 1, 1),
                              (total - y) / (n - 1))
    residual = prediction - y
    return math.sqrt(float(residual @ residual) / n)


def train_decision_table(task: TaskView, search_width: int = 5,
                         n_bins: int = 10) -> DecisionTableModel:
    """Best-first search over feature subsets scored by leave-one-out RMSE.

    The search starts from the empty subset, expands the best unexpanded
    subset by add-one and drop-one moves, and stops after search_width
    consecutive expansions that fail to improve the best score.  The final
    table is built on the best subset found, with every selected feature
    discretized into n_bins equal-width bins fitted on the training data.
    """
    if task.n_rows < 1:
        raise ValueError("cannot train on an empty task")
    if search_width < 1:
        raise ValueError("search_width must be at least 1")
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    X, y = task.predictors, task.target
    n, d = X.shape
    global_mean = float(np.mean(y))

    minimum = X.min(axis=0)
    width = (X.max(axis=0) - minimum) / n_bins
    safe_width = np.where(width > 0, width, 1.0)
    all_codes = np.clip(np.floor((X - minimum) / safe_width).astype(int),
                        0, n_bins - 1)
    all_codes[:, width == 0] = 0

    trace: list[tuple[tuple[int, ...], float]] = []

    if n == 1:
        best_subset: tuple[int, ...] = ()
        best_score = 0.0
        trace.append(((), 0.0))
    else:
        def score_of(subset: tuple[int, ...]) -> float:
            return _grouped_loo_rmse(all_codes[:, list(subset)], y)

        best_subset = ()
        best_score = score_of(())
        trace.append(((), best_score))
        frontier: list[tuple[float, int, tuple[int, ...]]] = [(best_score, 0, ())]
        seen = {()}
        tick = 1
        stale_expansions = 0
        while frontier and stale_expansions < search_width:
            _, _, subset = heapq.heappop(frontier)
            improved = False
            neighbors = [tuple(sorted(subset + (j,))) for j in range(d) if j not in subset]
            neighbors += [tuple(k for k in subset if k != j) for j in subset]
            for neighbor in neighbors:
                if neighbor in seen:
                    continue
                seen.add(neighbor)
                s = score_of(neighbor)
                trace.append((neighbor, s))
                heapq.heappush(frontier, (s, tick, neighbor))
                tick += 1
                if s < best_score:
                    best_score = s
                    best_subset = neighbor
                    improved = True
            stale_expansions = 0 if improved else stale_expansions + 1

    codes = all_codes[:, list(best_subset)]
    cells: dict[tuple[int, ...], float] = {}
    if codes.shape[1] == 0:
        cells[()] = global_mean
    else:
        keys, group, counts = np.unique(codes, axis=0, return_inverse=True,
                                        return_counts=True)
        sums = np.bincount(group, weights=y)
        for k in range(keys.shape[0]):
            cells[tuple(int(v) for v in keys[k])] = float(sums[k] / counts[k])

    return DecisionTableModel(
        selected=best_subset,
        selected_names=tuple(task.predictor_names[j] for j in best_subset),
        n_bins=n_bins,
        bin_minimum=minimum[list(best_subset)],
        bin_width=width[list(best_subset)],
        cells=cells,
        global_mean=global_mean,
        loo_score=best_score,
        trace=tuple(trace),
    )
