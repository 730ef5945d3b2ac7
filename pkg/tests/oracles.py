"""Independent brute-force reference computations used to check the learners.

Everything here is written the slow, obvious way (explicit partitions, numpy
std/var on the actual subsets) so it shares no code path with the scanning
implementations under test.
"""

import numpy as np


def all_midpoints(x):
    xs = np.unique(np.asarray(x, dtype=float))
    return [(a + b) / 2.0 for a, b in zip(xs[:-1], xs[1:])]


def split_gain(x, y, threshold, criterion, weights=None):
    """Gain of one threshold, computed directly on the two partitions."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    left = x <= threshold
    right = ~left
    n = y.size
    if criterion == "sdr":
        return float(np.std(y)
                     - (left.sum() * np.std(y[left]) + right.sum() * np.std(y[right])) / n)
    if criterion == "variance":
        return float(np.var(y)
                     - (left.sum() * np.var(y[left]) + right.sum() * np.var(y[right])) / n)
    if criterion == "sse":
        def sse(mask):
            if weights is None:
                sub = y[mask]
                return float(np.sum((sub - sub.mean()) ** 2)) if sub.size else 0.0
            w, sub = weights[mask], y[mask]
            if w.sum() <= 0:
                return 0.0
            m = float(np.sum(w * sub) / np.sum(w))
            return float(np.sum(w * (sub - m) ** 2))
        return sse(np.ones(n, dtype=bool)) - sse(left) - sse(right)
    raise ValueError(criterion)


def brute_best_gain(x, y, criterion, min_child=1, weights=None):
    """Maximum gain over every admissible midpoint, or None."""
    best = None
    x = np.asarray(x, dtype=float)
    for threshold in all_midpoints(x):
        left = x <= threshold
        if left.sum() < min_child or (~left).sum() < min_child:
            continue
        gain = split_gain(x, y, threshold, criterion, weights)
        if best is None or gain > best:
            best = gain
    return best


def brute_stump_sse(X, y, weights=None):
    """(best two-leaf weighted SSE over all attribute/midpoint pairs, global SSE)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones(y.size) if weights is None else np.asarray(weights, dtype=float)

    def sse(mask):
        if not mask.any() or w[mask].sum() <= 0:
            return 0.0
        m = float(np.sum(w[mask] * y[mask]) / np.sum(w[mask]))
        return float(np.sum(w[mask] * (y[mask] - m) ** 2))

    global_sse = sse(np.ones(y.size, dtype=bool))
    best = None
    for j in range(X.shape[1]):
        for threshold in all_midpoints(X[:, j]):
            left = X[:, j] <= threshold
            total = sse(left) + sse(~left)
            if best is None or total < best:
                best = total
    return best, global_sse


def brute_slr_sse(X, y):
    """Per-attribute least-squares SSE of a one-predictor affine fit."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    result = []
    for j in range(X.shape[1]):
        A = np.column_stack([X[:, j], np.ones(y.size)])
        coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
        residual = y - A @ coef
        result.append(float(residual @ residual))
    return result


def entropy(counts):
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def brute_gain_ratio(x, labels, n_classes, threshold):
    """(information gain, gain ratio) of a binary numeric split, direct form."""
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels, dtype=int)
    left = x <= threshold
    n = labels.size

    def counts(mask):
        return np.bincount(labels[mask], minlength=n_classes)

    h_total = entropy(counts(np.ones(n, dtype=bool)))
    n_l, n_r = left.sum(), n - left.sum()
    gain = h_total - (n_l * entropy(counts(left)) + n_r * entropy(counts(~left))) / n
    split_info = entropy(np.array([n_l, n_r]))
    ratio = gain / split_info if split_info > 0 else float("inf")
    return gain, ratio
