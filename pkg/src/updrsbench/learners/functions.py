"""Function learners: single-predictor least squares, a one-hidden-layer
perceptron trained by stochastic backpropagation, and epsilon-insensitive
support vector regression fitted by sequential minimal optimization.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..dataset import TaskView
from ..numeric import KernelSpec, LinearModel, RngStream, kernel_matrix
from .common import RangeScaler, Regressor

# ---------------------------------------------------------------------------
# Simple linear regression


class SlrRegressor(Regressor):
    """Least-squares line through the single most predictive attribute."""

    def __init__(self, chosen_predictor: int, chosen_name: str,
                 intercept: float, slope: float, training_sse: float):
        self.chosen_predictor = chosen_predictor
        self.chosen_name = chosen_name
        self.intercept = intercept
        self.slope = slope
        self.training_sse = training_sse

    @property
    def linear(self) -> LinearModel:
        return LinearModel(self.intercept, np.array([self.slope]),
                           (self.chosen_name,))

    def predict_many(self, X):
        X = np.asarray(X, dtype=float)
        return self.intercept + self.slope * X[:, self.chosen_predictor]

    def describe(self) -> str:
        return f"{self.intercept:.6g} + {self.slope:.6g}*{self.chosen_name}"


def train_slr(task: TaskView) -> SlrRegressor:
    """Fit y = a + b*x per predictor; keep the one with the smallest training
    SSE (ties to the lowest column index).
    """
    X, y = task.predictors, task.target
    if task.n_rows < 2:
        raise ValueError("need at least two rows")
    xm = X.mean(axis=0)
    ym = float(y.mean())
    Xc = X - xm
    yc = y - ym
    sxx = np.einsum("ij,ij->j", Xc, Xc)
    sxy = Xc.T @ yc
    syy = float(yc @ yc)
    valid = sxx > 0.0
    if not valid.any():
        raise ValueError("every predictor is constant")
    safe_sxx = np.where(valid, sxx, 1.0)
    explained = np.where(valid, sxy * sxy / safe_sxx, -np.inf)
    sse = np.maximum(syy - explained, 0.0)
    sse[~valid] = np.inf
    j = int(np.argmin(sse))
    slope = float(sxy[j] / sxx[j])
    intercept = ym - slope * float(xm[j])
    return SlrRegressor(j, task.predictor_names[j], intercept, slope,
                        float(sse[j]))


# ---------------------------------------------------------------------------
# Multi-layer perceptron


@njit(cache=True)
def _mlp_epoch(X, t, W1, b1, w2, b2, vW1, vb1, vw2, vb2, lr, mom):
    """One pass of per-instance gradient descent with momentum, in data order.

    Weight arrays are updated in place; b2 and vb2 are one-element arrays so
    the scalar state survives between calls.  Returns the epoch's summed
    squared error, measured before each update.
    """
    n, d = X.shape
    h = b1.size
    z = np.empty(h)
    sse = 0.0
    for i in range(n):
        out = b2[0]
        for j in range(h):
            s = b1[j]
            for k in range(d):
                s += X[i, k] * W1[k, j]
            zj = 1.0 / (1.0 + math.exp(-s))
            z[j] = zj
            out += zj * w2[j]
        err = out - t[i]
        sse += err * err
        for j in range(h):
            # hidden delta uses the outgoing weight before its update
            delta = err * w2[j] * z[j] * (1.0 - z[j])
            step = mom * vw2[j] - lr * err * z[j]
            vw2[j] = step
            w2[j] += step
            for k in range(d):
                step = mom * vW1[k, j] - lr * delta * X[i, k]
                vW1[k, j] = step
                W1[k, j] += step
            step = mom * vb1[j] - lr * delta
            vb1[j] = step
            b1[j] += step
        step = mom * vb2[0] - lr * err
        vb2[0] = step
        b2[0] += step
    return sse


def mlp_gradients(X, t, W1, b1, w2, b2):
    """Batch loss 0.5*sum((out - t)^2) and its gradients, for checking the
    training kernel against finite differences.
    """
    X = np.asarray(X, dtype=float)
    t = np.asarray(t, dtype=float)
    z = 1.0 / (1.0 + np.exp(-(X @ W1 + b1)))
    out = z @ w2 + b2
    err = out - t
    loss = 0.5 * float(err @ err)
    dw2 = z.T @ err
    db2 = float(err.sum())
    dz = np.outer(err, w2) * z * (1.0 - z)
    dW1 = X.T @ dz
    db1 = dz.sum(axis=0)
    return loss, dW1, db1, dw2, db2


class MlpModel(Regressor):
    """d -> hidden -> 1 network with sigmoid hidden units and linear output.

    Inputs and target are min-max scaled to [0, 1] using training statistics;
    predictions are mapped back to the target's original range.
    """

    def __init__(self, input_scaler: RangeScaler, target_min: float,
                 target_range: float, W1, b1, w2, b2: float):
        self.input_scaler = input_scaler
        self.target_min = target_min
        self.target_range = target_range
        self.W1 = np.asarray(W1, dtype=float)
        self.b1 = np.asarray(b1, dtype=float)
        self.w2 = np.asarray(w2, dtype=float)
        self.b2 = float(b2)
        d, h = self.W1.shape
        if self.b1.shape != (h,) or self.w2.shape != (h,):
            raise ValueError("weight array shapes do not match the layer sizes")

    @property
    def layer_sizes(self) -> tuple[int, int, int]:
        return (self.W1.shape[0], self.W1.shape[1], 1)

    def predict_many(self, X):
        Xs = self.input_scaler.transform(np.asarray(X, dtype=float))
        z = 1.0 / (1.0 + np.exp(-(Xs @ self.W1 + self.b1)))
        out = z @ self.w2 + self.b2
        return out * self.target_range + self.target_min


def train_mlp(task: TaskView, epochs: int = 500, learning_rate: float = 0.3,
              momentum: float = 0.2, hidden_units: int = 13,
              rng: RngStream | None = None) -> MlpModel:
    """Backpropagation with momentum, one weight update per training instance
    per epoch, instances visited in data order.
    """
    if epochs < 1:
        raise ValueError("epochs must be at least 1")
    if hidden_units < 1:
        raise ValueError("hidden_units must be at least 1")
    if task.n_rows < 1:
        raise ValueError("cannot train on an empty task")
    if rng is None:
        rng = RngStream(1)
    X, y = task.predictors, task.target
    d = task.n_predictors
    scaler = RangeScaler.from_data(X)
    Xs = scaler.transform(X)
    t_min = float(y.min())
    t_range = float(y.max()) - t_min
    if t_range == 0.0:
        t_range = 1.0
    t = (y - t_min) / t_range

    W1 = rng.uniform(-0.5, 0.5, size=(d, hidden_units))
    b1 = rng.uniform(-0.5, 0.5, size=hidden_units)
    w2 = rng.uniform(-0.5, 0.5, size=hidden_units)
    b2 = rng.uniform(-0.5, 0.5, size=1)
    vW1 = np.zeros_like(W1)
    vb1 = np.zeros_like(b1)
    vw2 = np.zeros_like(w2)
    vb2 = np.zeros(1)

    Xs = np.ascontiguousarray(Xs)
    t = np.ascontiguousarray(t)
    for epoch in range(1, epochs + 1):
        sse = _mlp_epoch(Xs, t, W1, b1, w2, b2, vW1, vb1, vw2, vb2,
                         learning_rate, momentum)
        if not math.isfinite(sse):
            raise ValueError(f"training diverged at epoch {epoch}")
    return MlpModel(scaler, t_min, t_range, W1, b1, w2, float(b2[0]))


# ---------------------------------------------------------------------------
# Support vector regression


class ConvergenceError(RuntimeError):
    """Optimizer hit its update cap; carries the residual KKT violation."""

    def __init__(self, message: str, violation: float):
        super().__init__(message)
        self.violation = violation


class SvrModel(Regressor):
    """f(x) = sum_i beta_i K(x_i, x) + b over the support vectors."""

    def __init__(self, support_vectors: np.ndarray, dual_coefficients: np.ndarray,
                 bias: float, kernel: KernelSpec, C: float, epsilon: float,
                 input_scaler: RangeScaler, kkt_violation: float,
                 n_updates: int, objective_trace: tuple[float, ...]):
        self.support_vectors = support_vectors
        self.dual_coefficients = dual_coefficients
        self.bias = bias
        self.kernel = kernel
        self.C = C
        self.epsilon = epsilon
        self.input_scaler = input_scaler
        self.kkt_violation = kkt_violation
        self.n_updates = n_updates
        self.objective_trace = objective_trace

    def predict_many(self, X):
        Xs = self.input_scaler.transform(np.asarray(X, dtype=float))
        if self.support_vectors.shape[0] == 0:
            return np.full(Xs.shape[0], self.bias)
        K = kernel_matrix(self.kernel, Xs, self.support_vectors)
        return K @ self.dual_coefficients + self.bias

    @property
    def n_support_vectors(self) -> int:
        return int(self.support_vectors.shape[0])


def _pair_objective(eta, f_gap, epsilon, t, t_old, s):
    return (0.5 * eta * (t - t_old) ** 2 + f_gap * (t - t_old)
            + epsilon * (abs(t) - abs(t_old))
            + epsilon * (abs(s - t) - abs(s - t_old)))


def _optimize_pair(t_old, s, eta, f_gap, epsilon, C):
    """Exact minimizer of the two-variable subproblem along beta_p + beta_q = s.

    The objective in t = beta_q is piecewise quadratic with kinks at 0 and s;
    the minimum is found by evaluating each piece's stationary point plus the
    kinks and the box corners.
    """
    lo = max(-C, s - C)
    hi = min(C, s + C)
    candidates = [lo, hi]
    for kink in (0.0, s):
        if lo < kink < hi:
            candidates.append(kink)
    if eta > 0.0:
        for sign_t in (-1.0, 1.0):
            for sign_st in (-1.0, 1.0):
                t_star = t_old - (f_gap + epsilon * sign_t - epsilon * sign_st) / eta
                if lo <= t_star <= hi:
                    candidates.append(t_star)
    best_t = t_old
    best_val = 0.0
    for t in candidates:
        val = _pair_objective(eta, f_gap, epsilon, t, t_old, s)
        if val < best_val:
            best_val = val
            best_t = t
    return best_t


def train_smoreg(task: TaskView, kernel: KernelSpec = KernelSpec(),
                 C: float = 1.0, epsilon: float = 1e-3,
                 tolerance: float = 1e-3,
                 max_updates: int = 10 ** 6) -> SvrModel:
    """Sequential minimal optimization on the epsilon-insensitive dual.

    Repeatedly picks the maximally violating pair of dual variables (the
    smallest upper bound and largest lower bound on the bias), solves that
    two-variable problem exactly, and stops when every bias bound overlaps
    within 2*tolerance.  Predictors are min-max normalized; targets are left
    on their original scale.
    """
    if C <= 0.0:
        raise ValueError("C must be positive")
    if epsilon < 0.0:
        raise ValueError("epsilon must be non-negative")
    if task.n_rows < 1:
        raise ValueError("cannot train on an empty task")
    scaler = RangeScaler.from_data(task.predictors)
    X = scaler.transform(task.predictors)
    y = task.target.astype(float)
    n = y.size

    K = kernel_matrix(kernel, X)
    beta = np.zeros(n)
    F = y.copy()  # F_i = y_i - sum_j beta_j K_ij

    def objective() -> float:
        # dual value: -(1/2) beta.K.beta - eps*|beta|_1 + y.beta, using
        # K.beta = y - F
        return float(-0.5 * beta @ (y - F) - epsilon * np.abs(beta).sum()
                     + y @ beta)

    trace = [objective()]
    updates = 0
    while True:
        upper = np.where(beta > 0.0, F - epsilon, F + epsilon)
        lower = np.where(beta < 0.0, F + epsilon, F - epsilon)
        upper[beta <= -C] = np.inf
        lower[beta >= C] = -np.inf
        i_up = int(np.argmin(upper))
        i_low = int(np.argmax(lower))
        violation = float(lower[i_low] - upper[i_up])
        if violation <= 2.0 * tolerance:
            break
        if updates >= max_updates:
            raise ConvergenceError(
                f"no convergence after {max_updates} pair updates; "
                f"largest bias-bound violation {violation:.6g}", violation)
        p, q = i_low, i_up
        s = beta[p] + beta[q]
        eta = float(K[p, p] + K[q, q] - 2.0 * K[p, q])
        f_gap = float(F[p] - F[q])
        t_old = float(beta[q])
        t_new = _optimize_pair(t_old, s, eta, f_gap, epsilon, C)
        step = t_new - t_old
        if step == 0.0:
            raise ConvergenceError(
                f"optimizer stalled with bias-bound violation {violation:.6g}",
                violation)
        beta[q] = t_new
        beta[p] = s - t_new
        F += step * (K[:, p] - K[:, q])
        updates += 1
        if updates % 1000 == 0:
            trace.append(objective())
    trace.append(objective())

    upper = np.where(beta > 0.0, F - epsilon, F + epsilon)
    lower = np.where(beta < 0.0, F + epsilon, F - epsilon)
    upper[beta <= -C] = np.inf
    lower[beta >= C] = -np.inf
    bias = float((upper.min() + lower.max()) / 2.0)
    violation = float(lower.max() - upper.min())

    support = np.abs(beta) > 0.0
    return SvrModel(
        support_vectors=np.ascontiguousarray(X[support]),
        dual_coefficients=beta[support],
        bias=bias,
        kernel=kernel,
        C=C,
        epsilon=epsilon,
        input_scaler=scaler,
        kkt_violation=violation,
        n_updates=updates,
        objective_trace=tuple(trace),
    )
