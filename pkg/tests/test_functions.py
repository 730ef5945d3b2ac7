"""Function learner tests.

The perceptron's training kernel is checked against a plain numpy gradient
computation, which in turn is checked against central finite differences.
The SVR optimizer is verified through its KKT conditions rather than against
any particular solution path.
"""

import math

import numpy as np
import pytest

from oracles import brute_slr_sse
from updrsbench.dataset import TaskView
from updrsbench.learners.common import RangeScaler
from updrsbench.learners.functions import (
    ConvergenceError,
    MlpModel,
    SvrModel,
    _mlp_epoch,
    mlp_gradients,
    train_mlp,
    train_slr,
    train_smoreg,
)
from updrsbench.numeric import KernelSpec, RngStream, kernel_matrix


def make_task(X, y, names=None):
    X = np.asarray(X, dtype=float)
    names = names or tuple(f"a{j}" for j in range(X.shape[1]))
    return TaskView(X, tuple(names), np.asarray(y, dtype=float), "y")


# ---------------------------------------------------------------------------
# Simple linear regression


def test_slr_selects_the_exact_predictor():
    rng = RngStream(5)
    x1 = rng.uniform(0.0, 10.0, size=40)
    y = 1.0 + 2.0 * x1
    x2 = x1[rng.permutation(40)]
    task = make_task(np.column_stack([x2, x1]), y, ("noise", "signal"))
    model = train_slr(task)
    assert model.chosen_predictor == 1
    assert model.chosen_name == "signal"
    assert model.intercept == pytest.approx(1.0)
    assert model.slope == pytest.approx(2.0)
    assert model.training_sse == pytest.approx(0.0, abs=1e-9)
    assert model.predict_many(task.predictors) == pytest.approx(y)


def test_slr_matches_brute_force_sse():
    rng = RngStream(13)
    for trial in range(25):
        n = int(rng.integers(2, 20))
        d = int(rng.integers(1, 6))
        X = rng.integers(0, 6, size=(n, d)).astype(float)
        y = rng.integers(-5, 6, size=n).astype(float)
        usable = np.ptp(X, axis=0) > 0
        if not usable.any():
            with pytest.raises(ValueError):
                train_slr(make_task(X, y))
            continue
        model = train_slr(make_task(X, y))
        per_attr = brute_slr_sse(X, y)
        best = min(s for s, ok in zip(per_attr, usable) if ok)
        assert usable[model.chosen_predictor]
        assert model.training_sse == pytest.approx(best, abs=1e-8)
        # the reported SSE must be the chosen column's true SSE, and no
        # usable column may beat it
        assert model.training_sse == pytest.approx(
            per_attr[model.chosen_predictor], abs=1e-8)
        assert all(model.training_sse <= s + 1e-8
                   for s, ok in zip(per_attr, usable) if ok)


def test_slr_constant_target():
    task = make_task([[1.0, 4.0], [2.0, 3.0], [3.0, 8.0]], [5.0, 5.0, 5.0])
    model = train_slr(task)
    assert model.slope == pytest.approx(0.0)
    assert model.intercept == pytest.approx(5.0)
    assert model.predict(np.array([77.0, -3.0])) == pytest.approx(5.0)


def test_slr_rejects_degenerate_tasks():
    with pytest.raises(ValueError):
        train_slr(make_task([[1.0], [1.0], [1.0]], [1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        train_slr(make_task([[1.0]], [1.0]))


# ---------------------------------------------------------------------------
# Multi-layer perceptron


def identity_scaler(d):
    return RangeScaler(np.zeros(d), np.ones(d))


def test_mlp_zero_weights_predict_output_bias():
    model = MlpModel(identity_scaler(3), 0.0, 1.0,
                     np.zeros((3, 4)), np.zeros(4), np.zeros(4), 0.25)
    queries = np.array([[0.1, 0.5, 0.9], [7.0, -2.0, 0.0]])
    # zero hidden weights give sigmoid(0) = 0.5 everywhere, but zero output
    # weights drop that contribution
    assert model.predict_many(queries) == pytest.approx([0.25, 0.25])


def test_mlp_shape_validation():
    with pytest.raises(ValueError):
        MlpModel(identity_scaler(3), 0.0, 1.0,
                 np.zeros((3, 4)), np.zeros(5), np.zeros(4), 0.0)


def _flatten(W1, b1, w2, b2):
    return np.concatenate([W1.ravel(), b1, w2, [b2]])


def _unflatten(v, d, h):
    W1 = v[:d * h].reshape(d, h)
    b1 = v[d * h:d * h + h]
    w2 = v[d * h + h:d * h + 2 * h]
    return W1, b1, w2, float(v[-1])


def test_mlp_gradients_match_finite_differences():
    rng = RngStream(21)
    d, h, n = 3, 2, 6
    X = rng.uniform(0.0, 1.0, size=(n, d))
    t = rng.uniform(0.0, 1.0, size=n)
    params = rng.uniform(-0.5, 0.5, size=d * h + 2 * h + 1)
    loss, dW1, db1, dw2, db2 = mlp_gradients(X, t, *_unflatten(params, d, h))
    analytic = _flatten(dW1, db1, dw2, db2)
    step = 1e-5
    worst = 0.0
    for i in range(params.size):
        up = params.copy()
        up[i] += step
        down = params.copy()
        down[i] -= step
        numeric = (mlp_gradients(X, t, *_unflatten(up, d, h))[0]
                   - mlp_gradients(X, t, *_unflatten(down, d, h))[0]) / (2 * step)
        rel = abs(numeric - analytic[i]) / max(abs(numeric), abs(analytic[i]), 1e-8)
        worst = max(worst, rel)
    assert worst < 1e-4


def test_mlp_gradient_step_gives_first_order_decrease():
    rng = RngStream(33)
    d, h, n = 4, 3, 8
    step = 1e-6
    for trial in range(20):
        X = rng.uniform(0.0, 1.0, size=(n, d))
        t = rng.uniform(0.0, 1.0, size=n)
        params = rng.uniform(-0.5, 0.5, size=d * h + 2 * h + 1)
        loss0, dW1, db1, dw2, db2 = mlp_gradients(X, t, *_unflatten(params, d, h))
        grad = _flatten(dW1, db1, dw2, db2)
        loss1 = mlp_gradients(X, t, *_unflatten(params - step * grad, d, h))[0]
        expected_drop = step * float(grad @ grad)
        assert loss0 - loss1 == pytest.approx(expected_drop, rel=1e-2)


def test_mlp_kernel_step_matches_batch_gradients():
    # a single instance with zero momentum makes the stochastic update equal
    # to one batch gradient step
    rng = RngStream(8)
    d, h = 3, 2
    X = rng.uniform(0.0, 1.0, size=(1, d))
    t = rng.uniform(0.0, 1.0, size=1)
    W1 = rng.uniform(-0.5, 0.5, size=(d, h))
    b1 = rng.uniform(-0.5, 0.5, size=h)
    w2 = rng.uniform(-0.5, 0.5, size=h)
    b2 = np.array([0.3])
    loss, dW1, db1, dw2, db2 = mlp_gradients(X, t, W1, b1, w2, float(b2[0]))

    lr = 0.1
    W1k, b1k, w2k, b2k = W1.copy(), b1.copy(), w2.copy(), b2.copy()
    _mlp_epoch(X, t, W1k, b1k, w2k, b2k,
               np.zeros_like(W1), np.zeros(h), np.zeros(h), np.zeros(1),
               lr, 0.0)
    assert W1k == pytest.approx(W1 - lr * dW1)
    assert b1k == pytest.approx(b1 - lr * db1)
    assert w2k == pytest.approx(w2 - lr * dw2)
    assert b2k[0] == pytest.approx(b2[0] - lr * db2)


def test_mlp_is_deterministic():
    rng = RngStream(2)
    X = rng.uniform(0.0, 5.0, size=(30, 2))
    y = X[:, 0] - 2.0 * X[:, 1]
    task = make_task(X, y)
    first = train_mlp(task, epochs=5, hidden_units=3, rng=RngStream(77))
    second = train_mlp(task, epochs=5, hidden_units=3, rng=RngStream(77))
    assert np.array_equal(first.W1, second.W1)
    assert np.array_equal(first.w2, second.w2)
    assert first.b2 == second.b2


def test_mlp_learns_a_smooth_function():
    rng = RngStream(14)
    X = rng.uniform(0.0, 1.0, size=(120, 1))
    y = 3.0 * X[:, 0] + 1.0
    task = make_task(X, y)
    model = train_mlp(task, epochs=300, hidden_units=5, rng=RngStream(4))
    predictions = model.predict_many(X)
    mse = float(np.mean((predictions - y) ** 2))
    assert mse < 0.05 * float(np.var(y))


def test_mlp_divergence_names_the_epoch():
    rng = RngStream(6)
    X = rng.uniform(0.0, 1.0, size=(20, 2))
    y = rng.uniform(0.0, 100.0, size=20)
    with pytest.raises(ValueError, match="epoch"):
        train_mlp(make_task(X, y), epochs=50, learning_rate=1e6,
                  momentum=0.99, rng=RngStream(3))


def test_mlp_validation():
    task = make_task([[0.0], [1.0]], [0.0, 1.0])
    with pytest.raises(ValueError):
        train_mlp(task, epochs=0)
    with pytest.raises(ValueError):
        train_mlp(task, hidden_units=0)


# ---------------------------------------------------------------------------
# Support vector regression


def test_smoreg_constant_target():
    rng = RngStream(9)
    X = rng.uniform(0.0, 1.0, size=(15, 2))
    model = train_smoreg(make_task(X, np.full(15, 3.5)), epsilon=0.1)
    assert model.n_support_vectors == 0
    assert model.bias == pytest.approx(3.5)
    assert model.n_updates == 0
    assert model.predict_many(rng.uniform(0.0, 1.0, size=(5, 2))) == pytest.approx(
        np.full(5, 3.5))


def test_smoreg_fits_a_line_inside_the_tube():
    x = np.arange(5.0)
    y = 2.0 * x
    task = make_task(x[:, None], y)
    model = train_smoreg(task, C=100.0, epsilon=0.01)
    residuals = model.predict_many(task.predictors) - y
    assert float(np.mean(np.abs(residuals))) <= 0.01 + 1e-6
    assert model.kkt_violation <= 2e-3
    assert np.all(np.abs(model.dual_coefficients) <= 100.0 + 1e-9)


def test_smoreg_kkt_conditions_on_random_data():
    rng = RngStream(31)
    X = rng.uniform(0.0, 1.0, size=(40, 2))
    y = 3.0 * X[:, 0] - X[:, 1] + 0.05 * rng.standard_normal(40)
    task = make_task(X, y)
    C, eps, tol = 1.0, 0.1, 1e-3
    model = train_smoreg(task, C=C, epsilon=eps, tolerance=tol)
    beta = np.zeros(40)
    # rebuild the full dual vector from the sparse support set
    predictions = model.predict_many(X)
    residuals = np.abs(predictions - y)
    sv_index = 0
    Xs = model.input_scaler.transform(X)
    for i in range(40):
        if sv_index < model.n_support_vectors and np.array_equal(
                Xs[i], model.support_vectors[sv_index]):
            beta[i] = model.dual_coefficients[sv_index]
            sv_index += 1
    assert sv_index == model.n_support_vectors
    assert np.all(np.abs(beta) <= C + 1e-12)
    inside = residuals < eps - tol
    assert np.all(beta[inside] == 0.0)


def test_smoreg_objective_is_nondecreasing():
    rng = RngStream(12)
    X = rng.uniform(0.0, 1.0, size=(60, 3))
    y = X @ np.array([2.0, -1.0, 0.5]) + 0.1 * rng.standard_normal(60)
    model = train_smoreg(make_task(X, y), C=5.0, epsilon=0.05)
    trace = np.array(model.objective_trace)
    assert len(trace) >= 2
    assert np.all(np.diff(trace) >= -1e-9)


def test_smoreg_is_deterministic():
    rng = RngStream(18)
    X = rng.uniform(0.0, 1.0, size=(25, 2))
    y = X[:, 0] + 0.2 * rng.standard_normal(25)
    task = make_task(X, y)
    first = train_smoreg(task, epsilon=0.05)
    second = train_smoreg(task, epsilon=0.05)
    assert np.array_equal(first.dual_coefficients, second.dual_coefficients)
    assert first.bias == second.bias
    assert first.n_updates == second.n_updates


def test_smoreg_update_cap_raises_with_violation():
    x = np.arange(8.0)
    y = 2.0 * x
    task = make_task(x[:, None], y)
    with pytest.raises(ConvergenceError) as info:
        train_smoreg(task, C=100.0, epsilon=0.01, max_updates=0)
    assert info.value.violation > 0.0


def test_smoreg_validation():
    task = make_task([[0.0], [1.0]], [0.0, 1.0])
    with pytest.raises(ValueError):
        train_smoreg(task, C=0.0)
    with pytest.raises(ValueError):
        train_smoreg(task, epsilon=-0.1)
    with pytest.raises(ValueError):
        train_smoreg(make_task(np.empty((0, 1)), np.empty(0)))


def test_smoreg_polynomial_kernel_improves_on_curved_data():
    rng = RngStream(26)
    x = rng.uniform(-1.0, 1.0, size=80)
    y = x ** 2
    task = make_task(x[:, None], y)
    quad = train_smoreg(task, kernel=KernelSpec(exponent=2, inhomogeneous=True),
                        C=10.0, epsilon=0.01)
    line = train_smoreg(task, C=10.0, epsilon=0.01)
    quad_mae = float(np.mean(np.abs(quad.predict_many(task.predictors) - y)))
    line_mae = float(np.mean(np.abs(line.predict_many(task.predictors) - y)))
    assert quad_mae < line_mae
    assert quad_mae <= 0.02
