import math

import numpy as np
import pytest

from updrsbench.numeric import (
    KernelSpec,
    LinearModel,
    RngStream,
    derive_seed,
    descriptive_stats,
    fit_least_squares,
    kernel_eval,
    kernel_matrix,
    normal_quantile,
)


def test_least_squares_identity_line():
    model = fit_least_squares([[1.0], [2.0], [3.0]], [1.0, 2.0, 3.0])
    assert model.intercept == pytest.approx(0.0, abs=1e-10)
    assert model.coefficients[0] == pytest.approx(1.0, abs=1e-10)


def test_least_squares_exact_affine():
    X = [[0.0], [1.0], [2.0]]
    y = [1.0, 3.0, 5.0]
    model = fit_least_squares(X, y)
    assert model.intercept == pytest.approx(1.0, abs=1e-10)
    assert model.coefficients[0] == pytest.approx(2.0, abs=1e-10)
    residuals = np.asarray(y) - model.predict_many(X)
    assert float(residuals @ residuals) == pytest.approx(0.0, abs=1e-18)


def test_ridge_handles_duplicated_column():
    rng = np.random.default_rng(7)
    x = rng.uniform(-2, 2, size=40)
    y = 3.0 + 1.5 * x + rng.normal(0, 0.1, size=40)
    single = fit_least_squares(x[:, None], y)
    doubled = fit_least_squares(np.column_stack([x, x]), y, ridge=1e-8)
    grid = np.linspace(-2, 2, 17)
    p_single = single.predict_many(grid[:, None])
    p_doubled = doubled.predict_many(np.column_stack([grid, grid]))
    assert np.max(np.abs(p_single - p_doubled)) < 1e-6


def test_intercept_not_penalised():
    # constant-only fit: huge ridge must still recover the exact mean
    y = np.array([10.0, 12.0, 14.0])
    X = np.zeros((3, 1))
    model = fit_least_squares(X, y, ridge=1e6)
    assert model.intercept == pytest.approx(12.0, abs=1e-9)


def test_least_squares_zero_columns():
    model = fit_least_squares(np.empty((4, 0)), [1.0, 2.0, 3.0, 6.0])
    assert model.intercept == pytest.approx(3.0)
    assert model.coefficients.size == 0


def test_residuals_orthogonal_to_design():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(5, 40))
        d = int(rng.integers(1, 6))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n)
        model = fit_least_squares(X, y)
        resid = y - model.predict_many(X)
        A = np.hstack([X, np.ones((n, 1))])
        assert np.max(np.abs(A.T @ resid)) < 1e-8 * max(1.0, np.max(np.abs(y)))


def test_least_squares_input_validation():
    with pytest.raises(ValueError):
        fit_least_squares([[1.0]], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_least_squares([[1.0]], [1.0], ridge=-1.0)
    with pytest.raises(ValueError):
        fit_least_squares(np.empty((0, 2)), np.empty(0))


def test_linear_model_predict_shapes():
    model = LinearModel(1.0, np.array([2.0, -1.0]))
    assert model.predict([3.0, 4.0]) == pytest.approx(3.0)
    out = model.predict_many([[3.0, 4.0], [0.0, 0.0]])
    assert out.tolist() == pytest.approx([3.0, 1.0])
    with pytest.raises(ValueError):
        model.predict([1.0])
    assert model.n_parameters == 3


def test_kernel_linear_dot():
    spec = KernelSpec(exponent=1, inhomogeneous=False)
    assert kernel_eval(spec, [1.0, 2.0], [1.0, 2.0]) == pytest.approx(5.0)


def test_kernel_inhomogeneous_at_origin():
    spec = KernelSpec(exponent=2, inhomogeneous=True)
    assert kernel_eval(spec, [0.0, 0.0], [0.0, 0.0]) == pytest.approx(1.0)


def test_kernel_orthogonal_vectors():
    spec = KernelSpec(exponent=3, inhomogeneous=False)
    assert kernel_eval(spec, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)


def test_kernel_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec(), [1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        KernelSpec(exponent=0)


def test_kernel_matrix_matches_pointwise():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(5, 3))
    Y = rng.normal(size=(4, 3))
    for spec in (KernelSpec(1), KernelSpec(2, True), KernelSpec(3)):
        K = kernel_matrix(spec, X, Y)
        for i in range(5):
            for j in range(4):
                assert K[i, j] == pytest.approx(kernel_eval(spec, X[i], Y[j]))


@pytest.mark.parametrize("exponent", [1, 2, 3])
def test_gram_matrix_positive_semidefinite(exponent):
    rng = np.random.default_rng(exponent)
    for _ in range(20):
        X = rng.uniform(0, 1, size=(int(rng.integers(2, 7)), 3))
        K = kernel_matrix(KernelSpec(exponent), X)
        eigenvalues = np.linalg.eigvalsh((K + K.T) / 2)
        assert eigenvalues.min() > -1e-9


def test_descriptive_stats_examples():
    assert descriptive_stats([1.0, 2.0, 3.0]) == pytest.approx((1.0, 3.0, 2.0, 1.0))
    assert descriptive_stats([5.0]) == pytest.approx((5.0, 5.0, 5.0, 0.0))
    assert descriptive_stats([-1.0, 1.0]) == pytest.approx((-1.0, 1.0, 0.0, math.sqrt(2)))
    with pytest.raises(ValueError):
        descriptive_stats([])


def test_rng_stream_reproducible():
    a = RngStream(123).uniform(0, 1, 10_000)
    b = RngStream(123).uniform(0, 1, 10_000)
    assert np.array_equal(a, b)
    c = RngStream(124).uniform(0, 1, 10_000)
    assert not np.array_equal(a, c)


def test_rng_stream_permutation_reproducible():
    assert np.array_equal(RngStream(5).permutation(50), RngStream(5).permutation(50))


def test_derive_seed_stable_and_distinct():
    s1 = derive_seed(1, "ibk")
    assert s1 == derive_seed(1, "ibk")
    assert s1 != derive_seed(1, "lwl")
    assert s1 != derive_seed(2, "ibk")
    assert 0 <= s1 < 2 ** 63


def test_spawn_independent_of_draws():
    parent = RngStream(9)
    parent.uniform(0, 1, 5)
    child_after = parent.spawn("x")
    child_fresh = RngStream(9).spawn("x")
    assert np.array_equal(child_after.uniform(0, 1, 8), child_fresh.uniform(0, 1, 8))


def test_normal_quantile_reference_points():
    assert normal_quantile(0.5) == pytest.approx(0.0, abs=1e-9)
    assert normal_quantile(0.975) == pytest.approx(1.959963985, abs=1e-6)
    assert normal_quantile(0.25) == pytest.approx(-0.674489750, abs=1e-6)
    assert normal_quantile(0.75) == pytest.approx(-normal_quantile(0.25), abs=1e-9)
    with pytest.raises(ValueError):
        normal_quantile(0.0)
