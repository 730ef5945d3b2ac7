"""Shared numerical machinery: linear models, least squares, polynomial kernels,
descriptive statistics and seeded random streams.

Everything downstream (learners, splitting, the benchmark harness) builds on the
small surface defined here so that numeric conventions are decided in one place.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

# Name of the generator algorithm backing RngStream.  Recorded so that saved
# configurations stay meaningful if the default ever changes.
RNG_ALGORITHM = "pcg64"


def derive_seed(master_seed: int, label: str) -> int:
    """Derive a stable per-component seed from a master seed and a text label.

    Hash based so that adding or reordering components never shifts the seeds
    of the others.  Returns a non-negative 63-bit integer.
    """
    digest = hashlib.sha256(f"{master_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class RngStream:
    """A seeded pseudo-random stream.  Equal seeds give equal draw sequences.

    Thin wrapper over numpy's PCG64 generator; learners take an RngStream so
    their stochastic choices are reproducible and independently seeded.
    """

    seed: int
    algorithm: str = RNG_ALGORITHM
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.algorithm != RNG_ALGORITHM:
            raise ValueError(f"unknown rng algorithm {self.algorithm!r}")
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, low: float, high: float, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def shuffle(self, values: np.ndarray) -> None:
        self._gen.shuffle(values)

    def spawn(self, label: str) -> "RngStream":
        """Child stream whose seed depends only on this stream's seed and the label."""
        return RngStream(derive_seed(self.seed, label))


@dataclass(frozen=True)
class LinearModel:
    """Affine predictor y = intercept + coefficients . x."""

    intercept: float
    coefficients: np.ndarray
    predictor_names: tuple[str, ...] | None = None

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coef)
        if coef.ndim != 1:
            raise ValueError("coefficients must be a vector")
        if self.predictor_names is not None and len(self.predictor_names) != coef.size:
            raise ValueError("predictor_names length does not match coefficients")

    @property
    def n_parameters(self) -> int:
        return int(self.coefficients.size) + 1

    def predict(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != self.coefficients.shape:
            raise ValueError(f"expected {self.coefficients.size} inputs, got {x.size}")
        return float(self.intercept + self.coefficients @ x)

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.coefficients.size:
            raise ValueError(f"expected a matrix with {self.coefficients.size} columns")
        return X @ self.coefficients + self.intercept


def fit_least_squares(X, y, ridge: float = 0.0,
                      predictor_names: tuple[str, ...] | None = None) -> LinearModel:
    """Least-squares fit of an affine model, optionally ridge stabilised.

    The intercept is never penalised; a ridge of r adds r * sum(w_i^2) to the
    objective, implemented by augmenting the system with sqrt(r) rows.  Uses
    the SVD-backed solver so rank-deficient systems get the minimum-norm
    solution instead of an error.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    n, d = X.shape
    if y.shape != (n,):
        raise ValueError(f"X has {n} rows but y has shape {y.shape}")
    if n == 0:
        raise ValueError("cannot fit on zero rows")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    A = np.hstack([X, np.ones((n, 1))])
    b = y
    if ridge > 0 and d > 0:
        pen = np.hstack([math.sqrt(ridge) * np.eye(d), np.zeros((d, 1))])
        A = np.vstack([A, pen])
        b = np.concatenate([y, np.zeros(d)])
    sol, _, _, _ = np.linalg.lstsq(A, b, rcond=None)
    return LinearModel(float(sol[-1]), sol[:-1].copy(), predictor_names)


@dataclass(frozen=True)
class KernelSpec:
    """Polynomial kernel (x . y)^p, or (x . y + 1)^p when inhomogeneous."""

    exponent: int = 1
    inhomogeneous: bool = False

    def __post_init__(self):
        if int(self.exponent) != self.exponent or self.exponent < 1:
            raise ValueError("exponent must be an integer >= 1")


def kernel_eval(spec: KernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("kernel arguments must have equal dimension")
    base = float(x @ y)
    if spec.inhomogeneous:
        base += 1.0
    return base ** spec.exponent


def kernel_matrix(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Kernel values between the rows of X and the rows of Y (X itself if omitted)."""
    X = np.asarray(X, dtype=float)
    Y = X if Y is None else np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != Y.shape[1]:
        raise ValueError("kernel_matrix needs matrices with matching column counts")
    base = X @ Y.T
    if spec.inhomogeneous:
        base = base + 1.0
    if spec.exponent == 1:
        return base
    return base ** spec.exponent


def descriptive_stats(values) -> tuple[float, float, float, float]:
    """(minimum, maximum, mean, sample standard deviation) of a vector.

    The standard deviation uses the n-1 denominator; a singleton vector has
    standard deviation 0 by convention.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("descriptive_stats needs a non-empty vector")
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return float(np.min(v)), float(np.max(v)), float(np.mean(v)), std


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF (Acklam's rational approximation).

    Accurate to about 1e-9 over (0, 1), which is far tighter than the
    confidence-interval pruning that consumes it requires.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if p > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
