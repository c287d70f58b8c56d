"""
Built-in classifiers with analytically known properties.

The worst-case function h-bar (which attains the element-wise smoothed
Lipschitz bound), the 1-D threshold classifier whose smoothed value is
Phi(x / sigma), and dense linear multiclass models with an exact
spectral-norm Lipschitz constant.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from ..certify.specfun import gaussian_cdf
from ..errors import DomainError, NumericalConsistencyError

logger = logging.getLogger(__name__)

POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_MAX_ITER = 100000
DEFAULT_FD_FRACTION = 0.05  # finite-difference step as a fraction of sigma
CONSISTENCY_SIGMAS = 5.0
MIN_MC_SAMPLES = 100_000

ScalarFunction = Callable[[np.ndarray], np.ndarray]


class ModelKind(Enum):
    """Built-in synthetic classifiers."""
    WORST_CASE_HBAR = "worst_case_hbar"
    THRESHOLD_1D = "threshold_1d"
    LINEAR_MULTICLASS = "linear_multiclass"

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace("-", "_").lower())
        except ValueError as e:
            raise DomainError(f"Unknown synthetic model: {value!r}") from e


def _as_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[np.newaxis, :]
    if points.ndim != 2 or points.shape[1] == 0:
        raise DomainError(f"Points must be a vector or an m x d matrix, got shape {points.shape}")
    return points


def spectral_norm(weight, tol: float = POWER_ITERATION_TOL, seed: int = 0,
                  max_iter: int = POWER_ITERATION_MAX_ITER) -> float:
    """
    Largest singular value of a dense matrix by power iteration on W^T W.

    Stops once the relative change of the estimate drops below ``tol``.
    """
    weight = np.asarray(weight, dtype=np.float64)
    if weight.ndim != 2 or weight.size == 0:
        raise DomainError(f"Weight must be a nonempty 2-D matrix, got shape {weight.shape}")
    if not np.all(np.isfinite(weight)):
        raise DomainError("Weight matrix must be finite")
    if not np.any(weight):
        return 0.0

    rng = np.random.Generator(np.random.Philox(seed))
    v = rng.standard_normal(weight.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for iteration in range(max_iter):
        u = weight @ v
        previous, estimate = estimate, float(np.linalg.norm(u))
        if estimate == 0.0:
            # start vector in the null space; restart from a fresh direction
            v = rng.standard_normal(weight.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = weight.T @ (u / estimate)
        v /= np.linalg.norm(v)
        if abs(estimate - previous) <= tol * estimate:
            logger.debug("Power iteration converged after %d steps", iteration + 1)
            return estimate
    logger.warning("Power iteration stopped at max_iter=%d without reaching tol=%g", max_iter, tol)
    return estimate


def eval_worst_case_hbar(x, L: float, r: float) -> Union[float, np.ndarray]:
    """
    h-bar(x) = sign(x_1) min(r, 2 L |x_1|) / 2 + r / 2, with sign(0) = 0.

    Accepts one point or an m x d batch; output lies in [0, r].
    """
    if not (L > 0 and r > 0):
        raise DomainError(f"L and r must be positive, got L={L}, r={r}")
    single = np.ndim(x) <= 1
    first = _as_points(np.atleast_1d(x))[:, 0]
    values = 0.5 * np.sign(first) * np.minimum(r, 2.0 * L * np.abs(first)) + 0.5 * r
    return float(values[0]) if single else values


def exact_smoothed_threshold(x: float, sigma: float) -> float:
    """Smoothed value of 1{z > 0} under N(0, sigma^2): Phi(x / sigma)."""
    if not sigma > 0:
        raise DomainError(f"Noise level sigma must be positive, got {sigma}")
    return gaussian_cdf(float(x) / sigma)


@dataclass(frozen=True)
class SyntheticModel:
    """
    Immutable synthetic classifier.

    ``logits`` maps an m x d batch to m x c scores; ``scalar`` gives the
    scalar-valued function used for gradient checks.
    """

    kind: ModelKind
    lipschitz: float
    mass: float = 1.0
    weight: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    bias: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @classmethod
    def worst_case_hbar(cls, L: float = 1.0, r: float = 1.0) -> "SyntheticModel":
        if not (L > 0 and r > 0):
            raise DomainError(f"L and r must be positive, got L={L}, r={r}")
        return cls(kind=ModelKind.WORST_CASE_HBAR, lipschitz=float(L), mass=float(r))

    @classmethod
    def threshold_1d(cls) -> "SyntheticModel":
        return cls(kind=ModelKind.THRESHOLD_1D, lipschitz=math.inf)

    @classmethod
    def linear_multiclass(cls, weight, bias=None) -> "SyntheticModel":
        weight = np.array(weight, dtype=np.float64)
        if weight.ndim != 2 or weight.shape[0] < 2:
            raise DomainError(f"Linear model needs a c x d weight with c >= 2, got shape {weight.shape}")
        bias = np.zeros(weight.shape[0]) if bias is None else np.array(bias, dtype=np.float64)
        if bias.shape != (weight.shape[0],):
            raise DomainError(f"Bias must have shape ({weight.shape[0]},), got {bias.shape}")
        weight.setflags(write=False)
        bias.setflags(write=False)
        return cls(kind=ModelKind.LINEAR_MULTICLASS, lipschitz=spectral_norm(weight),
                   weight=weight, bias=bias)

    @property
    def num_classes(self) -> int:
        if self.kind is ModelKind.LINEAR_MULTICLASS:
            return self.weight.shape[0]
        return 2

    @property
    def input_dim(self) -> int:
        if self.kind is ModelKind.LINEAR_MULTICLASS:
            return self.weight.shape[1]
        return 1

    def logits(self, points) -> np.ndarray:
        points = _as_points(points)
        if self.kind is ModelKind.LINEAR_MULTICLASS:
            if points.shape[1] != self.input_dim:
                raise DomainError(f"Expected {self.input_dim}-dimensional points, got {points.shape[1]}")
            return points @ self.weight.T + self.bias
        top = self.scalar(points)
        if self.kind is ModelKind.WORST_CASE_HBAR:
            return np.column_stack([self.mass - top, top])
        return np.column_stack([1.0 - top, top])

    def scalar(self, points) -> np.ndarray:
        points = _as_points(points)
        if self.kind is ModelKind.WORST_CASE_HBAR:
            return eval_worst_case_hbar(points, self.lipschitz, self.mass)
        if self.kind is ModelKind.THRESHOLD_1D:
            return (points[:, 0] > 0).astype(np.float64)
        raise DomainError("A linear multiclass model is not scalar-valued")

    def __call__(self, points) -> np.ndarray:
        return self.logits(points)


@dataclass(frozen=True)
class GradientEstimate:
    """Stein and finite-difference estimates of the smoothed gradient norm."""

    stein_norm: float
    stein_stderr: float
    fd_norm: float
    fd_stderr: float

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.stein_stderr, self.fd_stderr)

    @property
    def discrepancy(self) -> float:
        return abs(self.stein_norm - self.fd_norm)

    @property
    def consistent(self) -> bool:
        return self.discrepancy <= CONSISTENCY_SIGMAS * self.combined_stderr + 1e-12


def _scalar_function(model) -> ScalarFunction:
    if isinstance(model, SyntheticModel):
        return model.scalar

    def evaluate(points: np.ndarray) -> np.ndarray:
        values = np.asarray(model(points), dtype=np.float64)
        return values.reshape(points.shape[0])

    return evaluate


def numeric_smoothed_gradient_norm(model, x, sigma: float, n_mc: int = MIN_MC_SAMPLES,
                                   h_fd: Optional[float] = None, seed: int = 0,
                                   check: bool = True) -> GradientEstimate:
    """
    Estimate the gradient norm of the Gaussian-smoothed scalar function at x.

    Stein's lemma gives grad = E[delta (h(x + delta) - h(x))] / sigma^2;
    the h(x) control variate has mean zero. Central finite differences of
    the Monte-Carlo smoothed value reuse the same noise draws. With
    ``check`` set, a disagreement beyond five combined standard errors
    raises NumericalConsistencyError.
    """
    if not sigma > 0:
        raise DomainError(f"Noise level sigma must be positive, got {sigma}")
    if n_mc < MIN_MC_SAMPLES:
        raise DomainError(f"n_mc must be at least {MIN_MC_SAMPLES}, got {n_mc}")
    h_fd = DEFAULT_FD_FRACTION * sigma if h_fd is None else h_fd
    if not h_fd > 0:
        raise DomainError(f"Finite-difference step must be positive, got {h_fd}")

    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    f = _scalar_function(model)
    rng = np.random.Generator(np.random.Philox(seed))
    delta = sigma * rng.standard_normal((n_mc, x.size))

    base = float(f(x[np.newaxis, :])[0])
    centred = f(x + delta) - base
    stein_terms = delta * centred[:, np.newaxis] / sigma ** 2
    stein_grad = stein_terms.mean(axis=0)
    stein_stderr = math.sqrt(stein_terms.var(axis=0, ddof=1).sum() / n_mc)

    fd_grad = np.empty(x.size)
    fd_var = 0.0
    for j in range(x.size):
        step = np.zeros(x.size)
        step[j] = h_fd
        diffs = (f(x + step + delta) - f(x - step + delta)) / (2.0 * h_fd)
        fd_grad[j] = diffs.mean()
        fd_var += diffs.var(ddof=1) / n_mc

    estimate = GradientEstimate(
        stein_norm=float(np.linalg.norm(stein_grad)),
        stein_stderr=stein_stderr,
        fd_norm=float(np.linalg.norm(fd_grad)),
        fd_stderr=math.sqrt(fd_var),
    )
    logger.debug("Gradient estimate at sigma=%g: %s", sigma, estimate)
    if check and not estimate.consistent:
        raise NumericalConsistencyError(
            f"Stein estimate {estimate.stein_norm:.6g} and finite-difference estimate "
            f"{estimate.fd_norm:.6g} differ by {estimate.discrepancy:.3g}, more than "
            f"{CONSISTENCY_SIGMAS:g} combined standard errors ({estimate.combined_stderr:.3g})"
        )
    return estimate


@dataclass(frozen=True)
class HardmaxVarianceExample:
    var_x: float
    var_y: float


def hardmax_variance_example(spread: float = 0.01, n: int = 100000, seed: int = 0,
                             mean: float = 0.5) -> HardmaxVarianceExample:
    """
    Variance before and after thresholding a low-variance variable.

    X is uniform on [mean - spread, mean + spread] and Y = 1{X > 1/2}. At
    mean 1/2 the variance of X is spread^2 / 3 while that of Y stays near
    1/4 however small the spread.
    """
    if not (spread > 0 and 0.0 <= mean - spread and mean + spread <= 1.0):
        raise DomainError(f"[mean - spread, mean + spread] must lie inside [0, 1], got mean={mean}, spread={spread}")
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.uniform(mean - spread, mean + spread, size=n)
    y = (x > 0.5).astype(np.float64)
    return HardmaxVarianceExample(var_x=float(x.var(ddof=1)), var_y=float(y.var(ddof=1)))
