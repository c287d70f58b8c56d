"""
Sample statistics and risk-correction shifts.

Empirical Bernstein, Hoeffding and Clopper-Pearson bounds, and the
assembly of risk-corrected class probabilities: the estimated top class
is lowered by its shift and every other class is raised by its own.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import DomainError
from .specfun import beta_quantile


class ConcentrationMethod(Enum):
    """Risk-correction methods."""
    BERNSTEIN = "bernstein"
    HOEFFDING = "hoeffding"
    CLOPPER_PEARSON = "clopper_pearson"

    @classmethod
    def parse(cls, value) -> "ConcentrationMethod":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace("-", "_").lower())
        except ValueError as e:
            raise DomainError(f"Unknown concentration method: {value!r}") from e


# each class bound keeps the full alpha
_RISK_SPLIT_ALIASES = {"per-class": "paper-literal"}


class RiskSplit(Enum):
    """How the risk level is shared among the simultaneous class bounds."""
    LITERAL = "paper-literal"
    BONFERRONI = "bonferroni"

    @classmethod
    def parse(cls, value) -> "RiskSplit":
        if isinstance(value, cls):
            return value
        name = str(value).replace("_", "-").lower()
        try:
            return cls(_RISK_SPLIT_ALIASES.get(name, name))
        except ValueError as e:
            raise DomainError(f"Unknown risk split: {value!r}") from e


@dataclass(frozen=True)
class SampleStats:
    """Mean and unbiased sample variance of n >= 2 samples."""

    mean: float
    sample_variance: float
    count: int


@dataclass(frozen=True)
class CorrectedProbs:
    """Estimated and risk-corrected class scores at level alpha."""

    raw: np.ndarray
    corrected: np.ndarray
    shifts: np.ndarray
    alpha: float
    method: ConcentrationMethod
    mass: float = 1.0
    count: int = 0
    top: int = 0
    class_alpha: float = 0.0

    def normalized(self) -> np.ndarray:
        return self.corrected / self.mass


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"Risk level alpha must lie in (0, 1), got {alpha}")
    return alpha


def sample_stats(samples) -> SampleStats:
    """Mean and unbiased variance (equal to the pairwise-difference form)."""
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size < 2:
        raise DomainError(f"Need at least 2 samples, got {samples.size}")
    if not np.all(np.isfinite(samples)):
        raise DomainError("Samples must be finite")
    return SampleStats(
        mean=float(samples.mean()),
        sample_variance=float(samples.var(ddof=1)),
        count=int(samples.size),
    )


def column_stats(matrix) -> List[SampleStats]:
    """Per-column SampleStats of an n x c matrix."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise DomainError(f"Need an n x c matrix with n >= 2, got shape {matrix.shape}")
    means = matrix.mean(axis=0)
    variances = matrix.var(axis=0, ddof=1)
    n = matrix.shape[0]
    return [SampleStats(float(m), float(v), n) for m, v in zip(means, variances)]


def bernstein_shift(stats: SampleStats, alpha: float, value_range: float = 1.0) -> float:
    """
    Empirical Bernstein deviation for samples in [0, value_range].

    Samples are rescaled to [0, 1], the bound
    sqrt(2 S_n log(2/alpha) / n) + 7 log(2/alpha) / (3 (n - 1))
    is evaluated, and the shift is scaled back by value_range.
    """
    alpha = _check_alpha(alpha)
    if stats.count < 2:
        raise DomainError(f"Need at least 2 samples, got {stats.count}")
    if not value_range > 0:
        raise DomainError(f"Range must be positive, got {value_range}")
    n = stats.count
    variance = max(stats.sample_variance, 0.0) / (value_range * value_range)
    log_term = math.log(2.0 / alpha)
    shift = math.sqrt(2.0 * variance * log_term / n) + 7.0 * log_term / (3.0 * (n - 1))
    return value_range * shift


def hoeffding_shift(n: int, alpha: float, value_range: float = 1.0) -> float:
    """Two-sided Hoeffding deviation range * sqrt(log(2/alpha) / (2n))."""
    alpha = _check_alpha(alpha)
    if n < 1:
        raise DomainError(f"Need at least 1 sample, got {n}")
    if not value_range > 0:
        raise DomainError(f"Range must be positive, got {value_range}")
    return value_range * math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def clopper_pearson_bounds(successes: int, n: int, alpha: float) -> Tuple[float, float]:
    """Exact two-sided Clopper-Pearson interval for a binomial proportion."""
    alpha = _check_alpha(alpha)
    if n < 1 or successes < 0 or successes > n:
        raise DomainError(f"Invalid binomial counts: successes={successes}, n={n}")
    lower = 0.0 if successes == 0 else beta_quantile(alpha / 2.0, successes, n - successes + 1)
    upper = 1.0 if successes == n else beta_quantile(1.0 - alpha / 2.0, successes + 1, n - successes)
    return lower, upper


def risk_level(alpha: float, classes: int, split=RiskSplit.LITERAL) -> float:
    """Per-class risk level under the chosen split."""
    alpha = _check_alpha(alpha)
    if RiskSplit.parse(split) is RiskSplit.BONFERRONI:
        return alpha / max(classes, 1)
    return alpha


def top_class(values) -> int:
    """Argmax with lowest-index tie-breaking."""
    return int(np.argmax(np.asarray(values, dtype=np.float64)))


def _clopper_pearson_shifts(p_hat: np.ndarray, stats: Sequence[SampleStats], alpha: float,
                            mass: float, top: int) -> np.ndarray:
    shifts = np.zeros_like(p_hat)
    for k, (estimate, stat) in enumerate(zip(p_hat, stats)):
        successes = int(round(estimate * stat.count / mass))
        lower, upper = clopper_pearson_bounds(successes, stat.count, alpha)
        if k == top:
            shifts[k] = estimate - mass * lower
        else:
            shifts[k] = mass * upper - estimate
    return shifts


def correct_probs(p_hat, per_class_stats: Sequence[SampleStats], alpha: float,
                  method=ConcentrationMethod.BERNSTEIN, mass: float = 1.0,
                  split=RiskSplit.LITERAL) -> CorrectedProbs:
    """
    Risk-correct an estimated class-score vector.

    The top class of ``p_hat`` (lowest index on ties) is lowered by its
    shift, every other class raised by its shift, and the result clamped
    to [0, mass].

    Clopper-Pearson needs 0/mass valued samples (hardmax); the success
    count of each class is recovered as round(p_hat_k * n / mass).
    """
    p_hat = np.asarray(p_hat, dtype=np.float64)
    method = ConcentrationMethod.parse(method)
    alpha = _check_alpha(alpha)
    if p_hat.ndim != 1 or p_hat.size != len(per_class_stats):
        raise DomainError(
            f"p_hat has {p_hat.size} classes but {len(per_class_stats)} statistics were given"
        )
    if not mass > 0:
        raise DomainError(f"Mass must be positive, got {mass}")
    if np.any(p_hat < -1e-12) or np.any(p_hat > mass * (1 + 1e-12)):
        raise DomainError(f"p_hat entries must lie in [0, {mass}]")

    class_alpha = risk_level(alpha, p_hat.size, split)
    top = top_class(p_hat)
    if method is ConcentrationMethod.BERNSTEIN:
        shifts = np.array([bernstein_shift(s, class_alpha, mass) for s in per_class_stats])
    elif method is ConcentrationMethod.HOEFFDING:
        shifts = np.array([hoeffding_shift(s.count, class_alpha, mass) for s in per_class_stats])
    else:
        shifts = _clopper_pearson_shifts(p_hat, per_class_stats, class_alpha, mass, top)

    signs = np.ones_like(p_hat)
    signs[top] = -1.0
    corrected = np.clip(p_hat + signs * shifts, 0.0, mass)
    count = per_class_stats[0].count if per_class_stats else 0
    return CorrectedProbs(
        raw=p_hat,
        corrected=corrected,
        shifts=shifts,
        alpha=alpha,
        method=method,
        mass=float(mass),
        count=count,
        top=top,
        class_alpha=class_alpha,
    )
