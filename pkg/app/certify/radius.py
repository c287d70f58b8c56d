"""
Margins, certified radii and certificate assembly.

R1 divides a margin by the Lipschitz constant, R2 uses the gap between
the Gaussian quantiles of the two largest class probabilities, and R3
uses the quantile of the top class alone.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import DomainError
from .concentration import ConcentrationMethod, CorrectedProbs
from .simplex_maps import MapSpec, SimplexVector
from .specfun import gaussian_quantile

ABSTAIN = -1
QUANTILE_CLAMP = 1e-12


class RadiusRule(Enum):
    """Certified-radius formulas."""
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"

    @classmethod
    def parse(cls, value) -> "RadiusRule":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError as e:
            raise DomainError(f"Unknown radius rule: {value!r}") from e


@dataclass(frozen=True)
class Certificate:
    """Prediction (or ABSTAIN) with its certified l2 radius."""

    prediction: int
    radius: float
    rule: RadiusRule
    sigma: float
    alpha: float
    n0: Optional[int]
    n: int
    map_spec: Optional[MapSpec] = None
    method: Optional[ConcentrationMethod] = None

    def __post_init__(self):
        if not self.radius >= 0:
            raise DomainError(f"Certified radius must be nonnegative, got {self.radius}")
        if self.prediction == ABSTAIN and self.radius != 0:
            raise DomainError("An abstaining certificate must have radius 0")

    @property
    def abstained(self) -> bool:
        return self.prediction == ABSTAIN


def _check_sigma(sigma: float) -> None:
    if not (math.isfinite(sigma) and sigma > 0):
        raise DomainError(f"Noise level sigma must be positive, got {sigma}")


def _clamped_quantile(p: float) -> float:
    return gaussian_quantile(min(max(p, QUANTILE_CLAMP), 1.0 - QUANTILE_CLAMP))


def _normalized(p, mass: Optional[float]) -> np.ndarray:
    if isinstance(p, SimplexVector):
        return p.normalized()
    values = np.asarray(p, dtype=np.float64)
    return values / (1.0 if mass is None else mass)


def _top_two(values: np.ndarray):
    if values.ndim != 1 or values.size < 2:
        raise DomainError("Need at least two classes")
    ordered = np.sort(values)[::-1]
    return float(ordered[0]), float(ordered[1])


def margin(scores, label: int) -> float:
    """max(0, scores[label] - max over the other coordinates)."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size < 2:
        raise DomainError("Margin needs at least two classes")
    if not 0 <= label < scores.size:
        raise DomainError(f"Label {label} out of range for {scores.size} classes")
    others = np.delete(scores, label)
    return max(0.0, float(scores[label] - others.max()))


def radius_r1(margin_value: float, lipschitz: float) -> float:
    """Margin / (sqrt(2) L)."""
    if not lipschitz > 0:
        raise DomainError(f"Lipschitz constant must be positive, got {lipschitz}")
    if margin_value < 0:
        raise DomainError(f"Margin must be nonnegative, got {margin_value}")
    return margin_value / (math.sqrt(2.0) * lipschitz)


def radius_r2(p, sigma: float, mass: Optional[float] = None) -> float:
    """
    (sigma / 2) (Phi^-1(p1) - Phi^-1(p2)) over the two largest entries.

    Entries are divided by the mass first (a SimplexVector carries its
    own) and quantile arguments are clamped to [1e-12, 1 - 1e-12].
    """
    _check_sigma(sigma)
    p1, p2 = _top_two(_normalized(p, mass))
    return max(0.0, 0.5 * sigma * (_clamped_quantile(p1) - _clamped_quantile(p2)))


def radius_r3(p1: float, sigma: float, mass: float = 1.0) -> float:
    """sigma * Phi^-1(p1), floored at zero."""
    _check_sigma(sigma)
    return max(0.0, sigma * _clamped_quantile(float(p1) / mass))


def certify(corrected: CorrectedProbs, sigma: float, rule=RadiusRule.R2,
            lipschitz: Optional[float] = None, map_spec: Optional[MapSpec] = None,
            n0: Optional[int] = None) -> Certificate:
    """
    Turn risk-corrected probabilities into a certificate.

    The prediction is the argmax of the corrected vector. The certificate
    abstains when that class does not strictly dominate the runner-up.
    Otherwise the prediction stands even if the rule gives radius 0 (R3
    with p1 <= 1/2). R1 needs the Lipschitz constant of the smoothed
    classifier on the mass-r scale.
    """
    _check_sigma(sigma)
    rule = RadiusRule.parse(rule)
    p_bar = corrected.normalized()
    prediction = int(np.argmax(p_bar))
    first, second = _top_two(p_bar)

    if first <= second:
        prediction, radius = ABSTAIN, 0.0
    elif rule is RadiusRule.R2:
        radius = radius_r2(p_bar, sigma)
    elif rule is RadiusRule.R3:
        radius = radius_r3(first, sigma)
    else:
        if lipschitz is None:
            raise DomainError("Rule R1 needs the smoothed classifier's Lipschitz constant")
        radius = radius_r1(margin(corrected.corrected, prediction), lipschitz)

    return Certificate(
        prediction=prediction,
        radius=radius,
        rule=rule,
        sigma=sigma,
        alpha=corrected.alpha,
        n0=n0,
        n=corrected.count,
        map_spec=map_spec,
        method=corrected.method,
    )
