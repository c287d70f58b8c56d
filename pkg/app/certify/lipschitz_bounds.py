"""
Closed-form Lipschitz bounds for Gaussian-smoothed classifiers.

If s^r o f is L-Lipschitz, smoothing with N(0, sigma^2 I) gives

    element-wise:  L(f~_k) <= L erf(r / (2^{3/2} L sigma)) <= min(r / sqrt(2 pi sigma^2), L)
    vector:        L(f~)   <= L erf(r / (2 L sigma))       <= min(r / sqrt(pi sigma^2), L)
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import DomainError
from .specfun import erf, gaussian_quantile

QUANTILE_GRID_SIZE = 1024
_PROBABILITY_FLOOR = 1e-12


class BoundCase(Enum):
    """Which Lipschitz bound to use."""
    ELEMENTWISE = "elementwise"
    VECTOR = "vector"

    @classmethod
    def parse(cls, value) -> "BoundCase":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as e:
            raise DomainError(f"Unknown bound case: {value!r}") from e


@dataclass(frozen=True)
class BoundInputs:
    """Base Lipschitz constant, noise level and simplex mass."""

    base_lipschitz: float
    sigma: float
    mass: float = 1.0

    def __post_init__(self):
        for name in ("base_lipschitz", "sigma", "mass"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class BoundReport:
    """Everything the bounds command prints for one configuration."""

    case: BoundCase
    inputs: BoundInputs
    bound: float
    gaussian_term: float
    base_term: float
    optimal_sigma: float

    @property
    def ratio(self) -> float:
        return self.bound / self.inputs.base_lipschitz


def smoothed_lipschitz_elementwise(inp: BoundInputs) -> float:
    L, r, sigma = inp.base_lipschitz, inp.mass, inp.sigma
    return L * erf(r / (2.0 ** 1.5 * L * sigma))


def smoothed_lipschitz_vector(inp: BoundInputs) -> float:
    L, r, sigma = inp.base_lipschitz, inp.mass, inp.sigma
    return L * erf(r / (2.0 * L * sigma))


def optimal_sigma(L: float, r: float, case=BoundCase.VECTOR) -> float:
    """Noise level maximising the gap between the erf bound and the min-form bound."""
    if not (L > 0 and r > 0):
        raise DomainError(f"L and r must be positive, got L={L}, r={r}")
    if BoundCase.parse(case) is BoundCase.ELEMENTWISE:
        return r / (L * math.sqrt(2.0 * math.pi))
    return r / (L * math.sqrt(math.pi))


def bound_report(inp: BoundInputs, case=BoundCase.VECTOR) -> BoundReport:
    case = BoundCase.parse(case)
    if case is BoundCase.ELEMENTWISE:
        bound = smoothed_lipschitz_elementwise(inp)
        gaussian_term = inp.mass / math.sqrt(2.0 * math.pi * inp.sigma ** 2)
    else:
        bound = smoothed_lipschitz_vector(inp)
        gaussian_term = inp.mass / math.sqrt(math.pi * inp.sigma ** 2)
    return BoundReport(
        case=case,
        inputs=inp,
        bound=bound,
        gaussian_term=gaussian_term,
        base_term=inp.base_lipschitz,
        optimal_sigma=optimal_sigma(inp.base_lipschitz, inp.mass, case),
    )


def local_lipschitz_quantile_map(p: float, r: float, sigma: float, eps: float,
                                 smoothed_L: float) -> float:
    """
    Local Lipschitz constant of Phi^-1 o f~_k around an estimate p.

    Returns (r / sigma) * max exp(-(Phi^-1(p'/r)^2 - Phi^-1(p')^2) / 2)
    over p' in [p - eps L, p + eps L] intersected with (0, min(1, r)),
    maximised on a grid of QUANTILE_GRID_SIZE points including both ends.
    """
    if not (r > 0 and sigma > 0):
        raise DomainError(f"r and sigma must be positive, got r={r}, sigma={sigma}")
    if eps < 0 or smoothed_L < 0:
        raise DomainError("eps and smoothed_L must be nonnegative")
    upper_limit = min(1.0, r)
    if not (0.0 < p < upper_limit):
        raise DomainError(f"p must lie in (0, {upper_limit}), got {p}")

    radius = eps * smoothed_L
    lo = max(p - radius, _PROBABILITY_FLOOR)
    hi = min(p + radius, upper_limit - _PROBABILITY_FLOOR)
    if lo > hi:
        raise DomainError(f"Empty feasible interval around p={p}")

    exponents = []
    for q in np.linspace(lo, hi, QUANTILE_GRID_SIZE):
        scaled = gaussian_quantile(q / r)
        plain = gaussian_quantile(q)
        exponents.append(-0.5 * (scaled * scaled - plain * plain))
    return (r / sigma) * math.exp(max(exponents))
