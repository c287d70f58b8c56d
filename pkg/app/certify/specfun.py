"""
Scalar special functions used by every radius and bound.

Standard Gaussian CDF and quantile, the error function, and the
regularized incomplete beta function with its quantile (needed for
Clopper-Pearson intervals).
"""

import math

from scipy.special import betaln

from ..errors import DomainError, InfiniteQuantileError

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

# Rational approximation of the normal quantile (relative error ~1e-9),
# refined below with Halley steps against gaussian_cdf.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425

_REFINE_STEPS = 3
_CF_MAX_ITER = 20000
_CF_EPS = 1e-15
_FPMIN = 1e-300
BETA_QUANTILE_TOL = 1e-10


def _require_finite(value: float, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError) as e:
        raise DomainError(f"{name} must be a real number, got {value!r}") from e
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def gaussian_cdf(z: float) -> float:
    """Standard normal CDF Phi(z)."""
    z = _require_finite(z, "z")
    return 0.5 * math.erfc(-z / SQRT2)


def gaussian_pdf(z: float) -> float:
    """Standard normal density phi(z)."""
    z = _require_finite(z, "z")
    return math.exp(-0.5 * z * z) / SQRT2PI


def erf(x: float) -> float:
    """Error function; odd, with range (-1, 1)."""
    x = _require_finite(x, "x")
    return math.erf(x)


def _initial_lower_quantile(p: float) -> float:
    """Rational initial guess for p in (0, 0.5]."""
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def _lower_quantile(p: float) -> float:
    x = _initial_lower_quantile(p)
    for _ in range(_REFINE_STEPS):
        e = 0.5 * math.erfc(-x / SQRT2) - p
        u = e * SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def gaussian_quantile(p: float) -> float:
    """
    Standard normal quantile Phi^-1(p) for 0 < p < 1.

    Raises:
        InfiniteQuantileError: p is exactly 0 or 1; callers decide how to clamp.
        DomainError: p is not a probability.
    """
    p = _require_finite(p, "p")
    if p < 0.0 or p > 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        raise InfiniteQuantileError(p)
    if p == 0.5:
        return 0.0
    # 1 - p is exact for p >= 0.5, so the upper half reuses the lower tail.
    if p > 0.5:
        return -_lower_quantile(1.0 - p)
    return _lower_quantile(p)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise DomainError(
        f"Incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    x = _require_finite(x, "x")
    a = _require_finite(a, "a")
    b = _require_finite(b, "b")
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"Beta parameters must be positive, got a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - float(betaln(a, b))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def beta_quantile(q: float, a: float, b: float, tol: float = BETA_QUANTILE_TOL) -> float:
    """Quantile of Beta(a, b) by bisection on the regularized incomplete beta."""
    q = _require_finite(q, "q")
    if q < 0.0 or q > 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    if q == 0.0:
        return 0.0
    if q == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if regularized_incomplete_beta(mid, a, b) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
