"""
Maps from logit vectors onto the r-simplex.

Hardmax, tempered softmax scaled to mass r, and the generalized
sparsemax (Euclidean projection onto the r-simplex). Every map has a
single-vector form returning a SimplexVector and a row-wise form used
by the smoothing engine on whole score matrices.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import DomainError

SIMPLEX_TOLERANCE = 1e-9


class MapKind(Enum):
    """Available simplex maps."""
    HARDMAX = "hardmax"
    SOFTMAX = "softmax"
    SPARSEMAX = "sparsemax"


@dataclass(frozen=True)
class MapSpec:
    """Simplex map selector: kind, temperature t > 0 and mass r > 0."""

    kind: MapKind
    temperature: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not isinstance(self.kind, MapKind):
            try:
                object.__setattr__(self, "kind", MapKind(self.kind))
            except ValueError as e:
                raise DomainError(f"Unknown simplex map: {self.kind!r}") from e
        if not np.isfinite(self.temperature) or self.temperature <= 0:
            raise DomainError(f"Temperature must be positive, got {self.temperature}")
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise DomainError(f"Mass must be positive, got {self.mass}")

    def label(self) -> str:
        if self.kind is MapKind.HARDMAX:
            return f"hardmax(r={self.mass:g})"
        return f"{self.kind.value}(t={self.temperature:g}, r={self.mass:g})"


@dataclass(frozen=True)
class SimplexVector:
    """Nonnegative vector whose coordinates sum to ``mass``."""

    values: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("SimplexVector needs a nonempty 1-D vector")
        if self.mass <= 0:
            raise DomainError(f"Mass must be positive, got {self.mass}")
        if np.any(values < 0):
            raise DomainError("SimplexVector coordinates must be nonnegative")
        if abs(values.sum() - self.mass) > SIMPLEX_TOLERANCE * max(self.mass, 1.0) * values.size:
            raise DomainError(
                f"SimplexVector coordinates sum to {values.sum()!r}, expected {self.mass!r}"
            )

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, index):
        return self.values[index]

    def normalized(self) -> np.ndarray:
        """Coordinates divided by the mass, i.e. a probability vector."""
        return self.values / self.mass


def _as_logits(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise DomainError("Logit vector must be a nonempty 1-D vector")
    if not np.all(np.isfinite(z)):
        raise DomainError("Logit vector must be finite")
    return z


def _as_logit_rows(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] == 0:
        raise DomainError(f"Score matrix must be 2-D with at least one column, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DomainError("Score matrix must be finite")
    return matrix


def _check_temperature_mass(t: float, r: float) -> None:
    if not t > 0:
        raise DomainError(f"Temperature must be positive, got {t}")
    if not r > 0:
        raise DomainError(f"Mass must be positive, got {r}")


def hardmax_rows(matrix, r: float = 1.0) -> np.ndarray:
    """Mass r on the argmax of each row; lowest index wins ties."""
    matrix = _as_logit_rows(matrix)
    _check_temperature_mass(1.0, r)
    out = np.zeros_like(matrix)
    out[np.arange(matrix.shape[0]), np.argmax(matrix, axis=1)] = r
    return out


def softmax_rows(matrix, t: float = 1.0, r: float = 1.0) -> np.ndarray:
    """Row-wise r * softmax(z / t), stabilised by max subtraction."""
    matrix = _as_logit_rows(matrix)
    _check_temperature_mass(t, r)
    scaled = matrix / t
    scaled = scaled - scaled.max(axis=1, keepdims=True)
    expo = np.exp(scaled)
    return r * expo / expo.sum(axis=1, keepdims=True)


def sparsemax_rows(matrix, t: float = 1.0, r: float = 1.0) -> np.ndarray:
    """
    Row-wise Euclidean projection of z / t onto the r-simplex.

    Sort each row decreasingly, take the support size
    kappa = max{k : r + k z_(k) > sum_{j<=k} z_(j)}, the threshold
    rho = (sum_{j<=kappa} z_(j) - r) / kappa, and return max(z - rho, 0).
    """
    matrix = _as_logit_rows(matrix)
    _check_temperature_mass(t, r)
    z = matrix / t
    ordered = -np.sort(-z, axis=1)
    cumulative = np.cumsum(ordered, axis=1)
    ks = np.arange(1, z.shape[1] + 1, dtype=np.float64)
    in_support = r + ks * ordered > cumulative
    # The condition holds on a prefix, and always for k = 1.
    kappa = np.count_nonzero(in_support, axis=1)
    rho = (cumulative[np.arange(z.shape[0]), kappa - 1] - r) / kappa
    return np.maximum(z - rho[:, np.newaxis], 0.0)


def hardmax(z, r: float = 1.0) -> SimplexVector:
    z = _as_logits(z)
    return SimplexVector(hardmax_rows(z[np.newaxis, :], r)[0], r)


def softmax(z, t: float = 1.0, r: float = 1.0) -> SimplexVector:
    z = _as_logits(z)
    return SimplexVector(softmax_rows(z[np.newaxis, :], t, r)[0], r)


def generalized_sparsemax(z, t: float = 1.0, r: float = 1.0) -> SimplexVector:
    z = _as_logits(z)
    return SimplexVector(sparsemax_rows(z[np.newaxis, :], t, r)[0], r)


_ROW_MAPS = {
    MapKind.SOFTMAX: softmax_rows,
    MapKind.SPARSEMAX: sparsemax_rows,
}


def apply_map_rows(spec: MapSpec, matrix) -> np.ndarray:
    """Apply ``spec`` to every row of an n x c score matrix."""
    if spec.kind is MapKind.HARDMAX:
        return hardmax_rows(matrix, spec.mass)
    return _ROW_MAPS[spec.kind](matrix, spec.temperature, spec.mass)


def apply_map(spec: MapSpec, z) -> SimplexVector:
    """Apply ``spec`` to one logit vector."""
    z = _as_logits(z)
    return SimplexVector(apply_map_rows(spec, z[np.newaxis, :])[0], spec.mass)
