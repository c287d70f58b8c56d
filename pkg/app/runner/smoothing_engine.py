"""
Monte-Carlo estimation of smoothed classifiers and the map-selecting
certification procedure.

Noise rows come from a counter-based generator: block b of the stream
(seed, input id, stream tag) is drawn from Philox keyed on all four
values, so any row can be regenerated independently of execution order.
The validation stream chooses the simplex map and temperature; the
certification stream alone produces the certificate.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional, Protocol, Sequence, Tuple

import numpy as np

from ..certify.concentration import ConcentrationMethod, CorrectedProbs, SampleStats, column_stats, correct_probs
from ..certify.lipschitz_bounds import BoundInputs, smoothed_lipschitz_vector
from ..certify.radius import Certificate, RadiusRule, certify, radius_r2
from ..certify.simplex_maps import MapKind, MapSpec, apply_map_rows
from ..errors import ConfigError, DimensionMismatchError, DomainError, SamplingError
from .config_models import DEFAULT_BLOCK_SIZE, GridConfig

logger = logging.getLogger(__name__)


class Stream(IntEnum):
    """Independent noise streams of one input."""
    VALIDATION = 0
    CERTIFICATION = 1


class ScoreOracle(Protocol):
    """Base classifier: maps an m x d batch of points to m x c logits."""

    def __call__(self, points: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class ScoreMatrix:
    """n x c matrix of finite logits f(x + delta_i), n >= 2."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] < 1:
            raise DomainError(f"Score matrix must be n x c with n >= 2, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DomainError("Score matrix entries must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def split(self, n0: int, n: Optional[int] = None) -> Tuple["ScoreMatrix", "ScoreMatrix"]:
        """First n0 rows for validation, the next n (default: all remaining) for certification."""
        n = self.rows - n0 if n is None else n
        if n0 < 2 or n < 2 or n0 + n > self.rows:
            raise DimensionMismatchError("score rows for n0 + n", n0 + n, self.rows)
        return ScoreMatrix(self.data[:n0]), ScoreMatrix(self.data[n0:n0 + n])


def noise_block(sigma: float, dim: int, seed: int, input_id: int, stream: Stream,
                block: int, rows: int) -> np.ndarray:
    """Gaussian noise rows of one block, keyed on (seed, input id, stream, block)."""
    key = np.random.SeedSequence([int(seed), int(input_id), int(stream), int(block)])
    rng = np.random.Generator(np.random.Philox(key))
    return sigma * rng.standard_normal((rows, dim))


def _locate_failure(classifier: ScoreOracle, points: np.ndarray, start: int) -> int:
    for offset in range(points.shape[0]):
        try:
            classifier(points[offset:offset + 1])
        except Exception:
            return start + offset
    return start


def _score_block(classifier: ScoreOracle, x: np.ndarray, sigma: float, seed: int, input_id: int,
                 stream: Stream, block: int, block_size: int, n: int) -> np.ndarray:
    start = block * block_size
    rows = min(block_size, n - start)
    points = x + noise_block(sigma, x.size, seed, input_id, stream, block, rows)
    try:
        scores = np.asarray(classifier(points), dtype=np.float64)
    except Exception as e:
        raise SamplingError(_locate_failure(classifier, points, start), e) from e

    if scores.ndim != 2 or scores.shape[0] != rows:
        raise DimensionMismatchError("classifier output shape", f"({rows}, c)", scores.shape)
    bad_rows = np.flatnonzero(~np.all(np.isfinite(scores), axis=1))
    if bad_rows.size:
        raise SamplingError(start + int(bad_rows[0]), DomainError("classifier returned non-finite scores"))
    return scores


def sample_scores(classifier: ScoreOracle, x, n: int, sigma: float, seed: int, input_id: int = 0,
                  stream: Stream = Stream.CERTIFICATION, block_size: int = DEFAULT_BLOCK_SIZE,
                  max_workers: int = 1) -> ScoreMatrix:
    """
    Score n Gaussian perturbations of x.

    Row i is classifier(x + delta_i) with delta_i ~ N(0, sigma^2 I) drawn
    from block i // block_size of the keyed stream. Blocks may be scored
    in parallel; they are assembled in index order.
    """
    if not (math.isfinite(sigma) and sigma > 0):
        raise DomainError(f"Noise level sigma must be positive, got {sigma}")
    if n < 2:
        raise DomainError(f"Need at least 2 samples, got {n}")
    if input_id < 0 or seed < 0:
        raise DomainError("Seed and input id must be nonnegative")
    if block_size < 1:
        raise DomainError(f"block_size must be positive, got {block_size}")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise DomainError("Input point must be a finite vector")

    block_count = -(-n // block_size)
    args = [(classifier, x, sigma, seed, input_id, stream, block, block_size, n)
            for block in range(block_count)]
    if max_workers > 1 and block_count > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            blocks = list(executor.map(lambda a: _score_block(*a), args))
    else:
        blocks = [_score_block(*a) for a in args]

    widths = {block.shape[1] for block in blocks}
    if len(widths) != 1:
        raise DimensionMismatchError("classifier output columns", blocks[0].shape[1], sorted(widths))
    return ScoreMatrix(np.concatenate(blocks, axis=0))


def estimate_phat(scores: ScoreMatrix, spec: MapSpec) -> Tuple[np.ndarray, List[SampleStats]]:
    """Row mean of the mapped scores and per-class sample statistics."""
    stats = column_stats(apply_map_rows(spec, scores.data))
    return np.array([s.mean for s in stats]), stats


def correct_scores(scores: ScoreMatrix, spec: MapSpec, grid: GridConfig,
                   method: Optional[ConcentrationMethod] = None) -> CorrectedProbs:
    p_hat, stats = estimate_phat(scores, spec)
    method = grid.method_for(spec.kind) if method is None else method
    return correct_probs(p_hat, stats, grid.alpha, method, spec.mass, grid.risk_split)


@dataclass(frozen=True)
class CandidateResult:
    """Corrected R2 of one grid candidate on the validation scores."""

    spec: MapSpec
    corrected: CorrectedProbs
    radius: float


@dataclass(frozen=True)
class Selection:
    candidates: Tuple[CandidateResult, ...]
    best_index: int

    @property
    def best(self) -> CandidateResult:
        return self.candidates[self.best_index]


def select_map(validation: ScoreMatrix, grid: GridConfig) -> Selection:
    """Evaluate every candidate; the first one in grid order wins ties."""
    specs = grid.candidates()
    if not specs:
        raise ConfigError("The map/temperature grid is empty")

    results = []
    best_index = 0
    for index, spec in enumerate(specs):
        corrected = correct_scores(validation, spec, grid)
        radius = radius_r2(corrected.normalized(), grid.sigma)
        results.append(CandidateResult(spec, corrected, radius))
        if radius > results[best_index].radius:
            best_index = index
    selection = Selection(tuple(results), best_index)
    logger.debug("Selected %s with validation radius %.6g among %d candidates",
                 selection.best.spec.label(), selection.best.radius, len(results))
    return selection


def smoothed_lipschitz_for(grid: GridConfig) -> float:
    """Lipschitz constant of the smoothed classifier used by rule R1."""
    if grid.lipschitz is not None:
        return smoothed_lipschitz_vector(BoundInputs(grid.lipschitz, grid.sigma, grid.mass))
    return grid.mass / (grid.sigma * math.sqrt(math.pi))


def certify_from_scores(validation: ScoreMatrix, certification: ScoreMatrix,
                        grid: GridConfig) -> Certificate:
    """Select on the validation scores, certify on the certification scores."""
    grid.require_valid()
    if validation.cols != certification.cols:
        raise DimensionMismatchError("class count of certification scores", validation.cols, certification.cols)
    selected = select_map(validation, grid).best.spec
    corrected = correct_scores(certification, selected, grid)
    rule = RadiusRule.parse(grid.rule)
    lipschitz = smoothed_lipschitz_for(grid) if rule is RadiusRule.R1 else None
    return certify(corrected, grid.sigma, rule=rule, lipschitz=lipschitz,
                   map_spec=selected, n0=validation.rows)


def lvm_rs_certify(classifier: ScoreOracle, x, grid: GridConfig, input_id: int = 0,
                   max_workers: int = 1) -> Certificate:
    """Draw both noise streams for x and run the map-selecting certification."""
    grid.require_valid()
    common = dict(sigma=grid.sigma, seed=grid.seed, input_id=input_id,
                  block_size=grid.block_size, max_workers=max_workers)
    validation = sample_scores(classifier, x, grid.n0, stream=Stream.VALIDATION, **common)
    certification = sample_scores(classifier, x, grid.n, stream=Stream.CERTIFICATION, **common)
    return certify_from_scores(validation, certification, grid)


@dataclass(frozen=True)
class SweepRow:
    map_kind: MapKind
    temperature: float
    method: ConcentrationMethod
    radius: float


def temperature_sweep(scores: ScoreMatrix, grid: GridConfig,
                      methods: Optional[Sequence] = None) -> List[SweepRow]:
    """
    Corrected R2 for every candidate and concentration method.

    Clopper-Pearson rows are produced for hardmax only.
    """
    grid.require_valid()
    methods = [ConcentrationMethod.parse(m) for m in (methods or [grid.method])]
    rows = []
    for spec in grid.candidates():
        p_hat, stats = estimate_phat(scores, spec)
        for method in methods:
            if method is ConcentrationMethod.CLOPPER_PEARSON and spec.kind is not MapKind.HARDMAX:
                continue
            corrected = correct_probs(p_hat, stats, grid.alpha, method, spec.mass, grid.risk_split)
            rows.append(SweepRow(spec.kind, spec.temperature, method,
                                 radius_r2(corrected.normalized(), grid.sigma)))
    return rows


def certified_accuracy_curve(certificates: Sequence, labels: Sequence[int],
                             eps_grid: Sequence[float]) -> List[Tuple[float, float]]:
    """
    Fraction of inputs predicted correctly with radius >= eps, per eps.

    Certificates are anything with ``prediction`` and ``radius``.
    """
    if len(certificates) != len(labels):
        raise DomainError(f"{len(certificates)} certificates but {len(labels)} labels")
    if not certificates:
        raise DomainError("Certified accuracy needs at least one certificate")
    correct = np.array([c.prediction == y for c, y in zip(certificates, labels)], dtype=bool)
    radii = np.array([c.radius for c in certificates], dtype=np.float64)
    return [(float(eps), float(np.mean(correct & (radii >= eps)))) for eps in eps_grid]
