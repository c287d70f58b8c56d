"""
Unit tests for the synthetic classifiers and the smoothed-gradient checks.
"""

import math

import numpy as np
import pytest

from app.certify.lipschitz_bounds import BoundInputs, smoothed_lipschitz_elementwise
from app.errors import DomainError, NumericalConsistencyError
from app.models.synthetic_models import (
    GradientEstimate, ModelKind, SyntheticModel, eval_worst_case_hbar, exact_smoothed_threshold,
    hardmax_variance_example, numeric_smoothed_gradient_norm, spectral_norm,
)


@pytest.mark.unit
class TestWorstCaseFunction:

    def test_quarter_point(self):
        L, r = 2.0, 1.0
        assert eval_worst_case_hbar(np.array([-r / (4 * L), 3.0]), L, r) == pytest.approx(0.25)

    def test_saturates_and_centres(self):
        assert eval_worst_case_hbar(np.array([0.0]), 1.0, 2.0) == 1.0
        assert eval_worst_case_hbar(np.array([10.0]), 1.0, 2.0) == 2.0
        assert eval_worst_case_hbar(np.array([-10.0]), 1.0, 2.0) == 0.0

    def test_batch_output(self):
        values = eval_worst_case_hbar(np.array([[-1.0, 0.0], [0.1, 5.0]]), 1.0, 1.0)
        np.testing.assert_allclose(values, [0.0, 0.6])

    def test_is_lipschitz_in_first_coordinate(self, rng):
        L, r = 3.0, 2.0
        points = rng.normal(scale=0.5, size=(1000, 3))
        others = points + rng.normal(scale=0.1, size=points.shape)
        gap = np.abs(eval_worst_case_hbar(points, L, r) - eval_worst_case_hbar(others, L, r))
        assert np.all(gap <= L * np.abs(points[:, 0] - others[:, 0]) + 1e-12)

    def test_rejects_nonpositive_parameters(self):
        with pytest.raises(DomainError):
            eval_worst_case_hbar(np.zeros(1), 0.0, 1.0)


@pytest.mark.unit
class TestThreshold:

    def test_exact_smoothing(self):
        assert exact_smoothed_threshold(1.0, 1.0) == pytest.approx(0.841345, abs=1e-6)
        assert exact_smoothed_threshold(-1.0, 0.5) == pytest.approx(0.022750, abs=1e-6)

    def test_model_logits(self):
        model = SyntheticModel.threshold_1d()
        np.testing.assert_array_equal(model(np.array([[-0.5], [0.0], [0.2]])),
                                      [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert math.isinf(model.lipschitz)
        assert model.num_classes == 2

    def test_rejects_sigma(self):
        with pytest.raises(DomainError):
            exact_smoothed_threshold(0.0, 0.0)


@pytest.mark.unit
class TestSpectralNorm:

    @pytest.mark.parametrize("shape", [(2, 3), (10, 20), (50, 5), (1, 7)])
    def test_matches_numpy(self, rng, shape):
        weight = rng.normal(size=shape)
        assert spectral_norm(weight) == pytest.approx(np.linalg.norm(weight, 2), rel=1e-6)

    def test_diagonal(self):
        assert spectral_norm(np.diag([3.0, -5.0, 1.0])) == pytest.approx(5.0, rel=1e-8)

    def test_zero_matrix(self):
        assert spectral_norm(np.zeros((3, 4))) == 0.0

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            spectral_norm(np.array([[1.0, np.nan]]))


@pytest.mark.unit
class TestSyntheticModel:
    """Construction and evaluation of the built-in models."""

    def test_hbar_logits_sum_to_mass(self, rng):
        model = SyntheticModel.worst_case_hbar(L=2.0, r=3.0)
        logits = model(rng.normal(size=(20, 2)))
        np.testing.assert_allclose(logits.sum(axis=1), 3.0)
        assert model.kind is ModelKind.WORST_CASE_HBAR

    def test_linear_logits(self):
        model = SyntheticModel.linear_multiclass([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]], [0.0, 0.5, -1.0])
        np.testing.assert_allclose(model(np.array([1.0, 1.0])), [[1.0, 2.5, 1.0]])
        assert model.num_classes == 3
        assert model.input_dim == 2

    def test_linear_lipschitz_pairs(self, rng):
        model = SyntheticModel.linear_multiclass(rng.normal(size=(4, 6)))
        for _ in range(200):
            x, y = rng.normal(size=(2, 6))
            gap = np.linalg.norm(model(x) - model(y))
            assert gap <= model.lipschitz * np.linalg.norm(x - y) * (1 + 1e-9)

    def test_linear_weights_are_read_only(self):
        model = SyntheticModel.linear_multiclass(np.eye(2))
        with pytest.raises(ValueError):
            model.weight[0, 0] = 5.0

    def test_linear_rejects_wrong_dimension(self):
        model = SyntheticModel.linear_multiclass(np.eye(3))
        with pytest.raises(DomainError):
            model(np.ones((2, 4)))

    def test_linear_is_not_scalar(self):
        with pytest.raises(DomainError):
            SyntheticModel.linear_multiclass(np.eye(2)).scalar(np.ones(2))

    def test_linear_rejects_bad_bias(self):
        with pytest.raises(DomainError):
            SyntheticModel.linear_multiclass(np.eye(2), [1.0, 2.0, 3.0])

    def test_kind_parse(self):
        assert ModelKind.parse("threshold-1d") is ModelKind.THRESHOLD_1D
        with pytest.raises(DomainError):
            ModelKind.parse("resnet")


@pytest.mark.unit
class TestGradientEstimates:
    """Stein and finite-difference estimates of smoothed gradient norms."""

    def test_threshold_at_origin(self):
        estimate = numeric_smoothed_gradient_norm(SyntheticModel.threshold_1d(), [0.0], 1.0,
                                                  n_mc=200_000, seed=3)
        assert estimate.stein_norm == pytest.approx(0.398942, abs=0.01)
        assert estimate.fd_norm == pytest.approx(0.398942, abs=0.02)
        assert estimate.consistent

    def test_worst_case_attains_bound(self):
        model = SyntheticModel.worst_case_hbar(L=1.0, r=1.0)
        estimate = numeric_smoothed_gradient_norm(model, [0.0], 0.5, n_mc=400_000, seed=5)
        assert estimate.stein_norm == pytest.approx(0.68269, rel=0.02)

    @pytest.mark.slow
    @pytest.mark.timeout(300)
    @pytest.mark.parametrize("L", [1.0, 5.0])
    @pytest.mark.parametrize("r", [1.0, 3.0])
    @pytest.mark.parametrize("sigma", [0.25, 0.5])
    def test_worst_case_tightness_grid(self, L, r, sigma):
        model = SyntheticModel.worst_case_hbar(L=L, r=r)
        estimate = numeric_smoothed_gradient_norm(model, [0.0], sigma, n_mc=1_000_000, seed=17)
        bound = smoothed_lipschitz_elementwise(BoundInputs(L, sigma, r))
        assert estimate.stein_norm == pytest.approx(bound, rel=0.02)

    def test_accepts_plain_callable(self):
        estimate = numeric_smoothed_gradient_norm(lambda pts: 2.0 * pts[:, 0] - pts[:, 1],
                                                  [0.3, -0.2], 0.5, n_mc=100_000, seed=1)
        assert estimate.fd_norm == pytest.approx(math.sqrt(5.0), rel=1e-9)
        assert estimate.stein_norm == pytest.approx(math.sqrt(5.0), rel=0.03)

    def test_large_step_is_flagged(self):
        with pytest.raises(NumericalConsistencyError):
            numeric_smoothed_gradient_norm(SyntheticModel.threshold_1d(), [0.0], 1.0,
                                           n_mc=100_000, h_fd=2.0)

    def test_check_can_be_disabled(self):
        estimate = numeric_smoothed_gradient_norm(SyntheticModel.threshold_1d(), [0.0], 1.0,
                                                  n_mc=100_000, h_fd=2.0, check=False)
        assert not estimate.consistent

    def test_is_deterministic(self):
        model = SyntheticModel.worst_case_hbar()
        first = numeric_smoothed_gradient_norm(model, [0.1], 0.5, n_mc=100_000, seed=9)
        second = numeric_smoothed_gradient_norm(model, [0.1], 0.5, n_mc=100_000, seed=9)
        assert first == second

    @pytest.mark.parametrize("kwargs", [{"sigma": 0.0}, {"n_mc": 1}, {"n_mc": 99_999}, {"h_fd": -0.1}])
    def test_rejects_arguments(self, kwargs):
        args = {"sigma": 1.0, "n_mc": 100_000}
        args.update(kwargs)
        with pytest.raises(DomainError):
            numeric_smoothed_gradient_norm(SyntheticModel.threshold_1d(), [0.0], **args)

    def test_estimate_properties(self):
        estimate = GradientEstimate(stein_norm=1.0, stein_stderr=0.03, fd_norm=1.1, fd_stderr=0.04)
        assert estimate.combined_stderr == pytest.approx(0.05)
        assert estimate.discrepancy == pytest.approx(0.1)
        assert estimate.consistent


@pytest.mark.unit
class TestHardmaxVariance:

    def test_threshold_inflates_variance(self):
        example = hardmax_variance_example(spread=0.01, n=100_000, seed=0)
        assert example.var_x == pytest.approx(0.01 ** 2 / 3, rel=0.05)
        assert example.var_y == pytest.approx(0.25, abs=0.005)

    def test_off_centre_has_no_threshold_variance(self):
        example = hardmax_variance_example(spread=0.01, n=1000, mean=0.7)
        assert example.var_y == 0.0

    @pytest.mark.parametrize("spread,mean", [(0.0, 0.5), (0.6, 0.5), (0.1, 0.95)])
    def test_rejects_interval(self, spread, mean):
        with pytest.raises(DomainError):
            hardmax_variance_example(spread=spread, mean=mean)
