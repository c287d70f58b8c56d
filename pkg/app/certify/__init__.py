"""
Certification mathematics for SmoothCert.

Special functions, simplex maps, concentration bounds, certified radii
and Lipschitz bounds of smoothed classifiers.
"""

from .concentration import (
    ConcentrationMethod, CorrectedProbs, RiskSplit, SampleStats,
    bernstein_shift, clopper_pearson_bounds, column_stats, correct_probs,
    hoeffding_shift, sample_stats,
)
from .lipschitz_bounds import (
    BoundCase, BoundInputs, BoundReport, bound_report, local_lipschitz_quantile_map,
    optimal_sigma, smoothed_lipschitz_elementwise, smoothed_lipschitz_vector,
)
from .radius import ABSTAIN, Certificate, RadiusRule, certify, margin, radius_r1, radius_r2, radius_r3
from .simplex_maps import (
    MapKind, MapSpec, SimplexVector, apply_map, apply_map_rows, generalized_sparsemax,
    hardmax, softmax,
)
from .specfun import erf, gaussian_cdf, gaussian_quantile

__all__ = [
    'ABSTAIN', 'BoundCase', 'BoundInputs', 'BoundReport', 'Certificate',
    'ConcentrationMethod', 'CorrectedProbs', 'MapKind', 'MapSpec', 'RadiusRule',
    'RiskSplit', 'SampleStats', 'SimplexVector',
    'apply_map', 'apply_map_rows', 'bernstein_shift', 'bound_report', 'certify',
    'clopper_pearson_bounds', 'column_stats', 'correct_probs', 'erf', 'gaussian_cdf',
    'gaussian_quantile', 'generalized_sparsemax', 'hardmax', 'hoeffding_shift',
    'local_lipschitz_quantile_map', 'margin', 'optimal_sigma', 'radius_r1', 'radius_r2',
    'radius_r3', 'sample_stats', 'smoothed_lipschitz_elementwise',
    'smoothed_lipschitz_vector', 'softmax',
]
