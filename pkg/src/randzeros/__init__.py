"""Random analytic functions: sampling, zeros, and limit zero measures."""

from .ensembles import (EnsembleSpec, ScalingMap, gaussian_expected_count,
                        implied_beta, log_coeff, log_coeff_scaled, scaling,
                        truncation_index, u_profile, validity_radius)
from .errors import (AtomRadiusError, ContourZeroError, IntegrabilityError,
                     NumericError, RootConvergenceError, ValidationError)
from .fenchel import (LimitMeasure, construct_ensemble, convex_hull,
                      derivative_jumps, fenchel_transform, left_derivative,
                      limit_density, limit_measure)
from .measures import (ComparisonReport, compare_ensemble,
                       empirical_radial_mass, ks_angular, ks_radial,
                       merge_measures, normalize_zeros, potential_profile,
                       score_measure, szego_curve_distance,
                       szego_partial_sum_zeros, w1_radial, zero_count_lln)
from .piecewise import TAIL_INFINITE, PiecewiseFn
from .polyzero import (LogPoly, ZeroMeasure, count_zeros_argument, eval_log,
                       find_zeros, newton_polygon_rings, newton_polygon_roots,
                       vieta_check)
from .sampling import CoeffLaw, sample_coeff, sample_series, u01

__version__ = "0.1.0"
