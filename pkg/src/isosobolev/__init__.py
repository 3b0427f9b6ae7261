"""Sobolev, Hardy and Hardy-Sobolev constants from an isoperimetric profile,
with radial checks of the inequalities on model geometries."""

__version__ = "0.1.0"

from .errors import (AccuracyError, DivergenceError, DomainError, EvaluationError,
                     IsoSobolevError)
from .specfn import (DimensionParams, beta, gamma, k_pstar_p, k_qp, lgamma, log_beta,
                     sobolev_best_constant, unit_ball_volume)
from .quad import Attainment, SupremumResult, WeightedMeasure, integrate, quad, sup_scan
from .profile import (IsoperimetricProfile, ModelGeometry, alpha_exponent, check_valid,
                      euclidean_geometry, geometry_preset, is_p_hyperbolic, preset,
                      product_model, profile_from_geometry, weight_w)
from .constants import (ConstantsReport, b1_bound_power_like, c2_bound_general, compute_B1,
                        compute_B2, compute_constants, hardy_sobolev_constant,
                        product_b_coefficient, theorem_constants)
from .rearrange import (PiecewiseFunction, check_cavalieri, check_hardy_littlewood,
                        check_polya_szego, decreasing_rearrangement, distribution_function)
from .bliss import (bracket_optimal_constant, compute_B_tilde, measures_for_hardy,
                    measures_for_sobolev, test_inequality)
from .verify import (RadialTestFunction, sobolev_quotient_sweep, verify_hardy,
                     verify_hardy_sobolev, verify_sobolev)
