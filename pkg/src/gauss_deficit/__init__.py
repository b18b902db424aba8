"""
Numerical verification of sharp Gaussian functional inequalities.

The package evaluates both sides of regularised hypercontractivity,
logarithmic Sobolev, Talagrand, Poincare, Beckner, Brascamp-Lieb and
Hamilton-Jacobi inequalities on structured inputs (semi-log-convex /
-concave densities, Fokker-Planck flow classes), reports the deficit with
explicit sharp constants, and reproduces the counterexamples that delimit
the hypotheses.
"""

from .numerics import (Grid1D, Grid2D, GridField, QuadratureRule,
                       default_grid, default_grid_2d, gauss_hermite_rule,
                       ParameterError, EvaluationError, PositivityError,
                       TruncationError, TruncationWarning)
from .families import (LogQuad, Mixture, field_from_family, gaussian_field,
                       gaussian_ratio_field, symmetric_mixture)
from .semigroups import (BetaS, ExponentTriple, InadmissibleExponentError,
                         IntegrabilityError, beta_s, check_commutation,
                         dilation_apply, nelson_time, ou_apply)
from .flows import (T_STAR, ConvexityCertificate, FPParams, MeasureSpec,
                    certify, certify_matrix, covariance, fp_class_member,
                    fp_evolve, preservation_trace)
from .functionals import (EntFisher, SharpConstant, entropy_fisher,
                          gross_psi, gross_psi_prime0, gross_slope,
                          lp_norm_gaussian, q_functional, sharp_constant)
from .reports import DeficitReport, HypothesisCheck
from .transport import (DensitySpec, PotentialSpec, QuantileMap, brenier_1d,
                        caffarelli_check, general_lsi_deficit,
                        relative_entropy_gauss, talagrand_deficit, w2,
                        w2_sq_coupling_2d)
from .inequalities import (beckner_check, brascamp_lieb_check,
                           counterexample_mixture,
                           counterexample_superharmonic, els_eigen_check,
                           hc_check, lsi_check, make_fp_input,
                           make_logconcave_input, make_talagrand_input,
                           matrix_check,
                           poincare_check, reverse_hc_check,
                           sample_reverse_triple)
from .hamilton_jacobi import (HJField, beta_of_a, dual_talagrand_check,
                              hj_hc_check, hopf_lax, quadratic_datum,
                              vanishing_viscosity)
from .cli import ReportBundle, RunConfig, flow_trace, run

__version__ = "0.1.0"
