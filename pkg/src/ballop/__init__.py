"""Truncated composition operators on weighted Hardy spaces of the unit ball.

Builds matrices of composition operators ``f -> f o psi`` for linear
fractional symbols, the explicit conjugations for the involutive ball
automorphisms and for complex symmetric linear symbols, and measures how
well those conjugations hold at a finite truncation degree.
"""
__version__ = "0.1.0"

from .errors import (BallopError, InvalidArgument, NotASelfMap, NotInvertible, OutOfDomain,
                     OutOfRange, SingularDenominator, SingularPoint, WrongVariant)
from .hardy import SpaceSpec, beta, inner_product, kernel_series, monomial_norm_sq, orthonormal_scaling
from .lfm import (LinearFractionalMap, apply, compose, component_series, is_involution,
                  linear_map, mobius)
from .opmatrix import (AntilinearOperator, OperatorMatrix, adjoint, antilinear_compose,
                       composition_matrix, csym_residual, normality_residual, op_norm,
                       polar_unitary)
from .series import (TruncatedSeries, enumerate_multiindices, linear_form, reciprocal_affine,
                     series_add, series_eval, series_mul, series_pow)
from .symmetry import (ConjugationCertificate, certify, conjugation_J, conjugation_Ja,
                       conjugation_Ja_real, jv_pipeline, realign_theta, takagi, u_theta,
                       unitary_part_Wa)
