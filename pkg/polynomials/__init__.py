"""Sparse multivariate polynomials, Chebyshev series and constraint rescaling."""

from .chebyshev import (
    MAX_UNIVARIATE_DEGREE,
    ChebSeries,
    cheb_eval,
    cheb_integral,
    cheb_integral_weights,
    cheb_linear_factor_matrix,
    cheb_mul,
    cheb_to_standard,
    gram_to_cheb_maps,
    moments_cheb_to_standard,
    moments_standard_to_cheb,
    standard_to_cheb,
)
from .errors import DegreeCapExceeded, EmptyUnsafeSet, VariableMismatch
from .multipoly import DROP_TOL, MAX_TOTAL_DEGREE, MultiPoly, grlex_order, poly_mul, poly_pow, term_capacity
from .rescale import (
    BOUND_METHODS,
    RescaledConstraint,
    box_bound,
    range_bound,
    rescale_constraint,
    support_bound,
)

__all__ = [
    "BOUND_METHODS",
    "DROP_TOL",
    "MAX_TOTAL_DEGREE",
    "MAX_UNIVARIATE_DEGREE",
    "ChebSeries",
    "DegreeCapExceeded",
    "EmptyUnsafeSet",
    "MultiPoly",
    "RescaledConstraint",
    "VariableMismatch",
    "box_bound",
    "cheb_eval",
    "cheb_integral",
    "cheb_integral_weights",
    "cheb_linear_factor_matrix",
    "cheb_mul",
    "cheb_to_standard",
    "gram_to_cheb_maps",
    "grlex_order",
    "moments_cheb_to_standard",
    "moments_standard_to_cheb",
    "poly_mul",
    "poly_pow",
    "range_bound",
    "rescale_constraint",
    "standard_to_cheb",
    "support_bound",
    "term_capacity",
]
