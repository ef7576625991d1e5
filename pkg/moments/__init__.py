"""Marginal moment providers and moment propagation through polynomials."""

from .errors import InsufficientMoments, MomentBlowup, MomentInstability
from .marginals import (
    BaseMarginal,
    BetaMarginal,
    Marginal,
    MomentsMarginal,
    PointMarginal,
    UniformMarginal,
    affine_moments,
    beta_moment_gamma,
    clear_moment_cache,
    parse_marginal,
    raw_moment,
)
from .propagate import (
    MOMENT_METHODS,
    JointMomentTable,
    MixedChebMoments,
    MomentVector,
    cheb_compositions,
    choose_method,
    divergence_degree,
    expectation,
    mixed_cheb_moments,
    moment_validity_degree,
    monomial_expectation,
    z_moments_cheb,
    z_moments_standard,
)

__all__ = [
    "MOMENT_METHODS",
    "BaseMarginal",
    "BetaMarginal",
    "InsufficientMoments",
    "JointMomentTable",
    "Marginal",
    "MixedChebMoments",
    "MomentBlowup",
    "MomentInstability",
    "MomentVector",
    "MomentsMarginal",
    "PointMarginal",
    "UniformMarginal",
    "affine_moments",
    "beta_moment_gamma",
    "cheb_compositions",
    "choose_method",
    "clear_moment_cache",
    "divergence_degree",
    "expectation",
    "mixed_cheb_moments",
    "moment_validity_degree",
    "monomial_expectation",
    "parse_marginal",
    "raw_moment",
    "z_moments_cheb",
    "z_moments_standard",
]
