"""Stability probability of systems with both bounded and random parameter uncertainty."""

__version__ = "0.1.0"

from .errors import (ConfigError, DimensionMismatch, DimensionTooHigh, DivisionByZero,
                     DomainError, ExprSyntaxError, InvalidParams, InvalidProblem, MethodError,
                     MethodInapplicable, MixedRobustError, NotDiscrete, UnboundedSupport,
                     UnknownVariable, ZeroPolynomial)
from .estimate import ProbabilityEstimate
from .expr import Expression, parse
from .mixed import (AutoStrategy, Problem, ProblemSpec, Scenario, TwoStep, bounds_q_of_delta,
                    chernoff_sample_size, discrete_delta_of_q, discrete_q_delta,
                    discrete_q_of_delta, p_of_q, quantile_lower_bound, scenario_estimate,
                    solve_delta_of_q, solve_discrete, solve_q_delta, solve_q_of_delta)
from .param import (AxisEllipsoid, Box, DiscretePMF, DiscreteSet, DistributionSpec, Laplace,
                    Normal, ParamBox, Uniform)
from .poly import Polynomial, StabilityKind, is_hurwitz, is_schur, is_stable, roots
from .region import (IntervalUnion, PolygonRegion, measure, polygon_area, region_csv,
                     stability_intervals_1d, stability_region_2d)
from .robust import (Auto, CoefficientMap, GridFallback, Kharitonov, ZeroExclusion,
                     indicator_batch, indicator_f, kharitonov_hurwitz, zero_exclusion_affine)

__all__ = [
    "ConfigError", "DimensionMismatch", "DimensionTooHigh", "DivisionByZero", "DomainError",
    "ExprSyntaxError", "InvalidParams", "InvalidProblem", "MethodError", "MethodInapplicable",
    "MixedRobustError", "NotDiscrete", "UnboundedSupport", "UnknownVariable", "ZeroPolynomial",
    "ProbabilityEstimate", "Expression", "parse", "AutoStrategy", "Problem", "ProblemSpec",
    "Scenario", "TwoStep", "bounds_q_of_delta", "chernoff_sample_size", "discrete_delta_of_q",
    "discrete_q_delta", "discrete_q_of_delta", "p_of_q", "quantile_lower_bound",
    "scenario_estimate", "solve_delta_of_q", "solve_discrete", "solve_q_delta",
    "solve_q_of_delta", "AxisEllipsoid", "Box", "DiscretePMF", "DiscreteSet",
    "DistributionSpec", "Laplace", "Normal", "ParamBox", "Uniform", "Polynomial",
    "StabilityKind", "is_hurwitz", "is_schur", "is_stable", "roots", "IntervalUnion",
    "PolygonRegion", "measure", "polygon_area", "region_csv", "stability_intervals_1d",
    "stability_region_2d", "Auto", "CoefficientMap", "GridFallback", "Kharitonov",
    "ZeroExclusion", "indicator_batch", "indicator_f", "kharitonov_hurwitz",
    "zero_exclusion_affine",
]
