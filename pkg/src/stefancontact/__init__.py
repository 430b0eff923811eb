"""Similarity solutions of the two-phase Stefan problem for closed
electrical contacts with Thomson effect and temperature-dependent
coefficients.

The solver reduces the moving-front problem to a coupled pair of
nonlinear integral equations for the dimensionless temperature profiles
(f1 on the liquid zone, f2 on the solid zone), finds the profile pair by
Picard iteration, and locates the front coefficients (s0, r0) by nested
bisection of the two scalar free-boundary equations.  A certificate
module evaluates the explicit contraction bounds that distinguish
guaranteed convergence from merely observed convergence.
"""

from .errors import (
    SolverError,
    NonPositiveParameter,
    DomainError,
    ToleranceNotMet,
    DecayViolation,
    DegenerateDenominator,
    MaxIterExceeded,
    DivergenceDetected,
    NoSignChange,
    InnerFailure,
    RootNotBracketed,
    ParseError,
)
from .scenario import (
    CoefficientLaw,
    CoefficientModel,
    PhysicalScenario,
    DimensionlessConstants,
    DimensionlessCoefficients,
    derive_constants,
    build_dimensionless_coefficients,
)
from .quadrature import QuadratureConfig, integrate_finite, integrate_semi_infinite, cumulative_integral
from .kernels import ProfilePair, KernelSetup, KernelContext, make_setup
from .fixed_point import FixedPointConfig, FixedPointResult, iterate, empirical_contraction_ratio
from .free_boundary import FreeBoundaryConfig, SimilaritySolution, solve_outer_s0

__version__ = "0.1.0"
