"""Physical scenario ingestion and dimensionless reduction.

A scenario carries the dimensional constants of the contact problem plus
per-phase coefficient laws for specific heat c(T), density gamma(T),
thermal conductivity lambda(T) and electrical resistivity rho(T).  From
these we derive the dimensionless constants of the similarity reduction
and the composed dimensionless coefficient functions N, L, K used by
every kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonPositiveParameter

_FAMILIES = ("constant", "linear_in_f", "power_law_in_eta")

# Fractional slack on the [0, T_ion] validity window; absorbs harmless
# interpolation overshoot without hiding real setup errors.
_VALIDITY_SLACK = 1e-9


@dataclass(frozen=True)
class CoefficientLaw:
    """One coefficient role as a parametric law.

    constant:          value = p0
    linear_in_f:       value = p0 * (1 + p1 * (T - T_m)/T_m)
    power_law_in_eta:  value = p0 * eta**p1  (composite in the similarity
                       coordinate; the temperature argument is ignored)
    """

    family: str
    parameters: tuple

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown coefficient family {self.family!r}")
        object.__setattr__(self, "parameters", tuple(float(p) for p in self.parameters))
        n_expected = {"constant": 1, "linear_in_f": 2, "power_law_in_eta": 2}[self.family]
        if len(self.parameters) != n_expected:
            raise ValueError(
                f"{self.family} law takes {n_expected} parameters, "
                f"got {len(self.parameters)}")
        if self.parameters[0] <= 0:
            raise NonPositiveParameter(f"{self.family} law amplitude must be positive")

    @property
    def depends_on_temperature(self) -> bool:
        return self.family != "power_law_in_eta"

    def __call__(self, f, eta):
        """Evaluate the law at dimensionless temperature f and coordinate eta."""
        p = self.parameters
        if self.family == "constant":
            return p[0] * np.ones_like(np.asarray(f, dtype=float))
        if self.family == "linear_in_f":
            return p[0] * (1.0 + p[1] * np.asarray(f, dtype=float))
        return p[0] * np.asarray(eta, dtype=float) ** p[1]


@dataclass(frozen=True)
class CoefficientModel:
    """The four coefficient laws of one phase."""

    c: CoefficientLaw
    gamma: CoefficientLaw
    lam: CoefficientLaw
    rho: CoefficientLaw

    @property
    def laws(self):
        return {"c": self.c, "gamma": self.gamma, "lam": self.lam, "rho": self.rho}

    def power_law_exponents(self):
        return [abs(law.parameters[1]) for law in self.laws.values()
                if law.family == "power_law_in_eta"]


@dataclass(frozen=True)
class PhysicalScenario:
    T_ion: float
    T_b: float
    T_m: float
    Q0: float
    U_c: float
    l_m: float
    gamma_m: float
    lambda0: float
    rho0: float
    c0: float
    gamma0: float
    nu: float
    sigma1: float
    sigma2: float
    coeff_model_1: CoefficientModel
    coeff_model_2: CoefficientModel

    def __post_init__(self):
        if not (0.0 < self.T_m < self.T_b < self.T_ion):
            raise NonPositiveParameter(
                "temperatures must satisfy 0 < T_m < T_b < T_ion, got "
                f"T_m={self.T_m}, T_b={self.T_b}, T_ion={self.T_ion}")
        if self.Q0 <= 0:
            raise NonPositiveParameter("heat-flux power Q0 must be positive")
        if not (0.0 < self.nu < 1.0):
            raise NonPositiveParameter(f"geometry exponent nu must lie in (0,1), got {self.nu}")
        for name in ("lambda0", "rho0", "c0", "gamma0", "l_m", "gamma_m"):
            if getattr(self, name) <= 0:
                raise NonPositiveParameter(f"{name} must be positive")


@dataclass(frozen=True)
class DimensionlessConstants:
    a: float
    B: float
    Q: float
    M: float
    D1: float
    D2: float
    D1_star: float
    D2_star: float
    nu: float
    mu: float


def derive_constants(s: PhysicalScenario) -> DimensionlessConstants:
    """Closed-form dimensionless constants of the similarity reduction."""
    a = math.sqrt(s.lambda0 / (s.rho0 * s.c0))
    B = (s.T_b - s.T_m) / s.T_m
    Q = s.Q0 / (s.lambda0 * s.T_m * math.sqrt(math.pi))
    M = 2.0 * s.l_m * s.gamma_m * a**2 / (s.lambda0 * s.T_m)
    D1 = s.sigma1 * s.U_c / (2.0 * s.c0 * s.gamma0 * a)
    D2 = s.sigma2 * s.U_c / (2.0 * s.c0 * s.gamma0 * a)
    return DimensionlessConstants(
        a=a, B=B, Q=Q, M=M,
        D1=D1, D2=D2,
        D1_star=s.U_c * D1 / 2.0,
        D2_star=s.U_c * D2 / 2.0,
        nu=s.nu,
        mu=_derive_mu(s),
    )


def _derive_mu(s: PhysicalScenario) -> float:
    """Decay exponent: largest power-law exponent among the laws, else 3.

    mu only steers the solid-phase initial-guess tail and the certificate
    formulas; when no power-law law is present we fall back to the
    smallest integer exceeding the mu > 2 requirement.
    """
    exps = s.coeff_model_1.power_law_exponents() + s.coeff_model_2.power_law_exponents()
    return max(exps) if exps else 3.0


@dataclass(frozen=True)
class DimensionlessCoefficients:
    """Evaluable composed coefficient functions, one set per phase.

    Each callable takes (f, eta) arrays of equal shape: f is the
    dimensionless temperature, eta the similarity coordinate.
    """

    N1: callable
    N2: callable
    L1: callable
    L2: callable
    K1: callable
    K2: callable
    sigma_f1: float
    sigma_f2: float


def _checked(law: CoefficientLaw, T_m: float, T_ion: float):
    """Wrap a temperature-dependent law with its validity-range check."""
    if not law.depends_on_temperature:
        return law
    lo = -T_ion * _VALIDITY_SLACK
    hi = T_ion * (1.0 + _VALIDITY_SLACK)

    def wrapped(f, eta):
        T = (np.asarray(f, dtype=float) + 1.0) * T_m
        if np.any(T < lo) or np.any(T > hi):
            bad = T[(T < lo) | (T > hi)]
            raise DomainError(
                f"temperature {bad.flat[0]:.6g} K outside coefficient "
                f"validity range [0, {T_ion:g}] K")
        return law(f, eta)

    return wrapped


def build_dimensionless_coefficients(s: PhysicalScenario) -> DimensionlessCoefficients:
    """Compose the per-phase N, L, K wrappers from the coefficient laws."""
    c0g0 = s.c0 * s.gamma0

    def make(model: CoefficientModel):
        c_fn = _checked(model.c, s.T_m, s.T_ion)
        g_fn = _checked(model.gamma, s.T_m, s.T_ion)
        l_fn = _checked(model.lam, s.T_m, s.T_ion)
        r_fn = _checked(model.rho, s.T_m, s.T_ion)

        def N(f, eta):
            return c_fn(f, eta) * g_fn(f, eta) / c0g0

        def L(f, eta):
            return l_fn(f, eta) / s.lambda0

        def K(f, eta):
            return r_fn(f, eta)

        return N, L, K

    N1, L1, K1 = make(s.coeff_model_1)
    N2, L2, K2 = make(s.coeff_model_2)
    return DimensionlessCoefficients(
        N1=N1, N2=N2, L1=L1, L2=L2, K1=K1, K2=K2,
        sigma_f1=s.sigma1, sigma_f2=s.sigma2,
    )
