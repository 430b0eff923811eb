"""Shared fixtures and independent oracles for the test suite.

The oracles here are deliberately coded from scratch (scipy special
functions and elementary antiderivatives) rather than by calling back
into the package, so kernel and solver regressions cannot hide.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest
from scipy.special import gamma, gammaincc

from stefancontact.cli import (_profiles_from_dict, _scenario_from_raw,
                               load_scenario_file, main)
from stefancontact.fixed_point import FixedPointConfig
from stefancontact.free_boundary import solve_profiles
from stefancontact.kernels import KernelSetup, default_initial_profiles, make_setup
from stefancontact.quadrature import QuadratureConfig
from stefancontact.scenario import (DimensionlessCoefficients,
                                    DimensionlessConstants)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
CLASSICAL_TOML = SCENARIO_DIR / "classical.toml"
THOMSON_TOML = SCENARIO_DIR / "planted-thomson.toml"
MIXED_TOML = SCENARIO_DIR / "mixed-coefficients.toml"


# --------------------------------------------------------------------------
# independent closed-form oracles
# --------------------------------------------------------------------------

def _upper_gamma(p, y):
    """Upper incomplete gamma Gamma(p, y), extended to p <= 0 (p not an
    integer) via the downward recurrence Gamma(p,y) = (Gamma(p+1,y)
    - y**p exp(-y)) / p."""
    y = np.asarray(y, dtype=float)
    if p > 0:
        return gammaincc(p, y) * gamma(p)
    with np.errstate(over="ignore", invalid="ignore"):
        edge = np.where(np.isfinite(y), np.power(y, p) * np.exp(-y), 0.0)
    return (_upper_gamma(p + 1.0, y) - edge) / p


def gaussian_tail(x, nu, a=1.0):
    """integral of v**(-nu) * exp(-a v**2) over [x, +inf), in closed form."""
    p = (1.0 - nu) / 2.0
    x = np.asarray(x, dtype=float)
    return 0.5 * a ** (-p) * _upper_gamma(p, a * x * x)


@dataclass
class PowerLawOracle:
    """Analytic kernel values for a synthetic coefficient family.

    Liquid:  L1 = l1*v**2, N1 = n1 (constant), K1 = k1*v**(nu+1),
             giving pure power-law kernels.
    Solid:   L2 = l2*v**2, N2 = n2*v**3, K2 = k2*v**(nu+1)*exp(-2*A*v**2)
             with A = a*n2/l2, giving Gaussian-tailed kernels whose
    antiderivatives are elementary or incomplete-gamma closed forms.
    sigma2 = 0 keeps the solid attenuation free of the potential coupling.
    """

    s0: float
    r0: float
    nu: float
    a: float
    l1: float
    n1: float
    k1: float
    l2: float
    n2: float
    k2: float
    D1: float
    D2: float = 0.0

    @property
    def F1_r0(self):
        return self.k1 * (self.r0 ** 2 - self.s0 ** 2) / 2.0

    @property
    def A(self):
        return self.a * self.n2 / self.l2

    @property
    def F2_inf(self):
        return self.k2 * math.exp(-2.0 * self.A * self.r0 ** 2) / (4.0 * self.A)

    @property
    def H(self):
        return self.F1_r0 + self.F2_inf

    @property
    def c1(self):
        return (2.0 * self.a * self.n1 / self.l1
                + (self.D1 / self.H) * self.k1 / self.l1)

    def F1(self, eta):
        return self.k1 * (np.asarray(eta) ** 2 - self.s0 ** 2) / 2.0

    def F2(self, eta):
        eta = np.asarray(eta, dtype=float)
        A = self.A
        return self.k2 / (4.0 * A) * (np.exp(-2.0 * A * self.r0 ** 2)
                                      - np.exp(-2.0 * A * eta ** 2))

    def E1(self, eta):
        return (np.asarray(eta) / self.s0) ** -self.c1

    def E2(self, eta):
        eta = np.asarray(eta, dtype=float)
        return np.exp(-self.A * (eta ** 2 - self.r0 ** 2))

    def H1(self, eta):
        c1 = self.c1
        eta = np.asarray(eta, dtype=float)
        return (self.k1 * self.s0 ** -c1 / (2.0 + c1)
                * (eta ** (2.0 + c1) - self.s0 ** (2.0 + c1)))

    def Phi1(self, eta):
        q = self.c1 + 1.0 + self.nu
        eta = np.asarray(eta, dtype=float)
        return self.s0 ** self.c1 / (self.l1 * q) * (self.s0 ** -q - eta ** -q)

    def G1(self, eta):
        c1, nu = self.c1, self.nu
        q = c1 + 1.0 + nu
        eta = np.asarray(eta, dtype=float)
        lead = self.k1 / (self.l1 * (2.0 + c1))
        piece1 = (eta ** (1.0 - nu) - self.s0 ** (1.0 - nu)) / (1.0 - nu)
        piece2 = self.s0 ** (2.0 + c1) * (eta ** -q - self.s0 ** -q) / q
        return lead * (piece1 + piece2)

    def H2(self, eta):
        # K2/(v**nu * E2) = k2 * exp(-A r0^2) * v * exp(-A v^2)
        A = self.A
        eta = np.asarray(eta, dtype=float)
        return (self.k2 * math.exp(-A * self.r0 ** 2) / (2.0 * A)
                * (np.exp(-A * self.r0 ** 2) - np.exp(-A * eta ** 2)))

    def Phi2(self, eta):
        A = self.A
        eta = np.asarray(eta, dtype=float)
        return (math.exp(A * self.r0 ** 2) / self.l2
                * (gaussian_tail(self.r0, 2.0 + self.nu, A)
                   - gaussian_tail(eta, 2.0 + self.nu, A)))

    def G2(self, eta):
        # E2*H2/(L2 v**nu) = (K/l2) v^(-2-nu) (e^{-A v^2} - e^{A r0^2} e^{-2A v^2})
        A, nu = self.A, self.nu
        eta = np.asarray(eta, dtype=float)
        K = self.k2 * math.exp(-A * self.r0 ** 2) / (2.0 * A)
        one = (gaussian_tail(self.r0, 2.0 + nu, A)
               - gaussian_tail(eta, 2.0 + nu, A))
        two = math.exp(A * self.r0 ** 2) * (
            gaussian_tail(self.r0, 2.0 + nu, 2.0 * A)
            - gaussian_tail(eta, 2.0 + nu, 2.0 * A))
        return K / self.l2 * (one - two)


def _eta_clamped(eta):
    # The solid-phase tables touch eta = +inf at the compactified endpoint
    # where the integration Jacobian vanishes; any finite value works there.
    eta = np.asarray(eta, dtype=float)
    return np.where(np.isfinite(eta), eta, 1e8)


def make_power_law_setup(oracle: PowerLawOracle, U_c=0.3,
                         n1=128, n2=256) -> KernelSetup:
    """KernelSetup whose composed coefficients realize a PowerLawOracle."""
    o = oracle
    constants = DimensionlessConstants(
        a=o.a, B=0.3, Q=1.0, M=0.05, D1=o.D1, D2=o.D2,
        D1_star=U_c * o.D1 / 2.0, D2_star=U_c * o.D2 / 2.0,
        nu=o.nu, mu=3.0)
    coeffs = DimensionlessCoefficients(
        N1=lambda f, eta: np.full_like(np.asarray(eta, dtype=float), o.n1),
        N2=lambda f, eta: o.n2 * _eta_clamped(eta) ** 2,
        L1=lambda f, eta: o.l1 * _eta_clamped(eta) ** 2,
        L2=lambda f, eta: o.l2 * _eta_clamped(eta) ** 2,
        K1=lambda f, eta: o.k1 * _eta_clamped(eta) ** (o.nu + 1.0),
        K2=lambda f, eta: (o.k2 * _eta_clamped(eta) ** (o.nu + 1.0)
                           * np.exp(-2.0 * o.A * _eta_clamped(eta) ** 2)),
        sigma_f1=0.2, sigma_f2=0.0)
    # tight tolerances: the solid Thomson carrier table amplifies absolute
    # quadrature error by the inverse attenuation at large eta
    quad = QuadratureConfig(rel_tol=1e-12, abs_tol=1e-14)
    return KernelSetup(constants=constants, coeffs=coeffs, U_c=U_c,
                       quad=quad, n1=n1, n2=n2)


@pytest.fixture(scope="session")
def power_law_case():
    oracle = PowerLawOracle(s0=0.6, r0=0.9, nu=0.5, a=1.3,
                            l1=0.8, n1=0.45, k1=1.2,
                            l2=1.1, n2=0.275, k2=0.7, D1=0.04)
    setup = make_power_law_setup(oracle)
    profiles = default_initial_profiles(oracle.s0, oracle.r0,
                                        setup.constants, setup.n1, setup.n2)
    return oracle, setup, profiles


# evaluation points for the closed-form kernel comparison: the table nodes
# of each phase (where the cumulative quadrature is directly testable) with
# the solid far-field point eta=inf excluded from pointwise comparisons
def kernel_eval_points(ctx, h2_cap=6.0):
    eta1 = ctx.profiles.eta_nodes
    u = ctx.profiles.u_nodes[1:]
    eta2 = ctx.profiles.r0 / u
    return eta1, eta2, eta2[eta2 <= h2_cap]


# --------------------------------------------------------------------------
# classical-scenario oracle: nested scalar bisection on closed forms
# --------------------------------------------------------------------------

def classical_oracle_fronts(B, Q, M, nu, a, s0_bracket, r0_bracket,
                            tol=1e-12):
    """(s0, r0) for constant coefficients and no electrical coupling.

    Uses only the incomplete-gamma tail; completely independent of the
    package's quadrature and kernel code.
    """

    def I(x):
        return float(gaussian_tail(x, nu, a))

    def g1(s0, r0):
        return (s0 ** nu * Q * math.exp(-s0 ** 2) * math.exp(a * s0 ** 2)
                * (I(s0) - I(r0)) - B)

    def inner_r0(s0):
        lo, hi = r0_bracket
        lo = max(lo, s0 * (1.0 + 1e-12))
        flo, fhi = g1(s0, lo), g1(s0, hi)
        if flo * fhi > 0:
            raise ValueError("oracle inner bracket does not straddle a root")
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if g1(s0, mid) * flo <= 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def g2(s0):
        r0 = inner_r0(s0)
        flux = Q * math.exp(-s0 ** 2) * s0 ** nu
        W = (math.exp(-a * (r0 ** 2 - s0 ** 2)) * flux / r0 ** (nu + 1.0)
             - 1.0 / (r0 ** (nu + 1.0) * math.exp(a * r0 ** 2) * I(r0)))
        return W - M

    lo, hi = s0_bracket
    flo, fhi = g2(lo), g2(hi)
    if flo * fhi > 0:
        raise ValueError("oracle outer bracket does not straddle a root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g2(mid) * flo <= 0:
            hi = mid
        else:
            lo = mid
    s0 = 0.5 * (lo + hi)
    return s0, inner_r0(s0)


# --------------------------------------------------------------------------
# solved-scenario fixtures (session scoped; each runs the CLI once)
# --------------------------------------------------------------------------

def _run_solve(toml_path, out_dir, extra=()):
    rc = main(["solve", str(toml_path), "--out", str(out_dir), *extra])
    assert rc == 0, f"solve failed with exit code {rc}"
    return json.loads((out_dir / "solution.json").read_text())


@pytest.fixture(scope="session")
def classical_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("classical")
    doc = _run_solve(CLASSICAL_TOML, out)
    return out, doc


@pytest.fixture(scope="session")
def classical_fields(classical_run):
    from stefancontact.fields import build_fields
    _, doc = classical_run
    scenario, _ = _scenario_from_raw(doc["scenario"])
    profiles = _profiles_from_dict(doc["profiles"])
    setup = make_setup(scenario, n1=len(profiles.eta_nodes),
                       n2=len(profiles.u_nodes))
    return build_fields(scenario, doc["s0_hat"], doc["r0_star"],
                        profiles, setup)


@pytest.fixture(scope="session")
def mixed_scenario():
    return load_scenario_file(MIXED_TOML)


@pytest.fixture(scope="session")
def mixed_root(mixed_scenario):
    """Converged profiles of the mixed scenario at its planted root."""
    scenario, raw = mixed_scenario
    s0 = 0.55
    r0 = 0.6134281640211341
    setup = make_setup(scenario, n1=64, n2=96)
    res = solve_profiles(s0, r0, setup, FixedPointConfig(tol=1e-11,
                                                         max_iter=200))
    return setup, res
