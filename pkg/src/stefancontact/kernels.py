"""Similarity kernels of the integral formulation.

Given a candidate profile pair (f1 on the liquid interval [s0, r0], f2 on
the solid half-line via the compactified coordinate u = r0/eta) and the
dimensionless constants, a KernelContext precomputes cumulative tables of
every kernel on the profile grids:

    F1, F2   resistivity-weighted path integrals (potential numerators)
    H        total path integral F1(r0) + F2(+inf) (potential denominator)
    E1, E2   exponential drift/Thomson attenuation factors
    H1, H2   attenuation-weighted resistivity integrals
    Phi1,2   attenuated conductivity integrals (flux response)
    G1, G2   Joule-source integrals

Nested integrals are built bottom-up as cumulative tables with spline
interpolants, so no quadrature ever runs inside another quadrature.
Tables are immutable once built; evaluation is pure interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DecayViolation, DomainError, ToleranceNotMet
from .quadrature import QuadratureConfig, _panels_gk, integrate_finite
from .scenario import (
    DimensionlessCoefficients,
    DimensionlessConstants,
    PhysicalScenario,
    build_dimensionless_coefficients,
    derive_constants,
)

_ENDPOINT_SLACK = 1e-12


def chebyshev_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    """Chebyshev-Lobatto nodes on [lo, hi], ascending, endpoints exact."""
    if n < 4:
        raise ValueError("need at least 4 nodes")
    theta = np.pi * np.arange(n) / (n - 1)
    x = 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(theta)
    x[0], x[-1] = lo, hi
    return x


@dataclass
class ProfilePair:
    """Discretized candidate (f1, f2) with interpolants.

    f1 lives on an ascending node set over [s0, r0]; f2 lives on an
    ascending uniform grid in u = r0/eta over [0, 1], where u = 0 is the
    far field (eta = +inf) and u = 1 is the melting front (eta = r0).
    """

    s0: float
    r0: float
    eta_nodes: np.ndarray
    f1_values: np.ndarray
    u_nodes: np.ndarray
    f2_values: np.ndarray

    def __post_init__(self):
        if not (0.0 < self.s0 < self.r0):
            raise ValueError(f"need 0 < s0 < r0, got s0={self.s0}, r0={self.r0}")
        self.eta_nodes = np.asarray(self.eta_nodes, dtype=float)
        self.f1_values = np.asarray(self.f1_values, dtype=float)
        self.u_nodes = np.asarray(self.u_nodes, dtype=float)
        self.f2_values = np.asarray(self.f2_values, dtype=float)
        self._f1_spline = CubicSpline(self.eta_nodes, self.f1_values)
        self._f2_spline = CubicSpline(self.u_nodes, self.f2_values)

    def f1(self, eta):
        # clip at the physical floor f = -1 (zero absolute temperature);
        # cubic interpolation may overshoot it by interpolation error
        return np.maximum(self._f1_spline(eta), -1.0)

    def f2_of_u(self, u):
        return np.maximum(self._f2_spline(u), -1.0)

    def f2(self, eta):
        eta = np.asarray(eta, dtype=float)
        with np.errstate(divide="ignore"):
            u = np.where(np.isinf(eta), 0.0, self.r0 / eta)
        return np.maximum(self._f2_spline(u), -1.0)

    @property
    def f2_far_field(self) -> float:
        return float(self.f2_values[0])

    @property
    def f2_at_front(self) -> float:
        return float(self.f2_values[-1])

    def in_admissible_set(self, tol: float = 0.0) -> bool:
        """Membership in the iteration set: f2 pinned at both ends."""
        return (abs(self.f2_at_front) <= tol
                and abs(self.f2_far_field + 1.0) <= tol)

    def check_range(self, f_max: float, margin: float = 0.1):
        if np.any(self.f1_values < -1.0 - margin) or np.any(self.f1_values > f_max + margin):
            raise DomainError("f1 outside [-1, f_max] beyond the allowed margin")
        if np.any(self.f2_values < -1.0 - margin) or np.any(self.f2_values > margin):
            raise DomainError("f2 outside [-1, 0] beyond the allowed margin")

    def with_values(self, f1_values, f2_values) -> "ProfilePair":
        return ProfilePair(self.s0, self.r0, self.eta_nodes, f1_values,
                           self.u_nodes, f2_values)

    def norm(self) -> float:
        return max(float(np.max(np.abs(self.f1_values))),
                   float(np.max(np.abs(self.f2_values))))

    def distance(self, other: "ProfilePair") -> float:
        """Product sup-norm of the difference, sampled on the grids."""
        return max(float(np.max(np.abs(self.f1_values - other.f1_values))),
                   float(np.max(np.abs(self.f2_values - other.f2_values))))


def default_initial_profiles(s0: float, r0: float, constants: DimensionlessConstants,
                             n1: int = 64, n2: int = 96) -> ProfilePair:
    """Initial iterate: linear liquid profile, power-law solid tail."""
    eta = chebyshev_nodes(s0, r0, n1)
    f1 = constants.B * (r0 - eta) / (r0 - s0)
    u = np.linspace(0.0, 1.0, n2)
    p = constants.mu + constants.nu - 1.0
    f2 = -(1.0 - u**p)
    f2[0], f2[-1] = -1.0, 0.0
    return ProfilePair(s0, r0, eta, f1, u, f2)


@dataclass(frozen=True)
class KernelSetup:
    """Everything a KernelContext needs besides the profile pair."""

    constants: DimensionlessConstants
    coeffs: DimensionlessCoefficients
    U_c: float
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    n1: int = 64
    n2: int = 96
    range_margin: float = 0.25
    f_max: float = math.inf


def make_setup(scenario: PhysicalScenario, quad: QuadratureConfig | None = None,
               n1: int = 64, n2: int = 96) -> KernelSetup:
    return KernelSetup(
        constants=derive_constants(scenario),
        coeffs=build_dimensionless_coefficients(scenario),
        U_c=scenario.U_c,
        quad=quad or QuadratureConfig(),
        n1=n1, n2=n2,
        f_max=(scenario.T_ion - scenario.T_m) / scenario.T_m,
    )


def _cumulative_left(g, nodes, cfg):
    """Running integral from nodes[0], refined per panel as needed."""
    lo, hi = nodes[:-1], nodes[1:]
    vals, errs = _panels_gk(g, lo, hi)
    budget = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(vals)) + cfg.abs_tol
    for i in np.nonzero(errs > budget)[0]:
        vals[i] = integrate_finite(g, lo[i], hi[i], cfg)
    out = np.empty(nodes.size)
    out[0] = 0.0
    np.cumsum(vals, out=out[1:])
    return out


def _cumulative_right(g, nodes, cfg):
    """Running integral from nodes[-1] back to each node (nonnegative for g>=0)."""
    lo, hi = nodes[:-1], nodes[1:]
    vals, errs = _panels_gk(g, lo, hi)
    budget = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(vals)) + cfg.abs_tol
    for i in np.nonzero(errs > budget)[0]:
        vals[i] = integrate_finite(g, lo[i], hi[i], cfg)
    out = np.empty(nodes.size)
    out[-1] = 0.0
    out[:-1] = np.cumsum(vals[::-1])[::-1]
    return out


class KernelContext:
    """Immutable per-profile kernel tables and their interpolants.

    Solid-phase Thomson tables (H2, G2) blow up when the attenuation E2
    decays to zero, which happens exactly when they are not needed
    (D2* = 0); they are built only when required or forced.
    """

    def __init__(self, setup: KernelSetup, profiles: ProfilePair,
                 force_all_tables: bool = False):
        self.setup = setup
        self.profiles = profiles
        c = setup.constants
        self.s0, self.r0 = profiles.s0, profiles.r0
        profiles.check_range(setup.f_max, setup.range_margin)

        nu, a = c.nu, c.a
        eta = profiles.eta_nodes
        u = profiles.u_nodes
        co = setup.coeffs
        cfg = setup.quad
        r0 = self.r0

        f1 = profiles.f1
        f2u = profiles.f2_of_u

        def k1(v):
            return co.K1(f1(v), v)

        def l1(v):
            return co.L1(f1(v), v)

        def n1(v):
            return co.N1(f1(v), v)

        # Phase-2 integrands are expressed in u; v = r0/u.
        def as_eta(uu):
            return r0 / uu

        def jac(uu):
            return r0 / uu**2

        def k2u(uu):
            v = as_eta(uu)
            return co.K2(f2u(uu), v)

        def l2u(uu):
            v = as_eta(uu)
            return co.L2(f2u(uu), v)

        def n2u(uu):
            v = as_eta(uu)
            return co.N2(f2u(uu), v)

        # --- F1 and (when the potential is live) F2, H -------------------
        self.F1_tab = _cumulative_left(lambda v: k1(v) / v**nu, eta, cfg)
        self._F1_spline = CubicSpline(eta, self.F1_tab)
        self.F1_r0 = float(self.F1_tab[-1])

        self.has_potential = setup.U_c != 0.0
        if self.has_potential:
            def f2_integrand(uu):
                return k2u(uu) / as_eta(uu)**nu * jac(uu)

            self._probe_tail(f2_integrand, cfg)
            self.F2_tab = _cumulative_right(f2_integrand, u, cfg)
            self._F2_spline = CubicSpline(u, self.F2_tab)
            self.F2_inf = float(self.F2_tab[0])
            self.H = self.F1_r0 + self.F2_inf
        else:
            self.F2_tab = None
            self.F2_inf = None
            self.H = math.inf

        # --- attenuation exponents and E factors --------------------------
        d1_over_H = c.D1 / self.H if c.D1 != 0.0 else 0.0
        d2_over_H = c.D2 / self.H if c.D2 != 0.0 else 0.0

        def expo1(v):
            core = 2.0 * a * v * n1(v) / l1(v)
            if d1_over_H:
                core = core + d1_over_H * k1(v) / (l1(v) * v**nu)
            return core

        self.expo1_tab = _cumulative_left(expo1, eta, cfg)
        self._expo1_spline = CubicSpline(eta, self.expo1_tab)
        self.E1_tab = np.exp(-self.expo1_tab)

        def expo2(uu):
            v = as_eta(uu)
            core = 2.0 * a * v * n2u(uu) / l2u(uu)
            if d2_over_H:
                core = core + d2_over_H * k2u(uu) / (l2u(uu) * v**nu)
            return core * jac(uu)

        # The exponent integrand may be non-integrable at u = 0 (non-decaying
        # drift), where the attenuation itself tends to 0 anyway.  The spline
        # lives on [u1, 1]; below u1 the exponent is completed with a local
        # Kronrod panel from u up to u1, which stays accurate whether the
        # limit is finite (decaying coefficients) or +inf (E2 -> 0 exactly).
        lo2, hi2 = u[:-1], u[1:]
        vals2, errs2 = _panels_gk(expo2, lo2, hi2)
        budget2 = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(vals2)) + cfg.abs_tol
        for i in np.nonzero(errs2 > budget2)[0]:
            if i == 0 and vals2[0] > 50.0:
                continue  # exp(-expo) below 2e-22 there; panel accuracy moot
            try:
                vals2[i] = integrate_finite(expo2, lo2[i], hi2[i], cfg)
            except ToleranceNotMet:
                if i != 0:
                    raise
        self.expo2_tab = np.empty(u.size)
        self.expo2_tab[-1] = 0.0
        self.expo2_tab[:-1] = np.cumsum(vals2[::-1])[::-1]
        self._u1 = u[1]
        self._expo2_integrand = expo2
        self._expo2_spline = CubicSpline(u[1:], self.expo2_tab[1:])
        with np.errstate(under="ignore", over="ignore"):
            self.E2_tab = np.exp(-self.expo2_tab)

        def e1(v):
            return np.exp(-self._expo1_spline(v))

        def e2(uu):
            return self._e2_of_u(uu)

        self._e1, self._e2u = e1, e2

        # --- Phi tables ----------------------------------------------------
        self.Phi1_tab = _cumulative_left(lambda v: e1(v) / (l1(v) * v**nu), eta, cfg)
        self._Phi1_spline = CubicSpline(eta, self.Phi1_tab)
        self.Phi1_r0 = float(self.Phi1_tab[-1])

        self.Phi2_tab = _cumulative_right(
            lambda uu: e2(uu) / (l2u(uu) * as_eta(uu)**nu) * jac(uu), u, cfg)
        self._Phi2_spline = CubicSpline(u, self.Phi2_tab)
        self.Phi2_inf = float(self.Phi2_tab[0])

        # --- Thomson source tables (liquid side) ---------------------------
        self.has_liquid_thomson = force_all_tables or c.D1_star != 0.0
        if self.has_liquid_thomson:
            self.H1_tab = _cumulative_left(lambda v: k1(v) / (v**nu * e1(v)), eta, cfg)
            self._H1_spline = CubicSpline(eta, self.H1_tab)
            self.G1_tab = _cumulative_left(
                lambda v: e1(v) * self._H1_spline(v) / (l1(v) * v**nu), eta, cfg)
            self._G1_spline = CubicSpline(eta, self.G1_tab)
            self.G1_r0 = float(self.G1_tab[-1])
            self.H1_r0 = float(self.H1_tab[-1])
        else:
            self.H1_tab = self.G1_tab = None
            self.G1_r0 = self.H1_r0 = 0.0

        # --- Thomson source tables (solid side) ----------------------------
        # H2 itself grows without bound when the attenuation decays (its
        # integrand carries 1/E2), so the stable carrier is the attenuated
        # source S = E2 * H2, computed with every exponent shifted to be
        # nonpositive; G2 then integrates S/(L2 v^nu), which is bounded.
        self.has_solid_thomson = force_all_tables or c.D2_star != 0.0
        if self.has_solid_thomson:
            def h2_base(uu):
                return k2u(uu) / as_eta(uu)**nu * jac(uu)

            w = self.expo2_tab
            S = np.zeros(u.size)
            with np.errstate(under="ignore", over="ignore"):
                for i in range(u.size - 2, -1, -1):
                    wi = w[i]

                    def cell(x, wi=wi):
                        return h2_base(x) * np.exp(-(wi - self._w_of_u(x)))

                    piece = integrate_finite(cell, u[i], u[i + 1], cfg)
                    S[i] = S[i + 1] * math.exp(-(wi - w[i + 1])) + piece
            self.S2_tab = S
            self._S2_spline = CubicSpline(u, S)

            def g2_integrand(uu):
                return (self._S2_spline(uu)
                        / (l2u(uu) * as_eta(uu)**nu) * jac(uu))

            try:
                self.G2_tab = _cumulative_right(g2_integrand, u, cfg)
            except ToleranceNotMet as exc:
                raise DecayViolation(
                    "solid Thomson source integral does not converge at the "
                    "far field (attenuation decays too slowly)") from exc
            self._G2_spline = CubicSpline(u, self.G2_tab)
            self.G2_inf = float(self.G2_tab[0])
            with np.errstate(over="ignore", under="ignore", invalid="ignore"):
                self.H2_tab = S * np.exp(w)
            # 0 * exp(overflow): the source vanishes only in the far-field
            # limit where H2 itself diverges
            self.H2_tab[np.isnan(self.H2_tab)] = math.inf
            self.H2_inf = float(self.H2_tab[0])
        else:
            self.S2_tab = self.H2_tab = self.G2_tab = None
            self.H2_inf = self.G2_inf = 0.0

    def _w_of_u(self, uu):
        """Attenuation exponent (integral of the drift from u up to the
        front) as a function of u; completes the spline below its domain
        with a local Kronrod panel."""
        uu = np.asarray(uu, dtype=float)
        scalar = uu.ndim == 0
        uu = np.atleast_1d(uu)
        out = np.empty_like(uu)
        hi = uu >= self._u1
        if np.any(hi):
            out[hi] = self._expo2_spline(uu[hi])
        lo = ~hi
        if np.any(lo):
            us = np.maximum(uu[lo], 1e-300)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                tail, _ = _panels_gk(self._expo2_integrand, us,
                                     np.full_like(us, self._u1))
                out[lo] = self.expo2_tab[1] + tail
        return out[0] if scalar else out

    def _e2_of_u(self, uu):
        """Attenuation E2 as a function of u."""
        with np.errstate(under="ignore"):
            return np.exp(-self._w_of_u(uu))

    @staticmethod
    def _probe_tail(g_u, cfg):
        """Reject solid-phase integrands that do not vanish at the far field."""
        probes = np.array([1e-3, 1e-5, 1e-7, 1e-9])
        with np.errstate(over="ignore", invalid="ignore"):
            pv = np.abs(np.asarray(g_u(probes), dtype=float))
        if not np.all(np.isfinite(pv)):
            raise DecayViolation("solid-phase integrand not finite at far field")
        if pv[-1] > 10.0 * max(pv[0], cfg.abs_tol) and pv[-1] > pv[0]:
            raise DecayViolation("solid-phase integrand grows toward the far field")

    # --- domain helpers ----------------------------------------------------

    def _check_liquid(self, eta):
        lo = self.s0 * (1.0 - _ENDPOINT_SLACK)
        hi = self.r0 * (1.0 + _ENDPOINT_SLACK)
        if np.any(np.asarray(eta) < lo) or np.any(np.asarray(eta) > hi):
            raise DomainError(f"eta outside liquid interval [{self.s0}, {self.r0}]")

    def _u_of(self, eta):
        eta = np.asarray(eta, dtype=float)
        if np.any(eta < self.r0 * (1.0 - _ENDPOINT_SLACK)):
            raise DomainError(f"eta below the solid interval [{self.r0}, inf)")
        with np.errstate(divide="ignore"):
            return np.where(np.isinf(eta), 0.0, self.r0 / eta)

    def _need_solid_thomson(self):
        if not self.has_solid_thomson:
            raise DecayViolation(
                "solid-phase Thomson tables were not built for this context "
                "(D2* = 0 and force_all_tables not set)")

    # --- kernel evaluations --------------------------------------------------

    def F1(self, eta):
        self._check_liquid(eta)
        return self._F1_spline(eta)

    def F2(self, eta):
        if not self.has_potential:
            raise DecayViolation("F2 requires a live potential (U_c != 0)")
        return self._F2_spline(self._u_of(eta))

    def E1(self, eta):
        self._check_liquid(eta)
        return np.exp(-self._expo1_spline(eta))

    def E2(self, eta):
        return self._e2_of_u(self._u_of(eta))

    def H1(self, eta):
        self._check_liquid(eta)
        if self.H1_tab is None:
            raise DomainError("liquid Thomson tables not built (D1* = 0)")
        return self._H1_spline(eta)

    def H2(self, eta):
        self._need_solid_thomson()
        uu = self._u_of(eta)
        with np.errstate(over="ignore", under="ignore"):
            return self._S2_spline(uu) * np.exp(self._w_of_u(uu))

    def Phi1(self, eta):
        self._check_liquid(eta)
        return self._Phi1_spline(eta)

    def Phi2(self, eta):
        return self._Phi2_spline(self._u_of(eta))

    def G1(self, eta):
        self._check_liquid(eta)
        if self.G1_tab is None:
            raise DomainError("liquid Thomson tables not built (D1* = 0)")
        return self._G1_spline(eta)

    def G2(self, eta):
        self._need_solid_thomson()
        return self._G2_spline(self._u_of(eta))

    def phi1(self, eta):
        """Liquid-zone electrical potential."""
        if not self.has_potential:
            return np.zeros_like(np.asarray(eta, dtype=float))
        return self.setup.U_c * self.F1(eta) / (2.0 * self.H)

    def phi2(self, eta):
        """Solid-zone electrical potential; exact U_c/2 at the far field."""
        eta_arr = np.asarray(eta, dtype=float)
        if not self.has_potential:
            return np.zeros_like(eta_arr)
        out = self.setup.U_c * (self.F1_r0 + self.F2(eta_arr)) / (2.0 * self.H)
        return np.where(np.isinf(eta_arr), 0.5 * self.setup.U_c, out)


# Thin functional façade mirroring the operation names of the library surface.

def eval_F1(eta, ctx: KernelContext):
    return ctx.F1(eta)


def eval_F2(eta, ctx: KernelContext):
    return ctx.F2(eta)


def eval_H(ctx: KernelContext):
    if not ctx.has_potential:
        raise DecayViolation("H requires a live potential (U_c != 0)")
    return ctx.H


def eval_E1(eta, ctx: KernelContext):
    return ctx.E1(eta)


def eval_E2(eta, ctx: KernelContext):
    return ctx.E2(eta)


def eval_H1(eta, ctx: KernelContext):
    return ctx.H1(eta)


def eval_H2(eta, ctx: KernelContext):
    return ctx.H2(eta)


def eval_Phi1(eta, ctx: KernelContext):
    return ctx.Phi1(eta)


def eval_Phi2(eta, ctx: KernelContext):
    return ctx.Phi2(eta)


def eval_G1(eta, ctx: KernelContext):
    return ctx.G1(eta)


def eval_G2(eta, ctx: KernelContext):
    return ctx.G2(eta)


def eval_potentials(eta, ctx: KernelContext):
    """Electric potential at eta, dispatched to the owning phase."""
    eta_arr = np.asarray(eta, dtype=float)
    if np.all(eta_arr <= ctx.r0 * (1.0 + _ENDPOINT_SLACK)):
        return ctx.phi1(eta_arr)
    return ctx.phi2(eta_arr)
