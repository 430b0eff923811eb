"""Contraction certificates and existence-region arithmetic.

Under power-law envelope assumptions on the dimensionless coefficients --

    (A1)/(A2)  L_im eta^mu <= L(f_i)(eta) <= L_iM eta^mu,
               N_im eta^-mu <= N(f_i)(eta) <= N_iM eta^-mu,
               K_im eta^-mu <= K(f_i)(eta) <= K_iM eta^-mu,
    (A3)/(A4)  Lipschitz constants L~_i, N~_i, K~_i (K weighted by eta^-mu),
    (A5)       mu > 2,

every kernel admits closed-form upper/lower/Lipschitz bounds, which
combine into a computable contraction constant eps(r0, s0) for the
operator pair (V1, V2).  This module evaluates all of those bounds, the
thresholds s1, r1, r2, s2, r_B that carve out the guaranteed-contraction
region Sigma = {s0 > s1, r0 > rbar0(s0)}, and an empirical checker for the
envelope assumptions themselves.

All bound formulas involve r0 only through negative powers, so they are
evaluated at r0 = +inf directly with IEEE infinity arithmetic; this yields
the exact limit values j1(s0), j2(s0) without numerical limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RootNotBracketed
from .scenario import DimensionlessConstants

_ROOT_REL_TOL = 1e-10
_ROOT_GRID_POINTS = 256


@dataclass(frozen=True)
class AssumptionBounds:
    """Envelope and Lipschitz constants of the coefficient assumptions."""

    mu: float
    L1m: float
    L1M: float
    N1m: float
    N1M: float
    K1m: float
    K1M: float
    L2m: float
    L2M: float
    N2m: float
    N2M: float
    K2m: float
    K2M: float
    L1_tilde: float = 0.0
    N1_tilde: float = 0.0
    K1_tilde: float = 0.0
    L2_tilde: float = 0.0
    N2_tilde: float = 0.0
    K2_tilde: float = 0.0

    def __post_init__(self):
        if not self.mu > 2.0:
            raise ValueError(f"mu must exceed 2, got {self.mu}")
        for lo, hi, name in ((self.L1m, self.L1M, "L1"), (self.N1m, self.N1M, "N1"),
                             (self.K1m, self.K1M, "K1"), (self.L2m, self.L2M, "L2"),
                             (self.N2m, self.N2M, "N2"), (self.K2m, self.K2M, "K2")):
            if not (0.0 < lo <= hi):
                raise ValueError(f"{name} bounds must satisfy 0 < lower <= upper")
        for t, name in ((self.L1_tilde, "L1_tilde"), (self.N1_tilde, "N1_tilde"),
                        (self.K1_tilde, "K1_tilde"), (self.L2_tilde, "L2_tilde"),
                        (self.N2_tilde, "N2_tilde"), (self.K2_tilde, "K2_tilde")):
            if t < 0.0:
                raise ValueError(f"{name} must be nonnegative")


# --------------------------------------------------------------------------
# closed-form bound slices
# --------------------------------------------------------------------------

def _ratio(num: float, den: float) -> float:
    """num / den with the 0/0 limit resolved to 0 (vanishing numerators
    always win in these bound formulas) and x/0 resolved to +inf."""
    if num == 0.0:
        return 0.0
    if den == 0.0:
        return math.inf
    return num / den


@dataclass
class HBounds:
    H_inf: float
    H_sup: float
    H_tilde: float


def compute_H_bounds(s0: float, r0: float, bounds: AssumptionBounds,
                     nu: float) -> HBounds:
    """Lower/upper/Lipschitz bounds of the total path integral H."""
    p = bounds.mu + nu - 1.0
    return HBounds(
        H_inf=bounds.K1m / p * (s0**-p - r0**-p),
        H_sup=(bounds.K1M * s0**-p + bounds.K2M * r0**-p) / p,
        H_tilde=(bounds.K1_tilde * s0**-p + bounds.K2_tilde * r0**-p) / p,
    )


@dataclass
class Phase1Bounds:
    s0: float
    r0: float
    p: float
    E1_inf: float
    E1_tilde: float
    Phi1_tilde: float
    H1_sup: float
    H1_tilde: float
    G1_sup: float
    G1_tilde: float
    K1m: float
    L1M: float

    def H1_inf(self, eta):
        return self.K1m / self.p * (self.s0**-self.p - np.asarray(eta)**-self.p)

    def G1_inf(self, eta):
        d = self.s0**-self.p - np.asarray(eta)**-self.p
        return self.K1m * self.E1_inf / (2.0 * self.L1M * self.p**2) * d**2


def compute_phase1_bounds(s0: float, r0: float, bounds: AssumptionBounds,
                          constants: DimensionlessConstants) -> Phase1Bounds:
    b = bounds
    mu, nu, a = b.mu, constants.nu, constants.a
    p = mu + nu - 1.0
    hb = compute_H_bounds(s0, r0, b, nu)

    e1_exponent = (a * b.N1M / (b.L1m * (mu - 1.0)) * s0**(2.0 - 2.0 * mu)
                   + constants.D1 * b.K1M / (b.L1m * (2.0 * mu + nu - 1.0))
                   * _ratio(s0**(1.0 - 2.0 * mu - nu), hb.H_inf))
    E1_inf = math.exp(-e1_exponent)

    E1_tilde = 2.0 * a * (b.N1_tilde / (b.L1m * (mu - 2.0)) * s0**(2.0 - mu)
                          + b.N1M * b.L1_tilde / (b.L1m**2 * (3.0 * mu - 2.0))
                          * s0**(2.0 - 3.0 * mu))
    E1_tilde += constants.D1 * (
        b.K1_tilde / (b.L1m * (2.0 * mu + nu - 1.0))
        * _ratio(s0**(1.0 - 2.0 * mu - nu), hb.H_inf)
        + b.K1M / b.L1m * (
            _ratio(hb.H_tilde * s0**(1.0 - 2.0 * mu - nu), hb.H_inf**2)
            / (2.0 * mu + nu - 1.0)
            + b.L1_tilde / (b.L1m * (3.0 * mu + nu - 1.0))
            * _ratio(s0**(1.0 - 3.0 * mu - nu), hb.H_inf)))

    Phi1_tilde = (E1_tilde / (b.L1m * p) * s0**-p
                  + b.L1_tilde / (b.L1m**2 * (2.0 * mu + nu - 1.0))
                  * s0**(1.0 - 2.0 * mu - nu))

    # E1_inf can underflow to 0 at small s0; the bounds degrade to +inf.
    inv_E1 = math.inf if E1_inf == 0.0 else 1.0 / E1_inf
    ratio1 = 0.0 if E1_tilde == 0.0 else E1_tilde * inv_E1
    H1_sup = b.K1M * inv_E1 / p * s0**-p
    H1_tilde = (b.K1_tilde + b.K1M * ratio1) * inv_E1 / p * s0**-p

    G1_sup = H1_sup / (b.L1m * p) * s0**-p
    G1_tilde = H1_sup * Phi1_tilde + H1_tilde / (b.L1m * p) * s0**-p

    return Phase1Bounds(s0=s0, r0=r0, p=p, E1_inf=E1_inf, E1_tilde=E1_tilde,
                        Phi1_tilde=Phi1_tilde, H1_sup=H1_sup, H1_tilde=H1_tilde,
                        G1_sup=G1_sup, G1_tilde=G1_tilde, K1m=b.K1m, L1M=b.L1M)


@dataclass
class Phase2Bounds:
    s0: float
    r0: float
    p: float
    E2_inf: float
    E2_tilde: float
    Phi2_sup: float
    Phi2_tilde: float
    H2_sup: float
    H2_tilde: float
    G2_sup: float
    G2_tilde: float
    K2m: float
    L2M: float

    def Phi2_inf(self, eta):
        d = self.r0**-self.p - np.asarray(eta)**-self.p
        return self.E2_inf / (self.L2M * self.p) * d

    @property
    def Phi2_inf_far(self) -> float:
        return self.E2_inf / (self.L2M * self.p) * self.r0**-self.p

    def H2_inf(self, eta):
        return self.K2m / self.p * (self.r0**-self.p - np.asarray(eta)**-self.p)

    def G2_inf(self, eta):
        d = self.r0**-self.p - np.asarray(eta)**-self.p
        return self.K2m * self.E2_inf / (2.0 * self.L2M * self.p**2) * d**2


def compute_phase2_bounds(s0: float, r0: float, bounds: AssumptionBounds,
                          constants: DimensionlessConstants) -> Phase2Bounds:
    b = bounds
    mu, nu, a = b.mu, constants.nu, constants.a
    p = mu + nu - 1.0
    hb = compute_H_bounds(s0, r0, b, nu)

    e2_exponent = (a * b.N2M / (b.L2m * (mu - 1.0)) * r0**(2.0 - 2.0 * mu)
                   + constants.D2 * b.K2M / (b.L2m * (2.0 * mu + nu - 1.0))
                   * _ratio(r0**(1.0 - 2.0 * mu - nu), hb.H_inf))
    E2_inf = math.exp(-e2_exponent)

    E2_tilde = 2.0 * a * (b.N2_tilde / (b.L2m * (mu - 2.0)) * r0**(2.0 - mu)
                          + b.N2M * b.L2_tilde / (b.L2m**2 * (3.0 * mu - 2.0))
                          * r0**(2.0 - 3.0 * mu))
    E2_tilde += constants.D2 * (
        b.K2_tilde / (b.L2m * (2.0 * mu + nu - 1.0))
        * _ratio(r0**(1.0 - 2.0 * mu - nu), hb.H_inf)
        + b.K2M / b.L2m * (
            _ratio(hb.H_tilde * r0**(1.0 - 2.0 * mu - nu), hb.H_inf**2)
            / (2.0 * mu + nu - 1.0)
            + b.L2_tilde / (b.L2m * (3.0 * mu + nu - 1.0))
            * _ratio(r0**(1.0 - 3.0 * mu - nu), hb.H_inf)))

    Phi2_sup = 1.0 / (b.L2m * p) * r0**-p
    Phi2_tilde = (E2_tilde / (b.L2m * p) * r0**-p
                  + b.L2_tilde / (b.L2m**2 * (2.0 * mu + nu - 1.0))
                  * r0**(1.0 - 2.0 * mu - nu))

    # E2_inf can underflow to 0 at small r0; the bounds degrade to +inf.
    inv_E2 = math.inf if E2_inf == 0.0 else 1.0 / E2_inf
    ratio2 = 0.0 if E2_tilde == 0.0 else E2_tilde * inv_E2
    H2_sup = b.K2M * inv_E2 / p * r0**-p
    H2_tilde = (b.K2_tilde + b.K2M * ratio2) * inv_E2 / p * r0**-p

    G2_sup = H2_sup / (b.L2m * p) * r0**-p
    G2_tilde = H2_sup * Phi2_tilde + H2_tilde / (b.L2m * p) * r0**-p

    return Phase2Bounds(s0=s0, r0=r0, p=p, E2_inf=E2_inf, E2_tilde=E2_tilde,
                        Phi2_sup=Phi2_sup, Phi2_tilde=Phi2_tilde, H2_sup=H2_sup,
                        H2_tilde=H2_tilde, G2_sup=G2_sup, G2_tilde=G2_tilde,
                        K2m=b.K2m, L2M=b.L2M)


# --------------------------------------------------------------------------
# contraction constants
# --------------------------------------------------------------------------

@dataclass
class EpsilonBreakdown:
    eps1: float
    eps21: float
    eps22: float
    eps23: float
    eps2: float
    eps: float


def _eps1_from_slices(s0, hb: HBounds, p1: Phase1Bounds,
                      constants: DimensionlessConstants) -> float:
    flux = 2.0 * s0**constants.nu * constants.Q * math.exp(-s0**2) * p1.Phi1_tilde
    thomson = 2.0 * constants.D1_star * (
        p1.G1_sup * 2.0 * hb.H_sup * hb.H_tilde / hb.H_inf**4
        + p1.G1_tilde / hb.H_inf**2)
    return flux + thomson


def compute_epsilons(s0: float, r0: float, bounds: AssumptionBounds,
                     constants: DimensionlessConstants) -> EpsilonBreakdown:
    """Contraction constant eps(r0, s0) = max(eps1, eps2) with components."""
    hb = compute_H_bounds(s0, r0, bounds, constants.nu)
    p1 = compute_phase1_bounds(s0, r0, bounds, constants)
    p2 = compute_phase2_bounds(s0, r0, bounds, constants)

    eps1 = _eps1_from_slices(s0, hb, p1, constants)
    # Phi2_inf_far can underflow to 0 near r0 = s0; a zero Lipschitz
    # numerator still means zero sensitivity, otherwise the bound is +inf.
    inv_phi2 = math.inf if p2.Phi2_inf_far == 0.0 else 1.0 / p2.Phi2_inf_far

    def times(x, y):
        return 0.0 if x == 0.0 else x * y

    eps21 = 2.0 * times(p2.Phi2_tilde, inv_phi2)
    eps22 = (p2.G2_tilde / hb.H_inf**2
             + 2.0 * p2.G2_sup * hb.H_sup * hb.H_tilde / hb.H_inf**4)
    eps23 = (times(eps22, p2.Phi2_sup * inv_phi2)
             + times(eps21, p2.G2_sup / hb.H_inf**2))
    eps2 = eps21 + eps22 + eps23
    return EpsilonBreakdown(eps1=eps1, eps21=eps21, eps22=eps22, eps23=eps23,
                            eps2=eps2, eps=max(eps1, eps2))


def j1(s0: float, bounds: AssumptionBounds,
       constants: DimensionlessConstants) -> float:
    """Limit of eps1(r0, s0) as r0 -> +inf (exact, via inf arithmetic)."""
    hb = compute_H_bounds(s0, math.inf, bounds, constants.nu)
    p1 = compute_phase1_bounds(s0, math.inf, bounds, constants)
    return _eps1_from_slices(s0, hb, p1, constants)


def j2(s0: float, bounds: AssumptionBounds,
       constants: DimensionlessConstants) -> float:
    """Limit of Z_inf(r0, s0) as r0 -> +inf; increasing in s0."""
    p1 = compute_phase1_bounds(s0, math.inf, bounds, constants)
    return (constants.D1_star * p1.E1_inf * bounds.K1m
            / (2.0 * bounds.L1M * bounds.K1M**2))


def Z_inf(r0: float, s0: float, bounds: AssumptionBounds,
          constants: DimensionlessConstants) -> float:
    """Lower bound on the Thomson bracket Z = D1* G1 / H^2 at eta = r0."""
    p = bounds.mu + constants.nu - 1.0
    p1 = compute_phase1_bounds(s0, r0, bounds, constants)
    ratio = (r0**p - s0**p) / (bounds.K1M * r0**p + bounds.K2M * s0**p)
    return (constants.D1_star * p1.E1_inf * bounds.K1m
            / (2.0 * bounds.L1M) * ratio**2)


# --------------------------------------------------------------------------
# root searches on the threshold curves
# --------------------------------------------------------------------------

def _log_grid_root(fn, lo: float, hi: float, what: str,
                   n: int = _ROOT_GRID_POINTS) -> float:
    """Root of fn on [lo, hi] via log-grid bracketing + bisection.

    fn must be finite on the grid except possibly at the ends; the first
    sign change encountered (scanning upward) is refined.
    """
    xs = np.geomspace(lo, hi, n)
    prev_x, prev_v = None, None
    for x in xs:
        v = fn(float(x))
        if not math.isfinite(v):
            prev_x, prev_v = None, None
            continue
        if v == 0.0:
            return float(x)
        if prev_v is not None and prev_v * v < 0.0:
            a, fa, bx = prev_x, prev_v, float(x)
            while bx - a > _ROOT_REL_TOL * bx:
                mid = 0.5 * (a + bx)
                fm = fn(mid)
                if fm == 0.0:
                    return mid
                if fa * fm < 0.0:
                    bx = mid
                else:
                    a, fa = mid, fm
            return 0.5 * (a + bx)
        prev_x, prev_v = float(x), v
    raise RootNotBracketed(f"no sign change for {what} on [{lo:.3g}, {hi:.3g}]")


@dataclass(frozen=True)
class HypEps1Report:
    ok: bool
    lhs: float
    s1: float
    note: str = ""


def check_hyp_eps1(bounds: AssumptionBounds,
                   constants: DimensionlessConstants) -> HypEps1Report:
    """Smallness condition on the liquid Thomson Lipschitz load, and s1.

    The left side equals j1(+inf); when it is below 1 the decreasing curve
    j1 crosses 1 at a unique s1, found on a log grid.
    """
    b = bounds
    lhs = (2.0 * constants.D1_star * b.K1_tilde / (b.L1m * b.K1m**2)
           * (2.0 * b.K1M / b.K1m**2 + 1.0))
    ok = lhs < 1.0
    if not ok:
        return HypEps1Report(ok=False, lhs=lhs, s1=math.nan,
                             note="j1(+inf) >= 1: no contraction threshold s1")
    try:
        s1 = _log_grid_root(lambda s: j1(s, bounds, constants) - 1.0,
                            1e-6, 1e6, "j1(s0) = 1", n=1024)
        note = ""
    except RootNotBracketed as exc:
        if j1(1e-6, bounds, constants) < 1.0:
            s1, note = 0.0, "j1 < 1 on the whole search range; s1 degenerate at 0"
        else:
            s1, note = math.nan, str(exc)
    return HypEps1Report(ok=True, lhs=lhs, s1=s1, note=note)


def _threshold_radius(s0: float, eps_fn, what: str) -> tuple[float, str]:
    """Radius where a decreasing eps curve crosses 1; degenerate cases noted."""
    lo = s0 * (1.0 + 1e-6)
    hi = s0 * 1e6
    v_lo = eps_fn(lo)
    if math.isfinite(v_lo) and v_lo < 1.0:
        return lo, f"{what} < 1 already at r0 = s0+; threshold degenerate"
    root = _log_grid_root(lambda r: eps_fn(r) - 1.0, lo, hi, f"{what} = 1")
    return root, ""


@dataclass
class ExistenceRegion:
    s0: float
    s1: float
    r1: float
    r2: float
    rbar0: float
    r_B: float
    s2: float
    W_inf: float
    W_sup: float
    hyp_eps1_ok: bool
    hyp_Zinfty_ok: bool
    hyp_ec44_ok: bool
    hyp_ec44_branch: str = ""
    notes: dict = field(default_factory=dict)


def _rbar0(s0: float, bounds: AssumptionBounds,
           constants: DimensionlessConstants, notes: dict) -> tuple[float, float, float]:
    r1, n1 = _threshold_radius(
        s0, lambda r: compute_epsilons(s0, r, bounds, constants).eps1, "eps1")
    r2, n2 = _threshold_radius(
        s0, lambda r: compute_epsilons(s0, r, bounds, constants).eps2, "eps2")
    if n1:
        notes["r1"] = n1
    if n2:
        notes["r2"] = n2
    return r1, r2, max(r1, r2)


def _melting_flux_bounds(s0: float, bounds: AssumptionBounds,
                         constants: DimensionlessConstants,
                         notes: dict) -> tuple[float, float]:
    """Closed-form envelope [W_inf, W_sup] of the melting-front flux at s0.

    The exact inner radius r0*(s0) is unknown at certificate time; it is
    replaced by the geometric mean of its guaranteed interval
    (rbar0(s0), r_B(s0)).
    """
    c = constants
    _, _, rbar = _rbar0(s0, bounds, c, notes)
    rB = _log_grid_root(lambda r: Z_inf(r, s0, bounds, c) - c.B,
                        rbar, s0 * 1e6, "Z_inf = B") if c.B > 0 else rbar
    rstar = math.sqrt(rbar * rB)
    hb = compute_H_bounds(s0, rstar, bounds, c.nu)
    p1 = compute_phase1_bounds(s0, rstar, bounds, c)
    p2 = compute_phase2_bounds(s0, rstar, bounds, c)
    flux = c.Q * math.exp(-s0**2) * s0**c.nu

    w_inf = (p1.E1_inf / rB**(c.nu + 1.0)
             * (flux + c.D1_star / hb.H_sup**2 * float(p1.H1_inf(rstar)))
             - 1.0 / (rbar**(c.nu + 1.0) * p2.Phi2_inf_far)
             + (c.D2_star / (rB**(c.nu + 1.0) * p2.Phi2_sup * hb.H_sup**2)
                * float(p2.G2_inf(math.inf))))
    w_sup = (1.0 / rbar**(c.nu + 1.0)
             * (flux + c.D1_star / hb.H_inf**2 * p1.H1_sup
                + c.D2_star / (p2.Phi2_inf_far * hb.H_inf**2) * p2.G2_sup))
    return w_inf, w_sup


def existence_region(s0: float, bounds: AssumptionBounds,
                     constants: DimensionlessConstants) -> ExistenceRegion:
    """All threshold quantities of the guaranteed-existence construction."""
    c = constants
    notes: dict = {}
    hyp1 = check_hyp_eps1(bounds, c)
    if hyp1.note:
        notes["s1"] = hyp1.note

    try:
        r1, r2, rbar = _rbar0(s0, bounds, c, notes)
    except RootNotBracketed as exc:
        r1 = r2 = rbar = math.nan
        notes["rbar0"] = f"no contraction radius at s0={s0:.6g}: {exc}"

    hyp_Z = j2(math.inf, bounds, c) > c.B

    if not math.isfinite(rbar):
        r_B = math.nan
    elif c.B > 0.0:
        try:
            r_B = _log_grid_root(lambda r: Z_inf(r, s0, bounds, c) - c.B,
                                 rbar, s0 * 1e6, "Z_inf = B")
        except RootNotBracketed as exc:
            r_B = math.nan
            notes["r_B"] = str(exc)
    else:
        r_B = rbar
        notes["r_B"] = "B = 0: melting-bracket upper radius degenerates to rbar0"

    s1 = hyp1.s1 if hyp1.ok else math.nan
    if hyp_Z and math.isfinite(s1):
        if j2(s1, bounds, c) >= c.B:
            s2 = s1
        else:
            try:
                s2 = _log_grid_root(lambda s: j2(s, bounds, c) - c.B,
                                    max(s1, 1e-6), 1e6, "j2(s0) = B")
            except RootNotBracketed as exc:
                s2 = math.nan
                notes["s2"] = str(exc)
    else:
        s2 = math.nan
        if not hyp_Z:
            notes["s2"] = "far-field Thomson bracket bound does not exceed B"

    try:
        w_inf, w_sup = _melting_flux_bounds(s0, bounds, c, notes)
    except (RootNotBracketed, OverflowError) as exc:
        w_inf = w_sup = math.nan
        notes["W"] = str(exc)

    hyp_ec44, branch = False, ""
    if math.isfinite(s2):
        try:
            wi_s2, ws_s2 = _melting_flux_bounds(s2 * (1.0 + 1e-9), bounds, c, notes)
            s_far = max(s2, 1.0) * 1e3
            wi_far, ws_far = _melting_flux_bounds(s_far, bounds, c, notes)
            if wi_s2 > c.M and ws_far < c.M:
                hyp_ec44, branch = True, "flux starts above M and ends below"
            elif ws_s2 < c.M and wi_far > c.M:
                hyp_ec44, branch = True, "flux starts below M and ends above"
        except (RootNotBracketed, OverflowError) as exc:
            notes["hyp_ec44"] = str(exc)

    return ExistenceRegion(s0=s0, s1=s1, r1=r1, r2=r2, rbar0=rbar, r_B=r_B,
                           s2=s2, W_inf=w_inf, W_sup=w_sup,
                           hyp_eps1_ok=hyp1.ok, hyp_Zinfty_ok=hyp_Z,
                           hyp_ec44_ok=hyp_ec44, hyp_ec44_branch=branch,
                           notes=notes)


def inner_root_interval(s0: float, constants: DimensionlessConstants,
                        bounds: AssumptionBounds) -> tuple[float, float]:
    """Guaranteed bracket (rbar0(s0), r_B(s0)) for the melting radius."""
    region = existence_region(s0, bounds, constants)
    if not (math.isfinite(region.rbar0) and math.isfinite(region.r_B)):
        raise RootNotBracketed(
            f"certificate bracket unavailable at s0={s0}: {region.notes}")
    return region.rbar0, region.r_B


def sigma_membership(s0: float, r0: float, bounds: AssumptionBounds,
                     constants: DimensionlessConstants) -> bool:
    """True iff (r0, s0) lies in the guaranteed-contraction region."""
    hyp1 = check_hyp_eps1(bounds, constants)
    if not hyp1.ok or not math.isfinite(hyp1.s1) or s0 <= hyp1.s1:
        return False
    notes: dict = {}
    try:
        _, _, rbar = _rbar0(s0, bounds, constants, notes)
    except RootNotBracketed:
        return False
    if r0 <= rbar:
        return False
    eps = compute_epsilons(s0, r0, bounds, constants).eps
    assert eps < 1.0, f"Sigma membership with eps={eps} >= 1"
    return True


# --------------------------------------------------------------------------
# full certificate + empirical assumption verification
# --------------------------------------------------------------------------

@dataclass
class Certificate:
    s0: float
    r0: float
    H_inf: float
    H_sup: float
    H_tilde: float
    E1_inf: float
    E1_tilde: float
    Phi1_tilde: float
    H1_sup: float
    H1_tilde: float
    G1_sup: float
    G1_tilde: float
    E2_inf: float
    E2_tilde: float
    Phi2_inf_far: float
    Phi2_sup: float
    Phi2_tilde: float
    H2_sup: float
    H2_tilde: float
    G2_sup: float
    G2_tilde: float
    eps1: float
    eps21: float
    eps22: float
    eps23: float
    eps2: float
    eps: float
    j1: float
    s1: float
    j2: float
    s2: float
    Z_inf_at_r0: float
    r1: float
    r2: float
    rbar0: float
    r_B: float
    W_inf: float
    W_sup: float
    in_Sigma: bool
    hyp_eps1_ok: bool
    hyp_Zinfty_ok: bool
    hyp_ec44_ok: bool
    notes: dict = field(default_factory=dict)


def build_certificate(s0: float, r0: float, bounds: AssumptionBounds,
                      constants: DimensionlessConstants) -> Certificate:
    hb = compute_H_bounds(s0, r0, bounds, constants.nu)
    p1 = compute_phase1_bounds(s0, r0, bounds, constants)
    p2 = compute_phase2_bounds(s0, r0, bounds, constants)
    eb = compute_epsilons(s0, r0, bounds, constants)
    region = existence_region(s0, bounds, constants)
    return Certificate(
        s0=s0, r0=r0,
        H_inf=hb.H_inf, H_sup=hb.H_sup, H_tilde=hb.H_tilde,
        E1_inf=p1.E1_inf, E1_tilde=p1.E1_tilde, Phi1_tilde=p1.Phi1_tilde,
        H1_sup=p1.H1_sup, H1_tilde=p1.H1_tilde,
        G1_sup=p1.G1_sup, G1_tilde=p1.G1_tilde,
        E2_inf=p2.E2_inf, E2_tilde=p2.E2_tilde,
        Phi2_inf_far=p2.Phi2_inf_far, Phi2_sup=p2.Phi2_sup,
        Phi2_tilde=p2.Phi2_tilde, H2_sup=p2.H2_sup, H2_tilde=p2.H2_tilde,
        G2_sup=p2.G2_sup, G2_tilde=p2.G2_tilde,
        eps1=eb.eps1, eps21=eb.eps21, eps22=eb.eps22, eps23=eb.eps23,
        eps2=eb.eps2, eps=eb.eps,
        j1=j1(s0, bounds, constants), s1=region.s1,
        j2=j2(s0, bounds, constants), s2=region.s2,
        Z_inf_at_r0=Z_inf(r0, s0, bounds, constants),
        r1=region.r1, r2=region.r2, rbar0=region.rbar0, r_B=region.r_B,
        W_inf=region.W_inf, W_sup=region.W_sup,
        in_Sigma=(region.hyp_eps1_ok and math.isfinite(region.s1)
                  and s0 > region.s1 and r0 > region.rbar0),
        hyp_eps1_ok=region.hyp_eps1_ok,
        hyp_Zinfty_ok=region.hyp_Zinfty_ok,
        hyp_ec44_ok=region.hyp_ec44_ok,
        notes=region.notes,
    )


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    margin: float
    worst_eta: float


def verify_assumptions(coeffs, bounds: AssumptionBounds,
                       probe_profiles) -> list[AssumptionCheck]:
    """Empirical check of the envelope and Lipschitz assumptions.

    Each envelope inequality is sampled on the probe profiles' own grids;
    Lipschitz constants are checked by difference quotients between
    consecutive probes.  Margins are relative: positive means satisfied.
    """
    mu = bounds.mu
    checks: list[AssumptionCheck] = []

    def envelope(name, values, eta, lower, upper):
        low_margin = (values - lower) / np.maximum(np.abs(upper), 1e-300)
        up_margin = (upper - values) / np.maximum(np.abs(upper), 1e-300)
        margins = np.minimum(low_margin, up_margin)
        i = int(np.argmin(margins))
        checks.append(AssumptionCheck(name=name, passed=bool(margins[i] >= -1e-12),
                                      margin=float(margins[i]),
                                      worst_eta=float(eta[i])))

    def lipschitz(name, quotient, declared):
        margin = (declared - quotient) / max(declared, 1e-300) \
            if declared > 0 else (0.0 if quotient <= 1e-12 else -quotient)
        checks.append(AssumptionCheck(name=name, passed=bool(quotient <= declared + 1e-12),
                                      margin=float(margin), worst_eta=math.nan))

    for p in probe_profiles:
        eta1 = p.eta_nodes
        f1 = p.f1_values
        envelope("L1 envelope", np.asarray(coeffs.L1(f1, eta1), dtype=float), eta1,
                 bounds.L1m * eta1**mu, bounds.L1M * eta1**mu)
        envelope("N1 envelope", np.asarray(coeffs.N1(f1, eta1), dtype=float), eta1,
                 bounds.N1m * eta1**-mu, bounds.N1M * eta1**-mu)
        envelope("K1 envelope", np.asarray(coeffs.K1(f1, eta1), dtype=float), eta1,
                 bounds.K1m * eta1**-mu, bounds.K1M * eta1**-mu)
        u = p.u_nodes[1:]  # skip the far-field point eta = inf
        eta2 = p.r0 / u
        f2 = p.f2_values[1:]
        envelope("L2 envelope", np.asarray(coeffs.L2(f2, eta2), dtype=float), eta2,
                 bounds.L2m * eta2**mu, bounds.L2M * eta2**mu)
        envelope("N2 envelope", np.asarray(coeffs.N2(f2, eta2), dtype=float), eta2,
                 bounds.N2m * eta2**-mu, bounds.N2M * eta2**-mu)
        envelope("K2 envelope", np.asarray(coeffs.K2(f2, eta2), dtype=float), eta2,
                 bounds.K2m * eta2**-mu, bounds.K2M * eta2**-mu)

    # Lipschitz difference quotients between consecutive probe pairs.
    worst = {"L1": 0.0, "N1": 0.0, "K1": 0.0, "L2": 0.0, "N2": 0.0, "K2": 0.0}
    for p, q in zip(probe_profiles, probe_profiles[1:]):
        d1 = float(np.max(np.abs(p.f1_values - q.f1_values)))
        d2 = float(np.max(np.abs(p.f2_values - q.f2_values)))
        eta1 = p.eta_nodes
        if d1 > 0:
            for key, fn in (("L1", coeffs.L1), ("N1", coeffs.N1)):
                diff = np.abs(np.asarray(fn(p.f1_values, eta1), dtype=float)
                              - np.asarray(fn(q.f1_values, eta1), dtype=float))
                worst[key] = max(worst[key], float(np.max(diff)) / d1)
            diff = np.abs(np.asarray(coeffs.K1(p.f1_values, eta1), dtype=float)
                          - np.asarray(coeffs.K1(q.f1_values, eta1), dtype=float))
            worst["K1"] = max(worst["K1"], float(np.max(diff * eta1**mu)) / d1)
        u = p.u_nodes[1:]
        eta2 = p.r0 / u
        if d2 > 0:
            for key, fn in (("L2", coeffs.L2), ("N2", coeffs.N2)):
                diff = np.abs(np.asarray(fn(p.f2_values[1:], eta2), dtype=float)
                              - np.asarray(fn(q.f2_values[1:], eta2), dtype=float))
                worst[key] = max(worst[key], float(np.max(diff)) / d2)
            diff = np.abs(np.asarray(coeffs.K2(p.f2_values[1:], eta2), dtype=float)
                          - np.asarray(coeffs.K2(q.f2_values[1:], eta2), dtype=float))
            worst["K2"] = max(worst["K2"], float(np.max(diff * eta2**mu)) / d2)

    declared = {"L1": bounds.L1_tilde, "N1": bounds.N1_tilde, "K1": bounds.K1_tilde,
                "L2": bounds.L2_tilde, "N2": bounds.N2_tilde, "K2": bounds.K2_tilde}
    for key in worst:
        lipschitz(f"{key} Lipschitz", worst[key], declared[key])
    return checks
