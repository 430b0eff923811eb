"""Free-boundary solve: nested scalar root finding for (s0, r0).

The similarity reduction leaves two scalar equations coupling the front
coefficients s0 (boiling) and r0 (melting) through the fixed-point
profiles:

    Ec1:  s0^nu Q e^{-s0^2} Phi1(r0) + (D1*/H^2) G1(r0) = B
    Ec2:  W(r0, s0) = M

with W the melting-front energy balance assembled from the liquid flux,
the liquid Thomson source, and the solid flux.  The solver finds, for each
candidate s0, the smallest r0 root of Ec1 (inner bisection), then drives
the Ec2 residual at (s0, r0*(s0)) to zero in s0 (outer bisection).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InnerFailure, NoSignChange, SolverError
from .fixed_point import FixedPointConfig, FixedPointResult, iterate
from .kernels import KernelContext, KernelSetup, ProfilePair, \
    chebyshev_nodes, default_initial_profiles


@dataclass(frozen=True)
class FreeBoundaryConfig:
    s0_bracket: tuple[float, float] = (0.05, 1.5)
    r0_bracket_policy: str = "manual"  # "manual" | "certificate"
    r0_bracket: tuple[float, float] | None = None
    assumption_bounds: object | None = None  # needed for "certificate"
    scalar_tol: float = 1e-8
    max_bisections: int = 80
    scan_points: int = 17
    fp: FixedPointConfig = field(default_factory=FixedPointConfig)

    def __post_init__(self):
        lo, hi = self.s0_bracket
        if not (0.0 < lo < hi):
            raise ValueError("s0_bracket must be positive and ordered")
        if self.scalar_tol <= 0:
            raise ValueError("scalar_tol must be positive")
        if self.r0_bracket_policy not in ("manual", "certificate"):
            raise ValueError(f"unknown r0 bracket policy {self.r0_bracket_policy!r}")
        if self.r0_bracket_policy == "manual":
            if self.r0_bracket is None:
                raise ValueError("manual policy requires r0_bracket")
            rlo, rhi = self.r0_bracket
            if not (0.0 < rlo < rhi):
                raise ValueError("r0_bracket must be positive and ordered")


@dataclass
class SimilaritySolution:
    s0_hat: float
    r0_star: float
    profiles: ProfilePair
    residual_Ec1: float
    residual_Ec2: float
    certificate: object | None = None
    sign_configuration: str = ""
    inner_iteration_log: list = field(default_factory=list)


def residual_Ec1(s0: float, r0: float, ctx: KernelContext) -> float:
    """Boiling-front flux balance residual (left side minus B)."""
    c = ctx.setup.constants
    y = c.Q * s0**c.nu * math.exp(-s0**2) * ctx.Phi1_r0
    z = (c.D1_star / ctx.H**2) * ctx.G1_r0 if c.D1_star != 0.0 else 0.0
    return y + z - c.B


def ec1_scale(ctx: KernelContext) -> float:
    c = ctx.setup.constants
    y = c.Q * ctx.s0**c.nu * math.exp(-ctx.s0**2) * ctx.Phi1_r0
    return max(c.B, abs(y), 1e-300)


def melting_front_flux(ctx: KernelContext) -> float:
    """W(r0, s0): the Stefan-condition flux combination at the melting front."""
    c = ctx.setup.constants
    s0, r0 = ctx.s0, ctx.r0
    liquid = c.Q * math.exp(-s0**2) * s0**c.nu
    if c.D1_star != 0.0:
        liquid += (c.D1_star / ctx.H**2) * ctx.H1_r0
    w = float(ctx.E1(r0)) / r0**(c.nu + 1.0) * liquid
    solid_bracket = 1.0
    if c.D2_star != 0.0:
        solid_bracket -= (c.D2_star / ctx.H**2) * ctx.G2_inf
    w -= solid_bracket / (r0**(c.nu + 1.0) * ctx.Phi2_inf)
    return w


def residual_Ec2(s0: float, r0: float, ctx: KernelContext) -> float:
    """Melting-front energy balance residual W - M."""
    return melting_front_flux(ctx) - ctx.setup.constants.M


def ec2_scale(ctx: KernelContext) -> float:
    return max(ctx.setup.constants.M, abs(melting_front_flux(ctx)), 1e-300)


def _warm_profiles(s0: float, r0: float, setup: KernelSetup,
                   warm: ProfilePair | None) -> ProfilePair:
    """Initial iterate at (s0, r0), rescaled from a previous solution."""
    if warm is None:
        return default_initial_profiles(s0, r0, setup.constants,
                                        setup.n1, setup.n2)
    eta = chebyshev_nodes(s0, r0, setup.n1)
    t = (eta - s0) / (r0 - s0)
    old_eta = warm.s0 + t * (warm.r0 - warm.s0)
    f1 = np.asarray(warm.f1(old_eta), dtype=float)
    u = np.linspace(0.0, 1.0, setup.n2)
    f2 = np.asarray(warm.f2_of_u(u), dtype=float)
    f2[0], f2[-1] = -1.0, 0.0
    return ProfilePair(s0, r0, eta, f1, u, f2)


def solve_profiles(s0: float, r0: float, setup: KernelSetup,
                   fp_cfg: FixedPointConfig,
                   warm: ProfilePair | None = None) -> FixedPointResult:
    return iterate(_warm_profiles(s0, r0, setup, warm), setup, fp_cfg)


def _r0_interval(s0: float, setup: KernelSetup,
                 cfg: FreeBoundaryConfig) -> tuple[float, float]:
    if cfg.r0_bracket_policy == "manual":
        return cfg.r0_bracket
    from .certificates import inner_root_interval
    return inner_root_interval(s0, setup.constants, cfg.assumption_bounds)


class _InnerSolver:
    """Smallest-root bisection in r0 of the Ec1 residual at fixed s0,
    warm-starting fixed points along the scan."""

    def __init__(self, setup: KernelSetup, cfg: FreeBoundaryConfig):
        self.setup = setup
        self.cfg = cfg
        self.warm: ProfilePair | None = None
        self.iteration_log: list = []

    def _residual(self, s0: float, r0: float) -> tuple[float, FixedPointResult]:
        res = solve_profiles(s0, r0, self.setup, self.cfg.fp, self.warm)
        self.warm = res.profiles
        self.iteration_log.append((s0, r0, res.iterations))
        return residual_Ec1(s0, r0, res.context), res

    def solve(self, s0: float) -> tuple[float, FixedPointResult, float]:
        cfg = self.cfg
        lo, hi = _r0_interval(s0, self.setup, cfg)
        lo = max(lo, s0 * (1.0 + 1e-6))
        if lo >= hi:
            raise NoSignChange(
                f"empty r0 bracket ({lo}, {hi}) at s0={s0}")
        grid = np.linspace(lo, hi, cfg.scan_points)
        vals = []
        last = None
        for r0 in grid:
            v, last = self._residual(s0, float(r0))
            vals.append(v)

        bl = bh = None
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                return float(grid[i]), last, 0.0
            if vals[i] * vals[i + 1] < 0.0:
                bl, bh = float(grid[i]), float(grid[i + 1])
                fl = vals[i]
                break
        else:
            if vals[-1] == 0.0:
                return float(grid[-1]), last, 0.0
            raise NoSignChange(
                f"Ec1 residual has no sign change on r0 in ({lo:.6g}, {hi:.6g}) "
                f"at s0={s0:.6g}")

        res = last
        v = None
        for _ in range(cfg.max_bisections):
            mid = 0.5 * (bl + bh)
            v, res = self._residual(s0, mid)
            if abs(v) <= cfg.scalar_tol * ec1_scale(res.context) \
                    or (bh - bl) <= 1e-14 * mid:
                return mid, res, v
            if fl * v < 0.0:
                bh = mid
            else:
                bl, fl = mid, v
        return 0.5 * (bl + bh), res, v


def solve_inner_r0(s0: float, setup: KernelSetup,
                   cfg: FreeBoundaryConfig) -> float:
    """Smallest r0 root of the boiling-front equation at fixed s0."""
    r0, _res, _v = _InnerSolver(setup, cfg).solve(s0)
    return r0


def solve_outer_s0(setup: KernelSetup, cfg: FreeBoundaryConfig) -> SimilaritySolution:
    """Full free-boundary solve: outer bisection in s0 on the Ec2 residual."""
    inner = _InnerSolver(setup, cfg)

    def outer_residual(s0: float):
        try:
            r0, res, _ = inner.solve(s0)
        except NoSignChange:
            raise
        except SolverError as exc:
            raise InnerFailure(f"inner solve failed at s0={s0:.6g}: {exc}") from exc
        return residual_Ec2(s0, r0, res.context), r0, res

    lo, hi = cfg.s0_bracket
    grid = np.linspace(lo, hi, cfg.scan_points)
    vals, extras = [], []
    usable = []
    for s0 in grid:
        try:
            v, r0, res = outer_residual(float(s0))
        except NoSignChange:
            continue
        usable.append(float(s0))
        vals.append(v)
        extras.append((r0, res))
    if len(usable) < 2:
        raise NoSignChange(
            f"Ec2 residual could not be evaluated at two or more s0 values in "
            f"({lo}, {hi})")

    bl = bh = None
    for i in range(len(usable) - 1):
        if vals[i] * vals[i + 1] <= 0.0:
            bl, bh = usable[i], usable[i + 1]
            fl = vals[i]
            break
    else:
        raise NoSignChange(
            f"Ec2 residual has no sign change on s0 in ({lo:.6g}, {hi:.6g})")

    sign_cfg = ("W-M positive at low s0, negative at high s0" if fl > 0
                else "W-M negative at low s0, positive at high s0")

    s0_hat, (r0_star, res) = bl, extras[usable.index(bl)]
    v = fl
    for _ in range(cfg.max_bisections):
        mid = 0.5 * (bl + bh)
        v, r0_star, res = outer_residual(mid)
        s0_hat = mid
        if abs(v) <= cfg.scalar_tol * ec2_scale(res.context) \
                or (bh - bl) <= 1e-14 * mid:
            break
        if fl * v < 0.0:
            bh = mid
        else:
            bl, fl = mid, v

    ctx = res.context
    return SimilaritySolution(
        s0_hat=s0_hat,
        r0_star=r0_star,
        profiles=res.profiles,
        residual_Ec1=residual_Ec1(s0_hat, r0_star, ctx),
        residual_Ec2=v,
        sign_configuration=sign_cfg,
        inner_iteration_log=inner.iteration_log,
    )
