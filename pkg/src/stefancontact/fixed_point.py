"""Banach iteration for the integral-equation system.

The operator pair (V1, V2) maps a candidate profile pair to a new one:

    V1(f)(eta) = s0^nu * Q * exp(-s0^2) * [Phi1(r0) - Phi1(eta)]
                 + (D1*/H^2) * [G1(r0) - G1(eta)]
    V2(f)(eta) = [ (D2*/H^2) * G2(inf) - 1 ] * Phi2(eta)/Phi2(inf)
                 - (D2*/H^2) * G2(eta)

where every kernel is evaluated with the *input* profiles frozen inside a
KernelContext.  A dimensionless temperature pair solves the system iff it
is a fixed point of this map, which damped Picard iteration locates in the
product sup-norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateDenominator, DivergenceDetected,
                     MaxIterExceeded)
from .kernels import KernelContext, KernelSetup, ProfilePair

_GROWTH_STREAK = 5


@dataclass(frozen=True)
class FixedPointConfig:
    tol: float = 1e-9
    max_iter: int = 200
    damping: float = 1.0
    ratio_probe_pairs: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class FixedPointResult:
    profiles: ProfilePair
    context: KernelContext
    iterations: int
    final_update_norm: float
    empirical_ratio: float = math.nan
    converged: bool = True


def apply_V1(p: ProfilePair, ctx: KernelContext) -> np.ndarray:
    """Liquid-phase operator values on p's eta grid; exactly 0 at r0."""
    c = ctx.setup.constants
    same_grid = p.eta_nodes.shape == ctx.profiles.eta_nodes.shape and np.array_equal(
        p.eta_nodes, ctx.profiles.eta_nodes)
    if same_grid:
        phi1 = ctx.Phi1_tab
        g1 = ctx.G1_tab
    else:
        phi1 = ctx.Phi1(p.eta_nodes)
        g1 = ctx.G1(p.eta_nodes) if ctx.has_liquid_thomson else None

    out = c.Q * p.s0**c.nu * math.exp(-p.s0**2) * (ctx.Phi1_r0 - phi1)
    if c.D1_star != 0.0:
        out = out + (c.D1_star / ctx.H**2) * (ctx.G1_r0 - g1)
    out = np.asarray(out, dtype=float)
    out[-1] = 0.0
    return out


def apply_V2(p: ProfilePair, ctx: KernelContext) -> np.ndarray:
    """Solid-phase operator values on p's u grid; exactly 0 at the front
    and exactly -1 at the far field."""
    c = ctx.setup.constants
    if not np.isfinite(ctx.Phi2_inf) or ctx.Phi2_inf <= 0.0:
        raise DegenerateDenominator(
            f"Phi2(+inf) = {ctx.Phi2_inf} cannot normalize the solid profile")

    same_grid = p.u_nodes.shape == ctx.profiles.u_nodes.shape and np.array_equal(
        p.u_nodes, ctx.profiles.u_nodes)
    if same_grid:
        phi2 = ctx.Phi2_tab
        g2 = ctx.G2_tab
    else:
        eta = np.where(p.u_nodes > 0.0, ctx.r0 / np.maximum(p.u_nodes, 1e-300), np.inf)
        phi2 = ctx.Phi2(eta)
        g2 = ctx.G2(eta) if ctx.has_solid_thomson else None

    if c.D2_star != 0.0:
        x = (c.D2_star / ctx.H**2)
        out = (x * ctx.G2_inf - 1.0) * (phi2 / ctx.Phi2_inf) - x * g2
    else:
        out = -(phi2 / ctx.Phi2_inf)
    out = np.asarray(out, dtype=float)
    out[-1] = 0.0
    out[0] = -1.0
    return out


def _sweep(setup: KernelSetup, p: ProfilePair) -> tuple[ProfilePair, KernelContext]:
    ctx = KernelContext(setup, p)
    return p.with_values(apply_V1(p, ctx), apply_V2(p, ctx)), ctx


def iterate(initial: ProfilePair, setup: KernelSetup,
            cfg: FixedPointConfig | None = None) -> FixedPointResult:
    """Damped Picard iteration p <- (1-w) p + w (V1, V2)(p).

    Stops when the relative sup-norm update drops below tol.  If the
    update norm grows for five consecutive sweeps the damping is halved
    once; a second streak raises DivergenceDetected.
    """
    cfg = cfg or FixedPointConfig()
    p = initial
    omega = cfg.damping
    prev_norm = math.inf
    growth = 0
    damped_once = False
    ctx = None

    for k in range(1, cfg.max_iter + 1):
        new_p, ctx = _sweep(setup, p)
        update = new_p.distance(p)
        scale = 1.0 + p.norm()
        if omega < 1.0:
            f1 = (1.0 - omega) * p.f1_values + omega * new_p.f1_values
            f2 = (1.0 - omega) * p.f2_values + omega * new_p.f2_values
            f2[0], f2[-1] = -1.0, 0.0
            new_p = p.with_values(f1, f2)
        p = new_p

        if update <= cfg.tol * scale:
            return FixedPointResult(p, ctx, k, update)

        if update > prev_norm:
            growth += 1
            if growth >= _GROWTH_STREAK:
                if damped_once:
                    raise DivergenceDetected(
                        f"update norm grew for {growth} consecutive sweeps "
                        f"(last {update:.3e}) despite damping {omega}")
                omega = 0.5 * omega
                damped_once = True
                growth = 0
        else:
            growth = 0
        prev_norm = update

    raise MaxIterExceeded(
        f"no convergence in {cfg.max_iter} sweeps", last_update_norm=update)


def default_profile_sampler(base: ProfilePair, seed: int = 0):
    """Yields random admissible profile pairs near a base pair.

    Perturbations are smooth bumps that vanish where the iteration set
    pins the profiles, so every sample stays in the admissible set.
    """
    rng = np.random.default_rng(seed)
    t1 = (base.eta_nodes - base.s0) / (base.r0 - base.s0)
    bump1 = np.sin(np.pi * t1)
    bump2 = np.sin(np.pi * base.u_nodes)
    while True:
        amp1, amp2 = rng.uniform(-0.05, 0.05, size=2)
        ph1, ph2 = rng.uniform(1.0, 3.0, size=2)
        f1 = np.maximum(base.f1_values + amp1 * bump1 * np.cos(ph1 * t1), -1.0)
        f2 = np.clip(base.f2_values + amp2 * bump2 * np.cos(ph2 * base.u_nodes),
                     -1.0, 0.0)
        f2[0], f2[-1] = -1.0, 0.0
        yield base.with_values(f1, f2)


def empirical_contraction_ratio(ctx: KernelContext,
                                cfg: FixedPointConfig | None = None,
                                sampler=None) -> float:
    """Max observed Lipschitz ratio of (V1, V2) over random probe pairs."""
    cfg = cfg or FixedPointConfig()
    if sampler is None:
        sampler = default_profile_sampler(ctx.profiles, cfg.seed)
    setup = ctx.setup
    ratio = 0.0
    for _ in range(cfg.ratio_probe_pairs):
        f = next(sampler)
        g = next(sampler)
        d = f.distance(g)
        if d == 0.0:
            continue
        psi_f, _ = _sweep(setup, f)
        psi_g, _ = _sweep(setup, g)
        ratio = max(ratio, psi_f.distance(psi_g) / d)
    return ratio
