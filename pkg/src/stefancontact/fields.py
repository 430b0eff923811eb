"""Physical field reconstruction and PDE residual verification.

A similarity solution stores the dimensionless profiles (f1, f2) and the
front coefficients (s0, r0).  This module maps them back to the physical
plane:

    vapor   0 <= z < s(t):  linear temperature from T_ion down to T_b
    liquid  s(t) <= z < r(t):  T = T_m f1(eta) + T_m,  phi = phi1(eta)
    solid   z >= r(t):         T = T_m f2(eta) + T_m,  phi = phi2(eta)

with eta = z / (2 a sqrt(t)), s(t) = 2 a s0 sqrt(t), r(t) = 2 a r0 sqrt(t),
and verifies the reconstruction against the governing equations by
finite-difference residuals (centered second order in z, one-sided first
order in t), scaled by the largest constituent term so every report entry
is dimensionless.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .kernels import KernelContext, KernelSetup, ProfilePair, make_setup
from .scenario import PhysicalScenario

ZONE_VAPOR = "vapor"
ZONE_LIQUID = "liquid"
ZONE_SOLID = "solid"

_FRONT_MARGIN_CELLS = 3


@dataclass
class SolutionFields:
    """Physical-plane sampler bound to one similarity solution."""

    scenario: PhysicalScenario
    setup: KernelSetup
    context: KernelContext
    s0: float
    r0: float

    @property
    def profiles(self) -> ProfilePair:
        return self.context.profiles

    def s(self, t):
        return 2.0 * self.setup.constants.a * self.s0 * np.sqrt(t)

    def r(self, t):
        return 2.0 * self.setup.constants.a * self.r0 * np.sqrt(t)

    def eta(self, z, t):
        return np.asarray(z, dtype=float) / (2.0 * self.setup.constants.a
                                             * np.sqrt(t))

    def zone(self, z, t) -> str:
        e = float(self.eta(z, t))
        if e < self.s0:
            return ZONE_VAPOR
        if e < self.r0:
            return ZONE_LIQUID
        return ZONE_SOLID

    def temperature(self, z, t):
        """Temperature at (z, t), all zones, vectorized over z."""
        e = self.eta(z, t)
        tm = self.scenario.T_m
        out = np.empty_like(np.asarray(e, dtype=float))
        vap = e < self.s0
        liq = (~vap) & (e < self.r0)
        sol = e >= self.r0
        if np.any(vap):
            out[vap] = (e[vap] / self.s0) * (self.scenario.T_b
                                             - self.scenario.T_ion) + self.scenario.T_ion
        if np.any(liq):
            out[liq] = tm * np.asarray(self.profiles.f1(e[liq])) + tm
        if np.any(sol):
            out[sol] = tm * np.asarray(self.profiles.f2(e[sol])) + tm
        return out

    def potential(self, z, t):
        """Electric potential at (z, t); zero in the vapor zone."""
        e = self.eta(z, t)
        out = np.zeros_like(np.asarray(e, dtype=float))
        liq = (e >= self.s0) & (e < self.r0)
        sol = e >= self.r0
        if np.any(liq):
            out[liq] = np.asarray(self.context.phi1(e[liq]))
        if np.any(sol):
            out[sol] = np.asarray(self.context.phi2(e[sol]))
        return out

    def sample(self, z: float, t: float):
        zone = self.zone(z, t)
        temp = float(self.temperature(np.array([z]), t)[0])
        pot = float(self.potential(np.array([z]), t)[0])
        return zone, temp, pot


def build_fields(scenario: PhysicalScenario, s0: float, r0: float,
                 profiles: ProfilePair, setup: KernelSetup | None = None) -> SolutionFields:
    setup = setup or make_setup(scenario)
    return SolutionFields(scenario=scenario, setup=setup,
                          context=KernelContext(setup, profiles),
                          s0=s0, r0=r0)


def vapor_temperature(z, t, fields: SolutionFields):
    """Linear vapor-zone profile from T_ion at z=0 to T_b at the boiling front."""
    z = np.asarray(z, dtype=float)
    st = fields.s(t)
    if np.any(z < 0) or np.any(z > st * (1.0 + 1e-12)):
        raise DomainError("z outside the vapor zone [0, s(t)]")
    sc = fields.scenario
    return z / st * (sc.T_b - sc.T_ion) + sc.T_ion


def reconstruct(z: float, t: float, fields: SolutionFields):
    """Zone tag, temperature and potential at one physical point."""
    if t <= 0:
        raise DomainError("reconstruction requires t > 0")
    return fields.sample(z, t)


# --------------------------------------------------------------------------
# PDE residual verification
# --------------------------------------------------------------------------

@dataclass
class ResidualEntry:
    max_scaled: float
    l2_scaled: float


@dataclass
class ResidualReport:
    entries: dict = field(default_factory=dict)

    def worst(self) -> float:
        return max((e.max_scaled for e in self.entries.values()), default=0.0)


def _phase_laws(fields: SolutionFields, phase: int):
    model = (fields.scenario.coeff_model_1 if phase == 1
             else fields.scenario.coeff_model_2)
    sigma = fields.scenario.sigma1 if phase == 1 else fields.scenario.sigma2
    tm = fields.scenario.T_m

    def with_T(law):
        def ev(T, eta):
            return np.asarray(law((np.asarray(T) - tm) / tm, eta), dtype=float)
        return ev

    return (with_T(model.c), with_T(model.gamma), with_T(model.lam),
            with_T(model.rho), sigma)


def _heat_current_residuals(fields: SolutionFields, phase: int, t: float,
                            z: np.ndarray, dt_frac: float = 5e-7):
    """Scaled FD residuals of the heat and current equations on one z-line."""
    nu = fields.scenario.nu
    c_l, g_l, lam_l, rho_l, sigma = _phase_laws(fields, phase)
    dz = z[1] - z[0]
    dt = dt_frac * t

    T = fields.temperature(z, t)
    T_prev = fields.temperature(z, t - dt)
    phi = fields.potential(z, t)
    eta = fields.eta(z, t)

    T_t = (T - T_prev) / dt
    T_z = np.gradient(T, dz)
    phi_z = np.gradient(phi, dz)

    # flux divergence (1/z^nu) d/dz(lambda z^nu T_z) via midpoint fluxes
    zm = 0.5 * (z[1:] + z[:-1])
    Tm_mid = 0.5 * (T[1:] + T[:-1])
    eta_mid = 0.5 * (eta[1:] + eta[:-1])
    lam_mid = lam_l(Tm_mid, eta_mid)
    flux = lam_mid * zm**nu * (T[1:] - T[:-1]) / dz
    div = np.empty_like(T)
    div[1:-1] = (flux[1:] - flux[:-1]) / dz / z[1:-1]**nu
    div[0] = div[1]
    div[-1] = div[-2]

    storage = c_l(T, eta) * g_l(T, eta) * T_t
    thomson = sigma * T_z * phi_z
    joule = phi_z**2 / rho_l(T, eta)

    interior = slice(1, -1)
    heat_res = (storage - div - thomson - joule)[interior]
    heat_scale = max(float(np.max(np.abs(storage[interior]))),
                     float(np.max(np.abs(div[interior]))),
                     float(np.max(np.abs(thomson[interior]))),
                     float(np.max(np.abs(joule[interior]))), 1e-300)

    cur_flux = zm**nu * (phi[1:] - phi[:-1]) / dz / rho_l(Tm_mid, eta_mid)
    cur_div = (cur_flux[1:] - cur_flux[:-1]) / dz / z[1:-1]**nu
    cur_scale = max(float(np.max(np.abs(cur_flux))) / dz, 1e-300)
    cur_res = cur_div

    return (heat_res / heat_scale, cur_res / cur_scale)


def pde_residual(fields: SolutionFields, n_z: int = 64,
                 t_values=(0.5, 1.0, 2.0)) -> ResidualReport:
    """Finite-difference verification of the reconstruction.

    Reports scaled residuals of the liquid/solid heat and current
    equations on interior grids (3-cell margins from the fronts), plus the
    three front conditions: prescribed boiling flux, the Stefan energy
    balance, and current continuity at the melting front.
    """
    sc = fields.scenario
    c = fields.setup.constants
    report = ResidualReport()
    heat = {1: [], 2: []}
    cur = {1: [], 2: []}

    for t in t_values:
        st, rt = float(fields.s(t)), float(fields.r(t))
        # liquid zone grid with margins
        dz1 = (rt - st) / (n_z + 2 * _FRONT_MARGIN_CELLS)
        z1 = st + dz1 * np.arange(_FRONT_MARGIN_CELLS,
                                  n_z + _FRONT_MARGIN_CELLS + 1)
        h, q = _heat_current_residuals(fields, 1, t, z1)
        heat[1].append(h)
        cur[1].append(q)
        # solid zone grid: a near-front window [r(t), 1.25 r(t)].  A narrow
        # window keeps the centered-difference truncation of the second
        # z-derivative well below the verification tolerance; the far field
        # is exponentially close to the ambient state and adds no
        # information at this resolution.
        dz2 = 0.25 * rt / (n_z + 2 * _FRONT_MARGIN_CELLS)
        z2 = rt + dz2 * np.arange(_FRONT_MARGIN_CELLS,
                                  n_z + _FRONT_MARGIN_CELLS + 1)
        h, q = _heat_current_residuals(fields, 2, t, z2)
        heat[2].append(h)
        cur[2].append(q)

    for phase in (1, 2):
        hv = np.concatenate(heat[phase])
        qv = np.concatenate(cur[phase])
        report.entries[f"heat{phase}"] = ResidualEntry(
            max_scaled=float(np.max(np.abs(hv))),
            l2_scaled=float(np.sqrt(np.mean(hv**2))))
        report.entries[f"current{phase}"] = ResidualEntry(
            max_scaled=float(np.max(np.abs(qv))),
            l2_scaled=float(np.sqrt(np.mean(qv**2))))

    # Front conditions via similarity-profile derivatives (exact in eta).
    prof = fields.profiles
    tm = sc.T_m
    _, _, lam1, rho1, _ = _phase_laws(fields, 1)
    _, _, lam2, rho2, _ = _phase_laws(fields, 2)

    f1p_s0 = float(prof._f1_spline(fields.s0, 1))
    f1p_r0 = float(prof._f1_spline(fields.r0, 1))
    # d f2/d eta at eta = r0 from the compactified spline: df2/du * du/deta
    f2p_r0 = float(prof._f2_spline(1.0, 1)) * (-1.0 / fields.r0)

    flux_vals, stefan_vals, cont_vals = [], [], []
    for t in t_values:
        rt = float(fields.r(t))
        st = float(fields.s(t))
        denom = 2.0 * c.a * math.sqrt(t)
        T1z_s = tm * f1p_s0 / denom
        T1z_r = tm * f1p_r0 / denom
        T2z_r = tm * f2p_r0 / denom

        target = sc.Q0 * math.exp(-fields.s0**2) / (2.0 * c.a * math.sqrt(math.pi * t))
        lhs = -lam1(np.array([sc.T_b]), np.array([fields.s0]))[0] * T1z_s
        flux_vals.append((lhs - target) / max(abs(target), abs(lhs), 1e-300))

        melt_rate = sc.l_m * sc.gamma_m * c.a * fields.r0 / math.sqrt(t)
        lam1_r = lam1(np.array([tm]), np.array([fields.r0]))[0]
        lam2_r = lam2(np.array([tm]), np.array([fields.r0]))[0]
        lhs = -lam1_r * T1z_r + lam2_r * T2z_r
        stefan_vals.append((lhs - melt_rate)
                           / max(abs(melt_rate), abs(lam1_r * T1z_r),
                                 abs(lam2_r * T2z_r), 1e-300))

        if fields.context.has_potential:
            dz = 1e-6 * rt
            p1 = fields.potential(np.array([rt - 2 * dz, rt - dz]), t)
            p2 = fields.potential(np.array([rt + dz, rt + 2 * dz]), t)
            phi1_z = (p1[1] - p1[0]) / dz
            phi2_z = (p2[1] - p2[0]) / dz
            lhs1 = phi1_z / rho1(np.array([tm]), np.array([fields.r0]))[0]
            lhs2 = phi2_z / rho2(np.array([tm]), np.array([fields.r0]))[0]
            cont_vals.append((lhs1 - lhs2) / max(abs(lhs1), abs(lhs2), 1e-300))
        else:
            cont_vals.append(0.0)

    for name, vals in (("boiling_flux", flux_vals), ("stefan", stefan_vals),
                       ("current_continuity", cont_vals)):
        arr = np.asarray(vals)
        report.entries[name] = ResidualEntry(
            max_scaled=float(np.max(np.abs(arr))),
            l2_scaled=float(np.sqrt(np.mean(arr**2))))
    return report


# --------------------------------------------------------------------------
# CSV emission
# --------------------------------------------------------------------------

def write_fields_csv(fields: SolutionFields, path, t_values, n_z: int = 200):
    """(z, t, zone, T, phi) table covering vapor through far solid."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "t", "zone", "temperature", "potential"])
        for t in t_values:
            z_max = 4.0 * float(fields.r(t))
            for z in np.linspace(0.0, z_max, n_z):
                zone, temp, pot = fields.sample(float(z), float(t))
                w.writerow([f"{z:.17g}", f"{t:.17g}", zone,
                            f"{temp:.17g}", f"{pot:.17g}"])


def write_fronts_csv(fields: SolutionFields, path, t_values):
    """(t, s(t), r(t)) front-location table."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "s", "r"])
        for t in t_values:
            w.writerow([f"{t:.17g}", f"{float(fields.s(t)):.17g}",
                        f"{float(fields.r(t)):.17g}"])
