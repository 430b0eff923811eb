"""Acceptance suite: one test per acceptance criterion.

Each test prints a single PASS/FAIL line with the measured figure of merit
and its budgeted tolerance and runtime.
"""

import json
import time

import numpy as np
import pytest

from conftest import (CLASSICAL_TOML, MIXED_TOML, THOMSON_TOML,
                      classical_oracle_fronts, gaussian_tail,
                      kernel_eval_points)
from stefancontact.certificates import (AssumptionBounds, check_hyp_eps1,
                                        compute_epsilons, compute_H_bounds,
                                        j1, verify_assumptions)
from stefancontact.cli import (_profiles_from_dict, load_assumption_bounds,
                               load_scenario_file, main)
from stefancontact.fields import build_fields, pde_residual
from stefancontact.fixed_point import (FixedPointConfig, apply_V1, apply_V2,
                                       default_profile_sampler,
                                       empirical_contraction_ratio, iterate)
from stefancontact.free_boundary import solve_profiles
from stefancontact.kernels import (KernelContext, default_initial_profiles,
                                   eval_H, make_setup)
from stefancontact.scenario import (build_dimensionless_coefficients,
                                    derive_constants)

_KERNELS_1 = ("F1", "E1", "H1", "Phi1", "G1")
_KERNELS_2 = ("F2", "E2", "Phi2", "G2")


def _line(num, label, passed, detail):
    word = "PASS" if passed else "FAIL"
    print(f"[criterion {num}] {word} {label}: {detail}")
    assert passed, f"criterion {num} ({label}): {detail}"


def test_criterion_1_kernel_oracle_equivalence(power_law_case):
    t0 = time.monotonic()
    oracle, setup, profiles = power_law_case
    ctx = KernelContext(setup, profiles, force_all_tables=True)
    eta1, eta2, eta2_h2 = kernel_eval_points(ctx)
    worst = 0.0
    for name, etas in ([(k, eta1) for k in _KERNELS_1]
                       + [(k, eta2) for k in _KERNELS_2]
                       + [("H2", eta2_h2)]):
        pkg = np.array([float(getattr(ctx, name)(e)) for e in etas])
        ora = np.array([float(getattr(oracle, name)(e)) for e in etas])
        worst = max(worst, float(np.max(np.abs(pkg - ora))
                                 / np.max(np.abs(ora))))
    worst = max(worst, abs(eval_H(ctx) - oracle.H) / oracle.H)
    worst = max(worst, abs(ctx.Phi2_inf - float(oracle.Phi2(np.inf)))
                / float(oracle.Phi2(np.inf)))
    worst = max(worst, abs(ctx.G2_inf - float(oracle.G2(np.inf)))
                / abs(float(oracle.G2(np.inf))))
    dt = time.monotonic() - t0
    _line(1, "kernel oracle equivalence",
          worst < 1e-8 and dt < 10.0,
          f"worst rel err {worst:.2e} (tol 1e-8), {dt:.1f}s (budget 10s)")


def test_criterion_2_endpoint_exactness(power_law_case):
    t0 = time.monotonic()
    oracle, setup, profiles = power_law_case
    ctx = KernelContext(setup, profiles, force_all_tables=True)
    s0, r0 = oracle.s0, oracle.r0
    v1 = apply_V1(profiles, ctx)
    v2 = apply_V2(profiles, ctx)
    exact = (
        float(ctx.F1(s0)) == 0.0,
        float(ctx.Phi1(s0)) == 0.0,
        float(ctx.H1(s0)) == 0.0,
        float(ctx.G1(s0)) == 0.0,
        float(ctx.E1(s0)) == 1.0,
        float(ctx.E2(r0)) == 1.0,
        v1[-1] == 0.0,
        v2[-1] == 0.0,
        v2[0] == -1.0,
        float(ctx.phi1(s0)) == 0.0,
        float(ctx.phi2(np.inf)) == setup.U_c / 2.0,
    )
    dt = time.monotonic() - t0
    _line(2, "endpoint exactness",
          all(exact) and dt < 1.0,
          f"{sum(exact)}/{len(exact)} identities exact, {dt:.2f}s (budget 1s)")


@pytest.fixture(scope="module")
def mixed_context(mixed_root):
    setup, res = mixed_root
    return setup, res


def test_criterion_3_invariance_and_start_independence(mixed_context):
    t0 = time.monotonic()
    setup, res = mixed_context
    base = res.profiles
    sampler = default_profile_sampler(base, seed=5)
    ok_endpoints = True
    for _ in range(20):
        p = next(sampler)
        ctx = KernelContext(setup, p)
        out = p.with_values(apply_V1(p, ctx), apply_V2(p, ctx))
        ok_endpoints &= out.in_admissible_set(tol=0.0)
        out.check_range(setup.f_max, margin=setup.range_margin)
    ratio = empirical_contraction_ratio(res.context, FixedPointConfig(seed=2))
    cfg = FixedPointConfig(tol=1e-10)
    a = iterate(default_initial_profiles(base.s0, base.r0, setup.constants),
                setup, cfg)
    b = iterate(next(sampler), setup, cfg)
    gap = a.profiles.distance(b.profiles)
    dt = time.monotonic() - t0
    _line(3, "iteration-set invariance",
          ok_endpoints and ratio < 1.0 and gap <= 10 * cfg.tol and dt < 60.0,
          f"20/20 probe images admissible, ratio {ratio:.3f} < 1, start gap "
          f"{gap:.2e} <= {10 * cfg.tol:.0e}, {dt:.1f}s (budget 60s)")


def test_criterion_4_lemma_soundness(mixed_context):
    t0 = time.monotonic()
    setup, res = mixed_context
    sc, raw = load_scenario_file(MIXED_TOML)
    bounds = load_assumption_bounds(raw)
    constants = setup.constants
    coeffs = build_dimensionless_coefficients(sc)
    base = res.profiles
    s0, r0 = base.s0, base.r0

    sampler = default_profile_sampler(base, seed=9)
    pairs = [(next(sampler), next(sampler)) for _ in range(50)]
    probes = [p for pair in pairs for p in pair]
    checks = verify_assumptions(coeffs, bounds, probes)
    model_ok = all(ck.passed for ck in checks)

    hb = compute_H_bounds(s0, r0, bounds, constants.nu)
    eps = compute_epsilons(s0, r0, bounds, constants)
    violations = []
    for i, (p, q) in enumerate(pairs):
        cp, cq = KernelContext(setup, p), KernelContext(setup, q)
        Hp, Hq = eval_H(cp), eval_H(cq)
        d = p.distance(q)
        if not (hb.H_inf <= Hp <= hb.H_sup and hb.H_inf <= Hq <= hb.H_sup):
            violations.append((i, "H envelope"))
        if abs(Hp - Hq) > hb.H_tilde * d * (1 + 1e-12):
            violations.append((i, "H Lipschitz"))
        d1 = float(np.max(np.abs(apply_V1(p, cp) - apply_V1(q, cq))))
        d2 = float(np.max(np.abs(apply_V2(p, cp) - apply_V2(q, cq))))
        if d1 > eps.eps1 * d:
            violations.append((i, "V1 Lipschitz"))
        if d2 > eps.eps2 * d:
            violations.append((i, "V2 Lipschitz"))
        if max(d1, d2) > eps.eps * d:
            violations.append((i, "Psi Lipschitz"))
    dt = time.monotonic() - t0
    _line(4, "lemma soundness",
          model_ok and not violations and dt < 120.0,
          f"assumptions verified on 100 probes, 0 bound violations in 50 "
          f"pairs (found {violations[:3]}), {dt:.1f}s (budget 120s)")


def test_criterion_5_epsilon_monotonicity():
    t0 = time.monotonic()
    sc, raw = load_scenario_file(MIXED_TOML)
    constants = derive_constants(sc)
    # nondegenerate Lipschitz constants in both phases so eps2 carries every
    # component of the bound (the scenario file declares solid laws constant)
    bounds = AssumptionBounds(
        mu=3.0, L1m=0.8, L1M=1.2, N1m=0.8, N1M=1.2, K1m=0.8, K1M=1.2,
        L2m=0.8, L2M=1.2, N2m=0.8, N2M=1.2, K2m=0.8, K2M=1.2,
        L1_tilde=0.1, N1_tilde=0.1, K1_tilde=0.1,
        L2_tilde=0.1, N2_tilde=0.1, K2_tilde=0.1)
    s1 = check_hyp_eps1(bounds, constants).s1
    s0 = 1.5 * s1
    r_grid = np.geomspace(1.02 * s0, 1e3 * s0, 64)
    eps1 = np.array([compute_epsilons(s0, r, bounds, constants).eps1
                     for r in r_grid])
    eps2 = np.array([compute_epsilons(s0, r, bounds, constants).eps2
                     for r in r_grid])
    mono1 = bool(np.all(np.diff(eps1) <= 0.0))
    mono2 = bool(np.all(np.diff(eps2) <= 0.0))
    vanish2 = eps2[-1] < 1e-3 * eps2[0]
    lim = j1(s0, bounds, constants)
    close = abs(eps1[-1] - lim) / lim < 0.01
    dt = time.monotonic() - t0
    _line(5, "contraction-bound monotonicity",
          mono1 and mono2 and vanish2 and close and dt < 30.0,
          f"eps1/eps2 decreasing on 64-pt log grid: {mono1}/{mono2}, "
          f"eps2 tail ratio {eps2[-1] / eps2[0]:.1e}, "
          f"|eps1 - j1|/j1 = {abs(eps1[-1] - lim) / lim:.2e} at r0=1e3*s0, "
          f"{dt:.1f}s (budget 30s)")


def test_criterion_6_classical_end_to_end(classical_run, classical_fields):
    t0 = time.monotonic()
    out, doc = classical_run
    c = classical_fields.setup.constants
    s0_o, r0_o = classical_oracle_fronts(c.B, c.Q, c.M, c.nu, c.a,
                                         (0.35, 0.75), (0.4, 1.2))
    e_s0 = abs(doc["s0_hat"] - s0_o)
    e_r0 = abs(doc["r0_star"] - r0_o)

    # closed-form profiles: f' proportional to eta^-nu exp(-a eta^2)
    prof = classical_fields.profiles

    def I(x):
        return gaussian_tail(x, c.nu, 1.0)

    f1_o = c.B * ((I(prof.eta_nodes) - I(prof.r0))
                  / (I(prof.s0) - I(prof.r0)))
    with np.errstate(divide="ignore"):
        eta2 = np.where(prof.u_nodes > 0, prof.r0 / prof.u_nodes, np.inf)
    f2_o = I(eta2) / I(prof.r0) - 1.0
    e_prof = max(float(np.max(np.abs(prof.f1_values - f1_o))),
                 float(np.max(np.abs(prof.f2_values - f2_o))))

    report = pde_residual(classical_fields, n_z=64)
    worst = report.worst()
    dt = time.monotonic() - t0
    _line(6, "classical end-to-end vs oracle",
          e_s0 < 1e-6 and e_r0 < 1e-6 and e_prof < 1e-6
          and worst < 1e-6 and dt < 60.0,
          f"|s0 err| {e_s0:.1e}, |r0 err| {e_r0:.1e}, profile err "
          f"{e_prof:.1e} (tol 1e-6), PDE residual {worst:.1e} (tol 1e-6), "
          f"{dt:.1f}s (budget 60s)")


def test_criterion_7_plant_and_recover(tmp_path):
    t0 = time.monotonic()
    target = (0.45, 0.52)
    brackets = ("0.3:0.6", "0.35:0.55", "0.42:0.48")
    errs = []
    for i, br in enumerate(brackets):
        out = tmp_path / f"run{i}"
        rc = main(["solve", str(THOMSON_TOML), "--out", str(out),
                   "--s0-bracket", br])
        assert rc == 0
        doc = json.loads((out / "solution.json").read_text())
        errs.append(max(abs(doc["s0_hat"] - target[0]),
                        abs(doc["r0_star"] - target[1])))
    worst = max(errs)
    dt = time.monotonic() - t0
    _line(7, "plant-and-recover",
          worst < 1e-8 and dt < 120.0,
          f"worst front error {worst:.1e} over 3 bracket widths (tol 1e-8), "
          f"{dt:.1f}s (budget 120s)")


def test_criterion_8_front_sensitivity(classical_run, classical_fields):
    t0 = time.monotonic()
    out, doc = classical_run
    base = pde_residual(classical_fields, n_z=64,
                        t_values=(1.0,)).entries["stefan"].max_scaled
    sc, raw = load_scenario_file(CLASSICAL_TOML)
    setup = classical_fields.setup
    s0, r0 = doc["s0_hat"], 1.01 * doc["r0_star"]
    res = solve_profiles(s0, r0, setup, FixedPointConfig(tol=1e-11))
    fields = build_fields(sc, s0, r0, res.profiles, setup)
    pert = pde_residual(fields, n_z=64,
                        t_values=(1.0,)).entries["stefan"].max_scaled
    ratio = pert / base
    dt = time.monotonic() - t0
    _line(8, "melting-front sensitivity",
          ratio >= 10.0 and dt < 30.0,
          f"stefan residual grows {ratio:.1e}x under +1% r0 (needs >= 10x), "
          f"{dt:.1f}s (budget 30s)")


def test_criterion_9_determinism(classical_run, tmp_path):
    t0 = time.monotonic()
    out, _ = classical_run
    rerun = tmp_path / "again"
    rc = main(["solve", str(CLASSICAL_TOML), "--out", str(rerun)])
    assert rc == 0
    a = (out / "solution.json").read_bytes()
    b = (rerun / "solution.json").read_bytes()
    dt = time.monotonic() - t0
    _line(9, "determinism",
          a == b and dt < 60.0,
          f"solution.json byte-identical across runs ({len(a)} bytes), "
          f"{dt:.1f}s (budget 60s)")
