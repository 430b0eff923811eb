"""Command-line front end.

Subcommands:
    solve    scenario.toml -> solution.json + fields.csv + fronts.csv
    certify  scenario.toml --s0 --r0 -> certificate.json
    verify   solution.json -> residual_report.json
    sweep    scenario.toml --vary key=lo:hi:n -> sweep.csv
    export   solution.json -> fields/fronts CSV

Scenario files are TOML; results are canonical JSON (sorted keys, floats
printed with 17 significant digits) so identical runs are byte-identical.
Exit codes: 0 success, 2 no root bracketed, 3 fixed-point failure,
4 parse/validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .certificates import AssumptionBounds, build_certificate
from .errors import (DivergenceDetected, InnerFailure, MaxIterExceeded,
                     NoSignChange, ParseError, SolverError)
from .fields import build_fields, pde_residual, write_fields_csv, write_fronts_csv
from .fixed_point import FixedPointConfig, empirical_contraction_ratio
from .free_boundary import (FreeBoundaryConfig, residual_Ec1, residual_Ec2,
                            solve_outer_s0, solve_profiles)
from .kernels import KernelContext, ProfilePair, make_setup
from .quadrature import QuadratureConfig
from .scenario import (CoefficientLaw, CoefficientModel, PhysicalScenario,
                       derive_constants)

EXIT_OK = 0
EXIT_NO_SIGN_CHANGE = 2
EXIT_FIXED_POINT = 3
EXIT_PARSE = 4

_SCENARIO_FIELDS = ("T_ion", "T_b", "T_m", "Q0", "U_c", "l_m", "gamma_m",
                    "lambda0", "rho0", "c0", "gamma0", "nu", "sigma1", "sigma2")
_LAW_ROLES = ("c", "gamma", "lambda", "rho")


# --------------------------------------------------------------------------
# canonical JSON
# --------------------------------------------------------------------------

def _canon(obj):
    if isinstance(obj, dict):
        return "{" + ",".join(
            json.dumps(str(k)) + ":" + _canon(obj[k])
            for k in sorted(obj, key=str)) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    if isinstance(obj, (np.integer, int)):
        return str(int(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    return _canon(obj) + "\n"


def write_json(path: Path, obj):
    path.write_text(canonical_json(obj))


# --------------------------------------------------------------------------
# scenario loading
# --------------------------------------------------------------------------

def _law_from_table(table, where: str) -> CoefficientLaw:
    if "family" not in table:
        raise ParseError(f"missing field 'family' in [{where}]")
    if "parameters" not in table:
        raise ParseError(f"missing field 'parameters' in [{where}]")
    try:
        return CoefficientLaw(table["family"], tuple(table["parameters"]))
    except (ValueError, TypeError) as exc:
        raise ParseError(f"invalid coefficient law at [{where}]: {exc}") from exc


def _model_from_table(table, where: str) -> CoefficientModel:
    laws = {}
    for role in _LAW_ROLES:
        if role not in table:
            raise ParseError(f"missing table [{where}.{role}]")
        laws[role] = _law_from_table(table[role], f"{where}.{role}")
    return CoefficientModel(c=laws["c"], gamma=laws["gamma"],
                            lam=laws["lambda"], rho=laws["rho"])


def load_scenario_file(path):
    """Parse a scenario TOML file into (PhysicalScenario, raw dict)."""
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"scenario file not found: {path}")
    try:
        raw = tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"TOML syntax error in {path}: {exc}") from exc
    if "scenario" not in raw:
        raise ParseError("missing table [scenario]")
    sc = raw["scenario"]
    for name in _SCENARIO_FIELDS:
        if name not in sc:
            raise ParseError(f"missing field '{name}' in [scenario]")
    for phase in ("phase1", "phase2"):
        if phase not in raw:
            raise ParseError(f"missing table [{phase}]")
    try:
        scenario = PhysicalScenario(
            **{name: float(sc[name]) for name in _SCENARIO_FIELDS},
            coeff_model_1=_model_from_table(raw["phase1"], "phase1"),
            coeff_model_2=_model_from_table(raw["phase2"], "phase2"),
        )
    except SolverError as exc:
        raise ParseError(f"invalid scenario values: {exc}") from exc
    return scenario, raw


def load_assumption_bounds(raw) -> AssumptionBounds:
    if "assumption_bounds" not in raw:
        raise ParseError("missing table [assumption_bounds] "
                         "(required for certificates)")
    try:
        return AssumptionBounds(**{k: float(v)
                                   for k, v in raw["assumption_bounds"].items()})
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid [assumption_bounds]: {exc}") from exc


def _parse_bracket(text: str, flag: str):
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise ParseError(f"{flag} expects lo:hi, got {text!r}") from exc
    return lo, hi


def _solver_config(raw, args) -> FreeBoundaryConfig:
    solver = raw.get("solver", {})
    s0_bracket = tuple(solver.get("s0_bracket", (0.05, 1.5)))
    r0_bracket = solver.get("r0_bracket")
    r0_bracket = tuple(r0_bracket) if r0_bracket else None
    policy = solver.get("r0_policy", "manual")
    if getattr(args, "s0_bracket", None):
        s0_bracket = _parse_bracket(args.s0_bracket, "--s0-bracket")
    if getattr(args, "r0_bracket", None):
        r0_bracket = _parse_bracket(args.r0_bracket, "--r0-bracket")
    if getattr(args, "r0_policy", None):
        policy = args.r0_policy
    bounds = None
    if policy == "certificate":
        bounds = load_assumption_bounds(raw)
    fp = FixedPointConfig(tol=args.tol, max_iter=args.max_iter, seed=args.seed)
    try:
        return FreeBoundaryConfig(
            s0_bracket=s0_bracket, r0_bracket_policy=policy,
            r0_bracket=r0_bracket, assumption_bounds=bounds,
            scalar_tol=args.scalar_tol, fp=fp)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _profiles_to_dict(p: ProfilePair):
    return {
        "s0": p.s0, "r0": p.r0,
        "eta_nodes": list(map(float, p.eta_nodes)),
        "f1_values": list(map(float, p.f1_values)),
        "u_nodes": list(map(float, p.u_nodes)),
        "f2_values": list(map(float, p.f2_values)),
    }


def _profiles_from_dict(d) -> ProfilePair:
    return ProfilePair(
        float(d["s0"]), float(d["r0"]),
        np.asarray(d["eta_nodes"], dtype=float),
        np.asarray(d["f1_values"], dtype=float),
        np.asarray(d["u_nodes"], dtype=float),
        np.asarray(d["f2_values"], dtype=float))


def _write_manifest(out: Path, args, command: str):
    write_json(out / "manifest.json", {
        "command": command,
        "scenario": str(getattr(args, "scenario", getattr(args, "solution", ""))),
        "overrides": {
            "tol": args.tol, "max_iter": args.max_iter, "seed": args.seed,
            "n1": getattr(args, "n1", None), "n2": getattr(args, "n2", None),
        },
        "out": str(out),
        "seed": args.seed,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    })


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _solve_scenario(scenario, raw, args):
    """Shared solve path for cmd_solve and sweep rows.

    After the two-level root solve converges on the coarse grid, the
    similarity profiles are re-solved once at the found fronts on a 4x
    finer node set with a tight stopping tolerance.  The stored profiles
    then interpolate smoothly enough for downstream finite-difference
    verification of the reconstructed fields.
    """
    setup = make_setup(scenario, quad=QuadratureConfig(), n1=args.n1, n2=args.n2)
    cfg = _solver_config(raw, args)
    sol = solve_outer_s0(setup, cfg)
    fine = make_setup(scenario, quad=QuadratureConfig(),
                      n1=4 * args.n1, n2=4 * args.n2)
    fp = FixedPointConfig(tol=min(args.tol, 1e-12), max_iter=args.max_iter,
                          seed=args.seed)
    refined = solve_profiles(sol.s0_hat, sol.r0_star, fine, fp,
                             warm=sol.profiles)
    sol = replace(sol, profiles=refined.profiles,
                  residual_Ec1=residual_Ec1(sol.s0_hat, sol.r0_star,
                                            refined.context),
                  residual_Ec2=residual_Ec2(sol.s0_hat, sol.r0_star,
                                            refined.context))
    ratio = empirical_contraction_ratio(refined.context, fp)
    return fine, cfg, sol, ratio


def cmd_solve(args) -> int:
    scenario, raw = load_scenario_file(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    setup, cfg, sol, ratio = _solve_scenario(scenario, raw, args)
    constants = setup.constants

    doc = {
        "s0_hat": sol.s0_hat,
        "r0_star": sol.r0_star,
        "residual_Ec1": sol.residual_Ec1,
        "residual_Ec2": sol.residual_Ec2,
        "sign_configuration": sol.sign_configuration,
        "empirical_ratio": ratio,
        "iterations_total": int(sum(n for _, _, n in sol.inner_iteration_log)),
        "inner_solves": len(sol.inner_iteration_log),
        "constants": asdict(constants),
        "scenario": raw,
        "profiles": _profiles_to_dict(sol.profiles),
        "config": {
            "tol": args.tol, "max_iter": args.max_iter,
            "scalar_tol": args.scalar_tol, "n1": args.n1, "n2": args.n2,
            "seed": args.seed,
        },
        "version": __version__,
    }
    if args.certify:
        bounds = load_assumption_bounds(raw)
        cert = build_certificate(sol.s0_hat, sol.r0_star, bounds, constants)
        doc["certificate"] = asdict(cert)

    write_json(out / "solution.json", doc)
    _write_manifest(out, args, "solve")

    fields = build_fields(scenario, sol.s0_hat, sol.r0_star, sol.profiles, setup)
    t_values = (0.25, 0.5, 1.0, 2.0, 4.0)
    write_fields_csv(fields, out / "fields.csv", t_values)
    write_fronts_csv(fields, out / "fronts.csv", np.linspace(0.1, 4.0, 40))
    print(f"solved: s0_hat={sol.s0_hat:.12g} r0_star={sol.r0_star:.12g} "
          f"(|Ec1|={abs(sol.residual_Ec1):.3e}, |Ec2|={abs(sol.residual_Ec2):.3e})")
    return EXIT_OK


def cmd_certify(args) -> int:
    scenario, raw = load_scenario_file(args.scenario)
    bounds = load_assumption_bounds(raw)
    constants = derive_constants(scenario)
    cert = build_certificate(args.s0, args.r0, bounds, constants)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "certificate.json", asdict(cert))
    _write_manifest(out, args, "certify")
    verdict = "in Sigma (guaranteed contraction)" if cert.in_Sigma \
        else "outside Sigma"
    print(f"eps={cert.eps:.6g}  {verdict}")
    return EXIT_OK


def cmd_verify(args) -> int:
    p = Path(args.solution)
    if not p.is_file():
        raise ParseError(f"solution file not found: {args.solution}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid solution JSON: {exc}") from exc
    for key in ("scenario", "profiles", "s0_hat", "r0_star"):
        if key not in doc:
            raise ParseError(f"solution file missing field '{key}'")

    raw = doc["scenario"]
    scenario, _ = _scenario_from_raw(raw)
    profiles = _profiles_from_dict(doc["profiles"])
    setup = make_setup(scenario, n1=len(profiles.eta_nodes),
                       n2=len(profiles.u_nodes))
    fields = build_fields(scenario, doc["s0_hat"], doc["r0_star"],
                          profiles, setup)
    report = pde_residual(fields, n_z=args.n_z)

    ctx = fields.context
    rec1 = residual_Ec1(doc["s0_hat"], doc["r0_star"], ctx)
    rec2 = residual_Ec2(doc["s0_hat"], doc["r0_star"], ctx)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = {k: {"max_scaled": v.max_scaled, "l2_scaled": v.l2_scaled}
               for k, v in report.entries.items()}
    passed = report.worst() <= args.max_residual
    write_json(out / "residual_report.json", {
        "entries": entries,
        "worst": report.worst(),
        "threshold": args.max_residual,
        "passed": passed,
        "residual_Ec1_recomputed": rec1,
        "residual_Ec2_recomputed": rec2,
        "residual_Ec1_recorded": doc.get("residual_Ec1"),
        "residual_Ec2_recorded": doc.get("residual_Ec2"),
    })
    _write_manifest(out, args, "verify")
    print(f"worst scaled residual {report.worst():.3e} "
          f"({'PASS' if passed else 'FAIL'} at {args.max_residual:g})")
    return EXIT_OK if passed else 1


def _scenario_from_raw(raw):
    """Rebuild a PhysicalScenario from an embedded scenario dict."""
    sc = raw.get("scenario")
    if sc is None:
        raise ParseError("missing table [scenario]")
    for name in _SCENARIO_FIELDS:
        if name not in sc:
            raise ParseError(f"missing field '{name}' in [scenario]")
    scenario = PhysicalScenario(
        **{name: float(sc[name]) for name in _SCENARIO_FIELDS},
        coeff_model_1=_model_from_table(raw["phase1"], "phase1"),
        coeff_model_2=_model_from_table(raw["phase2"], "phase2"))
    return scenario, raw


def _sweep_row(packed):
    """One sweep sample; returns a plain dict (runs in a worker process)."""
    index, key, value, raw, ns = packed
    args = argparse.Namespace(**ns)
    row = {"index": index, "parameter": key, "value": value}
    try:
        raw = json.loads(json.dumps(raw))
        raw["scenario"][key] = value
        scenario, _ = _scenario_from_raw(raw)
        _, _, sol, ratio = _solve_scenario(scenario, raw, args)
        row.update(status="ok", s0_hat=sol.s0_hat, r0_star=sol.r0_star,
                   residual_Ec1=sol.residual_Ec1, residual_Ec2=sol.residual_Ec2,
                   empirical_ratio=ratio)
        if "assumption_bounds" in raw:
            bounds = load_assumption_bounds(raw)
            cert = build_certificate(sol.s0_hat, sol.r0_star, bounds,
                                     derive_constants(scenario))
            row.update(eps=cert.eps, in_Sigma=cert.in_Sigma)
    except SolverError as exc:
        row.update(status=f"error: {type(exc).__name__}: {exc}")
    return row


def cmd_sweep(args) -> int:
    scenario, raw = load_scenario_file(args.scenario)
    try:
        key, spec = args.vary.split("=", 1)
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ParseError(f"--vary expects key=lo:hi:n, got {args.vary!r}") from exc
    if key not in _SCENARIO_FIELDS:
        raise ParseError(f"unknown scenario field '{key}' for --vary")
    values = [lo] if n == 1 else list(np.linspace(lo, hi, n))

    ns = vars(args).copy()
    ns.pop("func", None)
    packs = [(i, key, float(v), raw, ns) for i, v in enumerate(values)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_sweep_row, packs))
    else:
        rows = [_sweep_row(p) for p in packs]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    columns = ["index", "parameter", "value", "status", "s0_hat", "r0_star",
               "residual_Ec1", "residual_Ec2", "empirical_ratio", "eps",
               "in_Sigma"]
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in sorted(rows, key=lambda r: r["index"]):
            w.writerow(row)
    _write_manifest(out, args, "sweep")
    ok = sum(1 for r in rows if r.get("status") == "ok")
    print(f"sweep complete: {ok}/{len(rows)} rows solved")
    return EXIT_OK


def cmd_export(args) -> int:
    p = Path(args.solution)
    if not p.is_file():
        raise ParseError(f"solution file not found: {args.solution}")
    doc = json.loads(p.read_text())
    scenario, _ = _scenario_from_raw(doc["scenario"])
    profiles = _profiles_from_dict(doc["profiles"])
    setup = make_setup(scenario, n1=len(profiles.eta_nodes),
                       n2=len(profiles.u_nodes))
    fields = build_fields(scenario, doc["s0_hat"], doc["r0_star"],
                          profiles, setup)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t_values = [float(t) for t in args.times.split(",")]
    if args.what in ("fields", "all"):
        write_fields_csv(fields, out / "fields.csv", t_values)
    if args.what in ("fronts", "all"):
        write_fronts_csv(fields, out / "fronts.csv", t_values)
    print(f"exported {args.what} tables to {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="fixed-point stopping tolerance")
    p.add_argument("--max-iter", type=int, default=200, dest="max_iter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stefancontact",
        description="Similarity solver for the two-phase Stefan problem of "
                    "closed electrical contacts with Thomson effect.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a scenario file")
    p.add_argument("scenario")
    _add_common(p)
    p.add_argument("--scalar-tol", type=float, default=1e-8, dest="scalar_tol")
    p.add_argument("--n1", type=int, default=64)
    p.add_argument("--n2", type=int, default=96)
    p.add_argument("--s0-bracket", dest="s0_bracket")
    p.add_argument("--r0-bracket", dest="r0_bracket")
    p.add_argument("--r0-policy", dest="r0_policy",
                   choices=("manual", "certificate"))
    p.add_argument("--certify", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="evaluate the certificate at (s0, r0)")
    p.add_argument("scenario")
    p.add_argument("--s0", type=float, required=True)
    p.add_argument("--r0", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="PDE-residual check of a solution file")
    p.add_argument("solution")
    _add_common(p)
    p.add_argument("--n-z", type=int, default=64, dest="n_z")
    p.add_argument("--max-residual", type=float, default=1e-5,
                   dest="max_residual")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="repeat solve over a parameter range")
    p.add_argument("scenario")
    p.add_argument("--vary", required=True, help="key=lo:hi:n")
    _add_common(p)
    p.add_argument("--scalar-tol", type=float, default=1e-8, dest="scalar_tol")
    p.add_argument("--n1", type=int, default=64)
    p.add_argument("--n2", type=int, default=96)
    p.add_argument("--s0-bracket", dest="s0_bracket")
    p.add_argument("--r0-bracket", dest="r0_bracket")
    p.add_argument("--r0-policy", dest="r0_policy",
                   choices=("manual", "certificate"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export", help="emit CSV tables from a solution file")
    p.add_argument("solution")
    _add_common(p)
    p.add_argument("--what", choices=("fields", "fronts", "all"), default="all")
    p.add_argument("--times", default="0.5,1.0,2.0")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NoSignChange as exc:
        print(f"error: no root bracketed: {exc}", file=sys.stderr)
        return EXIT_NO_SIGN_CHANGE
    except (MaxIterExceeded, DivergenceDetected, InnerFailure) as exc:
        print(f"error: fixed-point iteration failed: {exc}", file=sys.stderr)
        return EXIT_FIXED_POINT


if __name__ == "__main__":
    sys.exit(main())
