"""Scenario parsing, dimensionless constants, and coefficient laws."""

import math

import numpy as np
import pytest

from conftest import CLASSICAL_TOML, MIXED_TOML, THOMSON_TOML
from stefancontact.cli import load_scenario_file
from stefancontact.errors import DomainError, NonPositiveParameter
from stefancontact.scenario import (CoefficientLaw, CoefficientModel,
                                    PhysicalScenario,
                                    build_dimensionless_coefficients,
                                    derive_constants)


def _const_model(c=1.0, g=1.0, lam=1.0, rho=1.0):
    mk = lambda v: CoefficientLaw("constant", (v,))
    return CoefficientModel(c=mk(c), gamma=mk(g), lam=mk(lam), rho=mk(rho))


def test_constants_hand_computed():
    sc, _ = load_scenario_file(THOMSON_TOML)
    k = derive_constants(sc)
    a = math.sqrt(sc.lambda0 / (sc.rho0 * sc.c0))
    assert abs(k.a - a) < 1e-15
    assert abs(k.B - (sc.T_b - sc.T_m) / sc.T_m) < 1e-15
    assert abs(k.Q - sc.Q0 / (sc.lambda0 * sc.T_m * math.sqrt(math.pi))) < 1e-12
    assert abs(k.M - 2.0 * sc.l_m * sc.gamma_m * a ** 2
               / (sc.lambda0 * sc.T_m)) < 1e-12
    D1 = sc.sigma1 * sc.U_c / (2.0 * sc.c0 * sc.gamma0 * a)
    assert abs(k.D1 - D1) < 1e-15
    assert abs(k.D1_star - sc.U_c * D1 / 2.0) < 1e-15
    assert abs(k.D2_star - sc.U_c * k.D2 / 2.0) < 1e-15
    assert k.nu == sc.nu


def test_mu_from_power_laws():
    sc, _ = load_scenario_file(MIXED_TOML)
    assert derive_constants(sc).mu == 2.5
    sc, _ = load_scenario_file(CLASSICAL_TOML)
    assert derive_constants(sc).mu == 3.0  # default when no power laws


def test_law_families():
    lin = CoefficientLaw("linear_in_f", (2.0, 0.5))
    assert np.allclose(lin(np.array([0.0, 0.2]), 1.0), [2.0, 2.2])
    pw = CoefficientLaw("power_law_in_eta", (0.9, -2.5))
    assert np.allclose(pw(0.1, np.array([1.0, 2.0])),
                       [0.9, 0.9 * 2.0 ** -2.5])
    assert not pw.depends_on_temperature
    const = CoefficientLaw("constant", (1.3,))
    assert np.allclose(const(np.array([0.0, -0.5]), 2.0), [1.3, 1.3])


def test_law_validation():
    with pytest.raises(ValueError):
        CoefficientLaw("cubic", (1.0,))
    with pytest.raises(ValueError):
        CoefficientLaw("constant", (1.0, 2.0))
    with pytest.raises(NonPositiveParameter):
        CoefficientLaw("constant", (-1.0,))


def test_scenario_validation():
    kw = dict(T_ion=3000.0, T_b=1300.0, T_m=1000.0, Q0=1.0, U_c=0.0,
              l_m=1.0, gamma_m=1.0, lambda0=1.0, rho0=1.0, c0=1.0,
              gamma0=1.0, nu=0.5, sigma1=0.0, sigma2=0.0,
              coeff_model_1=_const_model(), coeff_model_2=_const_model())
    PhysicalScenario(**kw)  # valid
    with pytest.raises(NonPositiveParameter):
        PhysicalScenario(**{**kw, "T_b": 3500.0})
    with pytest.raises(NonPositiveParameter):
        PhysicalScenario(**{**kw, "Q0": 0.0})
    with pytest.raises(NonPositiveParameter):
        PhysicalScenario(**{**kw, "nu": 1.5})
    with pytest.raises(NonPositiveParameter):
        PhysicalScenario(**{**kw, "rho0": -0.1})


def test_dimensionless_coefficients_are_ratios():
    sc, _ = load_scenario_file(MIXED_TOML)
    co = build_dimensionless_coefficients(sc)
    f = np.array([0.0, 0.1])
    eta = np.array([0.6, 0.8])
    # N = c*gamma/(c0*gamma0) with c linear in f, gamma constant
    expect = 1.0 * (1.0 + 0.1 * f) * 1.0 / (sc.c0 * sc.gamma0)
    assert np.allclose(co.N1(f, eta), expect)
    # L2 = lambda2/lambda0 with a power law in eta
    assert np.allclose(co.L2(f, eta), 1.1 * eta ** 2.5 / sc.lambda0)
    assert co.sigma_f1 == sc.sigma1 and co.sigma_f2 == sc.sigma2


def test_temperature_validity_window():
    sc, _ = load_scenario_file(MIXED_TOML)
    co = build_dimensionless_coefficients(sc)
    f_max = (sc.T_ion - sc.T_m) / sc.T_m
    with pytest.raises(DomainError):
        co.N1(np.array([f_max * 1.5]), np.array([0.6]))
    with pytest.raises(DomainError):
        co.N1(np.array([-1.2]), np.array([0.6]))
