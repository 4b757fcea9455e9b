import csv
import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import interface_multiplier
from timeschwarz.spectral import (SpectralParams, optimal_theta, rho, rho_at_zero, rho_bound,
                                  rho_core_sd1, rho_core_sn1, rho_max, rho_relaxed,
                                  sd1_loose_bound, sigma, sweep)

P = SpectralParams()  # nu = 0.1, gamma = 10, T = 1, alpha = 0.4

params = st.builds(
    lambda nu, gamma, T, frac: SpectralParams(nu, gamma, T, frac * T),
    st.floats(1e-3, 10.0), st.floats(0.0, 100.0), st.floats(0.1, 10.0), st.floats(0.01, 0.99))
eigs = st.floats(0.0, 1e3)


@pytest.mark.parametrize("variant", ["SD1", "SD2", "SN1", "SN2"])
@pytest.mark.parametrize("d", [0.0, 0.3, 1.0, 10.0, 100.0])
def test_factor_matches_exact_interface_map(variant, d):
    exact = float(interface_multiplier(d, P.nu, P.gamma, P.horizon, P.alpha, variant))
    assert rho(variant, d, P) == pytest.approx(abs(exact), rel=1e-12)


@pytest.mark.parametrize("variant,core", [("SD1", rho_core_sd1), ("SN1", rho_core_sn1)])
@pytest.mark.parametrize("p", [P, SpectralParams(1.0, 0.0, 2.0, 1.5), SpectralParams(0.01, 50.0, 3.0, 0.2)])
def test_interface_multiplier_is_minus_core(variant, core, p):
    # the sign fixes the relaxed factor: (1 - theta) f - theta F f
    for d in (0.0, 2.0, 30.0):
        exact = float(interface_multiplier(d, p.nu, p.gamma, p.horizon, p.alpha, variant))
        assert exact == pytest.approx(-core(d, p), rel=1e-12)


def test_zero_mode_values():
    assert rho_at_zero("SD1", P) == pytest.approx(0.88918, abs=1e-5)
    assert rho_at_zero("SN1", P) == pytest.approx(1.12463, abs=1e-5)
    for v in ("SD1", "SD2", "SN1", "SN2"):
        assert rho_at_zero(v, P) == pytest.approx(rho(v, 0.0, P), rel=1e-13)
    with pytest.raises(ValueError):
        rho_at_zero("SD3", P)


def test_optimal_theta_values():
    assert optimal_theta("SD1", P) == pytest.approx(0.692, abs=5e-4)
    assert optimal_theta("SN1", P) == pytest.approx(0.640, abs=5e-4)
    with pytest.raises(ValueError):
        optimal_theta("SD2", P)


def test_sigma():
    assert sigma(0.0, 0.25) == 2.0
    assert sigma(3.0, 1 / 16) == 5.0
    with pytest.raises(ValueError):
        sigma(1.0, 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        SpectralParams(alpha=1.0)
    with pytest.raises(ValueError):
        SpectralParams(nu=-1.0)
    with pytest.raises(ValueError):
        SpectralParams(gamma=-1.0)


def test_divergent_variants_on_unit_to_hundred():
    d = np.linspace(1, 100, 100)
    assert np.all(rho("SD2", d, P) > 1) and np.all(rho("SN2", d, P) > 1)


@pytest.mark.parametrize("variant", ["SD3", "SD4", "SN3", "SN4"])
def test_single_field_variants_are_one(variant):
    d = np.concatenate([[0.0], np.logspace(-2, 4, 50)])
    assert np.all(rho(variant, d, P) == 1.0)


@settings(max_examples=200, deadline=None)
@given(p=params, d=eigs)
def test_inverse_identities(p, d):
    assert rho("SD2", d, p) * rho("SD1", d, p) == pytest.approx(1.0, rel=1e-12)
    assert rho("SN2", d, p) * rho("SN1", d, p) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(p=params, d=eigs)
def test_relaxation_at_one_is_unrelaxed(p, d):
    for v in ("SD1", "SN1"):
        assert rho_relaxed(v, d, 1.0, p) == rho(v, d, p)


@settings(max_examples=100, deadline=None)
@given(p=params)
def test_equioscillation(p):
    for v in ("SD1", "SN1"):
        th = optimal_theta(v, p)
        assert 0 < th < 1
        assert abs(1 - th) == pytest.approx(rho_relaxed(v, 0.0, th, p), abs=1e-10)


def test_relaxed_spectrum_maximum_at_optimum():
    d = np.concatenate([[0.0], np.logspace(-2, 4, 2000)])
    for v in ("SD1", "SN1"):
        th = optimal_theta(v, P)
        best = np.max(rho_relaxed(v, d, th, P))
        for other in (th - 0.05, th + 0.05):
            assert np.max(rho_relaxed(v, d, other, P)) > best


def test_literal_relaxed_form_differs():
    th = optimal_theta("SD1", P)
    assert rho_relaxed("SD1", 0.0, th, P, literal=True) == pytest.approx(abs(1 - th * 0.88918), abs=1e-5)
    with pytest.raises(ValueError):
        rho_relaxed("SD1", 1.0, 0.0, P)
    with pytest.raises(ValueError):
        rho_relaxed("SD3", 1.0, 0.5, P)


def _assert_contracts(p, d):
    r = rho("SD1", d, p)
    if r < 1 - 1e-12:
        return
    # the exact factor can be 1 - 1e-27 when both tanh round to 1; check it exactly
    assert r <= 1 + 4 * np.finfo(float).eps
    exact = interface_multiplier(d, p.nu, p.gamma, p.horizon, p.alpha, "SD1")
    assert -1 < exact < 1  # no arithmetic: abs() would round to the ambient precision


@settings(max_examples=200, deadline=None)
@given(p=params.filter(lambda p: p.alpha <= p.horizon / 2), d=eigs)
def test_sd1_contracts_for_alpha_up_to_half(p, d):
    _assert_contracts(p, d)


@settings(max_examples=200, deadline=None)
@given(p=params.map(lambda p: dataclasses.replace(p, gamma=0.0)), d=eigs)
def test_sd1_contracts_without_terminal_weight(p, d):
    _assert_contracts(p, d)


def test_contraction_at_rounding_edge():
    p = SpectralParams(nu=0.001, gamma=0.0, horizon=2.0, alpha=1.0)
    assert rho("SD1", 0.0, p) == pytest.approx(1.0, abs=1e-15)
    exact = interface_multiplier(0.0, p.nu, p.gamma, p.horizon, p.alpha, "SD1")
    assert -1 < exact < mp.mpf(-1) + mp.mpf("1e-20")


@settings(max_examples=50, deadline=None)
@given(p=params.map(lambda p: dataclasses.replace(p, gamma=0.0)), d_min=st.floats(0.0, 100.0))
def test_gamma_zero_bounds_dominate(p, d_min):
    d = np.concatenate([[d_min], np.geomspace(max(d_min, 1e-3), 1e4, 200)])
    for v in ("SD1", "SN1"):
        assert np.max(rho(v, d, p)) <= rho_bound(v, d_min, p) * (1 + 1e-12)
    assert rho_bound("SD1", d_min, p) <= sd1_loose_bound(d_min, p) * (1 + 1e-12)


def test_bound_requires_gamma_zero():
    with pytest.raises(ValueError):
        rho_bound("SD1", 1.0, P)


def test_gamma_zero_monotone():
    p0 = dataclasses.replace(P, gamma=0.0)
    d = np.linspace(0, 1e3, 3001)
    for v in ("SD1", "SN1"):
        assert np.all(np.diff(rho(v, d, p0)) <= 0)


@pytest.mark.parametrize("variant", ["SD1", "SN1"])
def test_smoother_asymptotics(variant):
    assert rho(variant, 1e3, P) * 4 * P.nu * 1e6 == pytest.approx(1.0, abs=0.01)


def test_large_arguments_stay_finite():
    d = np.array([1e4, 1e6, 1e8])
    for v in ("SD1", "SD2", "SN1", "SN2"):
        assert np.all(np.isfinite(rho(v, d, P)))


def test_rho_max_and_sweep_csv(tmp_path):
    d = np.array([0.0, 1.0, 10.0])
    assert rho_max("SD1", d, P) == rho("SD1", 0.0, P)
    with pytest.raises(ValueError):
        rho_max("SD1", [], P)
    table = sweep("SD1", d, P)
    path = tmp_path / "sd1.csv"
    table.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["d", "rho"]
    assert [float(r[1]) for r in rows[1:]] == list(rho("SD1", d, P))
    with pytest.raises(ValueError):
        sweep("SD1", d[::-1], P)


def test_relaxed_sweep_uses_theta():
    th = optimal_theta("SN1", P)
    table = sweep("SN1", [0.0, 5.0], P, theta=th)
    assert table.theta == th
    assert table.rho[0] == pytest.approx(1 - th, abs=1e-12)
    assert math.isclose(table.rho[1], rho_relaxed("SN1", 5.0, th, P))
