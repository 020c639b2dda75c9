"""Linearizer series: coefficient oracles, safe radius, pullback evaluation.

Closed forms used as oracles:
  f = z^2   at z0 = 1 (lam = 2):  h(w) = e^w,        a_n = 1/n!
  f = z^2-2 at z0 = 2 (lam = 4):  h(w) = 2cosh(sqrt(w)), a_n = 2/(2n)!
The second follows from 4cosh^2(x) - 2 = 2cosh(2x) with x = sqrt(w).
"""

import cmath
import math

import numpy as np
import pytest

from schroeder_lab.dynamics import RationalMap
from schroeder_lab.schroeder import (
    SafeRadiusError,
    SchroederSeries,
    critical_points_of_h,
    estimate_safe_radius,
    schroeder_coefficients,
    series_divide,
    taylor_shift,
)
from schroeder_lab.sphere import chi, is_inf

Z2 = RationalMap([0, 0, 1])
Z2M2 = RationalMap([-2, 0, 1])


@pytest.fixture(scope="module")
def exp_series():
    return schroeder_coefficients(Z2, 1.0, order=48)


@pytest.fixture(scope="module")
def cosh_series():
    return schroeder_coefficients(Z2M2, 2.0, order=48)


def test_taylor_shift():
    # p(z) = z^3 - 2z shifted to z0 = 1: p(1+s) = -1 + s + 3 s^2 + s^3
    out = taylor_shift(np.array([0, -2, 0, 1], dtype=complex), 1.0, 5)
    assert np.allclose(out, [-1, 1, 3, 1, 0, 0])


def test_series_divide():
    # (1) / (1 - z) = 1 + z + z^2 + ...
    q = series_divide(np.array([1.0 + 0j]), np.array([1.0, -1.0], dtype=complex), 6)
    assert np.allclose(q, np.ones(7))


def test_exp_coefficients(exp_series):
    fact = np.array([1.0 / math.factorial(n) for n in range(31)])
    assert np.max(np.abs(exp_series.coeffs[:31] - fact)) < 1e-12
    assert exp_series.coeffs[0] == 1.0
    assert exp_series.coeffs[1] == 1.0
    assert exp_series.multiplier == pytest.approx(2.0)


def test_cosh_coefficients(cosh_series):
    expected = np.array([2.0 / math.factorial(2 * n) for n in range(16)])
    assert np.max(np.abs(cosh_series.coeffs[:16] - expected)) < 1e-12
    assert cosh_series.coeffs[0] == 2.0
    assert cosh_series.coeffs[1] == 1.0
    assert cosh_series.coeffs[2] == pytest.approx(1 / 12)
    assert cosh_series.coeffs[3] == pytest.approx(1 / 360)


def test_normalization_always_holds():
    rng = np.random.default_rng(3)
    for _ in range(5):
        coeffs = rng.normal(size=4) + 1j * rng.normal(size=4)
        coeffs[-1] = 1.0
        f = RationalMap(coeffs)
        reps = [p for p in f.periodic_points(1) if p.is_repelling and not is_inf(p.point)]
        if not reps:
            continue
        s = schroeder_coefficients(f, reps[0], order=16)
        assert s.coeffs[0] == reps[0].point
        assert s.coeffs[1] == 1.0


def test_safe_radius_oracles(exp_series, cosh_series):
    assert exp_series.r_safe >= 1.0
    assert cosh_series.r_safe >= 1.0
    # degenerate truncation: tiny radius or outright failure
    try:
        s = schroeder_coefficients(Z2M2, 2.0, order=2)
        assert s.r_safe < 0.05
    except SafeRadiusError:
        pass


def test_non_repelling_rejected():
    with pytest.raises(ValueError):
        schroeder_coefficients(Z2, 0.0, order=8)  # superattracting fixed point


def test_evaluate_closed_forms(exp_series, cosh_series):
    assert abs(exp_series.evaluate(math.log(4)) - 4.0) < 1e-9
    assert exp_series.evaluate(0.0) == 1.0
    assert cosh_series.evaluate(0.0) == 2.0
    assert abs(cosh_series.evaluate(1.0) - 3.0861612696304874) < 1e-8
    # far outside the safe disk, through the pullback
    for w in (30.0, 200.0, -50.0 + 40.0j):
        expect = 2 * cmath.cosh(cmath.sqrt(w))
        got = cosh_series.evaluate(w)
        assert abs(got - expect) / abs(expect) < 1e-9


def test_evaluate_many_matches_scalar(exp_series):
    rng = np.random.default_rng(11)
    w = rng.normal(size=64) + 1j * rng.normal(size=64)
    w *= rng.uniform(0.1, 20.0, size=64)
    batch = exp_series.evaluate_many(w)
    for wi, bi in zip(w, batch):
        si = exp_series.evaluate(complex(wi))
        if is_inf(si) or is_inf(bi):
            assert is_inf(si) and is_inf(bi)
        else:
            assert chi(si, bi) < 1e-10


def test_functional_equation_residual(exp_series):
    # chi(f(h(w)), h(lam w)) small for 200 random w up to 10 r_safe
    rng = np.random.default_rng(5)
    w = rng.normal(size=200) + 1j * rng.normal(size=200)
    w *= 10.0 * exp_series.r_safe / np.max(np.abs(w))
    hv = exp_series.evaluate_many(w)
    hlv = exp_series.evaluate_many(exp_series.multiplier * w)
    for a, b in zip(hv, hlv):
        fa = Z2.evaluate(a, 1) if not is_inf(a) else a
        assert chi(fa, b) < 1e-7


def test_pullback_depth_consistency(exp_series):
    rng = np.random.default_rng(13)
    for _ in range(25):
        w = complex(rng.normal(), rng.normal())
        w *= exp_series.r_safe * 2.0 / max(abs(w), 1e-9)
        k = exp_series.depth_for(w)
        a = exp_series.evaluate(w, depth=k)
        b = exp_series.evaluate(w, depth=k + 1)
        assert chi(a, b) < 1e-8


def test_entire_for_polynomials(cosh_series):
    rng = np.random.default_rng(17)
    w = rng.normal(size=300) + 1j * rng.normal(size=300)
    w *= 1e3 / np.max(np.abs(w))
    values = cosh_series.evaluate_many(w)
    assert np.all(np.isfinite(values.real) & np.isfinite(values.imag))


def test_higher_period_cycle():
    # z^2 + 0.5 has a repelling 2-cycle with multiplier 4c + 4 = 6
    f = RationalMap([0.5, 0, 1])
    cyc = [p for p in f.periodic_points(2) if not is_inf(p.point)]
    s = schroeder_coefficients(f, cyc[0], order=32)
    assert s.multiplier == pytest.approx(6.0, abs=1e-9)
    rng = np.random.default_rng(23)
    w = rng.normal(size=50) + 1j * rng.normal(size=50)
    w *= 5 * s.r_safe / np.max(np.abs(w))
    hv = s.evaluate_many(w)
    hlv = s.evaluate_many(s.multiplier * w)
    for a, b in zip(hv, hlv):
        ga = f.evaluate(a, 2) if not is_inf(a) else a
        assert chi(ga, b) < 1e-7


def test_series_json_roundtrip(exp_series):
    obj = exp_series.to_json()
    assert set(obj) == {"z0", "lambda", "p", "coeffs", "r_safe"}
    back = SchroederSeries.from_json(obj, Z2)
    assert back.evaluate(0.5) == exp_series.evaluate(0.5)


def test_critical_points_of_h_cosh(cosh_series):
    # h'(w) = sinh(sqrt(w))/sqrt(w) vanishes at w = -(k pi)^2, k >= 1
    found = critical_points_of_h(cosh_series, box=(complex(-100, -8), complex(5, 8)), grid=220)
    targets = [-(k * math.pi) ** 2 for k in (1, 2, 3)]
    for t in targets:
        assert any(abs(w - t) < 1e-4 * (1 + abs(t)) for w, _ in found), (t, found)
    for w, res in found:
        assert res < 1e-8


def test_critical_points_of_h_exp(exp_series):
    assert critical_points_of_h(exp_series, box=8.0, grid=160) == []


def test_critical_values_inside_forward_critical_orbit(cosh_series):
    # image of every found zero of h' lies on the forward orbit of a critical
    # point of the base map
    found = critical_points_of_h(cosh_series, box=(complex(-100, -8), complex(5, 8)), grid=220)
    orbit = []
    z = 0.0  # the finite critical point of z^2 - 2
    for _ in range(12):
        z = Z2M2.evaluate(z, 1)
        orbit.append(z)
    for w, _ in found:
        hw = cosh_series.evaluate(w)
        assert any(chi(hw, o) < 1e-5 for o in orbit), hw


def test_evaluate_with_error(cosh_series):
    val, err = cosh_series.evaluate_with_error(80.0)
    true = 2 * math.cosh(math.sqrt(80))
    assert abs(val - true) <= max(err, 1e-7) * 10 + 1e-6 * true
    assert err >= 0.0
