"""Basin-of-infinity census, asymptotic arcs, spiral ratios and the
multiplier inequality."""

import math

import numpy as np
import pytest

from schroeder_lab.basins import (
    basin_census,
    el_condition,
    minimizing_arg_branch,
    ply_check,
    spiral_closed_form,
    spiral_term,
    trace_asymptotic_arc,
)
from schroeder_lab.dynamics import RationalMap
from schroeder_lab.schroeder import schroeder_coefficients

Z2 = RationalMap([0, 0, 1])


@pytest.fixture(scope="module")
def exp_series():
    return schroeder_coefficients(Z2, 1.0, order=64)


@pytest.fixture(scope="module")
def exp_census(exp_series):
    return basin_census(exp_series, n=192)


def test_exp_census(exp_census):
    assert exp_census.q_inf == 1
    assert exp_census.q == 1
    assert exp_census.p_inf == 0
    assert exp_census.m_inf == 1
    assert exp_census.p == 0
    assert not exp_census.artifact


def test_exp_halfplane_component(exp_series, exp_census):
    gid = exp_census.unbounded_ids[0]
    info = exp_census.grid.info[gid]
    # h^{-1}({|z| > R_esc}) for e^w is a right half plane
    assert all(w.real > 0 for w in info.samples)


def test_census_invariants(exp_census):
    c = exp_census
    assert 0 <= c.p_inf < max(c.q_inf, 1)
    assert c.q * c.m_inf == c.q_inf
    assert c.p * c.m_inf == c.p_inf


def test_basilica_two_components():
    # alpha fixed point of z^2 - 1: two basin components swapped by the
    # multiplier, rotation number 1/2
    z0 = (1 - math.sqrt(5)) / 2
    s = schroeder_coefficients(RationalMap([-1, 0, 1]), z0, order=64)
    c = basin_census(s, n=256)
    assert c.q_inf == 2
    assert c.q == 2
    assert c.p_inf == 1
    assert c.m_inf == 1
    assert c.p == 1
    rep = ply_check(c.q_inf, c.p, c.q, s.multiplier, 2)
    assert not rep.violation
    assert rep.lhs == pytest.approx(2.0, abs=1e-9)


def test_arc_translation_identity(exp_series, exp_census):
    gid = exp_census.unbounded_ids[0]
    arc = exp_census.arcs[gid]
    lamN = exp_series.multiplier ** arc.N
    # gamma(t+1) = lam^N gamma(t) to machine precision at sampled t
    ts, pts = arc.ts, arc.points
    for i in range(0, len(ts) // 2, 7):
        j = np.searchsorted(ts, ts[i] + 1.0)
        if j >= len(ts) or abs(ts[j] - ts[i] - 1.0) > 1e-12:
            continue
        assert abs(pts[j] - lamN * pts[i]) <= 1e-12 * abs(pts[j])


def test_arc_modulus_grows_by_integer_steps(exp_census):
    arc = exp_census.arcs[exp_census.unbounded_ids[0]]
    k = np.searchsorted(arc.ts, np.arange(0.0, arc.ts[-1]))
    mods = np.abs(arc.points[k])
    assert np.all(np.diff(mods) > 0)


def test_exp_spiral_term(exp_series, exp_census):
    arc = exp_census.arcs[exp_census.unbounded_ids[0]]
    term = spiral_term(arc)
    assert term < 0.01
    closed = spiral_closed_form(exp_census.q, exp_census.p, exp_series.multiplier)
    assert closed == 0.0
    assert abs(term - closed**2) < 0.05


def test_synthetic_spiral_arc():
    # gamma(t) = e^{(1+i)t}: arg equals log modulus, ratio -> 1
    from schroeder_lab.basins import ArcTrace
    t = np.linspace(1.0, 40.0, 2000)
    pts = np.exp((1 + 1j) * t)
    arc = ArcTrace(ts=t, points=pts, args=t.copy(), images=None,
                   lam=math.e ** (1 + 1), N=1, delta_period=1.0)
    term = spiral_term(arc, min_modulus=1e4)
    assert term == pytest.approx(1.0, abs=0.05)


def test_ply_exp_case():
    rep = ply_check(1, 0, 1, 2.0, 2)
    assert rep.lhs == pytest.approx(1.0)
    assert rep.rhs == pytest.approx(2.0)
    assert rep.slack == pytest.approx(1.0)
    assert not rep.violation


def test_ply_quarter_rotation():
    # lam = 2i with p/q = 1/4: the branch pi/2 = 2 pi / 4 kills the term
    rep = ply_check(1, 1, 4, 2j, 2)
    assert rep.arg_branch == pytest.approx(math.pi / 2)
    assert rep.lhs == pytest.approx(1.0)


def test_ply_rhs_is_twice_growth_order():
    from schroeder_lab.growth import valiron_order
    for lam, d in ((2.0, 2), (4.0, 2), (3.0, 3)):
        rep = ply_check(1, 0, 1, lam, d)
        assert rep.rhs == pytest.approx(2 * valiron_order(d, 1, lam))


def test_ply_sharpness_arithmetic():
    # interval Julia set with lam = -2: q_inf = 2, p/q = 1/2, equality
    rep = ply_check(2, 1, 2, -2.0, 2)
    assert rep.lhs == pytest.approx(2.0)
    assert rep.rhs == pytest.approx(2.0)
    assert rep.slack == pytest.approx(0.0, abs=1e-12)
    assert not rep.violation


def test_ply_flags_violation():
    rep = ply_check(2, 0, 1, -2.0, 2)
    assert rep.violation


def test_minimizing_branch():
    assert minimizing_arg_branch(2.0, 0, 1) == 0.0
    assert minimizing_arg_branch(2j, 1, 4) == pytest.approx(math.pi / 2)
    # arg(-2) = pi; target 0 -> branch +-pi, keep magnitude pi
    assert abs(minimizing_arg_branch(-2.0, 0, 1)) == pytest.approx(math.pi)


def test_el_condition(exp_series):
    assert el_condition(exp_series, R=8.0, n=192) is True
    # Cantor Julia set: c = -3 escapes everywhere, no slow band
    s = schroeder_coefficients(RationalMap([-3, 0, 1]),
                               (1 + math.sqrt(13)) / 2, order=48)
    assert el_condition(s, R=4.0, n=192) is False
