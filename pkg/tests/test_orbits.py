"""Critical orbits, omega limits, the recurrent-critical set, degree probe."""

import numpy as np
import pytest

from schroeder_lab.dynamics import RationalMap
from schroeder_lab.orbits import (
    critical_orbit,
    julia_membership,
    mane_set_approx,
    omega_limit,
    semihyperbolicity_probe,
)
from schroeder_lab.sphere import INF, chi, is_inf

Z2 = RationalMap([0, 0, 1])
Z2M1 = RationalMap([-1, 0, 1])
Z2M2 = RationalMap([-2, 0, 1])


def test_critical_orbit_two_cycle():
    orb = critical_orbit(Z2M1, 0.0, length=100)
    assert not orb.escaped
    assert np.allclose(orb.points[:4], [0, -1, 0, -1])


def test_critical_orbit_escape():
    orb = critical_orbit(RationalMap([1, 0, 1]), 0.0, length=100)
    assert orb.escaped
    assert np.allclose(orb.points[:4].real, [0, 1, 2, 5])


def test_critical_orbit_constant():
    orb = critical_orbit(Z2, 0.0, length=50)
    assert np.all(orb.points == 0)


def test_omega_two_cycle():
    om = omega_limit(critical_orbit(Z2M1, 0.0, length=2000))
    centers = sorted(c.center.real for c in om.clusters)
    assert centers == pytest.approx([-1.0, 0.0], abs=1e-9)
    assert om.recurrent


def test_omega_escape():
    om = omega_limit(critical_orbit(RationalMap([1, 0, 1]), 0.0, length=2000))
    assert len(om.clusters) == 1 and is_inf(om.clusters[0].center)


def test_omega_eventually_fixed():
    om = omega_limit(critical_orbit(Z2M2, 0.0, length=2000))
    assert len(om.clusters) == 1
    assert om.clusters[0].center == pytest.approx(2.0)
    assert not om.recurrent


def test_omega_eps_monotone():
    orb = critical_orbit(Z2M1, 0.0, length=2000)
    big = omega_limit(orb, eps=1e-2)
    small = omega_limit(orb, eps=1e-4)
    assert len(small.clusters) >= len(big.clusters)
    for cl in small.clusters:
        assert any(chi(cl.center, c.center) < 1e-2 for c in big.clusters)


def test_julia_membership():
    assert julia_membership(Z2, 1.0)
    assert julia_membership(Z2, complex(np.cos(1.0), np.sin(1.0)))
    assert not julia_membership(Z2, 0.5)
    assert not julia_membership(Z2, 2.0)


def test_mane_sets_empty_for_tame_maps():
    assert mane_set_approx(Z2, length=2000).points == []
    assert mane_set_approx(Z2M1, length=2000).points == []
    # c = 0 lands on the repelling fixed point 2 but is not recurrent
    assert mane_set_approx(Z2M2, length=2000).points == []


def test_probe_degree_growth_at_zero():
    rep = semihyperbolicity_probe(Z2, 0.0, r=0.05, k_max=8, base_grid=512)
    assert rep.degrees == [2**k for k in range(1, 9)]
    assert rep.growing


def test_probe_degree_growth_at_infinity():
    rep = semihyperbolicity_probe(Z2, INF, r=0.05, k_max=8, base_grid=512)
    assert rep.degrees == [2**k for k in range(1, 9)]
    assert rep.growing
    assert "reciprocal chart" in " ".join(rep.notes)


def test_probe_flat_on_julia_set():
    rep = semihyperbolicity_probe(Z2, 1.0, r=0.05, k_max=10, base_grid=512)
    assert rep.degrees == [1] * 10
    assert not rep.growing


def test_probe_consistency_on_hyperbolic_sample():
    # 20 sample points on J(z^2) (the unit circle): bounded degree
    rng = np.random.default_rng(31)
    angles = rng.uniform(0, 2 * np.pi, size=20)
    for th in angles:
        a = complex(np.cos(th), np.sin(th))
        rep = semihyperbolicity_probe(Z2, a, r=0.05, k_max=5, base_grid=256)
        assert max(rep.degrees) == 1, (a, rep.degrees)
    # and growth exactly at the attracting fixed points
    for a in (0.0, INF):
        rep = semihyperbolicity_probe(Z2, a, r=0.05, k_max=5, base_grid=256)
        assert rep.growing


def test_probe_basilica_superattracting_cycle():
    # degrees over the superattracting 2-cycle point 0 grow like 2^ceil(k/2)
    rep = semihyperbolicity_probe(Z2M1, 0.0, r=0.02, k_max=6, base_grid=512, base_box=1.6)
    assert rep.growing
    assert rep.degrees[-1] >= 4
