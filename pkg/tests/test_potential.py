"""Log-potential operator and fixed-point solver.

The operator-inversion test applies an independent finite-difference
Laplacian (test-side oracle) on top of the kernel-derivative Laplacian, so
the kernel chain and the polyharmonic chain are validated jointly without
sharing code with the quantity under test.
"""

import math

import numpy as np
import pytest

from qconformal import calculus
from qconformal.potential import (PotentialConfig, picard_solve,
                                  potential_from_density)
from qconformal.profiles import (CurvatureDensity, SphereProfile,
                                 bump_density, density_from_profile)


def test_zero_density_gives_constant():
    d = CurvatureDensity(n=4, f=lambda s: np.zeros_like(s),
                         support_radius=1.0, total=0.0)
    p = potential_from_density(d, PotentialConfig(normalization=3.0))
    r = np.array([0.0, 0.5, 2.0, 10.0])
    assert np.allclose(p.eval(r, 0), 3.0, atol=1e-14)
    assert np.allclose(p.eval(r, 1), 0.0, atol=1e-14)


def test_sphere_round_trip_with_derivatives():
    lam = 1.0
    p = potential_from_density(density_from_profile(SphereProfile(lam, 4)))
    r = np.unique(np.concatenate([np.linspace(0.0, 50.0, 60),
                                  np.geomspace(1e-3, 1.0, 20)]))
    ue = -np.log(1.0 + r ** 2 / lam ** 2)       # sphere shifted to u(0) = 0
    assert np.max(np.abs(np.asarray(p.eval(r, 0)) - ue)) <= 1e-6
    due = -2.0 * r / (lam ** 2 + r ** 2)
    assert np.max(np.abs(np.asarray(p.eval(r, 1)) - due)) <= 1e-8
    ddue = -2.0 * (lam ** 2 - r ** 2) / (lam ** 2 + r ** 2) ** 2
    assert np.max(np.abs(np.asarray(p.eval(r, 2)) - ddue)) <= 1e-8


def test_linearity_over_densities():
    d1 = bump_density(4, 0.3, radius=1.5)
    d2 = bump_density(4, 0.6, radius=3.0)

    def fsum(s):
        return d1.f(s) + d2.f(s)

    dsum = CurvatureDensity(n=4, f=fsum, support_radius=3.0,
                            total=d1.total + d2.total, breaks=(1.5,))
    r = np.array([0.0, 0.7, 2.0, 5.0, 20.0])
    lhs = np.asarray(potential_from_density(dsum).eval(r, 0))
    rhs = np.asarray(potential_from_density(d1).eval(r, 0)) \
        + np.asarray(potential_from_density(d2).eval(r, 0))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_operator_inversion_recovers_density():
    """density -> potential -> (kernel Laplacian) -> (FD Laplacian) -> density.

    The outer Laplacian uses 4th-order central finite differences as an
    independent oracle; the inner one comes from kernel derivatives.
    """
    d = bump_density(4, 0.7)
    p = potential_from_density(d)

    def neg_lap(r):
        return np.asarray(calculus.polyharmonic(p, r, 1))

    h = 0.02
    r = np.linspace(0.3, 1.5, 13)
    offsets = np.array([-2, -1, 0, 1, 2]) * h
    g = np.stack([neg_lap(r + o) for o in offsets])    # (5, len(r))
    d2 = (-g[0] + 16 * g[1] - 30 * g[2] + 16 * g[3] - g[4]) / (12 * h ** 2)
    d1 = (g[0] - 8 * g[1] + 8 * g[3] - g[4]) / (12 * h)
    recovered = -(d2 + 3.0 / r * d1)
    exact = d.f(r)
    assert np.max(np.abs(recovered - exact) / np.abs(exact)) <= 1e-6


def test_far_field_rate_for_compact_density():
    d = bump_density(4, 0.5)
    p = potential_from_density(d)
    radii = np.array([10.0, 30.0, 100.0, 300.0, 1000.0, 4000.0])
    e = np.asarray(p.eval(radii, 0)) + 0.5 * np.log(radii)
    c_prime = e[-1]                      # fitted constant from the far field
    resid = np.abs(e - c_prime)
    # decay at least like 1/r: residuals shrink by >= ~3x per 10x in radius
    assert resid[2] <= resid[0] / 3.0
    assert resid[4] <= resid[2] / 3.0
    assert resid[4] <= 1e-4


def test_beyond_support_laplacian_identity():
    # for compact densities, r^2 (-Delta u) equals (n-2) alpha0 exactly
    # beyond the support (power-kernel reduction of the second derivative)
    a0 = 0.8
    p = potential_from_density(bump_density(4, a0))
    for r in (3.0, 10.0, 100.0):
        neg_lap = float(calculus.polyharmonic(p, r, 1))
        assert r * r * neg_lap == pytest.approx(2.0 * a0, rel=1e-11)


def test_tail_error_for_unbounded_decay_is_reported():
    from qconformal.profiles import DecayBound, TailError
    bad = CurvatureDensity(n=4, f=lambda s: (1.0 + s) ** -4.0,
                           decay=DecayBound(1.0, 4.0, 1.0), total=1.0)
    with pytest.raises(TailError):
        potential_from_density(bad)


def test_picard_zero_q_is_identity():
    res = picard_solve(4, lambda s: np.zeros_like(np.asarray(s)), r_cut=2.0,
                       grid_points=16, tol=1e-12)
    assert res.converged
    assert np.max(np.abs(res.u_grid)) == 0.0
    assert res.alpha0 == pytest.approx(0.0, abs=1e-15)


def test_picard_gaussian_q_self_consistent():
    res = picard_solve(4, lambda s: 0.1 * np.exp(-np.asarray(s) ** 2),
                       r_cut=6.0, tol=1e-10)
    assert res.converged
    assert res.residual <= 1e-8
    # fixed point: re-applying the operator reproduces the grid values
    again = np.asarray(res.profile.eval(res.grid, 0))
    assert np.max(np.abs(again - res.u_grid)) <= 1e-8
    # alpha0 self-consistency: density integral matches 2 total / scale
    total = res.density.total
    assert res.alpha0 == pytest.approx(2 * total / (16 * math.pi ** 2),
                                       rel=1e-12)


def test_picard_sphere_is_stationary_for_constant_q():
    """Q identically 6 with the sphere as the start: the exact solution, so
    the residual collapses immediately (stress test)."""
    sphere = SphereProfile(1.0, 4)
    cfg = PotentialConfig(normalization=math.log(2.0))
    res = picard_solve(4, lambda s: np.full_like(np.asarray(s, float), 6.0),
                       r_cut=300.0, u0=sphere, grid_points=128, tol=1e-9,
                       config=cfg)
    assert res.converged
    assert res.residual <= 1e-8
    r = np.array([0.0, 1.0, 5.0, 20.0])
    assert np.max(np.abs(np.asarray(res.profile.eval(r, 0))
                         - np.asarray(sphere.eval(r, 0)))) <= 1e-6
