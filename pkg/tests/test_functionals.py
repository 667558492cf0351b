"""Limits at infinity, means, entropy, and the two mass routes."""

import math

import numpy as np
import pytest

from qconformal import functionals
from qconformal.functionals import (LimitEstimate, ball_mean,
                                    completeness_flag, conformal_mass,
                                    exp_mean_ratio, geometric_schedule,
                                    limit_at_infinity, mean_log_slope,
                                    pohozaev_mass, pohozaev_mass_from_profile,
                                    sphere_mean_limits, volume_entropy)
from qconformal.profiles import (ConstantProfile, QuadraticProfile,
                                 SphereProfile)


# ---------------------------------------------------------------------------
# extrapolation machinery on synthetic sequences
# ---------------------------------------------------------------------------

def test_limit_exact_for_power_sequences():
    radii = geometric_schedule()
    est = limit_at_infinity(lambda r: 7.0 + 3.0 / r - 2.0 / r ** 2, radii)
    assert est.model == "power"
    assert est.value == pytest.approx(7.0, abs=1e-10)
    assert est.converged


def test_limit_exact_for_log_sequences():
    radii = geometric_schedule(10.0, 2.0, 12)
    est = limit_at_infinity(lambda r: -1.5 + 0.8 / np.log(r)
                            - 0.3 / np.log(r) ** 2, radii)
    assert est.model == "log"
    assert est.value == pytest.approx(-1.5, abs=1e-9)
    assert est.converged


def test_limit_error_dominates_last_sample_gap():
    # noisy samples: the error bar must cover at least a quarter of the gap
    # between the last sample and the reported limit
    radii = geometric_schedule()
    rng = np.random.default_rng(7)
    samples = 2.0 + 1.0 / radii + 0.05 * rng.standard_normal(radii.size)
    est = limit_at_infinity(samples, radii)
    assert est.error >= abs(est.last_sample - est.value) / 4.0
    assert est.error > 0.0


def test_limit_flags_divergent_sequences():
    radii = geometric_schedule()
    est = limit_at_infinity(lambda r: 0.01 * r ** 2, radii)
    assert not est.converged


def test_completeness_flag():
    assert completeness_flag(0.3) == "complete"
    assert completeness_flag(1.7) == "incomplete"
    assert completeness_flag(1.0) == "indeterminate"
    assert completeness_flag(1.0 + 1e-12) == "indeterminate"


# ---------------------------------------------------------------------------
# sphere-mean limits
# ---------------------------------------------------------------------------

def test_sphere_mean_limits_constant_profile():
    lim = sphere_mean_limits(ConstantProfile(4.0, 4))
    assert lim.laplacian.value == pytest.approx(0.0, abs=1e-12)
    assert lim.slope.value == pytest.approx(0.0, abs=1e-12)
    assert lim.gradient_sq.value == pytest.approx(0.0, abs=1e-12)


def test_sphere_mean_limits_round_sphere():
    # alpha0 = 2: limits are ((n-2)*2, -2, 4) = (4, -2, 4) in dimension 4
    lim = sphere_mean_limits(SphereProfile(1.0, 4))
    assert lim.laplacian.value == pytest.approx(4.0, rel=1e-6)
    assert lim.slope.value == pytest.approx(-2.0, rel=1e-6)
    assert lim.gradient_sq.value == pytest.approx(4.0, rel=1e-6)
    votes = lim.alpha0_votes(4)
    assert np.allclose(votes, 2.0, rtol=1e-6)


def test_mean_log_slope_round_sphere():
    est = mean_log_slope(SphereProfile(1.0, 4),
                         geometric_schedule(10.0, 2.0, 12))
    assert est.value == pytest.approx(-2.0, rel=1e-3)


# ---------------------------------------------------------------------------
# exponential sphere means (Jensen) and ball means
# ---------------------------------------------------------------------------

def test_exp_mean_ratio_trivial_cases():
    # centered sphere: the mean of a radial function is the function itself,
    # so the ratio is exactly 1 at every radius
    p = SphereProfile(1.0, 4)
    assert exp_mean_ratio(p, 0.0, 4.0, 3.0) == pytest.approx(1.0, abs=1e-14)
    # constant profiles give ratio 1 regardless of the center
    c = ConstantProfile(2.5, 4)
    assert exp_mean_ratio(c, 1.0, 4.0, 5.0) == pytest.approx(1.0, abs=1e-13)


def test_exp_mean_ratio_approaches_one_far_out():
    p = SphereProfile(1.0, 4)
    ratio = exp_mean_ratio(p, 1.0, 4.0, 1e3)
    assert ratio >= 1.0 - 1e-13          # Jensen's inequality
    assert ratio <= 1.01


def test_ball_mean_oracles():
    # constant: the mean is the constant, any center
    assert ball_mean(ConstantProfile(5.0, 4), 2.0) == pytest.approx(
        5.0, rel=1e-12)
    # u = r^2 over the centered unit ball in dimension 4:
    # mean = 4 * int_0^1 s^2 s^3 ds / 1 = 4/6 = 2/3
    assert ball_mean(QuadraticProfile(1.0, 4), 0.0) == pytest.approx(
        2.0 / 3.0, rel=1e-10)


def test_ball_mean_far_center_tracks_log(bump_half):
    # alpha0 = 1/2: u ~ -0.5 log r, so the unit-ball mean at distance 1000
    # sits near -0.5 log(1000).  The ball only sees radii in [999, 1001], so
    # a dense resample over that shell stands in for the full profile.
    from qconformal.profiles import SampledProfile
    _, profile = bump_half
    grid = np.linspace(999.0, 1001.0, 257)
    shell = SampledProfile(grid, profile.eval(grid, 0), n=4)
    got = ball_mean(shell, 1e3)
    assert got == pytest.approx(-0.5 * math.log(1e3), rel=0.02)


# ---------------------------------------------------------------------------
# volume entropy
# ---------------------------------------------------------------------------

def test_volume_entropy_flat_space():
    res = volume_entropy(ConstantProfile(0.0, 4), 0.0,
                         geometric_schedule(10.0, 2.0, 10))
    assert res.estimate.value == pytest.approx(1.0, abs=1e-6)
    assert res.prediction == 1.0
    assert res.completeness == "complete"


# ---------------------------------------------------------------------------
# mass
# ---------------------------------------------------------------------------

def test_conformal_mass_vanishes_for_flat_space():
    m = conformal_mass(ConstantProfile(1.0, 4), 0.0)
    assert m.value == pytest.approx(0.0, abs=1e-12)
    assert m.prediction == 0.0


def test_conformal_mass_center_independent(bump_half):
    _, profile = bump_half
    m = conformal_mass(profile, 0.5, centers=(0.0, 1.0, 2.0))
    vals = [e.value for e in m.per_center.values()]
    errs = [e.error for e in m.per_center.values()]
    spread = max(vals) - min(vals)
    assert spread <= 2.0 * max(errs) + 1e-10
    # m = alpha0 (2 - alpha0) = 0.75 for the half-curvature bump
    assert m.value == pytest.approx(0.75, rel=1e-2)


def test_pohozaev_mass_zero_for_constant_q():
    m = pohozaev_mass(4, lambda r: np.zeros_like(r),
                      lambda r: np.exp(-4.0 * np.log1p(r ** 2)), 50.0)
    assert m == pytest.approx(0.0, abs=1e-14)


def test_pohozaev_mass_round_sphere():
    # Q is constant (= 6) on the round sphere, so the balance gives 0; the
    # sphere-limit route gives alpha0(2 - alpha0) = 0 as well (alpha0 = 2)
    p = SphereProfile(1.0, 4)
    assert pohozaev_mass_from_profile(p, 200.0) == pytest.approx(0.0,
                                                                 abs=1e-8)
    m = conformal_mass(p, 2.0)
    assert m.value == pytest.approx(0.0, abs=1e-6)
    assert m.prediction == pytest.approx(0.0, abs=1e-15)


def test_alpha0_helper_matches_density(bump_half):
    density, _ = bump_half
    assert functionals.alpha0(density) == pytest.approx(0.5, rel=1e-12)
