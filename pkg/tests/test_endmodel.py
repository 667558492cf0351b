"""Exterior-domain end profiles: sphere-mean limits and isoperimetric
ratio against closed-form ends."""

import math

import numpy as np
import pytest

from qconformal.endmodel import (EndDomainError, EndProfile, end_limits,
                                 end_nu, isoperimetric_ratio)
from qconformal.functionals import geometric_schedule
from qconformal.profiles import SphereProfile


def test_pure_log_end_oracles():
    # w = -log r: r^2(-Delta w) = 2, r w' = -1, r^2 w'^2 = 1 for every r,
    # and I(r) = 1 / (4 log r) exactly
    end = EndProfile(a1=-1.0)
    lim = end_limits(end)
    assert lim.A.value == pytest.approx(2.0, abs=1e-10)
    assert lim.B.value == pytest.approx(-1.0, abs=1e-10)
    assert lim.C.value == pytest.approx(1.0, abs=1e-10)
    assert lim.predicted == (2.0, -1.0, 1.0)
    for r in (3.0, 10.0, 100.0):
        assert isoperimetric_ratio(end, r) == pytest.approx(
            1.0 / (4.0 * math.log(r)), rel=1e-9)


def test_flat_end_has_unit_ratio():
    end = EndProfile(h0=0.3)            # constant shift: still the flat end
    lim = end_limits(end)
    assert lim.A.value == pytest.approx(0.0, abs=1e-12)
    assert lim.B.value == pytest.approx(0.0, abs=1e-12)
    res = end_nu(end)
    assert res.prediction == 1.0
    assert res.estimate.value == pytest.approx(1.0, abs=1e-3)


def test_harmonic_correction_does_not_move_the_limits():
    # h2 / r^2 is harmonic and decaying on the exterior domain, so the
    # sphere-mean limits and nu are unchanged
    plain = EndProfile(a1=-0.4)
    shifted = EndProfile(a1=-0.4, h0=1.1, h2=-2.0)
    for a, b in zip(end_limits(plain).predicted,
                    end_limits(shifted).predicted):
        assert a == b
    la, lb = end_limits(plain), end_limits(shifted)
    assert la.B.value == pytest.approx(lb.B.value, abs=1e-9)
    assert end_nu(shifted).prediction == end_nu(plain).prediction


def test_domain_below_one_rejected():
    end = EndProfile(a1=-1.0)
    with pytest.raises(EndDomainError):
        end.eval(0.5, 0)
    with pytest.raises(EndDomainError):
        isoperimetric_ratio(end, 1.0)
    with pytest.raises(ValueError):
        EndProfile(f=lambda s: np.ones_like(s), support_hi=1.0)


def test_exterior_density_matches_full_space_potential():
    # push the density of the unit sphere profile restricted to the annulus
    # [1, 40] through the end machinery; beyond the support the end slope
    # must approach a1 - a2 with a2 the normalized annulus integral
    sphere = SphereProfile(1.0, 4)

    def f(s):
        s = np.asarray(s, dtype=float)
        return 6.0 * (2.0 / (1.0 + s ** 2)) ** 4

    end = EndProfile(f=f, support_hi=40.0, a1=0.0)
    # a2 equals (1/(8 pi^2)) * omega_3 * int_1^40 f s^3 ds; the integrand is
    # 96 s^3/(1+s^2)^4, integrable in closed form via t = 1 + s^2:
    # int s^3/(1+s^2)^4 ds = (1/2) [1/(2 t^2) - 1/(3 t^3)] between t limits
    t0, t1 = 2.0, 1601.0
    integral = 96.0 * 0.5 * ((0.5 / t0 ** 2 - 1.0 / (3.0 * t0 ** 3))
                             - (0.5 / t1 ** 2 - 1.0 / (3.0 * t1 ** 3)))
    a2_exact = (2.0 * math.pi ** 2) * integral / (8.0 * math.pi ** 2)
    assert end.a2 == pytest.approx(a2_exact, rel=1e-12)
    lim = end_limits(end, geometric_schedule(60.0, 1.7, 10))
    assert lim.B.value == pytest.approx(-a2_exact, rel=1e-8)
    assert lim.A.value == pytest.approx(2.0 * a2_exact, rel=1e-8)


def test_bump_end_nu_matches_prediction():
    # light density so that a2 - a1 stays below 1 (the regime where the
    # volume integral diverges and nu = 1 + a1 - a2 applies)
    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        inside = (s >= 1.0) & (s <= 3.0)
        out[inside] = 0.05 * np.sin(math.pi * (s[inside] - 1.0) / 2.0) ** 2
        return out

    end = EndProfile(f=f, support_hi=3.0, a1=-0.1)
    res = end_nu(end)
    assert res.prediction == pytest.approx(0.9 - end.a2)
    combined = abs(res.estimate.value - res.prediction)
    assert combined <= res.estimate.error + 1e-2


def test_isoperimetric_ratio_positive():
    end = EndProfile(a1=-0.7, h2=0.5)
    r = geometric_schedule(5.0, 2.0, 8)
    vals = np.asarray(isoperimetric_ratio(end, r))
    assert np.all(vals > 0.0)
