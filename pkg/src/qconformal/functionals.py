"""Geometric functionals at infinity: sphere-mean limits, volume entropy,
conformal mass, Pohozaev-type mass, and exponential mean-value checks.

Everything here reduces to limits of radial sample functions, so the core
utility is ``limit_at_infinity``: sample on a geometric radius schedule, fit
both an inverse-power model (L + a/r + b/r^2) and a logarithmic model
(L + a/log r), and keep whichever fits better.  Several quantities here
(volume-entropy ratio, isoperimetric ratios of log-type ends) converge only
like 1/log r, where the power model is useless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calculus
from .constants import (ball_volume, check_even_dimension, sphere_area,
                        total_curvature_scale)
from .kernels import offcenter_radial_avg
from .profiles import CurvatureDensity, RadialProfile
from .quadrature import panel_rule, radial_edges


@dataclass(frozen=True)
class LimitEstimate:
    """An extrapolated limit r -> infinity with a self-reported error bar.

    The error is at least |last sample - value| / 4, so a slowly converging
    sequence can never pretend to be converged.
    """

    value: float
    error: float
    model: str               # "power" or "log"
    radii: np.ndarray
    samples: np.ndarray

    @property
    def last_sample(self) -> float:
        return float(self.samples[-1])

    @property
    def converged(self) -> bool:
        """False when the extrapolation error swamps the value -- e.g. for
        genuinely divergent sequences such as the mass of a non-normal
        profile."""
        return self.error <= 0.1 * max(1.0, abs(self.value))

    @property
    def order(self) -> float:
        """Empirical convergence order from the last three samples."""
        d1 = abs(self.samples[-2] - self.samples[-3])
        d2 = abs(self.samples[-1] - self.samples[-2])
        ratio = self.radii[-1] / self.radii[-2]
        if d1 == 0.0 or d2 == 0.0:
            return float("inf")
        return math.log(d1 / d2) / math.log(ratio)


def geometric_schedule(r0: float = 4.0, growth: float = 1.8,
                       num: int = 10) -> np.ndarray:
    """Radii r0 * growth^k, k = 0..num-1."""
    return r0 * growth ** np.arange(num)


def _fit(radii, samples, basis):
    A = np.column_stack([b(radii) for b in basis])
    coef, *_ = np.linalg.lstsq(A, samples, rcond=None)
    resid = np.max(np.abs(A @ coef - samples))
    return coef[0], resid


def limit_at_infinity(g, radii=None, *, tail: int = 5) -> LimitEstimate:
    """Extrapolate g(r) as r -> infinity from samples on a radius schedule.

    ``g`` may be a callable of an array of radii, or an array of samples
    matching ``radii``.
    """
    radii = geometric_schedule() if radii is None else np.asarray(radii, float)
    samples = np.asarray(g(radii) if callable(g) else g, dtype=float)
    if samples.shape != radii.shape:
        raise ValueError("samples and radii must match")
    rt, st = radii[-tail:], samples[-tail:]
    one = np.ones_like
    L_pow, res_pow = _fit(rt, st, [one, lambda r: 1.0 / r,
                                   lambda r: 1.0 / r ** 2])
    L_log, res_log = _fit(rt, st, [one, lambda r: 1.0 / np.log(r),
                                   lambda r: 1.0 / np.log(r) ** 2])
    if res_pow <= res_log:
        value, resid, model = L_pow, res_pow, "power"
    else:
        value, resid, model = L_log, res_log, "log"
    err = max(3.0 * resid, abs(samples[-1] - value) / 4.0, 1e-15)
    return LimitEstimate(value=float(value), error=float(err), model=model,
                         radii=radii, samples=samples)


def completeness_flag(alpha0: float, tol: float = 1e-8) -> str:
    """'complete' / 'incomplete' / 'indeterminate' by the position of alpha0
    relative to 1."""
    if alpha0 < 1.0 - tol:
        return "complete"
    if alpha0 > 1.0 + tol:
        return "incomplete"
    return "indeterminate"


# ---------------------------------------------------------------------------
# sphere-mean limits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereMeanLimits:
    """Limits of the three centered sphere means of a radial profile."""

    laplacian: LimitEstimate     # r^2 (-Delta u)        -> (n-2) alpha0
    slope: LimitEstimate         # r u'(r)               -> -alpha0
    gradient_sq: LimitEstimate   # r^2 u'(r)^2           -> alpha0^2

    def alpha0_votes(self, n: int) -> tuple[float, float, float]:
        """alpha0 as read off each of the three limits."""
        return (self.laplacian.value / (n - 2.0),
                -self.slope.value,
                math.sqrt(max(self.gradient_sq.value, 0.0)))


def sphere_mean_limits(profile: RadialProfile,
                       radii=None) -> SphereMeanLimits:
    """Extrapolated limits of r^2(-Delta u), r u', r^2 u'^2."""
    radii = geometric_schedule() if radii is None else np.asarray(radii, float)
    neg_lap = np.asarray(calculus.polyharmonic(profile, radii, 1))
    du = np.asarray(profile.eval(radii, 1))
    return SphereMeanLimits(
        laplacian=limit_at_infinity(radii ** 2 * neg_lap, radii),
        slope=limit_at_infinity(radii * du, radii),
        gradient_sq=limit_at_infinity(radii ** 2 * du ** 2, radii),
    )


# ---------------------------------------------------------------------------
# off-center means
# ---------------------------------------------------------------------------

def exp_mean_defect(profile: RadialProfile, k: float, center: float, r):
    """log of (sphere mean of e^{ku}) minus k * (sphere mean of u), over the
    sphere of radius r centered at distance ``center`` from the origin.

    Jensen's inequality makes this >= 0; it tends to 0 as r -> infinity for
    profiles with finite total curvature.  Evaluated in log space via a
    shifted exponential so large |u| cannot overflow.
    """
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r_arr)
    for i, ri in enumerate(r_arr):
        u_bar = offcenter_radial_avg(profile.n, lambda s: profile.eval(s, 0),
                                     center, ri)
        mean_exp = offcenter_radial_avg(
            profile.n,
            lambda s: np.exp(k * (np.asarray(profile.eval(s, 0)) - u_bar)),
            center, ri)
        out[i] = math.log(mean_exp)
    return out if np.ndim(r) else float(out[0])


def exp_mean_ratio(profile: RadialProfile, center: float, k: float, r):
    """(sphere mean of e^{ku}) / exp(k * sphere mean of u) on the sphere of
    radius r centered at distance ``center``; >= 1 by Jensen, -> 1 at
    infinity for finite-total-curvature profiles."""
    return np.exp(exp_mean_defect(profile, k, center, r))


def ball_mean_field(field, n: int, center: float, r: float,
                    order: int = 16) -> float:
    """Average of a radial field over the solid ball B_r(center)."""
    nodes, weights = panel_rule(radial_edges(float(r)), order=order)
    vals = np.array([offcenter_radial_avg(n, field, center, x)
                     for x in nodes])
    return float(n * np.dot(weights, vals * nodes ** (n - 1)) / r ** n)


def ball_mean(profile: RadialProfile, center: float,
              radius: float = 1.0) -> float:
    """Average of u over the ball of the given radius centered at distance
    ``center`` from the origin; grows like -alpha0 log(center) for normal
    profiles."""
    return ball_mean_field(lambda s: profile.eval(s, 0), profile.n,
                           float(center), radius)


def mean_log_slope(profile: RadialProfile, radii=None) -> LimitEstimate:
    """Extrapolated limit of u(r) / log r (equals -alpha0 for normal
    profiles); converges like 1/log r, handled by the log-aware model."""
    radii = geometric_schedule() if radii is None else np.asarray(radii, float)
    samples = np.asarray(profile.eval(radii, 0)) / np.log(radii)
    return limit_at_infinity(samples, radii)


# ---------------------------------------------------------------------------
# volume entropy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VolumeEntropyResult:
    """Extrapolated volume entropy with the completeness classification."""

    estimate: LimitEstimate
    alpha0: float
    prediction: float        # 1 - alpha0, valid for complete normal metrics
    completeness: str


def volume_entropy(profile: RadialProfile, alpha0: float,
                   radii=None, order: int = 20) -> VolumeEntropyResult:
    """tau = lim log V_g(B_r) / log |B_r| for the metric e^{2u}|dx|^2.

    V_g(B_r) is accumulated by quadrature with every schedule radius as a
    panel edge; the ratio converges like 1/log r, which the log-model
    extrapolation absorbs.
    """
    n = profile.n
    radii = geometric_schedule() if radii is None else np.asarray(radii, float)
    edges = radial_edges(float(radii[-1]))
    edges = np.unique(np.concatenate([edges, radii]))
    nodes, weights = panel_rule(edges, order=order)
    u = np.asarray(profile.eval(nodes, 0))
    integrand = weights * np.exp(n * u) * nodes ** (n - 1)
    omega = sphere_area(n - 1)
    samples = np.empty_like(radii)
    for i, ri in enumerate(radii):
        vol = omega * integrand[nodes <= ri].sum()
        samples[i] = math.log(vol) / math.log(ball_volume(n) * ri ** n)
    est = limit_at_infinity(samples, radii)
    return VolumeEntropyResult(estimate=est, alpha0=alpha0,
                               prediction=1.0 - alpha0,
                               completeness=completeness_flag(alpha0))


# ---------------------------------------------------------------------------
# conformal mass
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassEstimate:
    """Conformal mass: infimum over centers of the scalar-curvature sphere
    limit r^2 <R_g e^{2u}>_{S_r(c)} / ((n-1)(n-2))."""

    value: float
    error: float
    per_center: dict            # center -> LimitEstimate
    prediction: float           # alpha0 (2 - alpha0)


def conformal_mass(profile: RadialProfile, alpha0: float, centers=(0.0, 1.0),
                   radii=None) -> MassEstimate:
    """Mass of the end from scalar-curvature sphere averages.

    The average uses R_g e^{2u} = 2(n-1)(-Delta u - (n-2)/2 u'^2), whose
    conformal factors cancel, so no exponentials of u are needed.
    """
    n = profile.n
    radii = geometric_schedule() if radii is None else np.asarray(radii, float)

    def field(s):
        return calculus.conformal_scalar_field(profile, s)

    per_center = {}
    for c in centers:
        samples = np.array([
            r * r * offcenter_radial_avg(n, field, float(c), float(r))
            / ((n - 1.0) * (n - 2.0)) for r in radii])
        per_center[float(c)] = limit_at_infinity(samples, radii)
    best = min(per_center.values(), key=lambda e: e.value)
    return MassEstimate(value=best.value, error=best.error,
                        per_center=per_center,
                        prediction=alpha0 * (2.0 - alpha0))


def pohozaev_mass(n: int, q_deriv, exp_nu, r_cut: float,
                  order: int = 16) -> float:
    """Mass from the Pohozaev balance:

        m = -4 / (n! |S^n|) * int_{R^n} (x . grad Q) e^{nu} dx,

    supplied as the radial derivative ``q_deriv(r) = Q'(r)`` and the weight
    ``exp_nu(r) = e^{n u(r)}``, integrated out to ``r_cut``.
    """
    check_even_dimension(n)
    nodes, weights = panel_rule(radial_edges(float(r_cut)), order=order)
    integrand = (nodes * np.asarray(q_deriv(nodes))
                 * np.asarray(exp_nu(nodes)) * nodes ** (n - 1))
    total = sphere_area(n - 1) * np.dot(weights, integrand)
    return float(-4.0 * total / (n * total_curvature_scale(n)))


def pohozaev_mass_from_profile(profile: RadialProfile, r_cut: float) -> float:
    """Pohozaev mass of a closed-form profile: Q' and e^{nu} are produced by
    exact differentiation of the curvature density."""
    n = profile.n
    m = n // 2

    def q_deriv(r):
        d = np.asarray(calculus.polyharmonic(profile, r, m))
        dp = np.asarray(calculus.polyharmonic_derivative(profile, r, m))
        u = np.asarray(profile.eval(r, 0))
        du = np.asarray(profile.eval(r, 1))
        return (dp - n * du * d) * np.exp(-n * u)

    def exp_nu(r):
        return np.exp(n * np.asarray(profile.eval(r, 0)))

    return pohozaev_mass(n, q_deriv, exp_nu, r_cut)


def alpha0(density: CurvatureDensity) -> float:
    """Normalized total curvature 2 * total / ((n-1)! |S^n|)."""
    return density.alpha0
