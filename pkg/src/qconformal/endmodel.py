"""Model ends on the exterior domain R^4 \\ B_1.

An end profile is

    w(r) = (1/(8 pi^2)) int_{|y| >= 1} log(|y| / |x - y|) f(y) dy
           + a1 log r + h(r),        h(r) = h0 + h2 / r^2,

with f radial and compactly supported in an annulus [1, R].  Its normalized
exterior integral is a2 = (1/(8 pi^2)) int f.  The admissible correction
space span{1, r^{-2}} consists of the bounded harmonic radial functions on
the exterior domain in dimension 4.

The geometry at infinity is governed by a2 - a1: sphere means behave as for
a full-space potential with that coefficient, and the isoperimetric ratio

    I(r) = (int_{S_r} e^{3w} dsigma)^{4/3}
           / (4 (2 pi^2)^{1/3} int_{B_r \\ B_1} e^{4w} dx)

tends to 1 + a1 - a2.  The pure-log end w = -log r has I(r) = 1/(4 log r)
exactly, converging only logarithmically -- limits here must be extrapolated
with the log-aware model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import potential_prefactor, sphere_area
from .functionals import LimitEstimate, geometric_schedule, limit_at_infinity
from .kernels import log_avg_with_derivs
from .profiles import RadialProfile
from .quadrature import annulus_edges, panel_rule

END_DIM = 4


class EndDomainError(ValueError):
    """End profiles are defined only for r >= 1."""


class EndProfile(RadialProfile):
    """Radial end profile on r >= 1; derivatives up to order 2.

    Parameters
    ----------
    f : callable or None
        Radial density on the annulus [1, support_hi]; None means f = 0.
    support_hi : float
        Outer support radius of f (ignored when f is None).
    a1 : float
        Coefficient of the explicit log r term.
    h0, h2 : float
        Correction h(r) = h0 + h2 / r^2.
    """

    family = "end"

    def __init__(self, f=None, support_hi: float = 1.0, a1: float = 0.0,
                 h0: float = 0.0, h2: float = 0.0, quad_order: int = 16):
        self.n = END_DIM
        self.derivative_order = 2
        self.f = f
        self.support_hi = float(support_hi)
        self.a1 = float(a1)
        self.h0 = float(h0)
        self.h2 = float(h2)
        self.quad_order = quad_order
        if f is not None and self.support_hi <= 1.0:
            raise ValueError("density support needs support_hi > 1")
        self._cache: dict[float, tuple[float, float, float]] = {}
        omega = sphere_area(END_DIM - 1)
        if f is None:
            self.a2 = 0.0
        else:
            nodes, wts = panel_rule(annulus_edges(1.0, self.support_hi),
                                    order=quad_order)
            self.a2 = float(potential_prefactor(END_DIM) * omega
                            * np.dot(wts, np.asarray(f(nodes)) * nodes ** 3))

    _CHUNK = 64

    def _potential_rows(self, radii: np.ndarray):
        r_break = None
        inside = radii[(radii > 1.0) & (radii < self.support_hi)]
        edges = annulus_edges(1.0, self.support_hi)
        if inside.size:
            edges = np.unique(np.concatenate([edges, inside]))
        nodes, wts = panel_rule(edges, order=self.quad_order)
        F, Fr, Frr = log_avg_with_derivs(END_DIM, radii, nodes)
        base = potential_prefactor(END_DIM) * sphere_area(END_DIM - 1)
        meas = wts * nodes ** 3 * np.asarray(self.f(nodes))
        u = base * ((np.log(nodes)[None, :] - F) @ meas)
        du = base * (-Fr @ meas)
        ddu = base * (-Frr @ meas)
        return u, du, ddu

    def _eval(self, r, k):
        if np.any(r < 1.0):
            raise EndDomainError("end profile defined for r >= 1 only")
        logr = np.log(r)
        w = self.a1 * logr + self.h0 + self.h2 / r ** 2
        dw = self.a1 / r - 2.0 * self.h2 / r ** 3
        ddw = -self.a1 / r ** 2 + 6.0 * self.h2 / r ** 4
        if self.f is not None:
            missing = np.unique([x for x in r if x not in self._cache])
            for lo in range(0, missing.size, self._CHUNK):
                chunk = missing[lo:lo + self._CHUNK]
                pu, pdu, pddu = self._potential_rows(chunk)
                for i, x in enumerate(chunk):
                    self._cache[float(x)] = (pu[i], pdu[i], pddu[i])
            pot = np.array([self._cache[x][k] for x in r])
        else:
            pot = np.zeros_like(r)
        return (w, dw, ddw)[k] + pot


@dataclass(frozen=True)
class EndLimits:
    """Sphere-mean limits of an end profile, with their predicted values
    in terms of a1 and a2."""

    laplacian: LimitEstimate     # r^2 (-Delta w)  -> 2 (a2 - a1)
    slope: LimitEstimate         # r w'            -> a1 - a2
    gradient_sq: LimitEstimate   # r^2 w'^2        -> (a2 - a1)^2
    predicted: tuple

    # short accessors matching the order (A, B, C) above
    @property
    def A(self) -> LimitEstimate:
        return self.laplacian

    @property
    def B(self) -> LimitEstimate:
        return self.slope

    @property
    def C(self) -> LimitEstimate:
        return self.gradient_sq


def end_limits(end: EndProfile, radii=None) -> EndLimits:
    """Extrapolated sphere-mean limits of the end profile."""
    radii = geometric_schedule() if radii is None else np.asarray(radii, float)
    dw = np.asarray(end.eval(radii, 1))
    ddw = np.asarray(end.eval(radii, 2))
    neg_lap = -(ddw + 3.0 / radii * dw)
    d = end.a2 - end.a1
    return EndLimits(
        laplacian=limit_at_infinity(radii ** 2 * neg_lap, radii),
        slope=limit_at_infinity(radii * dw, radii),
        gradient_sq=limit_at_infinity(radii ** 2 * dw ** 2, radii),
        predicted=(2.0 * d, -d, d * d),
    )


def isoperimetric_ratio(end: EndProfile, r, order: int = 20):
    """I(r) for the end metric e^{2w}|dx|^2 on r >= 1 (scalar or array)."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr <= 1.0):
        raise EndDomainError("isoperimetric ratio needs r > 1")
    two_pi2 = sphere_area(3)            # |S^3| = 2 pi^2
    edges = np.unique(np.concatenate([annulus_edges(1.0, float(r_arr.max())),
                                      r_arr]))
    nodes, wts = panel_rule(edges, order=order)
    w_nodes = np.asarray(end.eval(nodes, 0))
    cells = wts * np.exp(4.0 * w_nodes) * nodes ** 3
    w_r = np.asarray(end.eval(r_arr, 0))
    out = np.empty_like(r_arr)
    for i, ri in enumerate(r_arr):
        area = two_pi2 * ri ** 3 * np.exp(3.0 * w_r[i])
        vol = two_pi2 * cells[nodes <= ri].sum()
        out[i] = area ** (4.0 / 3.0) / (4.0 * two_pi2 ** (1.0 / 3.0) * vol)
    return out if np.ndim(r) else float(out[0])


@dataclass(frozen=True)
class EndIsoperimetricResult:
    """Extrapolated isoperimetric invariant nu of an end."""

    estimate: LimitEstimate
    prediction: float            # 1 + a1 - a2


def end_nu(end: EndProfile, radii=None) -> EndIsoperimetricResult:
    """The end invariant nu = lim I(r), extrapolated over a radius schedule;
    equals 1 + a1 - a2."""
    radii = (geometric_schedule(8.0, 2.2, 10) if radii is None
             else np.asarray(radii, float))
    samples = isoperimetric_ratio(end, radii)
    est = limit_at_infinity(samples, radii)
    return EndIsoperimetricResult(estimate=est,
                                  prediction=1.0 + end.a1 - end.a2)
