"""Radial conformal-factor families and curvature densities.

Closed-form families carry exact derivative formulas to high order; nothing
in the Q-curvature path ever differentiates numerically.  The building block
is d^k/dr^k log(a^2 + r^2), obtained from the complex factorization
log(a^2 + r^2) = log(a + ir) + log(a - ir).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constants import check_even_dimension, sphere_area, total_curvature_scale
from .quadrature import panel_rule, radial_edges

CLOSED_FORM_ORDER = 24  # derivative orders available analytically


class DerivativeOrderError(ValueError):
    """Requested derivative order exceeds what the profile can provide."""


class GridRangeError(ValueError):
    """Sampled profile evaluated outside its grid."""


class TailError(ValueError):
    """Radial quadrature tail cannot be bounded below the tolerance."""


def log_quadratic_deriv(a: float, r: np.ndarray, k: int) -> np.ndarray:
    """d^k/dr^k of log(a^2 + r^2), exact to machine precision."""
    r = np.asarray(r, dtype=float)
    if k == 0:
        return np.log(a * a + r * r)
    z = a + 1j * r
    val = (1j ** k) / z ** k
    return 2.0 * (-1.0) ** (k - 1) * math.factorial(k - 1) * np.real(val)


class RadialProfile:
    """A radial conformal factor u(r) with derivatives up to
    ``derivative_order``."""

    family = "abstract"
    n: int
    derivative_order: int

    def eval(self, r, k: int = 0):
        """d^k u / dr^k at radii r (scalar or array in, same shape out)."""
        if not 0 <= k <= self.derivative_order:
            raise DerivativeOrderError(
                f"{self.family}: derivative order {k} not available "
                f"(max {self.derivative_order})")
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr < 0.0):
            raise ValueError("radius must be >= 0")
        out = self._eval(r_arr, k)
        return out if np.ndim(r) else float(out[0])

    def _eval(self, r: np.ndarray, k: int) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, r):
        return self.eval(r, 0)


class SphereProfile(RadialProfile):
    """u(r) = log(2 lam / (lam^2 + r^2)): the round-sphere conformal factor."""

    family = "sphere"

    def __init__(self, lam: float, n: int = 4):
        check_even_dimension(n)
        if lam <= 0.0:
            raise ValueError("lambda must be > 0")
        self.lam = float(lam)
        self.n = n
        self.derivative_order = CLOSED_FORM_ORDER

    def _eval(self, r, k):
        if k == 0:
            return math.log(2.0 * self.lam) - np.log(self.lam ** 2 + r * r)
        return -log_quadratic_deriv(self.lam, r, k)


class CounterexampleProfile(RadialProfile):
    """u(r) = -beta log(r^2 + 1) + r^2: finite total curvature integral
    proportional to beta, with scalar curvature only bounded below."""

    family = "counterexample"

    def __init__(self, beta: float, n: int = 4):
        check_even_dimension(n)
        self.beta = float(beta)
        self.n = n
        self.derivative_order = CLOSED_FORM_ORDER

    def _eval(self, r, k):
        out = -self.beta * log_quadratic_deriv(1.0, r, k)
        if k == 0:
            out = out + r * r
        elif k == 1:
            out = out + 2.0 * r
        elif k == 2:
            out = out + 2.0
        return out


class QuadraticProfile(RadialProfile):
    """u(r) = a r^2; a = -1 gives the classical non-normal example."""

    family = "quadratic"

    def __init__(self, a: float, n: int = 4):
        check_even_dimension(n)
        self.a = float(a)
        self.n = n
        self.derivative_order = CLOSED_FORM_ORDER

    def _eval(self, r, k):
        if k == 0:
            return self.a * r * r
        if k == 1:
            return 2.0 * self.a * r
        if k == 2:
            return np.full_like(r, 2.0 * self.a)
        return np.zeros_like(r)


class ConstantProfile(RadialProfile):
    """u identically constant (flat metric up to scale)."""

    family = "constant"

    def __init__(self, c: float = 0.0, n: int = 4):
        check_even_dimension(n)
        self.c = float(c)
        self.n = n
        self.derivative_order = CLOSED_FORM_ORDER

    def _eval(self, r, k):
        if k == 0:
            return np.full_like(r, self.c)
        return np.zeros_like(r)


class SampledProfile(RadialProfile):
    """Spline interpolant of sampled u values; derivative order capped at 2
    and evaluation refused outside the grid."""

    family = "sampled"

    def __init__(self, grid, values, n: int = 4, interp_error: float = np.nan):
        from scipy.interpolate import CubicSpline

        check_even_dimension(n)
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise ValueError("grid and values must be matching 1-D arrays")
        self.n = n
        self.derivative_order = 2
        self.interp_error = float(interp_error)
        bc_lo = ((1, 0.0) if self.grid[0] == 0.0 else "not-a-knot")
        self._spline = CubicSpline(self.grid, self.values,
                                   bc_type=(bc_lo, "not-a-knot"))

    def _eval(self, r, k):
        if np.any(r < self.grid[0]) or np.any(r > self.grid[-1]):
            raise GridRangeError(
                f"sampled profile defined on [{self.grid[0]}, {self.grid[-1]}]")
        return self._spline(r, nu=k)


class CombinedProfile(RadialProfile):
    """Linear combination a*u + b*v of two profiles (same dimension)."""

    family = "combined"

    def __init__(self, a: float, u: RadialProfile, b: float, v: RadialProfile):
        if u.n != v.n:
            raise ValueError("profiles must share the dimension")
        self.a, self.b = float(a), float(b)
        self.u, self.v = u, v
        self.n = u.n
        self.derivative_order = min(u.derivative_order, v.derivative_order)

    def _eval(self, r, k):
        return (self.a * np.asarray(self.u.eval(r, k))
                + self.b * np.asarray(self.v.eval(r, k)))


# ---------------------------------------------------------------------------
# curvature densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayBound:
    """|f(s)| <= amplitude * s^{-exponent} for s >= beyond."""

    amplitude: float
    exponent: float
    beyond: float


@dataclass
class CurvatureDensity:
    """A radial signed density f(r) standing for Q e^{nu}.

    ``support_radius`` is set for compactly supported densities; otherwise
    ``decay`` must bound the tail.  ``total`` is the integral over R^n.
    """

    n: int
    f: Callable[[np.ndarray], np.ndarray]
    support_radius: float | None = None
    decay: DecayBound | None = None
    total: float = np.nan
    total_error: float = 0.0
    breaks: tuple = ()       # interior radii where f loses smoothness

    def __post_init__(self):
        check_even_dimension(self.n)
        if self.support_radius is None and self.decay is None:
            raise ValueError("density needs a support radius or a decay bound")
        if math.isnan(self.total):
            total, err = integrate_density(self)
            self.total = total
            self.total_error = err

    @property
    def alpha0(self) -> float:
        """Total curvature normalized by (n-1)! |S^n| / 2."""
        return 2.0 * self.total / total_curvature_scale(self.n)

    def cutoff_radius(self, tol: float = 1e-10) -> float:
        """Radius beyond which the tail integral is below tol."""
        if self.support_radius is not None:
            return self.support_radius
        d = self.decay
        omega = sphere_area(self.n - 1)
        if d.exponent <= self.n:
            raise TailError(
                f"decay exponent {d.exponent} too weak for dimension {self.n}")
        p = d.exponent - self.n
        # tail(R) = A omega R^-p / p ; include a log factor margin for the
        # log-kernel weight
        R = max(d.beyond, (20.0 * d.amplitude * omega / (p * tol)) ** (1.0 / p))
        return R


def tail_bound(density: CurvatureDensity, R: float) -> float:
    """Bound on the absolute tail integral of the density beyond radius R."""
    if density.support_radius is not None:
        return 0.0 if R >= density.support_radius else np.inf
    d = density.decay
    if d.exponent <= density.n or R < d.beyond:
        return np.inf
    p = d.exponent - density.n
    return d.amplitude * sphere_area(density.n - 1) * R ** (-p) / p


def integrate_density(density: CurvatureDensity, tol: float = 1e-10):
    """Integral of f over R^n by radial quadrature, with a tail estimate."""
    R = density.cutoff_radius(tol)
    edges = radial_edges(R)
    inner = [b for b in density.breaks if 0.0 < b < R]
    if inner:
        edges = np.unique(np.concatenate([edges, inner]))
    nodes, weights = panel_rule(edges)
    omega = sphere_area(density.n - 1)
    val = omega * np.dot(weights, density.f(nodes) * nodes ** (density.n - 1))
    return float(val), tail_bound(density, R)


def density_from_profile(p: RadialProfile,
                         decay: DecayBound | None = None,
                         support_radius: float | None = None) -> CurvatureDensity:
    """Curvature density f(r) = ((-Delta)^{n/2} u)(r) for a closed-form
    profile, with exact derivative chains (module calculus)."""
    from . import calculus

    n = p.n
    if p.derivative_order < n:
        raise DerivativeOrderError(
            f"density needs derivative order >= {n}, profile has "
            f"{p.derivative_order}")
    if decay is None and support_radius is None:
        decay = _default_decay(p)

    def f(r):
        return calculus.polyharmonic(p, r, n // 2)

    return CurvatureDensity(n=n, f=f, decay=decay,
                            support_radius=support_radius)


def _default_decay(p: RadialProfile) -> DecayBound:
    """Conservative tail bounds for the built-in closed-form families."""
    n = p.n
    if isinstance(p, SphereProfile):
        # Q e^{nu} = (n-1)! (2 lam)^n / (lam^2 + r^2)^n
        amp = math.factorial(n - 1) * (2.0 * p.lam) ** n
        return DecayBound(amplitude=amp, exponent=2 * n, beyond=10.0 * p.lam)
    if isinstance(p, (ConstantProfile, QuadraticProfile)):
        # polyharmonic of degree <= 2 polynomials vanishes for n >= 4
        return DecayBound(amplitude=0.0, exponent=2 * n, beyond=1.0)
    if isinstance(p, CounterexampleProfile):
        # (-Delta)^{n/2} of -beta log(1+r^2) decays like r^{-2n}
        amp = max(1.0, abs(p.beta)) * math.factorial(n - 1) * 4 ** n
        return DecayBound(amplitude=amp, exponent=2 * n, beyond=10.0)
    raise TailError(f"no decay metadata for family {p.family!r}")


def bump_density(n: int, alpha0: float, radius: float = 2.0) -> CurvatureDensity:
    """Compactly supported polynomial density with prescribed alpha0.

    f(s) = c (1 - (s/R)^2)^4 on [0, R]; c is fixed so that the total equals
    alpha0 (n-1)! |S^n| / 2.
    """
    check_even_dimension(n)
    target = alpha0 * total_curvature_scale(n) / 2.0
    omega = sphere_area(n - 1)
    shape_integral = 0.5 * math.gamma(n / 2) * math.gamma(5.0) \
        / math.gamma(n / 2 + 5.0)
    c = target / (omega * radius ** n * shape_integral)
    R = float(radius)

    def f(s):
        s = np.asarray(s, dtype=float)
        t = np.clip(s / R, 0.0, 1.0)
        return c * (1.0 - t * t) ** 4

    return CurvatureDensity(n=n, f=f, support_radius=R, total=target)


def tabulated_density(n: int, r, values,
                      support_radius: float | None = None) -> CurvatureDensity:
    """Density from tabulated (r, value) samples, e.g. a CSV column pair."""
    from scipy.interpolate import CubicSpline

    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    spline = CubicSpline(r, values)
    R = float(support_radius if support_radius is not None else r[-1])

    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        inside = (s >= r[0]) & (s <= R)
        out[inside] = spline(s[inside])
        return out

    return CurvatureDensity(n=n, f=f, support_radius=R)
