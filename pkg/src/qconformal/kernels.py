"""Angular averages of log and power kernels over spheres.

Everything here reduces a spherical average to a 1-D integral over the polar
angle with weight sin^{n-2}(theta).  The quadrature rule is fixed-order
Gauss-Legendre on panels graded dyadically toward theta = 0, where |x - y| is
minimal; that handles the integrable log / power singularities on the diagonal
r = s without adaptive machinery.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import accel
from .constants import angular_weight_norm, check_even_dimension

DEFAULT_LEVELS = 40
DEFAULT_ORDER = 16
REFINED_LEVELS = 46
REFINED_ORDER = 22


@lru_cache(maxsize=None)
def graded_theta_rule(n: int, order: int = DEFAULT_ORDER,
                      levels: int = DEFAULT_LEVELS):
    """Quadrature nodes and weights for the normalized sin^{n-2} measure on
    [0, pi], graded dyadically toward theta = 0.

    Nodes are returned as omc = 1 - cos(theta) = 2 sin^2(theta/2); keeping
    that quantity (instead of cos) preserves accuracy at the deeply graded
    nodes where cos(theta) rounds to 1.  sum(wt) == 1 up to rounding.
    """
    check_even_dimension(n)
    x, w = np.polynomial.legendre.leggauss(order)
    breaks = [np.pi]
    for j in range(1, levels + 1):
        breaks.append(np.pi * 0.5 ** j)
    breaks.append(0.0)
    thetas = []
    weights = []
    for hi, lo in zip(breaks[:-1], breaks[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        t = mid + half * x
        thetas.append(t)
        weights.append(half * w * np.sin(t) ** (n - 2))
    theta = np.concatenate(thetas)
    wt = np.concatenate(weights) / angular_weight_norm(n)
    omc = 2.0 * np.sin(0.5 * theta) ** 2
    return omc, wt


@lru_cache(maxsize=None)
def smooth_theta_rule(n: int, order: int = 20, panels: int = 8):
    """Ungraded composite rule for smooth angular integrands.

    Same (omc, wt) convention as graded_theta_rule.
    """
    check_even_dimension(n)
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, np.pi, panels + 1)
    thetas = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        t = mid + half * x
        thetas.append(t)
        weights.append(half * w * np.sin(t) ** (n - 2))
    theta = np.concatenate(thetas)
    wt = np.concatenate(weights) / angular_weight_norm(n)
    omc = 2.0 * np.sin(0.5 * theta) ** 2
    return omc, wt


def angular_log_avg(n: int, r: float, s, *, order: int = DEFAULT_ORDER,
                    levels: int = DEFAULT_LEVELS):
    """Average of log|x - y| over x on the sphere of radius r, with |y| = s.

    Symmetric in (r, s) by construction: the integrand depends on the two
    radii only through r^2 + s^2 - 2 r s cos(theta).
    """
    if r <= 0.0:
        raise ValueError("angular_log_avg needs r > 0; use log(s) at r = 0")
    omc, wt = graded_theta_rule(n, order, levels)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0.0):
        raise ValueError("source radius must be >= 0")
    F, _, _ = accel.log_kernel_many(np.array([float(r)]), s_arr, omc, wt)
    out = F[0]
    return out if np.ndim(s) else float(out[0])


def angular_pow_avg(n: int, r: float, s, k: float, *,
                    order: int = DEFAULT_ORDER, levels: int = DEFAULT_LEVELS):
    """Average of |x - y|^{-k} over the sphere of radius r, |y| = s.

    Requires 0 < k < n - 1 so the diagonal singularity stays integrable.
    """
    if r <= 0.0:
        raise ValueError("angular_pow_avg needs r > 0")
    if not 0.0 < k < n - 1:
        raise ValueError(f"power k must lie in (0, {n - 1}), got {k}")
    omc, wt = graded_theta_rule(n, order, levels)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0.0):
        raise ValueError("source radius must be >= 0")
    out = accel.pow_kernel_many(np.array([float(r)]), s_arr, float(k),
                                omc, wt)[0]
    return out if np.ndim(s) else float(out[0])


def log_avg_with_derivs(n: int, r_vec, s):
    """Batched F_n(r, s) with d/dr and d^2/dr^2, shapes (len(r), len(s)).

    r = 0 rows are filled with the exact limits F = log s, F_r = 0,
    F_rr = (n - 2) / (n s^2); s = 0 entries come out of the quadrature
    exactly (the integrand is constant there).
    """
    check_even_dimension(n)
    omc, wt = graded_theta_rule(n)
    r_vec = np.atleast_1d(np.asarray(r_vec, dtype=float))
    s = np.asarray(s, dtype=float)
    F = np.empty((len(r_vec), len(s)))
    Fr = np.empty_like(F)
    Frr = np.empty_like(F)
    pos = r_vec > 0.0
    if np.any(pos):
        Fp, Frp, Frrp = accel.log_kernel_many(r_vec[pos], s, omc, wt)
        F[pos], Fr[pos], Frr[pos] = Fp, Frp, Frrp
    if np.any(~pos):
        with np.errstate(divide="ignore"):
            F[~pos] = np.log(s)[None, :]
        Fr[~pos] = 0.0
        with np.errstate(divide="ignore"):
            Frr[~pos] = ((n - 2.0) / (n * s * s))[None, :]
    return F, Fr, Frr


def offcenter_radial_avg(n: int, field, c: float, r: float) -> float:
    """Average of field(|y|) over the sphere of radius r centered at
    distance c from the origin.

    ``field`` must accept a numpy array of radii in [|c - r|, c + r].
    """
    check_even_dimension(n)
    if r <= 0.0:
        raise ValueError("sphere radius must be > 0")
    if c < 0.0:
        raise ValueError("center distance must be >= 0")
    if c == 0.0:
        return float(np.asarray(field(np.array([r])))[0])
    omc, wt = smooth_theta_rule(n)
    rho = np.sqrt((c + r) ** 2 - 2.0 * c * r * omc)
    return float(np.asarray(field(rho)) @ wt)


# ---------------------------------------------------------------------------
# kernel tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelTable:
    """Tabulated angular-average kernel on an (r, s) grid with per-entry
    error bounds (difference against a refined rule)."""

    n: int
    kind: str            # "log" or "pow"
    power: float | None  # k for "pow", None for "log"
    r: np.ndarray
    s: np.ndarray
    values: np.ndarray
    err_bound: np.ndarray


_TABLE_CACHE: dict = {}


def _grid_key(arr: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(arr).tobytes()).hexdigest()


def build_kernel_table(n: int, kind: str, r_grid, s_grid=None,
                       power: float | None = None) -> KernelTable:
    """Build (or fetch from cache) a kernel table over r_grid x s_grid."""
    check_even_dimension(n)
    r_grid = np.asarray(r_grid, dtype=float)
    s_grid = r_grid if s_grid is None else np.asarray(s_grid, dtype=float)
    if kind not in ("log", "pow"):
        raise ValueError(f"kernel kind must be 'log' or 'pow', got {kind!r}")
    if kind == "pow" and power is None:
        raise ValueError("power kernel table needs the exponent k")
    key = (n, kind, power, _grid_key(r_grid), _grid_key(s_grid))
    if key in _TABLE_CACHE:
        return _TABLE_CACHE[key]

    coarse = graded_theta_rule(n)
    fine = graded_theta_rule(n, REFINED_ORDER, REFINED_LEVELS)
    if kind == "log":
        v = np.vstack([accel.log_kernel_many(np.array([r]), s_grid, *coarse)[0]
                       for r in r_grid])
        vf = np.vstack([accel.log_kernel_many(np.array([r]), s_grid, *fine)[0]
                        for r in r_grid])
    else:
        v = np.vstack([accel.pow_kernel_many(np.array([r]), s_grid,
                                             float(power), *coarse)
                       for r in r_grid])
        vf = np.vstack([accel.pow_kernel_many(np.array([r]), s_grid,
                                              float(power), *fine)
                        for r in r_grid])
    table = KernelTable(n=n, kind=kind, power=power, r=r_grid, s=s_grid,
                        values=vf, err_bound=np.abs(v - vf))
    _TABLE_CACHE[key] = table
    return table
