"""The log-potential operator and its fixed-point solver.

For a radial density f the potential

    u(r) = c_n * omega_{n-1} * int_0^R (log s - F_n(r, s)) f(s) s^{n-1} ds

with c_n = 2 / ((n-1)! |S^n|) and F_n the angular log average, normalized so
that u(0) = 0 exactly.  Radial quadrature uses composite Gauss-Legendre with
a panel edge at every evaluation radius (F_n is analytic in s away from
s = r), and one shared mesh serves all evaluation radii so the kernel rows
are built in a single batched call.

Derivatives of u come from kernel derivatives (F_r, F_rr), never from
differencing samples of u.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import check_even_dimension, potential_prefactor, sphere_area
from .kernels import log_avg_with_derivs
from .profiles import (CurvatureDensity, RadialProfile, TailError,
                       tail_bound)
from .quadrature import panel_rule, radial_edges


@dataclass(frozen=True)
class PotentialConfig:
    """Numerical controls for the potential operator."""

    tail_tol: float = 1e-10      # admissible density tail beyond the cutoff
    mesh_ratio: float = 1.45     # geometric growth of radial panels
    quad_order: int = 16         # Gauss-Legendre order per panel
    normalization: float = 0.0   # the additive constant C; u(0) = C exactly


class PotentialAssembly:
    """Precomputed kernel rows mapping a density sampled on a fixed radial
    mesh to (u, u', u'') at a fixed set of radii.

    Building the rows is the expensive step; applying them to a new density
    is three matrix-vector products, which is what makes fixed-point
    iteration cheap.
    """

    def __init__(self, n: int, radii, r_cut: float,
                 config: PotentialConfig = PotentialConfig(),
                 breaks: tuple = ()):
        check_even_dimension(n)
        self.n = n
        self.radii = np.atleast_1d(np.asarray(radii, dtype=float))
        self.r_cut = float(r_cut)
        edges = radial_edges(self.r_cut, ratio=config.mesh_ratio)
        interior = np.unique(self.radii[(self.radii > 0.0)
                                        & (self.radii < self.r_cut)])
        inner_breaks = [b for b in breaks if 0.0 < b < self.r_cut]
        edges = np.unique(np.concatenate([edges, interior, inner_breaks]))
        self.nodes, self.weights = panel_rule(edges, order=config.quad_order)
        F, Fr, Frr = log_avg_with_derivs(n, self.radii, self.nodes)
        base = potential_prefactor(n) * sphere_area(n - 1)
        meas = self.weights * self.nodes ** (n - 1)
        # u   row:  (log s - F) * measure
        # u'  row:  -F_r * measure ;  u'' row: -F_rr * measure
        self._row_u = base * (np.log(self.nodes)[None, :] - F) * meas[None, :]
        self._row_du = -base * Fr * meas[None, :]
        self._row_ddu = -base * Frr * meas[None, :]

    def apply(self, f) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Evaluate (u, u', u'') for density values f(nodes)."""
        fv = np.asarray(f(self.nodes), dtype=float)
        return (self._row_u @ fv, self._row_du @ fv, self._row_ddu @ fv)


class PotentialProfile(RadialProfile):
    """u = log-potential of a curvature density plus the normalization
    constant, so u(0) equals the configured constant exactly.

    Supports derivatives up to order 2; values are cached per radius.
    """

    family = "potential"

    def __init__(self, density: CurvatureDensity,
                 config: PotentialConfig = PotentialConfig()):
        self.density = density
        self.n = density.n
        self.derivative_order = 2
        self.config = config
        self._r_cut = density.cutoff_radius(config.tail_tol)
        tail = tail_bound(density, self._r_cut)
        if not np.isfinite(tail):
            raise TailError("density tail beyond the integration cutoff "
                            "cannot be bounded")
        self.truncation_error = tail  # bound on the truncated potential mass
        self._cache: dict[float, tuple[float, float, float]] = {}

    # Radii inside the integration domain each add a panel edge to the mesh,
    # so assemble them in chunks to keep the kernel matrices rectangular
    # instead of quadratic in the number of evaluation points.
    _CHUNK = 64

    def _eval(self, r, k):
        missing = np.unique([x for x in r if x not in self._cache])
        for lo in range(0, missing.size, self._CHUNK):
            chunk = missing[lo:lo + self._CHUNK]
            asm = PotentialAssembly(self.n, chunk, self._r_cut, self.config,
                                    breaks=self.density.breaks)
            u, du, ddu = asm.apply(self.density.f)
            for i, x in enumerate(asm.radii):
                self._cache[float(x)] = (u[i], du[i], ddu[i])
        out = np.array([self._cache[x][k] for x in r])
        if k == 0:
            out = out + self.config.normalization
        return out


def potential_from_density(density: CurvatureDensity,
                           config: PotentialConfig = PotentialConfig()
                           ) -> PotentialProfile:
    """The normal (log-potential) conformal factor of a density."""
    return PotentialProfile(density, config)


@dataclass
class PicardResult:
    """Outcome of the damped fixed-point iteration for u = P[Q e^{nu}] + C."""

    profile: PotentialProfile
    density: CurvatureDensity
    grid: np.ndarray
    u_grid: np.ndarray
    iterations: int
    residual: float
    damping: float
    converged: bool
    history: list = field(default_factory=list)

    @property
    def alpha0(self) -> float:
        return self.density.alpha0


def picard_solve(n: int, q_func, r_cut: float, *, u0=None,
                 grid_points: int = 64, r_min: float = 5e-3,
                 tol: float = 1e-10, max_iter: int = 200,
                 damping: float = 1.0,
                 config: PotentialConfig = PotentialConfig()) -> PicardResult:
    """Solve u = C + log-potential of Q e^{nu} by damped iteration.

    ``q_func`` is the prescribed radial Q-curvature; ``r_cut`` must bound the
    effective support of Q e^{nu} (Q negligible beyond it); ``u0`` is an
    optional starting profile (default u = C).  The step is
    u_{k+1} = (1 - theta) u_k + theta (P[Q e^{n u_k}] + C); theta is halved
    whenever the residual increases, with a floor of 1/64.
    """
    from scipy.interpolate import CubicSpline

    check_even_dimension(n)
    C = config.normalization
    grid = np.concatenate([[0.0], np.geomspace(r_min, r_cut, grid_points - 1)])
    asm = PotentialAssembly(n, grid, r_cut, config)
    u = (np.full_like(grid, C) if u0 is None
         else np.asarray(u0.eval(grid, 0), dtype=float))
    theta = float(damping)
    residual = np.inf
    history = []
    converged = False
    for it in range(1, max_iter + 1):
        spline = CubicSpline(grid, u, bc_type=((1, 0.0), "not-a-knot"))

        def f(s):
            return np.asarray(q_func(s)) * np.exp(n * spline(s))

        u_new = asm.apply(f)[0] + C
        step = float(np.max(np.abs(u_new - u)))
        if step > residual and theta > 1.0 / 64.0:
            theta = max(theta / 2.0, 1.0 / 64.0)
        residual = step
        history.append(step)
        u = (1.0 - theta) * u + theta * u_new
        if step < tol:
            converged = True
            break

    spline = CubicSpline(grid, u, bc_type=((1, 0.0), "not-a-knot"))

    def f_final(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        inside = s <= r_cut
        out[inside] = (np.asarray(q_func(s[inside]))
                       * np.exp(n * spline(s[inside])))
        return out

    density = CurvatureDensity(n=n, f=f_final, support_radius=float(r_cut))
    profile = PotentialProfile(density, config)
    return PicardResult(profile=profile, density=density, grid=grid,
                        u_grid=u, iterations=it, residual=residual,
                        damping=theta, converged=converged, history=history)
