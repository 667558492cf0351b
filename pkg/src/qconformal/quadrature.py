"""Composite Gauss-Legendre rules on the radial half-line.

The kernel F_n(r, s) is analytic in s except across s = r, so radial meshes
place a panel edge at the evaluation radius instead of grading around it.
"""

from __future__ import annotations

import math

import numpy as np


def panel_rule(edges, order: int = 16):
    """Nodes and weights of composite Gauss-Legendre over the given edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halfs = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mids[:, None] + halfs[:, None] * x[None, :]).ravel()
    weights = (halfs[:, None] * w[None, :]).ravel()
    return nodes, weights


def radial_edges(r_max: float, r_min: float = 1e-3, ratio: float = 1.6,
                 r_break: float | None = None) -> np.ndarray:
    """Panel edges for [0, r_max]: one panel [0, r_min], then geometric
    growth; r_break (if interior) is inserted as an exact edge."""
    if r_max <= 0.0:
        raise ValueError("r_max must be > 0")
    r_min = min(r_min, 0.5 * r_max)
    n_geo = max(1, math.ceil(math.log(r_max / r_min) / math.log(ratio)))
    edges = [0.0] + list(r_min * (r_max / r_min) ** (np.arange(n_geo + 1) / n_geo))
    edges[-1] = r_max
    if r_break is not None and 0.0 < r_break < r_max:
        edges.append(float(r_break))
    return np.unique(np.asarray(edges))


def annulus_edges(r_lo: float, r_hi: float, ratio: float = 1.6,
                  r_break: float | None = None) -> np.ndarray:
    """Panel edges for [r_lo, r_hi], geometric, with optional interior break."""
    if not 0.0 < r_lo < r_hi:
        raise ValueError("need 0 < r_lo < r_hi")
    n_geo = max(1, math.ceil(math.log(r_hi / r_lo) / math.log(ratio)))
    edges = list(r_lo * (r_hi / r_lo) ** (np.arange(n_geo + 1) / n_geo))
    edges[-1] = r_hi
    if r_break is not None and r_lo < r_break < r_hi:
        edges.append(float(r_break))
    return np.unique(np.asarray(edges))
