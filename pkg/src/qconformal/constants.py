"""Dimensional constants shared by every normalization in the package.

All sphere volumes come from the Gamma-function formula and are cached, so
every module sees bit-identical values.
"""

from __future__ import annotations

import math
from functools import lru_cache


@lru_cache(maxsize=None)
def sphere_area(n: int) -> float:
    """Surface volume |S^n| of the unit n-sphere embedded in R^{n+1}."""
    if n < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {n}")
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


@lru_cache(maxsize=None)
def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    if n < 1:
        raise ValueError(f"ball dimension must be >= 1, got {n}")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@lru_cache(maxsize=None)
def angular_weight_norm(n: int) -> float:
    """Normalization integral of sin^{n-2}(theta) over [0, pi].

    This is the theta-marginal of the uniform sphere measure in R^n:
    |S^{n-1}| = |S^{n-2}| * angular_weight_norm(n).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return math.sqrt(math.pi) * math.gamma((n - 1) / 2.0) / math.gamma(n / 2.0)


def check_even_dimension(n: int) -> None:
    """Reject dimensions outside the supported set {4, 6}."""
    if n not in (4, 6):
        raise ValueError(f"dimension must be 4 or 6, got {n}")


def total_curvature_scale(n: int) -> float:
    """(n-1)! |S^n|, the unit of total curvature integrals."""
    return math.factorial(n - 1) * sphere_area(n)


def potential_prefactor(n: int) -> float:
    """2 / ((n-1)! |S^n|), the coefficient of the log-potential."""
    return 2.0 / total_curvature_scale(n)
