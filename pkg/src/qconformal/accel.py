"""Backend selection for the hot quadrature loops.

The angular kernel averages are evaluated O(radii x radial-nodes x theta-nodes)
times inside the potential operator, which dominates total runtime.  Two
implementations of the inner loops are provided:

* a numba ``@njit(parallel=True)`` version (default when numba imports), and
* a pure-numpy broadcast version.

Set ``QCONFORMAL_BACKEND=numpy`` (or ``numba``) to force one of them; both
compute the same sums in the same order per (r, s) pair, so results agree to
floating-point rounding.  ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_VAR = "QCONFORMAL_BACKEND"


# ---------------------------------------------------------------------------
# pure-numpy reference implementations
# ---------------------------------------------------------------------------

def _log_kernel_many_np(r_vec, s, omc, wt):
    """Angular averages of log|x-y| and its first two r-derivatives.

    r_vec : (R,) evaluation radii, all > 0
    s     : (S,) source radii, >= 0
    omc, wt : quadrature rule; omc = 1 - cos(theta) for the normalized
              sin^{n-2} measure (kept as 1 - cos so the diagonal r = s is
              exact instead of cancelling catastrophically)

    Returns (F, Fr, Frr), each of shape (R, S).
    """
    nr, ns = len(r_vec), len(s)
    F = np.empty((nr, ns))
    Fr = np.empty((nr, ns))
    Frr = np.empty((nr, ns))
    for i in range(nr):
        r = r_vec[i]
        # D = |x-y|^2 = (r - s)^2 + 2 r s (1 - cos theta)
        d = r - s[:, None]
        D = d * d + 2.0 * r * s[:, None] * omc[None, :]
        num = d + s[:, None] * omc[None, :]
        F[i] = 0.5 * (np.log(D) @ wt)
        Fr[i] = (num / D) @ wt
        Frr[i] = ((D - 2.0 * num * num) / (D * D)) @ wt
    return F, Fr, Frr


def _pow_kernel_many_np(r_vec, s, k, omc, wt):
    """Angular average of |x-y|^{-k}; shape (R, S)."""
    nr, ns = len(r_vec), len(s)
    out = np.empty((nr, ns))
    e = -0.5 * k
    for i in range(nr):
        r = r_vec[i]
        d = r - s[:, None]
        D = d * d + 2.0 * r * s[:, None] * omc[None, :]
        out[i] = (D ** e) @ wt
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _build_numba():
    from numba import njit, prange

    @njit(cache=True, parallel=True)
    def log_kernel_many(r_vec, s, omc, wt):
        nr, ns, nt = len(r_vec), len(s), len(omc)
        F = np.empty((nr, ns))
        Fr = np.empty((nr, ns))
        Frr = np.empty((nr, ns))
        for i in prange(nr):
            r = r_vec[i]
            for j in range(ns):
                sj = s[j]
                d = r - sj
                acc0 = 0.0
                acc1 = 0.0
                acc2 = 0.0
                for t in range(nt):
                    D = d * d + 2.0 * r * sj * omc[t]
                    num = d + sj * omc[t]
                    w = wt[t]
                    acc0 += w * np.log(D)
                    acc1 += w * num / D
                    acc2 += w * (D - 2.0 * num * num) / (D * D)
                F[i, j] = 0.5 * acc0
                Fr[i, j] = acc1
                Frr[i, j] = acc2
        return F, Fr, Frr

    @njit(cache=True, parallel=True)
    def pow_kernel_many(r_vec, s, k, omc, wt):
        nr, ns, nt = len(r_vec), len(s), len(omc)
        out = np.empty((nr, ns))
        e = -0.5 * k
        for i in prange(nr):
            r = r_vec[i]
            for j in range(ns):
                sj = s[j]
                d = r - sj
                acc = 0.0
                for t in range(nt):
                    D = d * d + 2.0 * r * sj * omc[t]
                    acc += wt[t] * D ** e
                out[i, j] = acc
        return out

    return log_kernel_many, pow_kernel_many


def _select_backend():
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")
    if choice in ("", "numba"):
        try:
            return _build_numba() + ("numba",)
        except ImportError:
            if choice == "numba":
                raise
    return _log_kernel_many_np, _pow_kernel_many_np, "numpy"


log_kernel_many, pow_kernel_many, BACKEND = _select_backend()


def backend_name() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return BACKEND
