"""Hot loops: tridiagonal factor/solve and the relaxed fixed-point sweep.

Each kernel exists twice: a numba ``@njit`` version and a pure numpy/LAPACK
version with the same signature. Set ``CCPB_DISABLE_JIT=1`` (or run without
numba installed) to force the numpy path.
"""
from __future__ import annotations

import os

import numpy as np
from scipy.linalg import lapack

_WANT_JIT = os.environ.get("CCPB_DISABLE_JIT", "0").lower() not in ("1", "true", "yes")

try:
    if not _WANT_JIT:
        raise ImportError("jit disabled by CCPB_DISABLE_JIT")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

# error codes shared by both paths
OK, ZERO_PIVOT, OVERFLOW, NONFINITE = 0, 1, 2, 3


class ZeroPivotError(ZeroDivisionError):
    pass


# --------------------------------------------------------------------------
# numpy reference implementations
# --------------------------------------------------------------------------

def _thomas_factor_py(sub, diag, sup):
    n = diag.shape[0]
    cp = np.zeros(n)
    den = np.empty(n)
    den[0] = diag[0]
    if den[0] == 0.0:
        return cp, den, ZERO_PIVOT
    for i in range(n - 1):
        cp[i] = sup[i] / den[i]
        den[i + 1] = diag[i + 1] - sub[i] * cp[i]
        if den[i + 1] == 0.0:
            return cp, den, ZERO_PIVOT
    return cp, den, OK


def _thomas_solve_py(sub, cp, den, rhs):
    n = rhs.shape[0]
    y = np.empty(n)
    y[0] = rhs[0] / den[0]
    for i in range(1, n):
        y[i] = (rhs[i] - sub[i - 1] * y[i - 1]) / den[i]
    for i in range(n - 2, -1, -1):
        y[i] -= cp[i] * y[i + 1]
    return y


def _source_np(phi, w, q, m, pb, cap):
    arg = np.multiply.outer(phi, q)
    if not np.all(np.isfinite(arg)):
        return None, NONFINITE
    if np.max(np.abs(arg)) > cap:
        return None, OVERFLOW
    e = np.exp(arg)
    norm = np.full(q.shape, 2.0) if pb else w @ e
    return e @ (q * m / norm), OK


def _relax_np(phi, w, sub, diag, sup, bc_rhs, free, s, tol, n_steps, q, m, pb, cap):
    """Numpy twin of ``_relax_jit``; LAPACK gttrs does the per-step solve."""
    dl, d, du, du2, ipiv, info = lapack.dgttrf(sub, diag, sup)
    if info != 0:
        return 0, False, np.inf, np.empty(0), ZERO_PIVOT
    hist = np.empty(n_steps)
    delta = np.inf
    for it in range(n_steps):
        g, code = _source_np(phi, w, q, m, pb, cap)
        if code != OK:
            return it, False, delta, hist[:it], code
        rhs = np.where(free, bc_rhs - w * g, bc_rhs)
        a_phi = diag * phi
        a_phi[1:] += sub * phi[:-1]
        a_phi[:-1] += sup * phi[1:]
        hist[it] = np.sum((a_phi - rhs)[free])
        half, info = lapack.dgttrs(dl, d, du, du2, ipiv, rhs)
        delta = np.max(np.abs(half - phi))
        phi *= (1.0 - s)
        phi += s * half
        if not np.isfinite(delta):
            return it + 1, False, delta, hist[:it + 1], NONFINITE
        if delta <= tol:
            return it + 1, True, delta, hist[:it + 1], OK
    return n_steps, False, delta, hist, OK


# --------------------------------------------------------------------------
# numba versions
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _thomas_factor_jit(sub, diag, sup):
        n = diag.shape[0]
        cp = np.zeros(n)
        den = np.empty(n)
        den[0] = diag[0]
        if den[0] == 0.0:
            return cp, den, ZERO_PIVOT
        for i in range(n - 1):
            cp[i] = sup[i] / den[i]
            den[i + 1] = diag[i + 1] - sub[i] * cp[i]
            if den[i + 1] == 0.0:
                return cp, den, ZERO_PIVOT
        return cp, den, OK

    @njit(cache=True)
    def _thomas_solve_jit(sub, cp, den, rhs):
        n = rhs.shape[0]
        y = np.empty(n)
        y[0] = rhs[0] / den[0]
        for i in range(1, n):
            y[i] = (rhs[i] - sub[i - 1] * y[i - 1]) / den[i]
        for i in range(n - 2, -1, -1):
            y[i] -= cp[i] * y[i + 1]
        return y

    @njit(cache=True)
    def _relax_jit(phi, w, sub, diag, sup, bc_rhs, free, s, tol, n_steps, q, m, pb, cap):
        n = phi.shape[0]
        ns = q.shape[0]
        cp, den, code = _thomas_factor_jit(sub, diag, sup)
        hist = np.empty(n_steps)
        if code != OK:
            return 0, False, np.inf, hist[:0], code
        coef = np.empty(ns)
        g = np.empty(n)
        rhs = np.empty(n)
        y = np.empty(n)
        delta = np.inf
        ex = np.empty((ns, n))
        for it in range(n_steps):
            for k in range(ns):
                norm = 0.0
                for i in range(n):
                    arg = q[k] * phi[i]
                    if not (abs(arg) <= cap):
                        if np.isfinite(arg):
                            return it, False, delta, hist[:it], OVERFLOW
                        return it, False, delta, hist[:it], NONFINITE
                    e = np.exp(arg)
                    ex[k, i] = e
                    norm += w[i] * e
                coef[k] = q[k] * m[k] / (2.0 if pb else norm)
            for i in range(n):
                acc = 0.0
                for k in range(ns):
                    acc += coef[k] * ex[k, i]
                g[i] = acc
            rint = 0.0
            for i in range(n):
                if free[i]:
                    rhs[i] = bc_rhs[i] - w[i] * g[i]
                else:
                    rhs[i] = bc_rhs[i]
                if free[i]:
                    a_phi = diag[i] * phi[i]
                    if i > 0:
                        a_phi += sub[i - 1] * phi[i - 1]
                    if i < n - 1:
                        a_phi += sup[i] * phi[i + 1]
                    rint += a_phi - rhs[i]
            hist[it] = rint
            # forward / back substitution with the cached factors
            y[0] = rhs[0] / den[0]
            for i in range(1, n):
                y[i] = (rhs[i] - sub[i - 1] * y[i - 1]) / den[i]
            for i in range(n - 2, -1, -1):
                y[i] -= cp[i] * y[i + 1]
            delta = 0.0
            for i in range(n):
                d_i = abs(y[i] - phi[i])
                if d_i > delta or d_i != d_i:
                    delta = d_i
                phi[i] = s * y[i] + (1.0 - s) * phi[i]
            if not np.isfinite(delta):
                return it + 1, False, delta, hist[:it + 1], NONFINITE
            if delta <= tol:
                return it + 1, True, delta, hist[:it + 1], OK
        return n_steps, False, delta, hist, OK

    thomas_factor = _thomas_factor_jit
    thomas_solve = _thomas_solve_jit
    relax = _relax_jit
else:
    thomas_factor = _thomas_factor_py
    thomas_solve = _thomas_solve_py
    relax = _relax_np

BACKEND = "numba" if HAVE_NUMBA else "numpy"
