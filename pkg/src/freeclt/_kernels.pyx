# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Cauchy transform of an atoms+Chebyshev measure and the
per-point subordination solve.  Mirrors :mod:`freeclt._kernels_py`."""
import numpy as np
cimport numpy as cnp

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double cabs(double complex)
    double cimag(double complex)
    double creal(double complex)

cdef double PI = 3.14159265358979323846


cdef inline void _cauchy(double complex z, const double[:] ax, const double[:] aw,
                         double lo, double hi, const double[:] coef,
                         double complex* g, double complex* dg) noexcept nogil:
    cdef Py_ssize_t j, m = ax.shape[0], k = coef.shape[0]
    cdef double complex d, acc = 0, dacc = 0, zeta, s, v, pv, dpv
    cdef double c, rho
    for j in range(m):
        d = z - ax[j]
        acc += aw[j] / d
        dacc -= aw[j] / (d * d)
    if k > 0:
        c = 0.5 * (lo + hi)
        rho = 0.5 * (hi - lo)
        zeta = (z - c) / rho
        s = csqrt(zeta - 1.0) * csqrt(zeta + 1.0)
        v = zeta - s
        pv = coef[k - 1]
        dpv = 0
        for j in range(k - 2, -1, -1):
            dpv = dpv * v + pv
            pv = pv * v + coef[j]
        acc += PI * pv / s
        dacc += PI * (-dpv * v / (s * s) - pv * zeta / (s * s * s)) / rho
    g[0] = acc
    dg[0] = dacc


def cauchy_eval(cnp.complex128_t[:] z, const double[:] ax, const double[:] aw,
                double lo, double hi, const double[:] coef):
    """Return ``(G(z), G'(z))`` arrays."""
    cdef Py_ssize_t i, n = z.shape[0]
    out = np.empty(n, dtype=np.complex128)
    dout = np.empty(n, dtype=np.complex128)
    cdef cnp.complex128_t[:] o = out
    cdef cnp.complex128_t[:] do = dout
    cdef double complex g, dg
    with nogil:
        for i in range(n):
            _cauchy(z[i], ax, aw, lo, hi, coef, &g, &dg)
            o[i] = g
            do[i] = dg
    return out, dout


cdef int _solve_one(double complex z, double complex w0, const double[:] ax, const double[:] aw,
                    double lo, double hi, const double[:] coef, double n, double tol,
                    int picard_max, int max_iter, double complex* res, int* iters) noexcept nogil:
    cdef double complex w = w0, wn, g, dg, F, dF, h, dh, delta, trial, r0, r1
    cdef double step, prev = 1e300, lam
    cdef int it = 0, k, halvings
    cdef double a = (n - 1.0) / n
    # Picard phase: T(w) = z/n + (n-1)/n F(w) maps C+ into itself
    while it < picard_max:
        _cauchy(w, ax, aw, lo, hi, coef, &g, &dg)
        wn = z / n + a / g
        step = cabs(wn - w)
        w = wn
        it += 1
        if step <= tol * (1.0 + cabs(w)):
            res[0] = w
            iters[0] = it
            return 0
        if it >= 5 and step > 0.5 * prev:
            break
        prev = step
    # damped Newton on h(w) = n w - (n-1) F(w) - z
    while it < max_iter:
        _cauchy(w, ax, aw, lo, hi, coef, &g, &dg)
        F = 1.0 / g
        dF = -dg / (g * g)
        h = n * w - (n - 1.0) * F - z
        dh = n - (n - 1.0) * dF
        delta = h / dh
        r0 = h
        lam = 1.0
        halvings = 0
        while True:
            trial = w - lam * delta
            if cimag(trial) > 0:
                _cauchy(trial, ax, aw, lo, hi, coef, &g, &dg)
                r1 = n * trial - (n - 1.0) / g - z
                if cabs(r1) < cabs(r0) or halvings >= 40:
                    break
            lam *= 0.5
            halvings += 1
            if halvings > 60:
                break
        it += 1
        if cimag(trial) <= 0:
            # cannot move without leaving C+: stuck
            res[0] = w
            iters[0] = it
            return 1
        w = trial
        if cabs(lam * delta) <= tol * (1.0 + cabs(w)) and cabs(r1) <= n * tol * (1.0 + cabs(w)):
            res[0] = w
            iters[0] = it
            return 0
        if cabs(r1) == 0.0:
            res[0] = w
            iters[0] = it
            return 0
    res[0] = w
    iters[0] = it
    return 1


def solve_z(cnp.complex128_t[:] z, cnp.complex128_t[:] w0, const double[:] ax, const double[:] aw,
            double lo, double hi, const double[:] coef, double n, double tol,
            int picard_max=500, int max_iter=10000):
    """Solve ``z = n Z - (n-1) F(Z)`` pointwise.  Returns ``(Z, iters, status)``."""
    cdef Py_ssize_t i, m = z.shape[0]
    Z = np.empty(m, dtype=np.complex128)
    iters = np.empty(m, dtype=np.int64)
    status = np.empty(m, dtype=np.int64)
    cdef cnp.complex128_t[:] Zv = Z
    cdef cnp.int64_t[:] itv = iters
    cdef cnp.int64_t[:] stv = status
    cdef double complex r
    cdef int it
    with nogil:
        for i in range(m):
            stv[i] = _solve_one(z[i], w0[i], ax, aw, lo, hi, coef, n, tol,
                                picard_max, max_iter, &r, &it)
            Zv[i] = r
            itv[i] = it
    return Z, iters, status
