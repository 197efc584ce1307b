"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and semantics; iteration is vectorized over the active
points instead of looping per point.
"""
from __future__ import annotations

import numpy as np


def cauchy_eval(z, ax, aw, lo, hi, coef):
    """Return ``(G(z), G'(z))`` arrays."""
    z = np.asarray(z, dtype=np.complex128)
    ax = np.asarray(ax, dtype=float)
    aw = np.asarray(aw, dtype=float)
    coef = np.asarray(coef, dtype=float)
    g = np.zeros_like(z)
    dg = np.zeros_like(z)
    for x, w in zip(ax, aw):
        d = z - x
        g += w / d
        dg -= w / (d * d)
    if coef.size:
        c, rho = 0.5 * (lo + hi), 0.5 * (hi - lo)
        zeta = (z - c) / rho
        s = np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)
        v = zeta - s
        pv = np.full_like(z, coef[-1])
        dpv = np.zeros_like(z)
        for ck in coef[-2::-1]:
            dpv = dpv * v + pv
            pv = pv * v + ck
        g += np.pi * pv / s
        dg += np.pi * (-dpv * v / (s * s) - pv * zeta / s ** 3) / rho
    return g, dg


def solve_z(z, w0, ax, aw, lo, hi, coef, n, tol, picard_max=500, max_iter=10000):
    """Solve ``z = n Z - (n-1) F(Z)`` pointwise.  Returns ``(Z, iters, status)``."""
    z = np.asarray(z, dtype=np.complex128)
    w = np.array(w0, dtype=np.complex128)
    m = z.size
    iters = np.zeros(m, dtype=np.int64)
    status = np.ones(m, dtype=np.int64)
    a = (n - 1.0) / n
    ev = lambda q: cauchy_eval(q, ax, aw, lo, hi, coef)

    # Picard phase
    active = np.arange(m)
    prev = np.full(m, np.inf)
    newton = np.zeros(m, dtype=bool)
    for it in range(1, picard_max + 1):
        if active.size == 0:
            break
        g, _ = ev(w[active])
        wn = z[active] / n + a / g
        step = np.abs(wn - w[active])
        w[active] = wn
        iters[active] = it
        done = step <= tol * (1.0 + np.abs(wn))
        status[active[done]] = 0
        slow = ~done & (it >= 5) & (step > 0.5 * prev[active])
        newton[active[slow]] = True
        prev[active] = step
        active = active[~done & ~slow]
    newton[active] = True

    # damped Newton phase
    active = np.nonzero(newton)[0]
    while active.size:
        wa = w[active]
        za = z[active]
        g, dg = ev(wa)
        h = n * wa - (n - 1.0) / g - za
        dh = n + (n - 1.0) * dg / (g * g)
        delta = h / dh
        lam = np.ones(active.size)
        trial = wa - delta
        r1 = np.full(active.size, np.inf, dtype=np.complex128)
        pending = np.ones(active.size, dtype=bool)
        for halving in range(61):
            idx = np.nonzero(pending)[0]
            if idx.size == 0:
                break
            trial[idx] = wa[idx] - lam[idx] * delta[idx]
            ok = trial[idx].imag > 0
            good = idx[ok]
            if good.size:
                gt, _ = ev(trial[good])
                r1[good] = n * trial[good] - (n - 1.0) / gt - za[good]
                accept = (np.abs(r1[good]) < np.abs(h[good])) | (halving >= 40)
                pending[good[accept]] = False
            lam[pending] *= 0.5
        iters[active] += 1
        stuck = trial.imag <= 0
        status[active[stuck]] = 1
        moved = ~stuck
        w[active[moved]] = trial[moved]
        scale = 1.0 + np.abs(trial)
        conv = moved & (
            ((np.abs(lam * delta) <= tol * scale) & (np.abs(r1) <= n * tol * scale)) | (r1 == 0)
        )
        status[active[conv]] = 0
        out = stuck | conv | (iters[active] >= max_iter)
        active = active[~out]
    return w, iters, status
