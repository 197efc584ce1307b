"""Cauchy, reciprocal Cauchy and Voiculescu transforms; Stieltjes inversion;
Kolmogorov distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .errors import DomainError, InvalidArgumentError, NoConvergenceError
from .measure import _Composite

KOLMOGOROV_GRID_N = 20001
ATOM_OFFSET = 1e-12

__all__ = [
    "ComplexEvaluator",
    "cauchy_transform",
    "reciprocal_transform",
    "cauchy_evaluator",
    "reciprocal_evaluator",
    "invert_density",
    "cdf_from_density",
    "kolmogorov_grid",
    "kolmogorov_distance",
    "kolmogorov",
    "voiculescu_transform",
]


@dataclass(frozen=True)
class ComplexEvaluator:
    """A map on the open upper half-plane with a tag describing it.

    ``derivative`` is optional; consumers fall back to finite differences.
    """

    fn: Callable
    tag: str = ""
    derivative: Callable | None = field(default=None, compare=False)

    def __call__(self, z):
        return self.fn(z)


def _check_upper(z):
    if np.any(np.imag(z) <= 0):
        raise DomainError("transform requires Im z > 0")


def _cauchy_pair(mu: _Composite, z):
    z = np.asarray(z, dtype=np.complex128)
    flat = np.ascontiguousarray(z.ravel())
    ax = np.ascontiguousarray(mu.atom_locations, dtype=float)
    aw = np.ascontiguousarray(mu.atom_weights, dtype=float)
    if mu.ac is None:
        g, dg = _backend.cauchy_eval(flat, ax, aw, 0.0, 1.0, np.zeros(0))
    else:
        g, dg = _backend.cauchy_eval(flat, ax, aw, mu.ac.lo, mu.ac.hi,
                                     np.ascontiguousarray(mu.ac.coef, dtype=float))
    return g.reshape(z.shape), dg.reshape(z.shape)


def _unwrap(val, z):
    return complex(val) if np.ndim(z) == 0 else val


def cauchy_transform(mu: _Composite, z):
    """``G_mu(z) = int mu(dx) / (z - x)`` for ``Im z > 0``.

    Atoms are summed exactly; the ac part uses its closed Chebyshev form.
    """
    _check_upper(z)
    return _unwrap(_cauchy_pair(mu, z)[0], z)


def reciprocal_transform(mu: _Composite, z):
    """``F_mu(z) = 1 / G_mu(z)``."""
    return _unwrap(1.0 / np.asarray(cauchy_transform(mu, z)), z)


def cauchy_evaluator(mu: _Composite, tag: str = "") -> ComplexEvaluator:
    return ComplexEvaluator(
        lambda z: cauchy_transform(mu, z),
        tag or f"G[{mu.info.get('name', 'measure')}]",
        lambda z: _unwrap(_cauchy_pair(mu, z)[1], z),
    )


def reciprocal_evaluator(mu: _Composite, tag: str = "") -> ComplexEvaluator:
    def dF(z):
        g, dg = _cauchy_pair(mu, z)
        return _unwrap(-dg / (g * g), z)

    return ComplexEvaluator(
        lambda z: reciprocal_transform(mu, z), tag or f"F[{mu.info.get('name', 'measure')}]", dF
    )


def invert_density(G: Callable, x, eps: float = 1e-6):
    """Stieltjes inversion ``-Im G(x + i eps) / pi``."""
    if eps <= 0:
        raise InvalidArgumentError("eps must be positive")
    x = np.asarray(x, dtype=float)
    val = -np.imag(G(x + 1j * eps)) / math.pi
    return float(val) if np.ndim(x) == 0 else val


def cdf_from_density(d: _Composite) -> Callable:
    """Right-continuous distribution function ``x -> d((-inf, x])``."""

    def F(x):
        out = d.cdf(x)
        return float(out) if np.ndim(x) == 0 else out

    return F


def kolmogorov_grid(*measures: _Composite, n: int = KOLMOGOROV_GRID_N) -> np.ndarray:
    """Uniform grid over the joint support (margin 1) plus edges and atom neighbours."""
    if not measures:
        raise InvalidArgumentError("need at least one measure")
    lo = min(m.support[0] for m in measures) - 1.0
    hi = max(m.support[1] for m in measures) + 1.0
    pts = [np.linspace(lo, hi, n)]
    for m in measures:
        for x, _ in m.atoms:
            pts.append(np.array([x - ATOM_OFFSET, x, x + ATOM_OFFSET]))
        if m.ac is not None:
            pts.append(np.array([m.ac.lo, m.ac.hi]))
    return np.unique(np.concatenate(pts))


def kolmogorov_distance(f1: Callable, f2: Callable, grid: Sequence[float], *, refine: int = 2) -> float:
    """``max |f1 - f2|`` over ``grid``, locally refined around the largest values.

    Refinement only adds evaluation points, so the result never decreases
    below the plain grid maximum.
    """
    x = np.asarray(grid, dtype=float)
    if x.size == 0:
        raise InvalidArgumentError("empty grid")
    x = np.unique(x)
    d = np.abs(np.asarray(f1(x)) - np.asarray(f2(x)))
    best = float(d.max())
    if refine <= 0 or x.size < 3:
        return best
    # refine around the leading local maxima
    order = np.argsort(d)[::-1][:8]
    for i in order:
        a = x[max(i - 1, 0)]
        b = x[min(i + 1, x.size - 1)]
        for _ in range(refine):
            xs = np.linspace(a, b, 201)
            ds = np.abs(np.asarray(f1(xs)) - np.asarray(f2(xs)))
            j = int(np.argmax(ds))
            best = max(best, float(ds[j]))
            a, b = xs[max(j - 1, 0)], xs[min(j + 1, xs.size - 1)]
    return best


def kolmogorov(mu: _Composite, nu: _Composite, n: int = KOLMOGOROV_GRID_N) -> float:
    """Kolmogorov distance between two (possibly signed) measures."""
    grid = kolmogorov_grid(mu, nu, n=n)
    return kolmogorov_distance(mu.cdf, nu.cdf, grid)


def _F_and_dF(obj):
    """Return a callable ``z -> (F(z), F'(z))`` for a measure, solver or evaluator."""
    if isinstance(obj, _Composite):
        def fd(z):
            g, dg = _cauchy_pair(obj, np.array([z]))
            return complex(1 / g[0]), complex(-dg[0] / g[0] ** 2)
        return fd
    if hasattr(obj, "F_and_derivative"):
        def fd(z):
            F, dF = obj.F_and_derivative(np.array([z]))
            return complex(F[0]), complex(dF[0])
        return fd
    F = obj
    dF = getattr(obj, "derivative", None)

    def fd(z):
        f = complex(F(z))
        if dF is not None:
            return f, complex(dF(z))
        h = 1e-6 * max(1.0, abs(z))
        return f, (complex(F(z + h)) - complex(F(z - h))) / (2 * h)

    return fd


def voiculescu_transform(mu, z: complex, tol: float = 1e-12, max_iter: int = 100) -> complex:
    """``phi_mu(z) = F_mu^{-1}(z) - z`` by Newton's method from ``w = z``.

    ``mu`` may be a measure, a :class:`~freeclt.subordination.Subordination`
    solver (for convolution powers) or a reciprocal-transform evaluator.
    """
    z = complex(z)
    _check_upper(z)
    fd = _F_and_dF(mu)
    w = z
    for _ in range(max_iter):
        f, df = fd(w)
        r = f - z
        if abs(r) <= tol * (1.0 + abs(z)):
            return w - z
        step = r / df
        lam = 1.0
        while (w - lam * step).imag <= 0 and lam > 1e-12:
            lam *= 0.5
        w = w - lam * step
    raise NoConvergenceError(f"Newton for F^(-1) did not converge at z={z!r}")
