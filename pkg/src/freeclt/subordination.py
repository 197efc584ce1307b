"""Free additive convolution powers through the subordination function.

For ``n >= 2`` the Cauchy transform of the ``n``-fold free convolution power
is ``G_mu(Z(z))``, where ``Z`` is the unique solution in the upper
half-plane of

    z = n Z - (n - 1) F_mu(Z),      F_mu = 1 / G_mu.

``Z`` is found by Picard iteration of ``T(w) = z/n + (n-1)/n F_mu(w)``
started at ``w = z``, switching to damped Newton on the same equation when
the Picard steps stop contracting.  Boundary values on the real axis are
reached by continuation ``z = x + i y`` with ``y`` decreasing to 0.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from . import _backend
from ._cheb import ChebDensity
from .errors import AccuracyError, DomainError, InvalidArgumentError, NoConvergenceError
from .measure import Measure, affine, moment, tail_moment

DEFAULT_TOL = 1e-12
PICARD_MAX = 500
MAX_ITER = 10_000
_LADDER = (1.0, 0.3, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-10, 1e-12)

__all__ = [
    "Subordination",
    "solve_Z",
    "convolution_power_G",
    "free_power",
    "clt_measure",
    "z_lower_bound_check",
]


def _kernel_args(mu: Measure):
    ax = np.ascontiguousarray(mu.atom_locations, dtype=float)
    aw = np.ascontiguousarray(mu.atom_weights, dtype=float)
    if mu.ac is None:
        return ax, aw, 0.0, 1.0, np.zeros(0)
    return ax, aw, mu.ac.lo, mu.ac.hi, np.ascontiguousarray(mu.ac.coef, dtype=float)


@dataclass
class Subordination:
    """Subordination solver for ``mu^{boxplus n}`` with a memo of solved points.

    Parameters
    ----------
    base : Measure
    n : int
        Convolution power, ``n >= 2``.
    tol : float
        Relative step and residual tolerance: ``|T(Z) - Z| <= tol (1 + |Z|)``.
    memoize : bool
        Keep solved ``Z(z)`` keyed by the exact bits of ``z``.  The memo is
        guarded by a lock, so one instance may be shared between threads.
    """

    base: Measure
    n: int
    tol: float = DEFAULT_TOL
    memoize: bool = True
    stats: dict = field(default_factory=lambda: {"solves": 0, "iterations": 0, "max_iterations": 0})

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgumentError("n must be an integer >= 2")
        if self.tol <= 0:
            raise InvalidArgumentError("tol must be positive")
        self.n = int(self.n)
        self._args = _kernel_args(self.base)
        self._memo: dict[tuple[float, float], complex] = {}
        self._lock = threading.Lock()

    # base-measure transforms ---------------------------------------------

    def G_base(self, w):
        g, _ = _backend.cauchy_eval(np.atleast_1d(np.asarray(w, dtype=np.complex128)), *self._args)
        return g

    def F_base(self, w):
        return 1.0 / self.G_base(w)

    def residual(self, z, Z):
        """``|z - n Z + (n-1) F_mu(Z)|``."""
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        Z = np.atleast_1d(np.asarray(Z, dtype=np.complex128))
        return np.abs(z - self.n * Z + (self.n - 1) * self.F_base(Z))

    def residual_bound(self, Z):
        return 4.0 * self.n * self.tol * (1.0 + np.abs(Z))

    # core solve ----------------------------------------------------------

    def _raw_solve(self, z, w0):
        z = np.ascontiguousarray(z, dtype=np.complex128)
        w0 = np.ascontiguousarray(w0, dtype=np.complex128)
        Z, iters, status = _backend.solve_z(
            z, w0, *self._args, float(self.n), float(self.tol), PICARD_MAX, MAX_ITER
        )
        if iters.size:
            self.stats["solves"] += int(iters.size)
            self.stats["iterations"] += int(iters.sum())
            self.stats["max_iterations"] = max(self.stats["max_iterations"], int(iters.max()))
        return Z, status

    def _check(self, z, Z, status):
        bad = status != 0
        if bad.any():
            i = int(np.nonzero(bad)[0][0])
            raise NoConvergenceError(f"subordination solve failed at z={z[i]!r} (n={self.n})")
        res = self.residual(z, Z)
        over = res > self.residual_bound(Z)
        if over.any():
            i = int(np.nonzero(over)[0][0])
            raise AccuracyError(f"fixed-point residual {res[i]:.3g} at z={z[i]!r}")

    def solve(self, z):
        """``Z(z)`` for ``z`` in the open upper half-plane (array in, array out)."""
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
        if np.any(z.imag <= 0):
            raise DomainError("subordination requires Im z > 0")
        out = np.empty_like(z)
        todo = np.ones(z.size, dtype=bool)
        if self.memoize:
            with self._lock:
                for i, zi in enumerate(z):
                    hit = self._memo.get((zi.real, zi.imag))
                    if hit is not None:
                        out[i] = hit
                        todo[i] = False
        if todo.any():
            zt = z[todo]
            Z, status = self._raw_solve(zt, zt)
            self._check(zt, Z, status)
            out[todo] = Z
            if self.memoize:
                with self._lock:
                    for zi, Zi in zip(zt, Z):
                        self._memo[(zi.real, zi.imag)] = complex(Zi)
        return out

    def solve_boundary(self, x, eps: float = 0.0):
        """``Z(x + i eps)`` for real ``x`` by continuation from ``Im z = 1``.

        With ``eps = 0`` this is the boundary value ``lim_{y -> 0+} Z(x + i y)``,
        which lies in the open upper half-plane exactly where the convolution
        power has positive density.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        lo, hi = self.hull()
        width = max(hi - lo, 1.0)
        ys = [y * width for y in _LADDER if y * width > eps] + [eps]
        z = x + 1j * ys[0]
        w, status = self._raw_solve(z, z)
        self._check(z, w, status)
        for y in ys[1:]:
            z = x + 1j * y
            w, status = self._raw_solve(z, w)
            if y > 0:
                self._check(z, w, status)
        if np.any(status != 0):
            # real-axis points off the support have real Z; report them as such
            w = np.where(status != 0, w.real + 0j, w)
        return w

    def hull(self) -> tuple[float, float]:
        """Interval guaranteed to contain the support of the convolution power."""
        lo, hi = self.base.support
        m1 = moment(self.base, 1)
        var = moment(self.base, 2) - m1 * m1
        n = self.n
        # support of mu^{boxplus n} lies in n*m1 +- (2 sqrt(n var) + max|x - m1|)
        reach = 2.0 * math.sqrt(n * var) + max(abs(lo - m1), abs(hi - m1))
        return n * m1 - reach, n * m1 + reach

    # convolution power --------------------------------------------------

    def G(self, z):
        """Cauchy transform of ``mu^{boxplus n}``."""
        return self.G_base(self.solve(z))

    def F(self, z):
        return 1.0 / self.G(z)

    def F_and_derivative(self, z):
        """``F_{mu^{boxplus n}}(z)`` and its derivative ``F_mu'(Z) / h'(Z)``."""
        Z = self.solve(z)
        g, dg = _backend.cauchy_eval(Z, *self._args)
        dF = -dg / (g * g)
        return 1.0 / g, dF / (self.n - (self.n - 1) * dF)

    def density(self, x, eps: float = 0.0):
        """Density of ``mu^{boxplus n}`` by Stieltjes inversion of boundary values."""
        Z = self.solve_boundary(x, eps)
        return np.maximum(-self.G_base(Z).imag / math.pi, 0.0)

    def memo_values(self) -> np.ndarray:
        with self._lock:
            return np.array(list(self._memo.values()), dtype=np.complex128)

    # support ------------------------------------------------------------

    def _h_real(self, w):
        w = np.asarray(w, dtype=float)
        return self.n * w - (self.n - 1) / self.G_base(w.astype(complex)).real

    def atoms(self) -> list[tuple[float, float]]:
        """Atoms of ``mu^{boxplus n}``: ``n x_j`` with mass ``n p_j - (n-1)`` when positive."""
        out = []
        for x, p in self.base.atoms:
            m = self.n * p - (self.n - 1)
            if m > 1e-14:
                out.append((self.n * x, m))
        return out

    def support_edges(self) -> list[float]:
        """Candidate edges of the ac support: images ``h(c)`` of real critical points."""
        n = self.n
        if self.base.ac is None:
            xs = self.base.atom_locations
            ps = self.base.atom_weights
            roots = [Polynomial.fromroots([x]) for x in xs]
            A = Polynomial([0.0])
            B = Polynomial([0.0])
            for j, p in enumerate(ps):
                others = Polynomial([1.0])
                for k, r in enumerate(roots):
                    if k != j:
                        others = others * r
                A = A + p * others
                B = B + p * others * others
            crit = (n * A * A - (n - 1) * B).roots()
            scale = 1.0 + np.abs(xs).max()
            crit = np.sort(crit[np.abs(crit.imag) <= 1e-9 * scale].real)
            Pi = Polynomial.fromroots(xs)
            edges = []
            for c in crit:
                a = A(c)
                if abs(a) < 1e-300:
                    continue
                edges.append(n * c - (n - 1) * Pi(c) / a)
            return sorted(edges)
        return list(self._ac_outer_edges())

    def _ac_outer_edges(self):
        n = self.n
        lo, hi = self.base.support

        def dh(w):
            g, dg = _backend.cauchy_eval(np.array([complex(w)]), *self._args)
            return n + (n - 1) * (dg[0] / g[0] ** 2).real

        width = hi - lo
        out = []
        for edge, sgn in ((lo, -1.0), (hi, 1.0)):
            deltas = width * np.geomspace(1e-14, 1e3, 300)
            vals = np.array([dh(edge + sgn * d) for d in deltas])
            # outermost sign change from negative (near the base) to positive (far away)
            pos = vals > 0
            idx = np.nonzero(~pos[:-1] & pos[1:])[0]
            if idx.size == 0:
                w_star = edge + sgn * deltas[0]
            else:
                i = idx[-1]
                d_star = brentq(lambda d: dh(edge + sgn * d), deltas[i], deltas[i + 1], xtol=1e-15 * width, rtol=1e-15)
                w_star = edge + sgn * d_star
            out.append(float(self._h_real(np.array([w_star]))[0]))
        return out

    def ac_support(self) -> tuple[float, float] | None:
        """The single interval carrying the ac part of ``mu^{boxplus n}``."""
        edges = self.support_edges()
        if self.base.ac is not None:
            return edges[0], edges[1]
        if len(edges) < 2:
            return None
        mids = [0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])]
        dens = self.density(np.array(mids))
        peak = max(dens.max(), 1e-300)
        inside = [i for i, d in enumerate(dens) if d > 1e-9 * peak]
        if not inside:
            return None
        runs = np.split(np.array(inside), np.nonzero(np.diff(inside) != 1)[0] + 1)
        if len(runs) > 1:
            raise InvalidArgumentError(
                "convolution power has a disconnected ac support; only single intervals are supported"
            )
        return edges[runs[0][0]], edges[runs[0][-1] + 1]

    # assembled measure --------------------------------------------------

    def power_measure(self, *, eps: float = 0.0, max_nodes: int = 4096) -> Measure:
        """``mu^{boxplus n}`` as a Measure (ac part fitted in Chebyshev form)."""
        atoms = self.atoms()
        target = 1.0 - math.fsum(w for _, w in atoms)
        info = {"n": self.n, "tol": self.tol, "eps": eps, "backend": _backend.BACKEND}
        if target <= 1e-12:
            return Measure(atoms, None, info)
        lo, hi = self.ac_support()
        c, rho = 0.5 * (lo + hi), 0.5 * (hi - lo)

        def weighted(t):
            return self.density(c + rho * t, eps) * np.sqrt((1.0 - t) * (1.0 + t))

        ac = ChebDensity.fit(lo, hi, weighted, n_max=max_nodes)
        factor = target / ac.mass
        if abs(factor - 1.0) > 1e-4:
            raise AccuracyError(
                f"mass defect {abs(factor - 1.0):.3g} after inversion; increase the node budget"
            )
        info.update(renormalization=factor, nodes=int(ac.coef.size))
        return Measure(atoms, ac * factor, info)


# ---------------------------------------------------------------------------
# functional API


def solve_Z(mu: Measure, n: int, z, tol: float = DEFAULT_TOL):
    """Subordination function ``Z(z)`` of ``mu^{boxplus n}``."""
    out = Subordination(mu, n, tol, memoize=False).solve(z)
    return out[0] if np.ndim(z) == 0 else out


def convolution_power_G(mu: Measure, n: int, z, tol: float = DEFAULT_TOL):
    """``G_{mu^{boxplus n}}(z) = 1 / F_mu(Z(z))``."""
    out = Subordination(mu, n, tol, memoize=False).G(z)
    return out[0] if np.ndim(z) == 0 else out


def free_power(mu: Measure, n: int, *, tol: float = DEFAULT_TOL, eps: float = 0.0,
               max_nodes: int = 4096) -> Measure:
    """``mu^{boxplus n}`` (unnormalized sum)."""
    return Subordination(mu, n, tol).power_measure(eps=eps, max_nodes=max_nodes)


def clt_measure(mu: Measure, n: int, grid_n: int = 4096, eps: float = 0.0,
                tol: float = DEFAULT_TOL) -> Measure:
    """Law ``mu_n`` of ``(X_1 + ... + X_n) / sqrt(n)`` for free copies of ``X ~ mu``.

    Parameters
    ----------
    mu : Measure
        Standardized (``m_1 = 0``, ``m_2 = 1``) base law.
    n : int
    grid_n : int
        Node budget for the Chebyshev fit of the density.
    eps : float
        Distance above the real axis for Stieltjes inversion; ``0`` takes the
        boundary value itself.
    """
    m1, m2 = moment(mu, 1), moment(mu, 2)
    if abs(m1) > 1e-8 or abs(m2 - 1.0) > 1e-8:
        raise InvalidArgumentError("clt_measure needs a standardized base measure")
    rn = math.sqrt(n)
    if n == 1:
        return mu
    sol = Subordination(mu, n, tol)
    nu = sol.power_measure(eps=eps, max_nodes=grid_n)
    out = affine(nu, 1.0 / rn, 0.0)
    lo, hi = mu.support
    L = max(abs(lo), abs(hi))
    bound = 2.0 + L / rn
    slo, shi = out.support
    if slo < -bound - 1e-9 or shi > bound + 1e-9:
        raise AccuracyError(f"support [{slo}, {shi}] escapes [-{bound}, {bound}]")
    info = dict(nu.info)
    info["support_bound"] = bound
    if out.ac is not None:
        x = np.linspace(out.ac.lo, out.ac.hi, 20001)[1:-1]
        info["max_density"] = float(out.ac.pdf(x).max())
    info["stats"] = dict(sol.stats)
    return Measure(out.atoms, out.ac, info)


def z_lower_bound_check(sol: Subordination) -> bool | None:
    """Whether every memoized ``Z`` satisfies ``|Z| >= sqrt((n-1)/8)``.

    Returns ``None`` (inapplicable) unless the base is standardized,
    ``n >= 1000`` and ``rho_2(mu, sqrt((n-1)/8)) <= 1/10``.
    """
    mu, n = sol.base, sol.n
    if n < 1000:
        return None
    if abs(moment(mu, 1)) > 1e-8 or abs(moment(mu, 2) - 1.0) > 1e-8:
        return None
    r = math.sqrt((n - 1) / 8)
    if tail_moment(mu, 2, r) > 0.1:
        return None
    Z = sol.memo_values()
    return bool(np.all(np.abs(Z) >= r * (1 - 1e-12)))
