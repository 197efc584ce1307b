"""Chebyshev model for densities on a compact interval.

A density ``p`` on ``[lo, hi]`` is stored as

    p(c + rho*t) = r(t) / sqrt(1 - t^2),    r(t) = sum_k coef[k] T_k(t),

with ``c`` the midpoint and ``rho`` the half-width.  Square-root edges
(``r`` vanishes at ``t = +-1``) and inverse square-root edges (``r`` finite)
both leave ``r`` smooth, so a short series is enough.  Every functional used
in the package has a closed form against the Chebyshev weight:

* mass and CDF (trigonometric antiderivatives),
* Cauchy transform ``pi * sum c_k v^k / sqrt(zeta^2 - 1)``,
* logarithmic potential ``-T_k(t)/k`` inside, ``-v^k/k`` outside,
* logarithmic energy ``sum c_k^2 / k``.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy.fft import dct

LOG2 = math.log(2.0)


def cheb_nodes(n: int) -> np.ndarray:
    """Gauss-Chebyshev (first kind) nodes, descending from ~1 to ~-1."""
    return np.cos((np.arange(n) + 0.5) * np.pi / n)


def _coefficients(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    c = dct(values, type=2) / n
    c[0] *= 0.5
    return c


def _clenshaw_u(t: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Evaluate ``sum d_j U_j(t)``."""
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for dj in d[::-1]:
        b1, b2 = dj + 2.0 * t * b1 - b2, b1
    return b1


def _csqrt_pair(zeta):
    """``sqrt(zeta^2 - 1)`` with the branch cut on [-1, 1] and ~zeta at infinity."""
    return np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)


class ChebDensity:
    """Signed or nonnegative density on ``[lo, hi]`` in the weighted Chebyshev form."""

    __slots__ = ("lo", "hi", "coef", "_vanish")

    def __init__(self, lo: float, hi: float, coef):
        if not hi > lo:
            raise ValueError(f"empty support [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        self.coef = np.asarray(coef, dtype=float).copy()
        self.coef.setflags(write=False)
        scale = max(np.abs(self.coef).max(initial=0.0), 1e-300)
        ends = C.chebval(np.array([-1.0, 1.0]), self.coef)
        self._vanish = tuple(bool(abs(e) <= 1e-10 * scale) for e in ends)

    # construction -----------------------------------------------------

    @classmethod
    def fit(cls, lo, hi, weighted, *, tol=1e-14, plateau=1e-9, n_min=32, n_max=8192):
        """Adaptive fit from ``weighted(t) = p(x(t)) * sqrt(1 - t^2)``.

        The node count doubles until the trailing eighth of the coefficients
        drops below ``tol`` relative to the largest, or, once below
        ``plateau``, stops shrinking (noise floor of the sampled function).
        """
        n = n_min
        prev_tail = np.inf
        while True:
            t = cheb_nodes(n)
            c = _coefficients(np.asarray(weighted(t), dtype=float))
            scale = max(np.abs(c).max(), 1e-300)
            tail = np.abs(c[-max(n // 8, 4):]).max() / scale
            if tail <= tol or n >= n_max or (tail < plateau and tail > 0.25 * prev_tail):
                break
            prev_tail = tail
            n *= 2
        return cls(lo, hi, _chop(c, max(tol, 1e-16)))

    @classmethod
    def from_pdf(cls, lo, hi, pdf, **kw):
        c, rho = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return cls.fit(lo, hi, lambda t: pdf(c + rho * t) * np.sqrt(1.0 - t * t), **kw)

    # geometry ---------------------------------------------------------

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def to_t(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.radius

    def vanishes_at_edges(self) -> tuple[bool, bool]:
        """Whether the density tends to 0 (square-root edge) at lo / hi."""
        return self._vanish[0], self._vanish[1]

    # algebra ------------------------------------------------------------

    def __add__(self, other: "ChebDensity") -> "ChebDensity":
        if (self.lo, self.hi) != (other.lo, other.hi):
            raise ValueError("supports differ")
        return ChebDensity(self.lo, self.hi, C.chebadd(self.coef, other.coef))

    def __mul__(self, k: float) -> "ChebDensity":
        return ChebDensity(self.lo, self.hi, self.coef * float(k))

    __rmul__ = __mul__

    def affine(self, a: float, b: float = 0.0) -> "ChebDensity":
        """Pushforward under ``x -> a*x + b`` (``a != 0``)."""
        lo, hi = sorted((a * self.lo + b, a * self.hi + b))
        c = self.coef / abs(a)
        if a < 0:
            c = c * (-1.0) ** np.arange(c.size)
        return ChebDensity(lo, hi, c)

    def times_polynomial(self, poly) -> "ChebDensity":
        """Density ``q(x) * p(x)`` for a polynomial ``q`` (power-basis coefficients in x)."""
        # q(c + rho t) as a power series in t (Horner), then to Chebyshev
        base = np.array([self.center, self.radius])
        acc = np.zeros(1)
        for coeff in np.asarray(poly, dtype=float)[::-1]:
            acc = P.polyadd(P.polymul(acc, base), [coeff])
        q_t = C.poly2cheb(acc)
        return ChebDensity(self.lo, self.hi, C.chebmul(self.coef, q_t))

    # pointwise ----------------------------------------------------------

    def r(self, t):
        return C.chebval(t, self.coef)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        t = self.to_t(x)
        out = np.zeros_like(t)
        inside = np.abs(t) < 1.0
        ti = t[inside]
        out[inside] = C.chebval(ti, self.coef) / np.sqrt((1.0 - ti) * (1.0 + ti))
        for sign, vanish in ((-1.0, self._vanish[0]), (1.0, self._vanish[1])):
            at = t == sign
            if at.any():
                out[at] = 0.0 if vanish else np.inf
        return out

    # integrals ----------------------------------------------------------

    @property
    def mass(self) -> float:
        return self.radius * math.pi * self.coef[0]

    def cdf(self, x):
        """Mass of ``(-inf, x]`` carried by this density."""
        t = np.clip(self.to_t(x), -1.0, 1.0)
        theta = np.arccos(t)
        c = self.coef
        k = np.arange(1, c.size)
        tail = np.sin(theta) * _clenshaw_u(np.cos(theta), c[1:] / k) if c.size > 1 else 0.0
        return self.radius * (c[0] * (math.pi - theta) - tail)

    def quadrature(self, n: int | None = None):
        """Nodes ``x_j`` and weights ``w_j`` with ``sum w_j f(x_j) ~ int f p dx``."""
        if n is None:
            n = 2 * self.coef.size + 64
        t = cheb_nodes(n)
        w = self.radius * (math.pi / n) * C.chebval(t, self.coef)
        return self.center + self.radius * t, w

    def integrate(self, f, n: int | None = None) -> float:
        x, w = self.quadrature(n)
        return float(np.dot(w, f(x)))

    def cube_integral(self, clip_negative: bool = False) -> tuple[float, float]:
        """``int p^3 dx`` and the mass removed by clipping negative values.

        Infinite when the density does not vanish at an edge.
        """
        if not all(self._vanish):
            return math.inf, 0.0
        n = 3 * self.coef.size + 64
        t = cheb_nodes(n)
        r = C.chebval(t, self.coef)
        clipped = 0.0
        if clip_negative:
            neg = r < 0
            clipped = float(-self.radius * (math.pi / n) * r[neg].sum())
            r = np.where(neg, 0.0, r)
        val = self.radius * (math.pi / n) * np.sum(r ** 3 / ((1.0 - t) * (1.0 + t)))
        return float(val), clipped

    def cauchy(self, z):
        """``int p(x) / (z - x) dx`` for ``z`` off the support."""
        zeta = (np.asarray(z, dtype=complex) - self.center) / self.radius
        s = _csqrt_pair(zeta)
        v = zeta - s
        return math.pi * P.polyval(v, self.coef) / s

    def cauchy_derivative(self, z):
        zeta = (np.asarray(z, dtype=complex) - self.center) / self.radius
        s = _csqrt_pair(zeta)
        v = zeta - s
        pv = P.polyval(v, self.coef)
        dpv = P.polyval(v, P.polyder(self.coef)) if self.coef.size > 1 else 0.0 * v
        return math.pi * (-dpv * v / (s * s) - pv * zeta / s ** 3) / self.radius

    def log_potential(self, x):
        """``int log|x - y| p(y) dy`` for real ``x`` (finite everywhere)."""
        x = np.asarray(x, dtype=float)
        t = self.to_t(x)
        c = self.coef
        k = np.arange(1, c.size)
        ck = np.concatenate(([0.0], c[1:] / k))
        out = np.empty_like(t)
        inside = np.abs(t) <= 1.0
        out[inside] = -c[0] * LOG2 - C.chebval(t[inside], ck)
        to = t[~inside]
        if to.size:
            v = to - np.sign(to) * np.sqrt(to * to - 1.0)
            out[~inside] = -c[0] * (LOG2 + np.log(np.abs(v))) - P.polyval(v, ck)
        return self.mass * math.log(self.radius) + self.radius * math.pi * out

    def double_log_integral(self) -> float:
        """``int int log|x - y| p(x) p(y) dx dy``."""
        c = self.coef
        k = np.arange(1, c.size)
        rho = self.radius
        m = self.mass
        return float(
            m * m * math.log(rho)
            - (rho * math.pi * c[0]) ** 2 * LOG2
            - 0.5 * (rho * math.pi) ** 2 * np.sum(c[1:] ** 2 / k)
        )


def _chop(c: np.ndarray, tol: float) -> np.ndarray:
    scale = np.abs(c).max(initial=0.0)
    if scale == 0.0:
        return c[:1]
    big = np.nonzero(np.abs(c) > tol * scale)[0]
    return c[: big[-1] + 1]
