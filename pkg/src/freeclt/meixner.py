"""Centered free Meixner measures and the CLT approximants built from them.

``mu_{a,b,d}`` has reciprocal Cauchy transform

    F(z) = a + ((1+b)(z-a) + sqrt((1-b)^2 (z-a)^2 - 4(1-d))) / 2,

an absolutely continuous part supported on ``a +- 2 sqrt(1-d)/(1-b)`` and at
most two atoms.  In the variable ``t = (x - a)/R``, ``R`` the support
radius, the density is ``sqrt(1-d) (1-t^2) / (pi f(x)) / sqrt(1-t^2)``, so the
Chebyshev form is a smooth rational function.  The signed correction
``varsigma_n`` lives on the same interval and is a polynomial there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C

from ._cheb import ChebDensity
from .edgeworth import semicircle_density
from .errors import InvalidArgumentError, MomentInequalityError, SingularParameterError
from .measure import Measure, MomentSummary, SignedDensity

ATOM_CUTOFF = 1e-14

__all__ = [
    "MeixnerParams",
    "CltParams",
    "meixner_F",
    "meixner_G",
    "meixner_density",
    "meixner_atoms",
    "meixner_measure",
    "clt_params",
    "varsigma_density",
    "varsigma_measure",
    "kappa_measure",
    "family",
]


@dataclass(frozen=True)
class MeixnerParams:
    a: float
    b: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if not (self.b < 1 and self.d < 1):
            raise InvalidArgumentError("free Meixner parameters need b < 1 and d < 1")

    @property
    def radius(self) -> float:
        return 2.0 * math.sqrt(1.0 - self.d) / (1.0 - self.b)

    @property
    def support(self) -> tuple[float, float]:
        return self.a - self.radius, self.a + self.radius

    def f(self, x):
        return self.b * x * x + self.a * (1.0 - self.b) * x + 1.0 - self.d


@dataclass(frozen=True)
class CltParams:
    """``a_n = m_3/sqrt n``, ``b_n = (m_4 - m_3^2 - 1)/n``, ``d_n = (m_4 - m_3^2)/n``."""

    n: int
    a: float
    b: float
    d: float

    @property
    def e(self) -> float:
        return (1.0 - self.b) / math.sqrt(1.0 - self.d)

    @property
    def meixner(self) -> MeixnerParams:
        return MeixnerParams(self.a, self.b, self.d)

    @property
    def shift_only(self) -> MeixnerParams:
        """Parameters of ``mu_{a_n, 0, 0}``."""
        return MeixnerParams(self.a, 0.0, 0.0)

    def within_bounds(self) -> bool:
        """The bounds ``0 <= b <= 1/3``, ``0 < d <= 1/3``, ``|a| <= 1/sqrt 3``."""
        tiny = 1e-12
        return (
            -tiny <= self.b <= 1 / 3 + tiny
            and 0 < self.d <= 1 / 3 + tiny
            and abs(self.a) <= 1 / math.sqrt(3) + tiny
        )


def family(p: MeixnerParams) -> str:
    """Label of the Meixner subfamily."""
    if p.a == 0 and p.b == 0 and p.d == 0:
        return "semicircle"
    if p.b == 0:
        return "free Poisson" if p.d == 0 else "shifted free Poisson"
    if p.b > 0:
        disc = p.a ** 2 * (1 - p.b) ** 2 - 4 * p.b * (1 - p.d)
        if disc > 0:
            return "free Pascal"
        if disc == 0:
            return "free gamma"
        return "pure free Meixner"
    return "free Meixner (b < 0)"


def _branch_sqrt(p: MeixnerParams, z):
    r = p.radius
    return (1.0 - p.b) * np.sqrt(z - p.a - r) * np.sqrt(z - p.a + r)


def meixner_F(p: MeixnerParams, z):
    """Reciprocal Cauchy transform (closed form)."""
    z = np.asarray(z, dtype=complex)
    val = p.a + 0.5 * ((1.0 + p.b) * (z - p.a) + _branch_sqrt(p, z))
    return complex(val) if np.ndim(z) == 0 else val


def meixner_G(p: MeixnerParams, z):
    z = np.asarray(z, dtype=complex)
    val = 1.0 / np.asarray(meixner_F(p, z))
    return complex(val) if np.ndim(z) == 0 else val


def _check_regular(p: MeixnerParams):
    lo, hi = p.support
    roots = np.roots([p.b, p.a * (1 - p.b), 1 - p.d]) if p.b != 0 else (
        np.array([-(1 - p.d) / (p.a * (1 - p.b))]) if p.a != 0 else np.array([])
    )
    for y in np.atleast_1d(roots):
        if abs(y.imag) < 1e-12 and lo < y.real < hi:
            raise SingularParameterError(f"f vanishes at {y.real} inside the support")


def meixner_density(p: MeixnerParams, x):
    """Density of the absolutely continuous part."""
    _check_regular(p)
    x = np.asarray(x, dtype=float)
    inner = np.maximum(4.0 * (1.0 - p.d) - (1.0 - p.b) ** 2 * (x - p.a) ** 2, 0.0)
    val = np.sqrt(inner) / (2.0 * math.pi * p.f(x))
    return float(val) if np.ndim(x) == 0 else val


def meixner_atoms(p: MeixnerParams) -> list[tuple[float, float]]:
    """Discrete part: at most two atoms at the real roots of ``f``."""
    a, b, d = p.a, p.b, p.d
    out = []
    if b != 0:
        disc = a * a * (1 - b) ** 2 - 4 * b * (1 - d)
        if disc > 0:
            sq = math.sqrt(disc)
            for y in sorted(((-a * (1 - b) - sq) / (2 * b), (-a * (1 - b) + sq) / (2 * b))):
                lam = max((1 - d) / abs(y) - abs(y), 0.0) / sq
                if lam > ATOM_CUTOFF:
                    out.append((y, lam))
    elif a != 0:
        y = -(1 - d) / a
        lam = max(1 - (1 - d) / (a * a), 0.0)
        if lam > ATOM_CUTOFF:
            out.append((y, lam))
    return out


def _ac_part(p: MeixnerParams) -> ChebDensity:
    _check_regular(p)
    lo, hi = p.support
    c = math.sqrt(1.0 - p.d) / math.pi

    def weighted(t):
        return c * (1.0 - t * t) / p.f(p.a + p.radius * t)

    return ChebDensity.fit(lo, hi, weighted)


def meixner_measure(p: MeixnerParams, grid_n: int | None = None) -> Measure:
    """``mu_{a,b,d}`` as a Measure.  ``grid_n`` is accepted for interface parity."""
    return Measure(meixner_atoms(p), _ac_part(p), info={"name": family(p), "params": (p.a, p.b, p.d)})


def clt_params(ms, n: int) -> CltParams:
    """CLT parameters from standardized moments (``MomentSummary`` or ``m_0..m_4``)."""
    moments = ms.moments if isinstance(ms, MomentSummary) else tuple(ms)
    if len(moments) < 5:
        raise InvalidArgumentError("need moments m_0..m_4")
    m1, m2, m3, m4 = (float(moments[k]) for k in (1, 2, 3, 4))
    if abs(m1) > 1e-8 or abs(m2 - 1) > 1e-8:
        raise InvalidArgumentError("moments must be standardized (m_1 = 0, m_2 = 1)")
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    gap = m4 - 1.0 - m3 * m3
    if gap < -1e-9:
        raise MomentInequalityError(f"m_4 - 1 - m_3^2 = {gap} < 0")
    gap = max(gap, 0.0)
    return CltParams(n=n, a=m3 / math.sqrt(n), b=gap / n, d=(gap + 1.0) / n)


def varsigma_density(p: CltParams, x):
    """``(e^2 (x - a)^2 - 1) p_w(e (x - a))``."""
    x = np.asarray(x, dtype=float)
    u = p.e * (x - p.a)
    val = (u * u - 1.0) * semicircle_density(u)
    return float(val) if np.ndim(x) == 0 else val


def _varsigma_cheb(p: CltParams) -> ChebDensity:
    # x = a + (2/e) t :  (4t^2 - 1) sqrt(1-t^2)/pi = r(t)/sqrt(1-t^2), r = (4t^2-1)(1-t^2)/pi
    r_poly = np.array([-1.0, 0.0, 5.0, 0.0, -4.0]) / math.pi
    R = 2.0 / p.e
    return ChebDensity(p.a - R, p.a + R, C.poly2cheb(r_poly))


def varsigma_measure(p: CltParams) -> SignedDensity:
    return SignedDensity([], _varsigma_cheb(p))


def kappa_measure(p: CltParams, grid_n: int = 20001) -> SignedDensity:
    """``kappa_n = mu_{a_n,b_n,d_n} + varsigma_n / n`` as a signed measure.

    ``info["is_probability"]`` records whether the density is ``>= -1e-12``
    on a ``grid_n``-point scan and all atoms are nonnegative.
    """
    mx = p.meixner
    ac = _ac_part(mx)
    vs = _varsigma_cheb(p)
    # both parts live on a +- 2 sqrt(1-d)/(1-b); align the endpoints bitwise
    vs = ChebDensity(ac.lo, ac.hi, vs.coef)
    total = ac + vs * (1.0 / p.n)
    atoms = meixner_atoms(mx)
    x = np.linspace(total.lo, total.hi, grid_n)[1:-1]
    min_r = float(total.r(total.to_t(x)).min())
    min_r = min(min_r, float(total.r(np.array([-1.0, 1.0])).min()))
    is_prob = min_r >= -1e-12 and all(w >= 0 for _, w in atoms)
    return SignedDensity(atoms, total, info={"is_probability": bool(is_prob), "n": p.n})
