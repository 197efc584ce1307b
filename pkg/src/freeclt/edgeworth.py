"""Expansion approximants for the free CLT.

Semicircle density ``p_w`` and distribution function ``w``, Chebyshev
polynomials of the second kind, the order-1 and order-2 distribution
function approximants, the local density approximant, the correction
transforms ``B_1``, ``B_2`` in closed form and the shift terms ``Q_1``, ``Q_2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidArgumentError

if TYPE_CHECKING:
    from .meixner import CltParams

__all__ = [
    "chebyshev_u",
    "semicircle_density",
    "semicircle_cdf",
    "semicircle_G",
    "expansion1_cdf",
    "expansion2_shifted_cdf",
    "expansion2_cdf",
    "expansion2_symmetric_cdf",
    "density_expansion",
    "b1_closed",
    "b2_closed",
    "B1_rational",
    "B2_rational",
    "q1_term",
    "q2_term",
    "q1_sup",
    "ExpansionApproximant",
]


def chebyshev_u(m: int, x):
    """``U_m(x)`` by the three-term recurrence ``U_{m+1} = 2x U_m - U_{m-1}``."""
    if m < 0 or int(m) != m:
        raise InvalidArgumentError("m must be a nonnegative integer")
    x = np.asarray(x, dtype=float)
    u_prev, u = np.ones_like(x), 2.0 * x
    if m == 0:
        return _scalar(u_prev, x)
    for _ in range(m - 1):
        u_prev, u = u, 2.0 * x * u - u_prev
    return _scalar(u, x)


def _scalar(val, like):
    return float(val) if np.ndim(like) == 0 else val


def semicircle_density(x):
    """``p_w(x) = sqrt((4 - x^2)_+) / (2 pi)``."""
    x = np.asarray(x, dtype=float)
    return _scalar(np.sqrt(np.maximum(4.0 - x * x, 0.0)) / (2.0 * math.pi), x)


def semicircle_cdf(x):
    """``w(x) = 1/2 + x sqrt(4 - x^2) / (4 pi) + arcsin(x/2) / pi`` on ``[-2, 2]``."""
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    val = 0.5 + xc * np.sqrt(4.0 - xc * xc) / (4.0 * math.pi) + np.arcsin(xc / 2.0) / math.pi
    return _scalar(val, x)


def semicircle_G(z):
    """``G_w(z) = (z - sqrt(z^2 - 4)) / 2`` with the branch ``sqrt(z-2) sqrt(z+2)``."""
    z = np.asarray(z, dtype=complex)
    val = 0.5 * (z - np.sqrt(z - 2.0) * np.sqrt(z + 2.0))
    return complex(val) if np.ndim(z) == 0 else val


# ---------------------------------------------------------------------------
# distribution-function approximants


def expansion1_cdf(x, a_n: float):
    """``w(x) - (a_n / 3) U_2(x/2) p_w(x)``."""
    x = np.asarray(x, dtype=float)
    val = semicircle_cdf(x) - a_n / 3.0 * chebyshev_u(2, x / 2.0) * semicircle_density(x)
    return _scalar(val, x)


def _bracket(x, p: "CltParams"):
    a, b, inv_n = p.a, p.b, 1.0 / p.n
    h = x / 2.0
    return (
        -0.5 * a * a * chebyshev_u(1, h)
        + a / 3.0 * (3.0 - chebyshev_u(2, h))
        - (b - a * a - inv_n) / 4.0 * chebyshev_u(3, h)
    )


def expansion2_shifted_cdf(x, p: "CltParams"):
    """Order-2 approximant of ``F_n(x + a_n)``."""
    x = np.asarray(x, dtype=float)
    return _scalar(semicircle_cdf(x) + _bracket(x, p) * semicircle_density(x), x)


def expansion2_symmetric_cdf(x, m4: float, n: int):
    """``w(x) - (m_4 - 2) / (4 n) U_3(x/2) p_w(x)`` (zero third moment)."""
    x = np.asarray(x, dtype=float)
    val = semicircle_cdf(x) - (m4 - 2.0) / (4.0 * n) * chebyshev_u(3, x / 2.0) * semicircle_density(x)
    return _scalar(val, x)


def q1_term(x, a_n: float):
    """``w(x-a) - w(x) + a p_w(x) + (a/3)(3 - U_2(x/2))(p_w(x-a) - p_w(x))``."""
    x = np.asarray(x, dtype=float)
    a = a_n
    dp = semicircle_density(x - a) - semicircle_density(x)
    val = (
        semicircle_cdf(x - a)
        - semicircle_cdf(x)
        + a * semicircle_density(x)
        + a / 3.0 * (3.0 - chebyshev_u(2, x / 2.0)) * dp
    )
    return _scalar(val, x)


def q2_term(x, p: "CltParams"):
    """``((a^2/6) U_1(x/2) - ((b - a^2 - 1/n)/4) U_3(x/2)) (p_w(x-a) - p_w(x))``."""
    x = np.asarray(x, dtype=float)
    a, b, inv_n = p.a, p.b, 1.0 / p.n
    h = x / 2.0
    coef = a * a / 6.0 * chebyshev_u(1, h) - (b - a * a - inv_n) / 4.0 * chebyshev_u(3, h)
    return _scalar(coef * (semicircle_density(x - a) - semicircle_density(x)), x)


def expansion2_cdf(x, p: "CltParams"):
    """Unshifted order-2 approximant of ``F_n(x)`` including ``Q_1`` and ``Q_2``."""
    x = np.asarray(x, dtype=float)
    a, b, inv_n = p.a, p.b, 1.0 / p.n
    h = x / 2.0
    pw = semicircle_density(x)
    val = (
        semicircle_cdf(x)
        - a / 3.0 * chebyshev_u(2, h) * pw
        + (a * a / 6.0 * chebyshev_u(1, h) - (b - a * a - inv_n) / 4.0 * chebyshev_u(3, h)) * pw
        + q1_term(x, a)
        + q2_term(x, p)
    )
    return _scalar(val, x)


def q1_sup(a_n: float, scan: int = 10_000) -> float:
    """``sup_x |Q_1(x, a_n)|`` by a dense scan refined with a bounded scalar search."""
    if a_n == 0:
        return 0.0
    r = 2.0 + abs(a_n)
    x = np.linspace(-r, r, scan)
    v = np.abs(q1_term(x, a_n))
    # include the kinks at the support edges of both semicircles
    kinks = np.array([-2.0, 2.0, -2.0 + a_n, 2.0 + a_n])
    best = max(float(v.max()), float(np.abs(q1_term(kinks, a_n)).max()))
    h = x[1] - x[0]
    for i in np.argsort(v)[::-1][:4]:
        res = minimize_scalar(
            lambda t: -abs(q1_term(t, a_n)),
            bounds=(x[i] - h, x[i] + h),
            method="bounded",
            options={"xatol": 1e-13},
        )
        best = max(best, -float(res.fun))
    return best


# ---------------------------------------------------------------------------
# density approximant


def density_expansion(x, p: "CltParams"):
    """``v_n(x)``, the local approximant of ``p_n(x + a_n)``."""
    x = np.asarray(x, dtype=float)
    a, b, d, inv_n = p.a, p.b, p.d, 1.0 / p.n
    poly = 1.0 + 0.5 * d - a * a - inv_n - a * x - (b - a * a - inv_n) * x * x
    return _scalar(poly * semicircle_density(p.e * x), x)


# ---------------------------------------------------------------------------
# correction transforms


def B1_rational(t, alpha3: float):
    """``B_1(t) = alpha_3 t^3 / (1/t - t)``."""
    t = np.asarray(t, dtype=complex)
    return alpha3 * t ** 3 / (1.0 / t - t)


def B2_rational(t, alpha3: float, alpha4: float):
    """``(alpha_4 - alpha_3^2) t^4/(1/t - t) + alpha_3^2 (t^5/(1/t - t)^2 + t^2/(1/t - t)^3)``."""
    t = np.asarray(t, dtype=complex)
    s = 1.0 / t - t
    return (alpha4 - alpha3 ** 2) * t ** 4 / s + alpha3 ** 2 * (t ** 5 / s ** 2 + t ** 2 / s ** 3)


def b1_closed(z, alpha3: float):
    """``B_1(G_w(z)) = alpha_3 G_w(z)^3 / sqrt(z^2 - 4)``."""
    z = np.asarray(z, dtype=complex)
    g = semicircle_G(z)
    val = alpha3 * g ** 3 / (np.sqrt(z - 2.0) * np.sqrt(z + 2.0))
    return complex(val) if np.ndim(z) == 0 else val


def b2_closed(z, alpha3: float, alpha4: float):
    """``B_2(G_w(z))``; equals ``alpha_4 G_w(z)^4 / sqrt(z^2 - 4)`` when ``alpha_3 = 0``."""
    z = np.asarray(z, dtype=complex)
    if alpha3 == 0:
        val = alpha4 * semicircle_G(z) ** 4 / (np.sqrt(z - 2.0) * np.sqrt(z + 2.0))
    else:
        val = B2_rational(semicircle_G(z), alpha3, alpha4)
    return complex(val) if np.ndim(z) == 0 else val


@dataclass(frozen=True)
class ExpansionApproximant:
    """Bundle of an approximant's order, shift and coefficients.

    ``kind`` is ``"cdf"`` or ``"density"``.  Order 1 ignores ``b``, ``d``.
    """

    order: int
    params: "CltParams"
    kind: str = "cdf"

    def __post_init__(self):
        if self.order not in (1, 2) or self.kind not in ("cdf", "density"):
            raise InvalidArgumentError("order must be 1 or 2 and kind cdf or density")

    @property
    def shift(self) -> float:
        return self.params.a if (self.order == 2 or self.kind == "density") else 0.0

    def __call__(self, x):
        """Approximant at ``x`` on the unshifted scale (approximates ``F_n(x)`` or ``p_n(x)``)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "density":
            return density_expansion(x - self.params.a, self.params)
        if self.order == 1:
            return expansion1_cdf(x, self.params.a)
        return expansion2_shifted_cdf(x - self.params.a, self.params)
