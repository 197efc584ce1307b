"""Exact formal expansion of ``G_{mu_n}`` in powers of ``u = n^{-1/2}``.

Coefficients are polynomials with ``Fraction`` coefficients in the free
cumulants ``alpha_3..alpha_8`` and the grading symbol ``u``, truncated at
``u``-degree ``kmax``.  Series are truncated Laurent series in ``1/z``.

Pipeline:

1. ``phi_series``: ``sqrt(n) phi_mu(sqrt(n) z) = sum_k alpha_{k+1} u^{k-1} z^{-k}``.
2. ``solve_g``: ``g = z + sum a_k z^{-k}`` with ``g + 1/g = z + phi`` solved
   coefficient by coefficient.
3. ``revert_g``: ``g^{(-1)} = z + sum b_k z^{-k}`` with ``g(g^{(-1)}(z)) = z``.
4. ``collect_Bk``: ``1/g^{(-1)}(z) = 1/z + sum_k u^k B_k(1/z)``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

from .errors import InvalidArgumentError, TruncationOrderError

GENERATORS = ("alpha3", "alpha4", "alpha5", "alpha6", "alpha7", "alpha8", "u")
NGEN = len(GENERATORS)
U = NGEN - 1
MAX_KMAX = 6

__all__ = [
    "CumulantPolynomial",
    "FormalLaurentSeries",
    "alpha",
    "phi_series",
    "solve_g",
    "revert_g",
    "collect_Bk",
    "closed_form_B1",
    "closed_form_B2",
    "compose_semicircle",
    "verify_closed_forms",
    "ClosedFormReport",
    "coefficient_table_csv",
]


# ---------------------------------------------------------------------------
# polynomials


class CumulantPolynomial:
    """Sparse polynomial over ``alpha_3..alpha_8, u`` with exact coefficients.

    Products drop monomials of ``u``-degree above ``kmax`` (``None`` keeps all).
    """

    __slots__ = ("terms", "kmax")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None, kmax: int | None = None):
        self.kmax = kmax
        self.terms: dict[tuple, Fraction] = {}
        for e, c in (terms or {}).items():
            if c and (kmax is None or e[U] <= kmax):
                self.terms[e] = Fraction(c)

    @classmethod
    def constant(cls, c, kmax=None):
        return cls({(0,) * NGEN: Fraction(c)}, kmax)

    @classmethod
    def monomial(cls, exps: Mapping[str, int], c=1, kmax=None):
        e = [0] * NGEN
        for name, p in exps.items():
            e[GENERATORS.index(name)] = p
        return cls({tuple(e): Fraction(c)}, kmax)

    def _k(self, other):
        ks = [k for k in (self.kmax, getattr(other, "kmax", None)) if k is not None]
        return min(ks) if ks else None

    def __add__(self, other):
        if not isinstance(other, CumulantPolynomial):
            other = CumulantPolynomial.constant(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return CumulantPolynomial(out, self._k(other))

    __radd__ = __add__

    def __neg__(self):
        return CumulantPolynomial({e: -c for e, c in self.terms.items()}, self.kmax)

    def __sub__(self, other):
        return self + (-other if isinstance(other, CumulantPolynomial) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, CumulantPolynomial):
            c = Fraction(other)
            return CumulantPolynomial({e: v * c for e, v in self.terms.items()}, self.kmax)
        k = self._k(other)
        out: dict[tuple, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                if k is not None and e1[U] + e2[U] > k:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return CumulantPolynomial(out, k)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CumulantPolynomial):
            other = CumulantPolynomial.constant(other)
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def u_degree_part(self, k: int) -> "CumulantPolynomial":
        """Coefficient of ``u^k`` (a polynomial in the alphas)."""
        out = {}
        for e, c in self.terms.items():
            if e[U] == k:
                out[e[:U] + (0,)] = c
        return CumulantPolynomial(out)

    def truncate_u(self, k: int) -> "CumulantPolynomial":
        """Drop monomials of ``u``-degree ``>= k``."""
        return CumulantPolynomial({e: c for e, c in self.terms.items() if e[U] < k})

    def max_abs(self) -> Fraction:
        return max((abs(c) for c in self.terms.values()), default=Fraction(0))

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        total = 0
        for e, c in self.terms.items():
            t = complex(c)
            for name, p in zip(GENERATORS, e):
                if p:
                    t *= values[name] ** p
            total += t
        return total

    def monomials(self) -> Iterable[tuple[str, Fraction]]:
        for e in sorted(self.terms):
            yield _monomial_name(e), self.terms[e]

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for name, c in self.monomials():
            parts.append(f"{c}" if name == "1" else f"{c}*{name}")
        return " + ".join(parts)


def _monomial_name(e: tuple) -> str:
    parts = []
    for name, p in zip(GENERATORS, e):
        if p == 1:
            parts.append(name)
        elif p > 1:
            parts.append(f"{name}^{p}")
    return "*".join(parts) or "1"


def alpha(k: int, kmax: int | None = None) -> CumulantPolynomial:
    """Symbol ``alpha_k``; ``alpha_1 = 0`` and ``alpha_2 = 1`` by normalization."""
    if k == 1:
        return CumulantPolynomial({}, kmax)
    if k == 2:
        return CumulantPolynomial.constant(1, kmax)
    if not 3 <= k <= 8:
        raise InvalidArgumentError(f"alpha_{k} is outside the generator set alpha_3..alpha_8")
    return CumulantPolynomial.monomial({f"alpha{k}": 1}, kmax=kmax)


def _u(p: int, kmax=None) -> CumulantPolynomial:
    return CumulantPolynomial.monomial({"u": p}, kmax=kmax)


# ---------------------------------------------------------------------------
# Laurent series


@dataclass
class FormalLaurentSeries:
    """``sum_{j >= 0} coeffs[j] z^(top - j)``, truncated below ``z^(-order)``."""

    coeffs: list
    top: int
    order: int
    kmax: int | None = None

    def coefficient(self, power: int) -> CumulantPolynomial:
        """Coefficient of ``z^power``."""
        if power < -self.order:
            raise TruncationOrderError(f"z^{power} lies beyond the truncation order {self.order}")
        j = self.top - power
        if 0 <= j < len(self.coeffs):
            return self.coeffs[j]
        return CumulantPolynomial({}, self.kmax)

    def __getitem__(self, k: int) -> CumulantPolynomial:
        """Coefficient of ``z^{-k}``."""
        return self.coefficient(-k)

    def items(self):
        for j, c in enumerate(self.coeffs):
            yield self.top - j, c

    def __sub__(self, other: "FormalLaurentSeries") -> "FormalLaurentSeries":
        top = max(self.top, other.top)
        order = min(self.order, other.order)
        coeffs = [self.coefficient(p) - other.coefficient(p) for p in range(top, -order - 1, -1)]
        return FormalLaurentSeries(coeffs, top, order, self.kmax)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def max_abs(self) -> Fraction:
        return max((c.max_abs() for c in self.coeffs), default=Fraction(0))

    def evaluate(self, z: complex, values: Mapping[str, complex]) -> complex:
        return sum(c.evaluate(values) * z ** p for p, c in self.items())


def _zero(kmax):
    return CumulantPolynomial({}, kmax)


def _one(kmax):
    return CumulantPolynomial.constant(1, kmax)


def phi_series(K: int, kmax: int = MAX_KMAX) -> FormalLaurentSeries:
    """``sum_{k=1}^K alpha_{k+1} u^{k-1} z^{-k}`` (``alpha_1 = 0``, ``alpha_2 = 1``)."""
    if K < 2:
        raise InvalidArgumentError("K must be >= 2")
    _check_kmax(kmax)
    coeffs = [_zero(kmax)]  # z^0
    for k in range(1, K + 1):
        if k - 1 > kmax:
            coeffs.append(_zero(kmax))
        else:
            coeffs.append(alpha(k + 1, kmax) * _u(k - 1, kmax))
    return FormalLaurentSeries(coeffs, 0, K, kmax)


def _check_kmax(kmax):
    if not 0 <= kmax <= MAX_KMAX:
        raise InvalidArgumentError(f"kmax must lie in 0..{MAX_KMAX}")


def _reciprocal_tail(s: list, upto: int, kmax) -> list:
    """Coefficients ``r_0..r_upto`` of ``1 / (1 + sum_{i>=1} s[i] x^i)``."""
    r = [_one(kmax)]
    for j in range(1, upto + 1):
        acc = _zero(kmax)
        for i in range(1, j + 1):
            if i < len(s) and not s[i].is_zero() and not r[j - i].is_zero():
                acc = acc + s[i] * r[j - i]
        r.append(-acc)
    return r


def solve_g(K: int, kmax: int = MAX_KMAX) -> FormalLaurentSeries:
    """``g(z) = z + sum_{k=0}^K a_k z^{-k}`` with ``g + 1/g = z + phi``.

    Writing ``1/g = z^{-1} sum_j r_j z^{-j}``, the ``z^{-k}`` coefficient gives
    ``a_k = f_k - r_{k-1}`` where ``r_{k-1}`` involves ``a_0..a_{k-2}`` only.
    """
    if K < 3:
        raise InvalidArgumentError("K must be >= 3")
    _check_kmax(kmax)
    f = phi_series(K, kmax)
    a: list[CumulantPolynomial] = [f[0]]  # a_0 = f_0 = 0
    # s[i] = coefficient of z^{-i} in g/z - 1, i.e. s[i] = a_{i-1}
    r = [_one(kmax)]
    for k in range(1, K + 1):
        # r_{k-1} from s_1..s_{k-1} = a_0..a_{k-2}
        j = k - 1
        if j >= 1:
            acc = _zero(kmax)
            for i in range(1, j + 1):
                if not a[i - 1].is_zero() and not r[j - i].is_zero():
                    acc = acc + a[i - 1] * r[j - i]
            r.append(-acc)
        a.append(f[k] - r[k - 1])
    return FormalLaurentSeries([_one(kmax)] + a, 1, K, kmax)


def revert_g(g: FormalLaurentSeries, K: int | None = None) -> FormalLaurentSeries:
    """Compositional inverse ``g^{(-1)}(z) = z + sum_k b_k z^{-k}``.

    From ``g(w) = z`` with ``w = z + beta``: ``beta = -sum_{k>=2} a_k w^{-k}``.
    The coefficient of ``z^{-m}`` in ``w^{-k}`` only involves ``b_j`` with
    ``j <= m - 3``, so ``b_m`` follows from earlier coefficients.  Powers of
    ``H = 1/w`` are kept as coefficient tables and extended one order at a time.
    """
    kmax = g.kmax
    K = g.order if K is None else K
    if K > g.order:
        raise TruncationOrderError(f"g known to order {g.order} < {K}")
    if not (g.coefficient(1) == 1 and g[0].is_zero() and g[1].is_zero()):
        raise InvalidArgumentError("expected g = z + O(z^-2)")
    a = [g[k] for k in range(K + 1)]
    b: list[CumulantPolynomial] = []
    # rho_j: H = z^{-1} sum_j rho_j z^{-j}; P[k][m]: coefficient of z^{-m} in H^k
    rho: list[CumulantPolynomial] = [_one(kmax)]
    P: list[dict[int, CumulantPolynomial]] = [{}, {}]
    for m in range(K + 1):
        # extend rho up to index m - 1 (needs b_0..b_{m-2})
        while len(rho) < m:
            j = len(rho)
            acc = _zero(kmax)
            for i in range(1, j + 1):
                if not b[i - 1].is_zero() and not rho[j - i].is_zero():
                    acc = acc + b[i - 1] * rho[j - i]
            rho.append(-acc)
        if m >= 1:
            P[1][m] = rho[m - 1]
        for k in range(2, m + 1):
            if len(P) <= k:
                P.append({})
            acc = _zero(kmax)
            for i in range(1, m - k + 2):
                left = P[1].get(i)
                right = P[k - 1].get(m - i)
                if left is not None and right is not None and not left.is_zero() and not right.is_zero():
                    acc = acc + left * right
            P[k][m] = acc
        bm = _zero(kmax)
        for k in range(2, m + 1):
            if not a[k].is_zero() and not P[k][m].is_zero():
                bm = bm - a[k] * P[k][m]
        b.append(bm)
    return FormalLaurentSeries([_one(kmax)] + b, 1, K, kmax)


def compose(g: FormalLaurentSeries, h: FormalLaurentSeries, K: int) -> FormalLaurentSeries:
    """``g(h(z))`` for ``g = z + sum a_k z^{-k}`` and ``h = z + ...`` to order ``K``."""
    kmax = g.kmax
    # H = 1/h as coefficients of z^{-1-j}
    s = [h[i - 1] for i in range(1, K + 2)]
    rho = _reciprocal_tail([None] + s, K + 1, kmax)
    Hc = {j + 1: rho[j] for j in range(K + 1)}  # z^{-(j+1)}
    out = {1: _one(kmax)}
    for p in range(0, K + 1):
        out[-p] = h[p]
    power = {0: _one(kmax)}  # H^0
    for k in range(1, K + 1):
        nxt = {}
        for i, c1 in power.items():
            for j, c2 in Hc.items():
                if i + j <= K and not c1.is_zero() and not c2.is_zero():
                    nxt[i + j] = nxt.get(i + j, _zero(kmax)) + c1 * c2
        power = nxt
        if g[k].is_zero():
            continue
        for m, c in power.items():
            out[-m] = out[-m] + g[k] * c
    coeffs = [out.get(p, _zero(kmax)) for p in range(1, -K - 1, -1)]
    return FormalLaurentSeries(coeffs, 1, K, kmax)


def collect_Bk(ginv: FormalLaurentSeries, kmax: int, M: int) -> list[FormalLaurentSeries]:
    """``B_1(1/z), ..., B_kmax(1/z)`` from ``1/g^{(-1)}(z) = 1/z + sum_k u^k B_k(1/z)``.

    Element ``k - 1`` holds the Laurent series of ``B_k`` to ``z^{-M}``;
    coefficients are polynomials in the alphas only.
    """
    if ginv.kmax is not None and kmax > ginv.kmax:
        raise TruncationOrderError(f"series truncated at u^{ginv.kmax} < u^{kmax}")
    if ginv.order < M - 1:
        raise TruncationOrderError(f"g^(-1) known to z^-{ginv.order}; need z^-{M - 1}")
    # 1/(z (1 + sum b_j z^{-j-1})) = sum_j rho_j z^{-1-j}
    s = [None] + [ginv[i - 1] for i in range(1, M)]
    rho = _reciprocal_tail(s, M - 1, ginv.kmax)
    out = []
    for k in range(1, kmax + 1):
        coeffs = [CumulantPolynomial()] + [rho[j].u_degree_part(k) for j in range(M)]
        out.append(FormalLaurentSeries(coeffs, 0, M))
    return out


def _geometric_series(M: int) -> list[Fraction]:
    """Coefficients of ``1 / (1 - t^2)`` in powers of ``t`` up to ``t^M``."""
    return [Fraction(1 if j % 2 == 0 else 0) for j in range(M + 1)]


def _tseries_mul(x: list, y: list, M: int) -> list:
    out = [Fraction(0)] * (M + 1)
    for i, xi in enumerate(x):
        if xi:
            for j in range(0, M + 1 - i):
                if y[j]:
                    out[i + j] += xi * y[j]
    return out


def _shift(x: list, k: int, M: int) -> list:
    return ([Fraction(0)] * k + x)[: M + 1]


def closed_form_B1(M: int) -> FormalLaurentSeries:
    """Series of ``alpha_3 t^4 / (1 - t^2)`` with ``t = 1/z``."""
    geo = _geometric_series(M)
    a3 = alpha(3)
    t = _shift(geo, 4, M)
    coeffs = [CumulantPolynomial()] + [a3 * t[j] for j in range(1, M + 1)]
    return FormalLaurentSeries(coeffs, 0, M)


def closed_form_B2(M: int) -> FormalLaurentSeries:
    """Series of ``(alpha_4 - alpha_3^2) t^5/(1-t^2) + alpha_3^2 (t^7/(1-t^2)^2 + t^5/(1-t^2)^3)``."""
    geo = _geometric_series(M)
    geo2 = _tseries_mul(geo, geo, M)
    geo3 = _tseries_mul(geo2, geo, M)
    a3, a4 = alpha(3), alpha(4)
    first = _shift(geo, 5, M)
    second = [x + y for x, y in zip(_shift(geo2, 7, M), _shift(geo3, 5, M))]
    coeffs = [CumulantPolynomial()] + [
        (a4 - a3 * a3) * first[j] + a3 * a3 * second[j] for j in range(1, M + 1)
    ]
    return FormalLaurentSeries(coeffs, 0, M)


def compose_semicircle(series: FormalLaurentSeries, M: int) -> FormalLaurentSeries:
    """Substitute ``t = G_w(zeta) = sum_m Catalan_m zeta^{-(2m+1)}`` into a series in ``t``.

    ``series`` is read as ``sum_j c_j t^j`` (``t = 1/z``); the result is a
    series in ``1/zeta`` to order ``M``.
    """
    cat = [Fraction(0)] * (M + 1)
    c = 1
    for m in range(0, (M - 1) // 2 + 1):
        cat[2 * m + 1] = Fraction(c)
        c = c * 2 * (2 * m + 1) // (m + 2)
    out = [CumulantPolynomial() for _ in range(M + 1)]
    power = [Fraction(1)] + [Fraction(0)] * M
    for j in range(0, M + 1):
        if j > 0:
            power = _tseries_mul(power, cat, M)
        cj = series.coefficient(-j) if j <= series.order else CumulantPolynomial()
        if cj.is_zero():
            continue
        for p in range(M + 1):
            if power[p]:
                out[p] = out[p] + cj * power[p]
    return FormalLaurentSeries(out, 0, M)


# ---------------------------------------------------------------------------
# verification


CAVEAT = (
    "For alpha_3 != 0 the function B_2(G_w(z)) contains a term alpha_3^2 / (z^2 - 4)^(3/2) "
    "and is not the Cauchy transform of a signed measure of locally bounded variation; "
    "the coefficient identity checked here is purely formal."
)


@dataclass
class ClosedFormReport:
    order: int
    b1_difference: Fraction
    b2_difference: Fraction
    checks: dict = field(default_factory=dict)
    caveat: str = CAVEAT

    @property
    def passed(self) -> bool:
        return self.b1_difference == 0 and self.b2_difference == 0 and all(self.checks.values())

    @property
    def verdict(self) -> str:
        return "exact match" if self.passed else "mismatch"


def _leading_checks(a: FormalLaurentSeries, b: FormalLaurentSeries, K: int) -> dict:
    a3, a4 = alpha(3), alpha(4)
    u1, u2 = _u(1), _u(2)
    checks = {
        "a0=a1=0": a[0].is_zero() and a[1].is_zero(),
        "a2=alpha3*u": a[2] == a3 * u1,
        "a3=alpha4*u^2": a[3] == a4 * u2,
        "b0=b1=0": b[0].is_zero() and b[1].is_zero(),
        "b2=-a2": b[2] == -a[2],
    }
    ok_a = ok_b = True
    for s in range(2, K // 2 + 1):
        if 2 * s <= K:
            ok_a &= a[2 * s].truncate_u(3) == a3 * u1
        if 2 * s + 1 <= K:
            want = a4 * u2 - Fraction((s - 1) * (s - 2), 2) * a3 * a3 * u2
            ok_a &= a[2 * s + 1].truncate_u(3) == want
    for m in range(1, K // 2 + 1):
        if 2 * m <= K:
            ok_b &= b[2 * m].truncate_u(3) == -a3 * u1
        if m >= 2 and 2 * m - 1 <= K:
            want = -a4 * u2 - Fraction((m - 2) * (m + 1), 2) * a3 * a3 * u2
            ok_b &= b[2 * m - 1].truncate_u(3) == want
    checks["a_k leading terms"] = bool(ok_a)
    checks["b_k leading terms"] = bool(ok_b)
    return checks


def _recursion_checks(a, b, f, kmax, kmaxcheck=4) -> dict:
    """The telescoped recursions for ``a_k`` and ``b_m`` at ``k, m = 2..kmaxcheck``."""
    ok_a = True
    for k in range(2, kmaxcheck + 1):
        # a_k + sum_{j>=1} (-1)^j [z^{-(k-1)}] (sum_i a_i z^{-i-1})^j  = f_k
        lhs = a[k]
        power = {0: _one(kmax)}
        for j in range(1, k):
            nxt = {}
            for p, c in power.items():
                for i in range(0, k):
                    q = p + i + 1
                    if q <= k - 1 and not a[i].is_zero():
                        nxt[q] = nxt.get(q, _zero(kmax)) + c * a[i]
            power = nxt
            term = power.get(k - 1, _zero(kmax))
            lhs = lhs + term * (-1) ** j
        ok_a &= lhs == f[k]
    ok_b = True
    for m in range(3, kmaxcheck + 2):
        lhs = b[m] + a[m]
        for k in range(2, m):
            inner = _zero(kmax)
            for s in range(1, m - k + 1):
                tot = _compositions_sum(b, s, m - k - s, kmax)
                inner = inner + tot * ((-1) ** s * comb(k - 1 + s, k - 1))
            lhs = lhs + a[k] * inner
        ok_b &= lhs.is_zero()
    return {"a_k recursion": bool(ok_a), "b_m recursion": bool(ok_b)}


def _compositions_sum(b, s, total, kmax):
    """``sum_{m_1 + ... + m_s = total} b_{m_1} ... b_{m_s}``."""
    table = {0: _one(kmax)}
    for _ in range(s):
        nxt = {}
        for t, c in table.items():
            for m in range(0, total - t + 1):
                if not b[m].is_zero():
                    nxt[t + m] = nxt.get(t + m, _zero(kmax)) + c * b[m]
        table = nxt
    return table.get(total, _zero(kmax))


def verify_closed_forms(M: int = 30, kmax: int = 2) -> ClosedFormReport:
    """Compare the engine's ``B_1``, ``B_2`` with their closed forms through ``z^{-M}``.

    Differences are exact rationals; the report passes only when both are 0
    and every structural check (leading terms, recursions, composition
    identity) holds.
    """
    if M < 10:
        raise InvalidArgumentError("M must be >= 10")
    kmax = max(kmax, 2)
    K = M
    g = solve_g(K, kmax)
    ginv = revert_g(g)
    Bs = collect_Bk(ginv, 2, M)
    d1 = (Bs[0] - closed_form_B1(M)).max_abs()
    d2 = (Bs[1] - closed_form_B2(M)).max_abs()
    checks = _leading_checks(g, ginv, K)
    checks.update(_recursion_checks(g, ginv, phi_series(K, kmax), kmax))
    ident = compose(g, ginv, K)
    checks["g(g^(-1)(z)) = z"] = all(
        ident.coefficient(p) == (1 if p == 1 else 0) for p in range(1, -K - 1, -1)
    )
    return ClosedFormReport(order=M, b1_difference=d1, b2_difference=d2, checks=checks)


def coefficient_table_csv(Bs: list[FormalLaurentSeries]) -> str:
    """CSV rows ``k, power, monomial, coefficient`` with coefficients as ``p/q``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "power_of_inverse_z", "monomial", "coefficient"])
    for k, B in enumerate(Bs, start=1):
        for power, c in B.items():
            for name, val in c.monomials():
                w.writerow([k, -power, name, f"{val.numerator}/{val.denominator}"])
    return buf.getvalue()
