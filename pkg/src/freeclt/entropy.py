"""Free entropy, logarithmic energy, free Fisher information and L1 distances.

All functionals of the absolutely continuous part use the closed Chebyshev
forms of :mod:`freeclt._cheb`: the logarithmic potential is a Chebyshev
series, the double logarithmic integral is ``sum c_k^2 / k`` and the cube
integral is a Gauss-Chebyshev sum.  No singular quadrature is involved.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .errors import AccuracyError, InvalidArgumentError, SingularInputError
from .measure import Measure, _Composite, moment
from .subordination import clt_measure

CHI_SEMICIRCLE = 0.5 * math.log(2.0 * math.pi * math.e)
CHI_CONST = 0.75 + 0.5 * math.log(2.0 * math.pi)
CLIP_TOL = 1e-8

__all__ = [
    "EntropyReport",
    "log_potential",
    "log_energy",
    "free_entropy",
    "fisher_info",
    "l1_distance",
    "l1_measures",
    "clt_entropy_sweep",
    "CHI_SEMICIRCLE",
]


def _require_ac(mu: _Composite):
    if mu.ac is None:
        raise SingularInputError("measure has no absolutely continuous part")


def log_potential(mu: _Composite, x, power: int = 0):
    """``int u^power log|x - u| mu(du)``.

    Atoms contribute ``w x_j^power log|x - x_j|``; an atom at ``x`` is a
    singular input.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for loc, w in mu.atoms:
        if np.any(x == loc):
            raise SingularInputError(f"atom at {loc}")
        out = out + w * loc ** power * np.log(np.abs(x - loc))
    if mu.ac is not None:
        ac = mu.ac if power == 0 else mu.ac.times_polynomial([0.0] * power + [1.0])
        out = out + ac.log_potential(x)
    return float(out) if np.ndim(x) == 0 else out


def log_energy(mu: _Composite) -> float:
    """``E(mu) = -int int log|x - y| mu(dx) mu(dy)``; atoms make it infinite."""
    if mu.atoms:
        raise SingularInputError("logarithmic energy diverges for measures with atoms")
    _require_ac(mu)
    return -mu.ac.double_log_integral()


def free_entropy(mu: _Composite) -> float:
    """``chi(mu) = int int log|x - y| mu(dx) mu(dy) + 3/4 + log(2 pi)/2``."""
    return -log_energy(mu) + CHI_CONST


def fisher_info(mu: _Composite, *, clip: bool = True) -> float:
    """``Phi(mu) = (4 pi^2 / 3) int p^3``; infinite with atoms or inverse square-root edges.

    Negative density values (signed inputs, inversion noise) are clipped at
    0 when ``clip`` is set; the clipped mass must stay below 1e-8.
    """
    if mu.atoms:
        return math.inf
    _require_ac(mu)
    val, clipped = mu.ac.cube_integral(clip_negative=clip)
    if clipped > CLIP_TOL:
        raise AccuracyError(f"clipped negative mass {clipped:.3g} exceeds {CLIP_TOL}")
    return 4.0 * math.pi ** 2 / 3.0 * val


def _sign_changes(f: Callable, lo: float, hi: float, breaks: Sequence[float], n: int = 20001):
    x = np.unique(np.concatenate([np.linspace(lo, hi, n), [b for b in breaks if lo <= b <= hi]]))
    v = f(x)
    pts = [lo, hi] + [b for b in breaks if lo < b < hi]
    s = np.sign(v)
    for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
        pts.append(brentq(f, x[i], x[i + 1], xtol=1e-15, rtol=1e-15))
    return np.unique(pts)


def l1_distance(p1: Callable, p2: Callable, support: tuple[float, float],
                breaks: Sequence[float] = ()) -> float:
    """``int |p1 - p2|`` over ``support`` by quadrature between sign changes."""
    lo, hi = support
    diff = lambda x: np.asarray(p1(x), dtype=float) - np.asarray(p2(x), dtype=float)
    pts = _sign_changes(diff, lo, hi, breaks)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(lambda x: float(diff(np.array([x]))[0]), a, b, limit=200,
                                epsabs=1e-14, epsrel=1e-12)
        total += abs(val)
    return total


def l1_measures(mu: _Composite, nu: _Composite) -> float:
    """``int |p_mu - p_nu|`` for the ac parts, exact between sign changes.

    On each interval where the density difference keeps its sign the
    integral is a difference of closed-form CDF increments.
    """
    _require_ac(mu)
    _require_ac(nu)
    lo = min(mu.ac.lo, nu.ac.lo)
    hi = max(mu.ac.hi, nu.ac.hi)
    diff = lambda x: mu.ac.pdf(x) - nu.ac.pdf(x)
    pts = _sign_changes(diff, lo, hi, [mu.ac.lo, mu.ac.hi, nu.ac.lo, nu.ac.hi])
    F = lambda x: mu.ac.cdf(x) - nu.ac.cdf(x)
    vals = F(pts)
    return float(np.abs(np.diff(vals)).sum())


@dataclass(frozen=True)
class EntropyReport:
    n: int
    chi: float
    log_energy: float
    fisher: float
    l1_to_semicircle: float
    gap_chi: float
    gap_fisher: float
    gap_l1: float


def _report(mu: Measure, n: int, grid_n: int, eps: float, guard: bool) -> EntropyReport:
    from .measure import semicircle

    mn = clt_measure(mu, n, grid_n=grid_n, eps=eps)
    if mn.atoms:
        chi, en, phi = -math.inf, math.inf, math.inf
    else:
        en = log_energy(mn)
        chi = -en + CHI_CONST
        phi = fisher_info(mn)
        if guard:
            mn2 = clt_measure(mu, n, grid_n=2 * grid_n, eps=eps / 2)
            chi2 = free_entropy(mn2)
            if abs(chi2 - chi) > 1e-5:
                raise AccuracyError(f"entropy not converged at n={n}: {chi} vs {chi2}")
    l1 = l1_measures(mn, semicircle()) if mn.ac is not None else math.nan
    m3 = moment(mu, 3)
    gap_l1 = math.sqrt(n) * l1 if abs(m3) > 1e-12 else n * l1
    return EntropyReport(
        n=n,
        chi=chi,
        log_energy=en,
        fisher=phi,
        l1_to_semicircle=l1,
        gap_chi=n * (CHI_SEMICIRCLE - chi),
        gap_fisher=n * (phi - 1.0),
        gap_l1=gap_l1,
    )


def clt_entropy_sweep(mu: Measure, ns: Sequence[int], *, grid_n: int = 8001, eps: float = 0.0,
                      guard: bool = True, workers: int | None = None) -> list[EntropyReport]:
    """Entropy, Fisher information and L1 distance to ``w`` of ``mu_n`` for each ``n``.

    ``gap_l1`` is ``sqrt(n) L1`` when ``m_3 != 0`` and ``n L1`` otherwise,
    matching the leading orders ``2|m_3|/pi`` and ``2|m_4 - 2|/pi``.
    """
    ns = list(ns)
    if any(b <= a for a, b in zip(ns[:-1], ns[1:])):
        raise InvalidArgumentError("ns must be strictly increasing")
    if workers is None:
        workers = int(os.environ.get("FREECLT_THREADS", "1") or 1)
    if workers <= 1:
        return [_report(mu, n, grid_n, eps, guard) for n in ns]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda n: _report(mu, n, grid_n, eps, guard), ns))
