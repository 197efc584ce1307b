"""Measures on the real line: atoms plus an absolutely continuous part.

The absolutely continuous part is held in the weighted Chebyshev form of
:class:`freeclt._cheb.ChebDensity`, which integrates polynomials, CDFs,
Cauchy transforms and logarithmic potentials in closed form.  A uniform grid
view (``N = 4001`` points by default) is available for export and plotting.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate

from ._cheb import ChebDensity
from .errors import DegenerateMeasureError, InvalidArgumentError

DEFAULT_GRID_N = 4001
MASS_TOL = 1e-8
# sampled density grids carry discretization error in their trapezoid mass
GRID_MASS_TOL = 1e-3

__all__ = [
    "Measure",
    "SignedDensity",
    "MomentSummary",
    "moment",
    "abs_moment",
    "tail_moment",
    "lyapunov_fraction",
    "eta_qs",
    "cumulants_from_moments",
    "moment_summary",
    "standardize",
    "scale",
    "preset",
    "bernoulli",
    "tilted_bernoulli",
    "semicircle",
    "arcsine",
    "dirac",
    "load_measure",
    "measure_from_json",
]


def _normalize_atoms(atoms, *, signed: bool) -> tuple[tuple[float, float], ...]:
    merged: dict[float, float] = {}
    for x, w in atoms:
        x, w = float(x), float(w)
        if not signed and w < 0:
            raise InvalidArgumentError(f"negative atom weight {w} at {x}")
        if w != 0.0:
            merged[x] = merged.get(x, 0.0) + w
    return tuple(sorted(merged.items()))


@dataclass(frozen=True)
class _Composite:
    atoms: tuple[tuple[float, float], ...] = ()
    ac: ChebDensity | None = None
    info: Mapping = field(default_factory=dict, compare=False)

    @property
    def atom_locations(self) -> np.ndarray:
        return np.array([x for x, _ in self.atoms], dtype=float)

    @property
    def atom_weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)

    @property
    def ac_support(self) -> tuple[float, float] | None:
        return None if self.ac is None else (self.ac.lo, self.ac.hi)

    @property
    def support(self) -> tuple[float, float]:
        """Smallest interval containing atoms and the ac support."""
        pts = [x for x, _ in self.atoms]
        if self.ac is not None:
            pts += [self.ac.lo, self.ac.hi]
        return min(pts), max(pts)

    @property
    def total_mass(self) -> float:
        m = math.fsum(w for _, w in self.atoms)
        return m + (self.ac.mass if self.ac is not None else 0.0)

    def density(self, x):
        """Density of the absolutely continuous part (0 off its support)."""
        x = np.asarray(x, dtype=float)
        if self.ac is None:
            return np.zeros_like(x)
        return self.ac.pdf(x)

    def cdf(self, x, *, left: bool = False):
        """``mu((-inf, x])``, or ``mu((-inf, x))`` with ``left=True``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.ac is not None:
            out = out + self.ac.cdf(x)
        for loc, w in self.atoms:
            out = out + w * ((x > loc) if left else (x >= loc))
        return out

    def grid(self, n: int = DEFAULT_GRID_N) -> tuple[np.ndarray, np.ndarray]:
        """Uniform grid over the ac support and the density there."""
        if self.ac is None:
            return np.empty(0), np.empty(0)
        x = np.linspace(self.ac.lo, self.ac.hi, n)
        return x, self.ac.pdf(x)

    @cached_property
    def ac_density(self) -> np.ndarray:
        return self.grid()[1]

    def expect(self, f) -> float:
        """``int f dmu`` for a smooth vectorized ``f``."""
        s = math.fsum(w * float(f(np.array([x]))[0]) for x, w in self.atoms)
        if self.ac is not None:
            s += self.ac.integrate(f)
        return s

    def _polynomial_moment(self, k: int) -> float:
        s = math.fsum(w * x ** k for x, w in self.atoms)
        if self.ac is not None:
            s += self.ac.integrate(lambda x: x ** k, n=self.ac.coef.size + k + 16)
        return s

    def _abs_tail(self, q: float, t: float, strict: bool = True) -> float:
        s = math.fsum(w * abs(x) ** q for x, w in self.atoms if abs(x) > t)
        if self.ac is None:
            return s
        # substitute x = c + rho*cos(th): p dx = rho * r(cos th) dth, no edge singularity
        ac = self.ac
        c, rho = ac.center, ac.radius

        def f(th):
            x = c + rho * math.cos(th)
            return abs(x) ** q * rho * float(ac.r(math.cos(th)))

        th_of = lambda x: math.acos(min(1.0, max(-1.0, (x - c) / rho)))
        pieces = []
        # x > t  <=>  th < th_of(t) ;  x < -t  <=>  th > th_of(-t)
        if t < ac.hi:
            pieces.append((0.0, th_of(max(t, ac.lo))))
        if -t > ac.lo:
            pieces.append((th_of(min(-t, ac.hi)), math.pi))
        for a, b in pieces:
            if b > a:
                brk = [th_of(0.0)] if a < th_of(0.0) < b else None
                s += integrate.quad(f, a, b, points=brk, limit=200, epsabs=1e-15, epsrel=1e-13)[0]
        return s

    def to_json_dict(self, grid_n: int = DEFAULT_GRID_N) -> dict:
        d: dict = {"atoms": [[x, w] for x, w in self.atoms]}
        if self.ac is not None:
            x, v = self.grid(grid_n)
            d["support"] = [self.ac.lo, self.ac.hi]
            d["density_grid"] = [float(y) if np.isfinite(y) else None for y in v]
            d["chebyshev"] = [float(c) for c in self.ac.coef]
        return d


@dataclass(frozen=True)
class Measure(_Composite):
    """Probability measure: nonnegative atoms plus a nonnegative ac part.

    Parameters
    ----------
    atoms : sequence of (location, weight)
        Merged and sorted on construction.
    ac : ChebDensity or None
        Absolutely continuous part.
    info : mapping
        Free-form provenance (renormalization factors, solver statistics).
    """

    def __post_init__(self):
        object.__setattr__(self, "atoms", _normalize_atoms(self.atoms, signed=False))
        object.__setattr__(self, "info", MappingProxyType(dict(self.info)))
        mass = self.total_mass
        if abs(mass - 1.0) > MASS_TOL:
            raise InvalidArgumentError(f"total mass {mass!r} differs from 1 by more than {MASS_TOL}")

    @property
    def is_atomic(self) -> bool:
        return self.ac is None

    def __repr__(self) -> str:
        ac = "none" if self.ac is None else f"[{self.ac.lo:.6g}, {self.ac.hi:.6g}]"
        return f"Measure(atoms={list(self.atoms)!r}, ac={ac})"


@dataclass(frozen=True)
class SignedDensity(_Composite):
    """Signed measure with finite total variation."""

    def __post_init__(self):
        object.__setattr__(self, "atoms", _normalize_atoms(self.atoms, signed=True))
        object.__setattr__(self, "info", MappingProxyType(dict(self.info)))

    @property
    def values(self) -> np.ndarray:
        return self.ac_density

    def total_variation(self) -> float:
        tv = math.fsum(abs(w) for _, w in self.atoms)
        if self.ac is not None:
            tv += self.ac.integrate(lambda x: np.sign(self.ac.pdf(x)), n=4 * self.ac.coef.size + 256)
        return tv

    def min_density(self, n: int = 20001) -> float:
        if self.ac is None:
            return 0.0
        x = np.linspace(self.ac.lo, self.ac.hi, n)[1:-1]
        return float(self.ac.pdf(x).min())


@dataclass(frozen=True)
class MomentSummary:
    moments: tuple[float, ...]
    abs_moments: Mapping[float, float]
    cumulants: tuple[float, ...]

    def m(self, k: int) -> float:
        return self.moments[k]

    def alpha(self, k: int) -> float:
        return self.cumulants[k - 1]


# ---------------------------------------------------------------------------
# functionals


def moment(mu: _Composite, k: int) -> float:
    """``m_k = int x^k mu(dx)``."""
    if k < 0 or int(k) != k:
        raise InvalidArgumentError("k must be a nonnegative integer")
    return mu._polynomial_moment(int(k))


def abs_moment(mu: _Composite, q: float) -> float:
    """``beta_q = int |x|^q mu(dx)``."""
    if q == int(q) and int(q) % 2 == 0:
        return moment(mu, int(q))
    return mu._abs_tail(q, 0.0)


def tail_moment(mu: _Composite, q: float, t: float) -> float:
    """``rho_q(mu, t) = int_{|u| > t} |u|^q mu(du)``."""
    if q <= 0 or t <= 0:
        raise InvalidArgumentError("need q > 0 and t > 0")
    return mu._abs_tail(q, t)


def lyapunov_fraction(mu: _Composite, q: float, n: int) -> float:
    """``L_qn = beta_q / n^((q-2)/2)``."""
    if q < 2 or n < 1:
        raise InvalidArgumentError("need q >= 2 and n >= 1")
    return abs_moment(mu, q) / n ** ((q - 2) / 2)


ETA_GRID = np.geomspace(10 ** -0.5 * 1e-6, 10 ** -0.5, 200)


def eta_qs(mu: Measure, q: float, s: int, n: int) -> float:
    """Grid minimum of ``eps^(s+2-q_s) + rho_{q_s}(mu, eps sqrt n) eps^(-q_s) / beta_{q_s}``.

    ``q_s = min(q, s + 2)``; the infimum over ``(0, 10^-1/2]`` is replaced by
    a 200-point geometric grid.
    """
    if s not in (1, 2, 3):
        raise InvalidArgumentError("s must be 1, 2 or 3")
    if q < s + 1:
        raise InvalidArgumentError("need q >= s + 1")
    qs = min(q, s + 2)
    beta = abs_moment(mu, qs)
    rn = math.sqrt(n)
    lo, hi = mu.support
    reach = max(abs(lo), abs(hi))
    vals = []
    for eps in ETA_GRID:
        tail = 0.0 if eps * rn >= reach else mu._abs_tail(qs, eps * rn)
        vals.append(eps ** (s + 2 - qs) + tail / beta * eps ** (-qs))
    return float(min(vals))


def cumulants_from_moments(ms: Sequence, K: int | None = None) -> list:
    """Free cumulants ``alpha_1..alpha_K`` from moments ``m_1..m_K``.

    Uses ``M(w) = C(w M(w))`` with ``M = 1 + sum m_k w^k`` and
    ``C = 1 + sum alpha_k w^k``.  Exact for ``Fraction`` input.
    """
    ms = list(ms)
    if K is None:
        K = len(ms)
    if K < 1:
        raise InvalidArgumentError("K must be >= 1")
    if len(ms) < K:
        raise InvalidArgumentError(f"need {K} moments, got {len(ms)}")
    one = ms[0] * 0 + 1
    M = [one] + ms[:K]
    # powers[s][j] = [w^j] M(w)^s
    powers = [[one] + [one * 0] * K]
    alphas = []
    for nn in range(1, K + 1):
        nxt = [sum((powers[-1][i] * M[j - i] for i in range(j + 1)), one * 0) for j in range(K + 1)]
        powers.append(nxt)
        acc = M[nn]
        for s in range(1, nn):
            acc = acc - alphas[s - 1] * powers[s][nn - s]
        alphas.append(acc)  # [w^0] M^nn = 1
    return alphas


def moment_summary(mu: Measure, K: int = 6, qs: Sequence[float] = (2, 3, 4, 5)) -> MomentSummary:
    ms = tuple([1.0] + [moment(mu, k) for k in range(1, K + 1)])
    return MomentSummary(
        moments=ms,
        abs_moments=MappingProxyType({float(q): abs_moment(mu, q) for q in qs}),
        cumulants=tuple(cumulants_from_moments(list(ms[1:]), K)),
    )


# ---------------------------------------------------------------------------
# transformations


def affine(mu: _Composite, a: float, b: float = 0.0):
    """Pushforward under ``x -> a x + b``."""
    if a == 0:
        raise InvalidArgumentError("scale factor must be nonzero")
    atoms = [(a * x + b, w) for x, w in mu.atoms]
    ac = None if mu.ac is None else mu.ac.affine(a, b)
    return type(mu)(atoms, ac, mu.info)


def scale(mu: _Composite, c: float):
    """Pushforward under ``x -> c x``."""
    return affine(mu, c, 0.0)


def standardize(mu: Measure) -> Measure:
    """Affine image with mean 0 and variance 1."""
    m1 = moment(mu, 1)
    m2 = moment(mu, 2)
    var = m2 - m1 * m1
    lo, hi = mu.support
    if var <= 1e-14 * max(1.0, lo * lo, hi * hi):
        raise DegenerateMeasureError("measure has zero variance")
    sd = math.sqrt(var)
    out = affine(mu, 1.0 / sd, -m1 / sd)
    # snap exactly-standardized inputs back to themselves
    if abs(m1) < 1e-15 and abs(var - 1.0) < 1e-15:
        return mu
    return out


# ---------------------------------------------------------------------------
# presets


def dirac(x: float = 0.0) -> Measure:
    return Measure([(x, 1.0)])


def bernoulli() -> Measure:
    """Symmetric two-point law ``(delta_-1 + delta_1) / 2``."""
    return Measure([(-1.0, 0.5), (1.0, 0.5)], info={"name": "bernoulli"})


def tilted_bernoulli(p: float) -> Measure:
    """Standardized two-point law with weight ``p`` on the negative atom."""
    if not 0.0 < p < 1.0:
        raise InvalidArgumentError("p must lie in (0, 1)")
    q = 1.0 - p
    return Measure(
        [(-math.sqrt(q / p), p), (math.sqrt(p / q), q)],
        info={"name": f"tilted_bernoulli({p:g})"},
    )


def semicircle(radius: float = 2.0) -> Measure:
    """Semicircle law on ``[-radius, radius]`` (variance ``radius^2 / 4``)."""
    c = 1.0 / (2.0 * math.pi) * 2.0 / radius
    return Measure([], ChebDensity(-radius, radius, [c, 0.0, -c]), info={"name": "semicircle"})


def arcsine(radius: float = 2.0) -> Measure:
    """Arcsine law ``1 / (pi sqrt(radius^2 - x^2))`` (variance ``radius^2 / 2``)."""
    return Measure(
        [], ChebDensity(-radius, radius, [1.0 / (math.pi * radius)]), info={"name": "arcsine"}
    )


_PRESET_RE = re.compile(r"^\s*tilted_bernoulli\s*\(\s*([0-9.eE+-]+)\s*\)\s*$")


def preset(name: str) -> Measure:
    """Named presets: ``bernoulli``, ``tilted_bernoulli(p)``, ``semicircle``, ``arcsine``."""
    key = name.strip().lower()
    if key == "bernoulli":
        return bernoulli()
    if key == "semicircle":
        return semicircle()
    if key == "arcsine":
        return arcsine()
    m = _PRESET_RE.match(key)
    if m:
        return tilted_bernoulli(float(m.group(1)))
    raise InvalidArgumentError(f"unknown preset {name!r}")


def measure_from_json(d: Mapping) -> Measure:
    """Build a measure from ``{"atoms": [[x, w], ...], "support": [lo, hi], "density_grid": [...]}``.

    An optional ``"chebyshev"`` coefficient list (as written by
    :meth:`Measure.to_json_dict`) takes precedence over the grid.  Free
    Meixner laws are accepted as ``{"a": .., "b": .., "d": ..}`` or as
    ``{"clt_of": <preset or JSON object>, "n": ..}`` (the CLT parameters of
    the standardized base law).
    """
    if "clt_of" in d or any(k in d for k in ("a", "b", "d")):
        return _meixner_from_json(d)
    atoms = [tuple(a) for a in d.get("atoms", [])]
    support = d.get("support")
    if support is None:
        return Measure(atoms)
    lo, hi = map(float, support)
    if "chebyshev" in d:
        return Measure(atoms, ChebDensity(lo, hi, d["chebyshev"]))
    vals = np.array([np.nan if v is None else v for v in d["density_grid"]], dtype=float)
    if vals.size < 2:
        return Measure(atoms)
    if np.nanmin(vals) < 0:
        raise InvalidArgumentError("density grid has negative values")
    # nonfinite edge values (inverse square-root edges) fall back to the neighbour
    for i, j in ((0, 1), (-1, -2)):
        if not np.isfinite(vals[i]):
            vals[i] = vals[j]
    x = np.linspace(lo, hi, vals.size)
    trap = float(np.trapezoid(vals, x))
    atom_mass = math.fsum(float(w) for _, w in atoms)
    if abs(atom_mass + trap - 1.0) > GRID_MASS_TOL:
        raise InvalidArgumentError(f"grid mass {atom_mass + trap!r} is not 1")
    trap = 1.0 - atom_mass
    ac = ChebDensity.from_pdf(lo, hi, lambda s: np.interp(s, x, vals), n_max=2 * vals.size)
    ac = ac * (trap / ac.mass)
    return Measure(atoms, ac)


def _meixner_from_json(d: Mapping) -> Measure:
    from .meixner import MeixnerParams, clt_params, meixner_measure

    if "clt_of" in d:
        base = d["clt_of"]
        mu = measure_from_json(base) if isinstance(base, Mapping) else preset(str(base))
        if "n" not in d:
            raise InvalidArgumentError('"clt_of" needs "n"')
        return meixner_measure(clt_params(moment_summary(mu), int(d["n"])).meixner)
    return meixner_measure(MeixnerParams(float(d.get("a", 0.0)), float(d.get("b", 0.0)), float(d.get("d", 0.0))))


def load_measure(spec: str) -> Measure:
    """Preset name or path to a JSON file."""
    p = Path(spec)
    if p.suffix == ".json" or p.exists():
        return measure_from_json(json.loads(p.read_text()))
    return preset(spec)
