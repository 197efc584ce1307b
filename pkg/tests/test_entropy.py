import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from freeclt import errors
from freeclt.edgeworth import semicircle_density
from freeclt.entropy import (
    CHI_SEMICIRCLE,
    clt_entropy_sweep,
    fisher_info,
    free_entropy,
    l1_distance,
    l1_measures,
    log_energy,
    log_potential,
)
from freeclt.measure import (
    Measure,
    arcsine,
    bernoulli,
    moment,
    preset,
    scale,
    semicircle,
    standardize,
    tilted_bernoulli,
)
from freeclt._cheb import ChebDensity


def test_semicircle_closed_values():
    w = semicircle()
    assert log_energy(w) == pytest.approx(0.25, abs=1e-6)
    assert free_entropy(w) == pytest.approx(0.5 * math.log(2 * math.pi * math.e), abs=1e-6)
    assert CHI_SEMICIRCLE == pytest.approx(1.4189385, abs=1e-7)
    assert fisher_info(w) == pytest.approx(1.0, abs=1e-6)


def test_log_potential_examples():
    w = semicircle()
    assert log_potential(w, 0.0) == pytest.approx(-0.5, abs=1e-12)
    assert log_potential(w, 1.0) == pytest.approx(-0.25, abs=1e-12)
    assert log_potential(w, 1.0, power=1) == pytest.approx(-5 / 6, abs=1e-12)


@given(x=st.floats(-1.99, 1.99))
def test_log_potential_matches_quadrature(x):
    w = semicircle()
    f = lambda u: semicircle_density(u) * math.log(abs(x - u))
    ref = quad(f, -2, x, limit=200)[0] + quad(f, x, 2, limit=200)[0]
    assert log_potential(w, x) == pytest.approx(x * x / 4 - 0.5, abs=1e-12)
    assert log_potential(w, x) == pytest.approx(ref, abs=1e-8)
    g = lambda u: u * semicircle_density(u) * math.log(abs(x - u))
    ref1 = quad(g, -2, x, limit=200)[0] + quad(g, x, 2, limit=200)[0]
    assert log_potential(w, x, power=1) == pytest.approx(-x + x ** 3 / 6, abs=1e-12)
    assert log_potential(w, x, power=1) == pytest.approx(ref1, abs=1e-8)


def test_log_potential_outside_support():
    w = semicircle()
    x = 3.0
    ref = quad(lambda u: semicircle_density(u) * math.log(x - u), -2, 2)[0]
    assert log_potential(w, x) == pytest.approx(ref, abs=1e-12)


def test_atoms_are_singular():
    with pytest.raises(errors.SingularInputError):
        log_potential(bernoulli(), 1.0)
    with pytest.raises(errors.SingularInputError):
        log_energy(bernoulli())
    assert fisher_info(bernoulli()) == math.inf
    with pytest.raises(errors.SingularInputError):
        l1_measures(bernoulli(), semicircle())


@given(c=st.floats(0.2, 5.0))
def test_scaling(c):
    w = scale(semicircle(), c)
    assert log_energy(w) == pytest.approx(0.25 - math.log(c), abs=1e-10)
    assert free_entropy(w) == pytest.approx(CHI_SEMICIRCLE + math.log(c), abs=1e-10)
    assert fisher_info(w) == pytest.approx(1 / c ** 2, rel=1e-10)


def test_arcsine_energy_is_zero():
    assert log_energy(arcsine()) == pytest.approx(0.0, abs=1e-12)
    assert fisher_info(arcsine()) == math.inf


def test_entropy_maximality():
    a = standardize(arcsine())
    assert moment(a, 2) == pytest.approx(1.0)
    assert free_entropy(a) < CHI_SEMICIRCLE
    # a smooth variance-1 density built from a polynomial perturbation of w
    base = ChebDensity(-2, 2, [1 / (2 * math.pi), 0.0, -1 / (2 * math.pi)])
    bumped = standardize(Measure([], base.times_polynomial([1.0, 0.0, 0.0, 0.0, 0.05])
                                 * (1 / base.times_polynomial([1.0, 0.0, 0.0, 0.0, 0.05]).mass)))
    assert free_entropy(bumped) <= CHI_SEMICIRCLE + 1e-6
    assert fisher_info(bumped) >= 1 - 1e-6


@pytest.mark.parametrize("name", ["bernoulli", "tilted_bernoulli(0.9)", "semicircle", "arcsine"])
def test_cramer_rao_for_presets(name):
    mu = preset(name)
    assert fisher_info(mu) * moment(mu, 2) >= 1 - 1e-6


def test_l1_trivial_and_golden():
    p = semicircle_density
    assert l1_distance(p, p, (-2, 2)) == 0.0
    r = math.sqrt(2.0)
    q = lambda x: np.where(np.abs(x) < r, 1 / (math.pi * np.sqrt(np.maximum(r * r - np.asarray(x) ** 2, 1e-300))), 0.0)
    got = l1_distance(p, q, (-2, 2), breaks=[-r, r])
    # brute-force oracle: adaptive quadrature of |p - q| with the singular points declared
    f = lambda x: abs(float(p(x)) - float(q(x)))
    pts = [-2, -r, -1.0, 0.0, 1.0, r, 2]
    ref = sum(quad(f, a, b, limit=500)[0] for a, b in zip(pts[:-1], pts[1:]))
    assert got == pytest.approx(ref, abs=1e-6)
    assert got == pytest.approx(l1_measures(semicircle(), arcsine(r)), abs=1e-9)


@pytest.fixture(scope="module")
def tilted_sweep():
    return {r.n: r for r in clt_entropy_sweep(tilted_bernoulli(0.9), [64, 128, 256])}


def test_sweep_tilted_gaps(tilted_sweep):
    m3sq = 64 / 9
    r = tilted_sweep[128]
    assert 6.4 <= r.gap_fisher <= 7.8
    assert 1.066 <= r.gap_chi <= 1.304
    assert r.gap_fisher == pytest.approx(m3sq, rel=0.1)
    assert r.chi <= CHI_SEMICIRCLE + 1e-6
    assert r.fisher >= 1 - 1e-6


def test_sweep_gaps_are_cauchy(tilted_sweep):
    for key in ("gap_fisher", "gap_chi"):
        vals = [getattr(tilted_sweep[n], key) for n in (64, 128, 256)]
        for u, v in zip(vals[:-1], vals[1:]):
            assert abs(u - v) <= 0.15 * abs(v)


def test_sweep_symmetric():
    (r,) = clt_entropy_sweep(bernoulli(), [128])
    assert abs(r.gap_chi) <= 0.1
    assert r.l1_to_semicircle == pytest.approx(2 / (math.pi * 128), rel=0.15)
    assert r.gap_l1 == pytest.approx(128 * r.l1_to_semicircle)


def test_sweep_rejects_unsorted():
    with pytest.raises(errors.InvalidArgumentError):
        clt_entropy_sweep(bernoulli(), [128, 64])
