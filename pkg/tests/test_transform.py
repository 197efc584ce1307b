import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import upper_half_plane
from freeclt import errors
from freeclt.measure import Measure, arcsine, bernoulli, dirac, scale, semicircle, tilted_bernoulli
from freeclt.meixner import MeixnerParams, meixner_density, meixner_measure
from freeclt.subordination import Subordination
from freeclt.transform import (
    cauchy_evaluator,
    cauchy_transform,
    cdf_from_density,
    invert_density,
    kolmogorov,
    kolmogorov_distance,
    kolmogorov_grid,
    reciprocal_transform,
    voiculescu_transform,
)

PRESETS = [bernoulli(), tilted_bernoulli(0.9), tilted_bernoulli(0.3), semicircle(), arcsine(),
           meixner_measure(MeixnerParams(0.4, 0.1, 0.05))]

# golden value: sup |w(x) - A(x)| for the arcsine law scaled to variance 1 is
# attained at the arcsine edge sqrt(2), where A = 1 and w = 3/4 + 1/(2 pi)
KOLMOGOROV_W_ARCSINE = 0.25 - 1 / (2 * math.pi)


def test_cauchy_examples():
    assert cauchy_transform(bernoulli(), 1j) == pytest.approx(-0.5j, abs=1e-15)
    assert cauchy_transform(semicircle(), 2j) == pytest.approx(1j * (1 - math.sqrt(2)), abs=1e-14)
    z = 0.3 + 0.7j
    assert cauchy_transform(dirac(0.0), z) == pytest.approx(1 / z)


def test_reciprocal_examples():
    assert reciprocal_transform(bernoulli(), 1j) == pytest.approx(2j, abs=1e-14)
    z = -1.2 + 0.4j
    assert reciprocal_transform(dirac(0.0), z) == pytest.approx(z)
    for mu in PRESETS:
        assert reciprocal_transform(mu, 1j).imag >= 1 - 1e-12


def test_domain_error():
    with pytest.raises(errors.DomainError):
        cauchy_transform(semicircle(), 1.0 + 0j)
    with pytest.raises(errors.DomainError):
        cauchy_transform(semicircle(), np.array([1j, 2 - 1e-3j]))


def test_nevanlinna_and_class_F(rng):
    z = upper_half_plane(rng, 1000)
    for mu in PRESETS:
        G = cauchy_transform(mu, z)
        F = reciprocal_transform(mu, z)
        assert np.all(G.imag < 0)
        assert np.all(F.imag >= z.imag * (1 - 1e-12))


def test_semicircle_closed_form(rng):
    z = upper_half_plane(rng, 100)
    closed = 0.5 * (z - np.sqrt(z - 2) * np.sqrt(z + 2))
    assert np.abs(cauchy_transform(semicircle(), z) - closed).max() < 1e-13


def test_inversion_examples():
    G = cauchy_evaluator(semicircle())
    assert invert_density(G, 0.0, 1e-9) == pytest.approx(1 / math.pi, abs=1e-8)
    assert invert_density(G, 3.0, 1e-9) == pytest.approx(0.0, abs=1e-8)
    A = cauchy_evaluator(arcsine())
    assert invert_density(A, 0.0, 1e-9) == pytest.approx(1 / (2 * math.pi), abs=1e-8)
    with pytest.raises(errors.InvalidArgumentError):
        invert_density(G, 0.0, 0.0)


@pytest.mark.parametrize("mu,pdf,support", [
    (semicircle(), lambda x: np.sqrt(4 - x * x) / (2 * np.pi), (-2.0, 2.0)),
    (meixner_measure(MeixnerParams(0.3, 0.1, 0.05)), lambda x: meixner_density(MeixnerParams(0.3, 0.1, 0.05), x),
     MeixnerParams(0.3, 0.1, 0.05).support),
])
def test_inversion_roundtrip(mu, pdf, support):
    lo, hi = support
    c, r = (lo + hi) / 2, (hi - lo) / 2
    x = np.linspace(c - 0.9 * r, c + 0.9 * r, 301)
    got = invert_density(cauchy_evaluator(mu), x, 1e-6)
    assert np.abs(got - pdf(x)).max() <= 1e-4


def test_cdf_examples():
    F = cdf_from_density(semicircle())
    assert F(0.0) == pytest.approx(0.5, abs=1e-15)
    assert F(2.0) == pytest.approx(1.0, abs=1e-15)
    assert cdf_from_density(bernoulli())(0.0) == pytest.approx(0.5)


def test_kolmogorov_examples():
    w = semicircle()
    assert kolmogorov(w, w) == 0.0
    assert kolmogorov(dirac(0.0), dirac(1.0)) == pytest.approx(1.0)
    a = scale(arcsine(), 1 / math.sqrt(2))
    assert kolmogorov(w, a) == pytest.approx(KOLMOGOROV_W_ARCSINE, abs=1e-9)
    with pytest.raises(errors.InvalidArgumentError):
        kolmogorov_distance(w.cdf, a.cdf, [])


def test_kolmogorov_golden_value_brute_force():
    w = semicircle()
    a = scale(arcsine(), 1 / math.sqrt(2))
    x = np.linspace(-2.5, 2.5, 10 ** 6)
    brute = np.abs(w.cdf(x) - a.cdf(x)).max()
    # a grid scan is a lower bound; the square-root edge limits it to O(h^(3/2)) accuracy
    assert brute <= KOLMOGOROV_W_ARCSINE + 1e-15
    assert KOLMOGOROV_W_ARCSINE - brute <= 1e-6


def test_kolmogorov_metric_axioms():
    fam = [semicircle(), scale(arcsine(), 1 / math.sqrt(2)), bernoulli(), tilted_bernoulli(0.8),
           meixner_measure(MeixnerParams(0.2))]
    for i, p in enumerate(fam):
        for j, q in enumerate(fam):
            d = kolmogorov(p, q)
            assert d == kolmogorov(q, p)
            assert d >= 0 and (d > 0) == (i != j)
            for r in fam:
                assert d <= kolmogorov(p, r) + kolmogorov(r, q) + 1e-12


def test_voiculescu_examples():
    assert voiculescu_transform(dirac(0.0), 2j) == pytest.approx(0.0, abs=1e-12)
    z = 10j
    phi = voiculescu_transform(bernoulli(), z)
    assert abs(phi - 1 / z) <= 0.01 * abs(1 / z) * 10
    # closed form: F^(-1)(z) = (z + sqrt(z^2 + 4)) / 2 for the symmetric Bernoulli law
    assert phi == pytest.approx((-z + np.sqrt(z * z + 4)) / 2, abs=1e-12)
    assert phi.imag <= 0


def test_voiculescu_semicircle_is_one_over_z():
    for z in (3j, 1 + 4j, -2 + 6j):
        assert voiculescu_transform(semicircle(), z) == pytest.approx(1 / z, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_voiculescu_additivity(n):
    mu = tilted_bernoulli(0.7)
    z = 10j
    phi1 = voiculescu_transform(mu, z)
    phin = voiculescu_transform(Subordination(mu, n), z)
    assert abs(phin - n * phi1) <= 1e-6


@given(y=st.floats(20, 200))
def test_voiculescu_expansion(y):
    mu = tilted_bernoulli(0.7)
    phi = voiculescu_transform(mu, 1j * y)
    # phi(z) = alpha_2 / z + alpha_3 / z^2 + ... with alpha_1 = 0, alpha_2 = 1
    assert abs(1j * y * phi - 1) <= 5 / y


def test_kolmogorov_grid_contains_atoms_and_edges():
    g = kolmogorov_grid(bernoulli(), semicircle(), n=101)
    for x in (-1.0, 1.0, -1.0 - 1e-12, 1.0 + 1e-12, -2.0, 2.0):
        assert np.any(g == x)
