import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import upper_half_plane
from freeclt import errors
from freeclt.measure import bernoulli, moment, moment_summary, tilted_bernoulli
from freeclt.meixner import (
    CltParams,
    MeixnerParams,
    clt_params,
    family,
    kappa_measure,
    meixner_atoms,
    meixner_density,
    meixner_F,
    meixner_G,
    meixner_measure,
    varsigma_density,
    varsigma_measure,
)
from freeclt.transform import cauchy_transform


def test_density_examples():
    w = MeixnerParams(0.0)
    assert meixner_density(w, 0.0) == pytest.approx(1 / math.pi)
    assert meixner_density(w, 2.0) == 0.0 and meixner_density(w, -2.0) == 0.0
    # f(0) = 1, numerator sqrt(4 - (0 - a)^2)
    assert meixner_density(MeixnerParams(0.2), 0.0) == pytest.approx(math.sqrt(4 - 0.04) / (2 * math.pi))
    assert family(w) == "semicircle"


def test_atom_examples():
    assert meixner_atoms(MeixnerParams(0.5)) == []
    assert meixner_atoms(MeixnerParams(0.0)) == []
    ms = moment_summary(bernoulli())
    for n in (3, 10, 100):
        assert meixner_atoms(clt_params(ms, n).meixner) == []


def test_atom_weight_is_residue():
    # the weight of an atom at a zero y of F equals 1 / F'(y)
    for p in (MeixnerParams(2.0), MeixnerParams(1.5, 0.2, 0.1), MeixnerParams(-2.5, 0.0, 0.2)):
        atoms = meixner_atoms(p)
        assert atoms
        for y, lam in atoms:
            h = 1e-6
            dF = (meixner_F(p, y + h + 1e-14j) - meixner_F(p, y - h + 1e-14j)).real / (2 * h)
            assert abs(meixner_F(p, y + 1e-14j)) < 1e-9
            assert lam == pytest.approx(1 / dF, rel=1e-6)


def test_clt_params_examples():
    p = clt_params(moment_summary(bernoulli()), 10)
    assert (p.a, p.b, p.d) == pytest.approx((0.0, 0.0, 0.1))
    assert p.e == pytest.approx(1 / math.sqrt(0.9))
    q = clt_params(moment_summary(tilted_bernoulli(0.9)), 100)
    assert q.a == pytest.approx(0.26667, abs=1e-5)
    assert q.b == pytest.approx(0.0, abs=1e-12)
    assert q.d == pytest.approx(0.01)
    far = clt_params(moment_summary(tilted_bernoulli(0.9)), 10 ** 12)
    assert max(abs(far.a), far.b, far.d, abs(far.e - 1)) < 1e-5


def test_clt_params_errors():
    with pytest.raises(errors.MomentInequalityError):
        clt_params([1, 0, 1, 2.0, 4.0], 10)
    with pytest.raises(errors.InvalidArgumentError):
        clt_params([1, 0.1, 1, 0, 3], 10)


@given(p=st.floats(0.05, 0.95), k=st.floats(3.0, 50.0))
def test_clt_param_bounds(p, k):
    ms = moment_summary(tilted_bernoulli(p))
    n = max(3, math.ceil(k * ms.m(4)))
    assert clt_params(ms, n).within_bounds()


def test_meixner_measure_examples():
    w = meixner_measure(MeixnerParams(0.0))
    assert w.cdf(0.0) == pytest.approx(0.5, abs=1e-14)
    assert meixner_measure(MeixnerParams(0.3)).support == pytest.approx((-1.7, 2.3))


def test_meixner_mass_random_params():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a = rng.uniform(-1.5, 1.5)
        b = rng.uniform(-0.5, 0.6)
        d = rng.uniform(-0.5, 0.6)
        p = MeixnerParams(a, b, d)
        try:
            mu = meixner_measure(p)
        except errors.SingularParameterError:
            continue
        assert mu.total_mass == pytest.approx(1.0, abs=1e-8)
        assert all(w >= 0 for _, w in mu.atoms)


def test_reciprocal_transform_consistency(rng):
    z = upper_half_plane(rng, 100)
    for p in (MeixnerParams(0.3, 0.1, 0.05), MeixnerParams(1.4, 0.2, 0.1), MeixnerParams(-0.4, 0.0, 0.2)):
        mu = meixner_measure(p)
        F = 1 / cauchy_transform(mu, z)
        assert np.abs(F - meixner_F(p, z)).max() <= 1e-6
        assert np.abs(meixner_G(p, z) - 1 / meixner_F(p, z)).max() < 1e-14


def test_meixner_moments_from_transform():
    # F(z) = z - V/(z - a) + O(z^-3) with V = (1 - d)/(1 - b): m_1 = 0, m_2 = V, m_3 = V a
    p = MeixnerParams(0.25, 0.1, 0.05)
    mu = meixner_measure(p)
    V = (1 - p.d) / (1 - p.b)
    assert moment(mu, 1) == pytest.approx(0.0, abs=1e-12)
    assert moment(mu, 2) == pytest.approx(V, abs=1e-12)
    assert moment(mu, 3) == pytest.approx(V * p.a, abs=1e-12)


def test_varsigma():
    p = CltParams(n=10, a=0.0, b=0.0, d=0.0)
    assert p.e == 1.0
    assert varsigma_density(p, 0.0) == pytest.approx(-1 / math.pi)
    assert varsigma_density(p, 2.5) == 0.0
    q = clt_params(moment_summary(tilted_bernoulli(0.8)), 20)
    assert varsigma_measure(q).total_mass == pytest.approx(0.0, abs=1e-14)
    x = np.linspace(q.a - 1.8 / q.e, q.a + 1.8 / q.e, 9)
    assert varsigma_measure(q).density(x) == pytest.approx(varsigma_density(q, x), abs=1e-12)


def test_kappa():
    p = clt_params(moment_summary(bernoulli()), 100)
    k = kappa_measure(p)
    assert k.total_mass == pytest.approx(1.0, abs=1e-8)
    assert k.info["is_probability"] is True
    # close to the threshold the flag may be false; it must not raise
    q = clt_params(moment_summary(tilted_bernoulli(0.9)), 9)
    assert isinstance(kappa_measure(q).info["is_probability"], bool)


def test_singular_parameter_guard():
    from types import SimpleNamespace

    from freeclt.meixner import _check_regular

    # f(x) = -2 x^2 + 1 vanishes at +-0.707, inside the given interval
    with pytest.raises(errors.SingularParameterError):
        _check_regular(SimpleNamespace(a=0.0, b=-2.0, d=0.0, support=(-3.0, 3.0)))


def test_json_parameter_forms():
    from freeclt.measure import measure_from_json, moment, moment_summary, tilted_bernoulli

    m = measure_from_json({"a": 0.2, "b": 0.1, "d": 0.05})
    assert moment(m, 2) == pytest.approx((1 - 0.05) / (1 - 0.1), abs=1e-10)
    c = measure_from_json({"clt_of": "tilted_bernoulli(0.9)", "n": 64})
    p = clt_params(moment_summary(tilted_bernoulli(0.9)), 64)
    v = (1 - p.d) / (1 - p.b)
    assert moment(c, 3) == pytest.approx(v * p.a, abs=1e-10)
    nested = measure_from_json({"clt_of": {"atoms": [[-1, 0.5], [1, 0.5]]}, "n": 10})
    assert moment(nested, 2) == pytest.approx(0.9, abs=1e-10)
