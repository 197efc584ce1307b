"""Acceptance criteria, each checked at its stated tolerance.

Every test records a single PASS/FAIL line (see ``conftest.acceptance``)
which pytest prints in an "acceptance criteria" section at the end of the
run.  Run ``pytest tests/test_acceptance.py -s`` to see the lines inline.
"""
import math
import time

import numpy as np
import pytest

from conftest import upper_half_plane
from freeclt.cli import fit_slope
from freeclt.entropy import CHI_SEMICIRCLE, clt_entropy_sweep, fisher_info, free_entropy, log_energy, log_potential
from freeclt.formal_series import verify_closed_forms, revert_g, solve_g
from freeclt.formal_series import alpha, CumulantPolynomial
from freeclt.measure import (
    Measure,
    arcsine,
    bernoulli,
    moment_summary,
    scale,
    semicircle,
    standardize,
    tilted_bernoulli,
)
from freeclt.meixner import MeixnerParams, clt_params, kappa_measure, meixner_measure
from freeclt.subordination import Subordination, clt_measure, convolution_power_G, free_power
from freeclt.transform import cauchy_transform, kolmogorov, reciprocal_transform, voiculescu_transform

RATE_NS = (8, 16, 32, 64, 128, 256)


def test_criterion_1_two_fold_bernoulli(acceptance):
    start = time.perf_counter()
    z = upper_half_plane(np.random.default_rng(12345), 100)
    G = convolution_power_G(bernoulli(), 2, z)
    err_G = float(np.abs(G - 1 / (np.sqrt(z - 2) * np.sqrt(z + 2))).max())
    m2 = clt_measure(bernoulli(), 2)
    r = math.sqrt(2)
    x = np.linspace(-0.9 * r, 0.9 * r, 4001)
    err_p = float(np.abs(m2.density(x) - 1 / (math.pi * np.sqrt(2 - x * x))).max())
    elapsed = time.perf_counter() - start
    ok = err_G <= 1e-9 and err_p <= 1e-6 and elapsed < 5
    acceptance(1, ok, f"max|G - G_arcsine| = {err_G:.3g} (<= 1e-9), L_inf density = {err_p:.3g} (<= 1e-6), "
                      f"{elapsed:.2f} s (< 5 s)")
    assert ok


def test_criterion_2_closed_values(acceptance):
    w = semicircle()
    errs = {
        "chi": abs(free_entropy(w) - 0.5 * math.log(2 * math.pi * math.e)),
        "fisher": abs(fisher_info(w) - 1.0),
        "energy": abs(log_energy(w) - 0.25),
    }
    pot = max(abs(log_potential(w, x) - (x * x / 4 - 0.5)) for x in (0.0, 1.0, 1.9))
    ok = max(errs.values()) <= 1e-6 and pot <= 1e-8
    acceptance(2, ok, ", ".join(f"{k} err {v:.2g}" for k, v in errs.items()) + f", log potential err {pot:.2g}")
    assert ok


def test_criterion_3_symbolic_exactness(acceptance):
    start = time.perf_counter()
    rep = verify_closed_forms(30)
    ginv = revert_g(solve_g(30, 2))
    g = solve_g(30, 2)
    u = CumulantPolynomial.monomial({"u": 1})
    leading = (g[2] == alpha(3) * u and g[3] == alpha(4) * u * u and ginv[2] == -alpha(3) * u)
    elapsed = time.perf_counter() - start
    ok = rep.b1_difference == 0 and rep.b2_difference == 0 and all(rep.checks.values()) and leading and elapsed < 10
    acceptance(3, ok, f"B1 diff {rep.b1_difference}, B2 diff {rep.b2_difference}, "
                      f"a2/a3/b2 exact: {leading}, verdict '{rep.verdict}', {elapsed:.2f} s")
    assert ok


@pytest.fixture(scope="module")
def rate_table():
    start = time.perf_counter()
    mu = tilted_bernoulli(0.9)
    ms = moment_summary(mu)
    rows = []
    for n in RATE_NS:
        p = clt_params(ms, n)
        mn = clt_measure(mu, n)
        rows.append((kolmogorov(mn, semicircle()), kolmogorov(mn, meixner_measure(p.shift_only)),
                     kolmogorov(mn, kappa_measure(p))))
    slopes = [fit_slope(RATE_NS, [r[i] for r in rows]) for i in range(3)]
    return slopes, time.perf_counter() - start


def test_criterion_4_rate_slopes(acceptance, rate_table):
    (sw, sm, sk), elapsed = rate_table
    parts = {
        "delta_w": (sw, -0.65 <= sw <= -0.35, "[-0.65, -0.35]"),
        "delta_meixner": (sm, -1.25 <= sm <= -0.8, "[-1.25, -0.8]"),
        "delta_kappa": (sk, -1.8 <= sk <= -1.2, "[-1.8, -1.2]"),
    }
    ok = all(v[1] for v in parts.values()) and elapsed < 180
    detail = ", ".join(f"{k} slope {v[0]:.3f} in {v[2]}: {'ok' if v[1] else 'no'}" for k, v in parts.items())
    acceptance(4, ok, detail + f", {elapsed:.1f} s")
    assert ok


def test_criterion_5_entropy_fisher(acceptance):
    reps = {r.n: r for r in clt_entropy_sweep(tilted_bernoulli(0.9), [64, 128, 256])}
    m3sq = 64 / 9
    r = reps[128]
    fish_ok = abs(r.gap_fisher - m3sq) <= 0.1 * m3sq
    chi_ok = abs(r.gap_chi - m3sq / 6) <= 0.1 * m3sq / 6
    cauchy_ok = all(
        abs(getattr(reps[a], k) - getattr(reps[b], k)) <= 0.15 * abs(getattr(reps[b], k))
        for k in ("gap_fisher", "gap_chi") for a, b in ((64, 128), (128, 256))
    )
    ok = fish_ok and chi_ok and cauchy_ok
    acceptance(5, ok, f"n(Phi - 1) = {r.gap_fisher:.4f} vs {m3sq:.4f}, n(chi_w - chi) = {r.gap_chi:.4f} "
                      f"vs {m3sq / 6:.4f}, Cauchy: {cauchy_ok}")
    assert ok


def test_criterion_6_l1_symmetric(acceptance):
    (r,) = clt_entropy_sweep(bernoulli(), [128])
    val = 128 * r.l1_to_semicircle
    ok = abs(val - 2 / math.pi) <= 0.15 * 2 / math.pi
    acceptance(6, ok, f"n L1 = {val:.4f} vs 2/pi = {2 / math.pi:.4f} (+-15%)")
    assert ok


def test_criterion_7_invariants(acceptance):
    rng = np.random.default_rng(12345)
    presets = [semicircle(), standardize(arcsine()), bernoulli(), tilted_bernoulli(0.9),
               meixner_measure(MeixnerParams(0.2))]
    z = upper_half_plane(rng, 500)
    checks = {}
    checks["nevanlinna"] = all(np.all(cauchy_transform(mu, z).imag < 0) for mu in presets)
    checks["class_F"] = all(np.all(reciprocal_transform(mu, z).imag >= z.imag * (1 - 1e-12)) for mu in presets)
    res_ok = True
    for mu in (bernoulli(), tilted_bernoulli(0.9), tilted_bernoulli(0.7)):
        for n in (2, 7, 64):
            sol = Subordination(mu, n)
            zz = upper_half_plane(rng, 200, lo=1e-4)
            Z = sol.solve(zz)
            res_ok &= bool(np.all(sol.residual(zz, Z) <= sol.residual_bound(Z)))
    checks["fixed_point_residuals"] = res_ok
    checks["mass_conservation"] = all(
        abs(free_power(tilted_bernoulli(p), n).total_mass - 1) <= 1e-8 for p in (0.2, 0.5, 0.9) for n in (2, 9, 40))
    fam = [semicircle(), scale(arcsine(), 1 / math.sqrt(2)), bernoulli(), tilted_bernoulli(0.8)]
    axioms = True
    for i, p in enumerate(fam):
        for j, q in enumerate(fam):
            d = kolmogorov(p, q)
            axioms &= d == kolmogorov(q, p) and d >= 0 and ((d > 0) == (i != j))
            for s in fam:
                axioms &= d <= kolmogorov(p, s) + kolmogorov(s, q) + 1e-12
    checks["kolmogorov_axioms"] = bool(axioms)
    mu, nu = Measure([(-1.0, 0.5), (1.0, 0.5)]), Measure([(-1.0, 0.45), (1.0, 0.55)])
    checks["contraction"] = all(
        kolmogorov(free_power(mu, n), free_power(nu, n)) <= n * kolmogorov(mu, nu) + 1e-9 for n in (2, 3))
    t = tilted_bernoulli(0.7)
    phi1 = voiculescu_transform(t, 10j)
    checks["voiculescu_additivity"] = all(
        abs(voiculescu_transform(Subordination(t, n), 10j) - n * phi1) <= 1e-6 for n in (2, 3, 5))
    ok = all(checks.values())
    acceptance(7, ok, ", ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in checks.items()))
    assert ok


def test_criterion_8_local_clt_bound(acceptance):
    measures = [bernoulli(), tilted_bernoulli(0.9), tilted_bernoulli(0.7), standardize(arcsine()), semicircle()]
    worst_p, worst_tail_ratio = 0.0, 0.0
    for mu in measures:
        ms = moment_summary(mu)
        for n in (64, 128, 256):
            mn = clt_measure(mu, n)
            lo, hi = mn.support
            x = np.linspace(lo, hi, 40001)[1:-1]
            worst_p = max(worst_p, float(mn.density(x).max()))
            p = clt_params(ms, n)
            inside = float(mn.cdf(p.a + 2 / p.e) - mn.cdf(p.a - 2 / p.e))
            worst_tail_ratio = max(worst_tail_ratio, max(1 - inside, 0.0) / (10 / n ** 1.4))
    ok = worst_p <= 2 + 1e-3 and worst_tail_ratio <= 1
    acceptance(8, ok, f"max p_n = {worst_p:.4f} (<= 2.001), worst tail / (10 n^-1.4) = {worst_tail_ratio:.3g} (<= 1)")
    assert ok
