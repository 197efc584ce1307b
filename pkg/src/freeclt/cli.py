"""Batch experiment harness.

Each experiment writes CSV tables into ``--out`` plus ``<experiment>_verdicts.csv`` and
exits with status 0 exactly when every enabled verdict passes.  Numbers are
written with ``%.17g`` so repeated runs produce byte-identical files.

Config files are JSON objects whose keys are the long flag names
(``measure``, ``experiment``, ``ns``, ``grid``, ``eps``, ``tol``, ``out``,
``kmax``, ``order``, ``plots``); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .edgeworth import (
    density_expansion,
    expansion1_cdf,
    expansion2_cdf,
    expansion2_symmetric_cdf,
    q1_sup,
)
from .entropy import clt_entropy_sweep
from .errors import FreeCLTError, InvalidArgumentError
from .formal_series import coefficient_table_csv, collect_Bk, revert_g, solve_g, verify_closed_forms
from .measure import Measure, load_measure, moment_summary, semicircle
from .meixner import clt_params, kappa_measure, meixner_measure
from .subordination import DEFAULT_TOL, clt_measure
from .transform import kolmogorov, kolmogorov_distance, kolmogorov_grid

EXPERIMENTS = ("convolve", "rates", "meixner", "edgeworth", "formal", "entropy")
DEFAULT_NS = (8, 16, 32, 64, 128, 256)
SYM_TOL = 1e-12

__all__ = ["ExperimentConfig", "Verdict", "fit_slope", "run", "main"]


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    measure: str = "tilted_bernoulli(0.9)"
    experiment: str = "rates"
    ns: tuple[int, ...] = DEFAULT_NS
    grid: int = 4096
    eps: float = 0.0
    tol: float = DEFAULT_TOL
    out: str = "freeclt_out"
    kmax: int = 2
    order: int = 30
    plots: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgumentError(f"experiment must be one of {EXPERIMENTS}")
        ns = tuple(int(n) for n in self.ns)
        object.__setattr__(self, "ns", ns)
        if not ns or ns[0] < 1 or any(b <= a for a, b in zip(ns[:-1], ns[1:])):
            raise InvalidArgumentError("ns must be a strictly increasing list of positive integers")
        if not self.tol > 0 or self.eps < 0 or self.grid < 16:
            raise InvalidArgumentError("tol must be > 0, eps >= 0 and grid >= 16")


@dataclass(frozen=True)
class Verdict:
    name: str
    value: float
    target: str
    passed: bool | None  # None: not applicable to this measure


@dataclass
class Result:
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)
    verdicts: list[Verdict] = field(default_factory=list)
    text: dict[str, str] = field(default_factory=dict)


def fit_slope(ns: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of ``log value`` against ``log n``.

    With five or more points the two smallest ``n`` are dropped as
    pre-asymptotic.
    """
    ns = np.asarray(ns, dtype=float)
    v = np.asarray(values, dtype=float)
    if ns.size >= 5:
        ns, v = ns[2:], v[2:]
    if ns.size < 2 or np.any(v <= 0):
        return math.nan
    return float(np.polyfit(np.log(ns), np.log(v), 1)[0])


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("FREECLT_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Sequence):
    """Order-preserving map over a bounded thread pool."""
    w = _workers()
    if w <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))


def _in(lo: float, hi: float, v: float) -> bool:
    return bool(lo <= v <= hi)


# ---------------------------------------------------------------------------
# experiments


def run_convolve(cfg: ExperimentConfig, mu: Measure) -> Result:
    """Density and distribution function of ``mu_n`` on a uniform grid."""
    res = Result()

    def one(n):
        mn = clt_measure(mu, n, grid_n=cfg.grid, eps=cfg.eps, tol=cfg.tol)
        lo, hi = mn.support
        x = np.linspace(lo - 0.25, hi + 0.25, 801)
        return mn, x, mn.density(x), mn.cdf(x)

    rows, summary = [], []
    max_ok = mass_ok = True
    for n, (mn, x, p, F) in zip(cfg.ns, _map(one, cfg.ns)):
        rows += [[n, xi, pi, Fi] for xi, pi, Fi in zip(x, p, F)]
        pmax = mn.info.get("max_density", math.nan) if mn.ac is not None else math.inf
        defect = abs(mn.total_mass - 1.0)
        summary.append([n, mn.support[0], mn.support[1], pmax, defect, len(mn.atoms)])
        mass_ok &= defect <= 1e-8
        if n >= 64:
            max_ok &= bool(pmax <= 2.0 + 1e-3)
    res.tables["density"] = (["n", "x", "density", "cdf"], rows)
    res.tables["summary"] = (["n", "support_lo", "support_hi", "max_density", "mass_defect", "atoms"], summary)
    res.verdicts.append(Verdict("mass_conservation", max(r[4] for r in summary), "<= 1e-8", mass_ok))
    if any(n >= 64 for n in cfg.ns):
        big = max(r[3] for r in summary if r[0] >= 64)
        res.verdicts.append(Verdict("max_density_n>=64", big, "<= 2.001", max_ok))
    return res


def _rates(cfg, mu):
    ms = moment_summary(mu)

    def one(n):
        p = clt_params(ms, n)
        mn = clt_measure(mu, n, grid_n=cfg.grid, eps=cfg.eps, tol=cfg.tol)
        return [
            n,
            kolmogorov(mn, semicircle()),
            kolmogorov(mn, meixner_measure(p.shift_only)),
            kolmogorov(mn, kappa_measure(p)),
        ]

    return ms, _map(one, cfg.ns)


def run_rates(cfg: ExperimentConfig, mu: Measure) -> Result:
    """Kolmogorov distances of ``mu_n`` to ``w``, ``mu_{a_n,0,0}`` and ``kappa_n`` with slopes."""
    res = Result()
    ms, rows = _rates(cfg, mu)
    res.tables["distances"] = (["n", "delta_w", "delta_meixner", "delta_kappa"], rows)
    ns = [r[0] for r in rows]
    slopes = [fit_slope(ns, [r[i] for r in rows]) for i in (1, 2, 3)]
    res.tables["slopes"] = (["series", "slope"], [
        ["delta_w", slopes[0]], ["delta_meixner", slopes[1]], ["delta_kappa", slopes[2]]
    ])
    skewed = abs(ms.m(3)) > SYM_TOL
    if skewed:
        res.verdicts.append(Verdict("slope_delta_w", slopes[0], "[-0.65, -0.35]", _in(-0.65, -0.35, slopes[0])))
    else:
        res.verdicts.append(Verdict("slope_delta_w", slopes[0], "<= -0.8", bool(slopes[0] <= -0.8)))
    res.verdicts.append(Verdict("slope_delta_meixner", slopes[1], "[-1.25, -0.8]", _in(-1.25, -0.8, slopes[1])))
    res.verdicts.append(Verdict("slope_delta_kappa", slopes[2], "[-1.8, -1.2]", _in(-1.8, -1.2, slopes[2])))
    return res


def run_meixner(cfg: ExperimentConfig, mu: Measure) -> Result:
    """CLT Meixner parameters and the positivity of ``kappa_n`` for each ``n`` (no verdicts)."""
    res = Result()
    ms = moment_summary(mu)
    rows = []
    for n in cfg.ns:
        p = clt_params(ms, n)
        k = kappa_measure(p)
        rows.append([n, p.a, p.b, p.d, p.e, int(p.within_bounds()), int(k.info["is_probability"]),
                     len(meixner_measure(p.meixner).atoms)])
    res.tables["params"] = (["n", "a", "b", "d", "e", "within_bounds", "kappa_is_probability", "atoms"], rows)
    return res


def _edgeworth_grid(mn, p):
    g = kolmogorov_grid(mn)
    return np.unique(np.concatenate([g, [-2.0, 2.0, -2.0 + p.a, 2.0 + p.a]]))


def run_edgeworth(cfg: ExperimentConfig, mu: Measure) -> Result:
    """``F_n`` against the order-1 and order-2 approximants and ``p_n`` against ``v_n``."""
    res = Result()
    ms = moment_summary(mu)
    skewed = abs(ms.m(3)) > SYM_TOL

    def one(n):
        p = clt_params(ms, n)
        mn = clt_measure(mu, n, grid_n=cfg.grid, eps=cfg.eps, tol=cfg.tol)
        g = _edgeworth_grid(mn, p)
        e1 = lambda x: expansion1_cdf(x, p.a)
        e2 = (lambda x: expansion2_cdf(x, p)) if skewed else (lambda x: expansion2_symmetric_cdf(x, ms.m(4), n))
        r1 = kolmogorov_distance(mn.cdf, e1, g)
        r2 = kolmogorov_distance(mn.cdf, e2, g)
        R = 2.0 / p.e
        xs = np.linspace(-0.9 * R, 0.9 * R, 2001)
        rd = float(np.abs(mn.density(xs + p.a) - density_expansion(xs, p)).max())
        x = np.linspace(-2.5, 2.5, 501) + p.a
        table = [[n, xi, Fi, a1, a2, pi, vi] for xi, Fi, a1, a2, pi, vi in zip(
            x, mn.cdf(x), e1(x), e2(x), mn.density(x), density_expansion(x - p.a, p))]
        return [n, r1, r2, rd, q1_sup(p.a)], table

    out = _map(one, cfg.ns)
    summary = [o[0] for o in out]
    res.tables["summary"] = (
        ["n", "sup_order1", "sup_order2", "max_density_inner90", "sup_q1"], summary)
    res.tables["table"] = (
        ["n", "x", "F_n", "order1", "order2", "p_n", "v_n"], [row for o in out for row in o[1]])
    ns = [r[0] for r in summary]
    s1 = fit_slope(ns, [r[1] for r in summary])
    s2 = fit_slope(ns, [r[2] for r in summary])
    res.tables["slopes"] = (["series", "slope"], [["sup_order1", s1], ["sup_order2", s2]])
    if skewed:
        res.verdicts.append(Verdict("slope_sup_order1", s1, "<= -0.8", bool(s1 <= -0.8)))
    else:
        res.verdicts.append(Verdict("slope_sup_order2_symmetric", s2, "<= -1.2", bool(s2 <= -1.2)))
    for r in summary:
        if r[0] in (64, 128):
            bound = 5.0 / r[0] ** 1.3
            res.verdicts.append(Verdict(f"density_residual_n{r[0]}", r[3], f"<= {bound:.6g}", bool(r[3] <= bound)))
    return res


def run_formal(cfg: ExperimentConfig, mu: Measure | None = None) -> Result:
    """Exact check of ``B_1``, ``B_2`` and coefficient tables of ``B_1..B_kmax``."""
    res = Result()
    rep = verify_closed_forms(cfg.order, max(cfg.kmax, 2))
    g = solve_g(cfg.order, cfg.kmax)
    Bs = collect_Bk(revert_g(g), cfg.kmax, cfg.order)
    res.text["coefficients"] = coefficient_table_csv(Bs)
    rows = [["B1_difference", str(rep.b1_difference)], ["B2_difference", str(rep.b2_difference)]]
    rows += [[k, str(v)] for k, v in rep.checks.items()]
    rows.append(["verdict", rep.verdict])
    rows.append(["caveat", rep.caveat])
    res.tables["report"] = (["item", "value"], rows)
    res.verdicts.append(Verdict("B1_exact", float(rep.b1_difference), "== 0", rep.b1_difference == 0))
    res.verdicts.append(Verdict("B2_exact", float(rep.b2_difference), "== 0", rep.b2_difference == 0))
    res.verdicts.append(Verdict("structural_checks", float(sum(rep.checks.values())),
                                f"== {len(rep.checks)}", all(rep.checks.values())))
    return res


def run_entropy(cfg: ExperimentConfig, mu: Measure) -> Result:
    """Entropy, Fisher information and L1 gaps of ``mu_n``."""
    res = Result()
    ms = moment_summary(mu)
    reps = clt_entropy_sweep(mu, cfg.ns, grid_n=cfg.grid, eps=cfg.eps, workers=_workers())
    res.tables["reports"] = (
        ["n", "chi", "fisher", "l1", "gap_chi", "gap_fisher", "gap_l1"],
        [[r.n, r.chi, r.fisher, r.l1_to_semicircle, r.gap_chi, r.gap_fisher, r.gap_l1] for r in reps],
    )
    ref = next((r for r in reps if r.n == 128), reps[-1])
    m3, m4 = ms.m(3), ms.m(4)
    if abs(m3) > SYM_TOL:
        tf, tc = m3 * m3, m3 * m3 / 6.0
        res.verdicts.append(Verdict(f"gap_fisher_n{ref.n}", ref.gap_fisher, f"{tf:.6g} +- 10%",
                                    abs(ref.gap_fisher - tf) <= 0.1 * tf))
        res.verdicts.append(Verdict(f"gap_chi_n{ref.n}", ref.gap_chi, f"{tc:.6g} +- 10%",
                                    abs(ref.gap_chi - tc) <= 0.1 * tc))
        for key in ("gap_fisher", "gap_chi"):
            seq = [(r.n, getattr(r, key)) for r in reps if r.n >= 64]
            ok = all(abs(b - a) <= 0.15 * abs(a) for (_, a), (_, b) in zip(seq[:-1], seq[1:]))
            if len(seq) >= 2:
                res.verdicts.append(Verdict(f"{key}_cauchy", float(len(seq)), "successive within 15%", ok))
    else:
        tl = 2.0 * abs(m4 - 2.0) / math.pi
        if tl > 0:
            res.verdicts.append(Verdict(f"gap_l1_n{ref.n}", ref.gap_l1, f"{tl:.6g} +- 15%",
                                        abs(ref.gap_l1 - tl) <= 0.15 * tl))
        res.verdicts.append(Verdict(f"gap_chi_n{ref.n}", ref.gap_chi, "|gap| <= 0.1", abs(ref.gap_chi) <= 0.1))
    return res


RUNNERS = {
    "convolve": run_convolve,
    "rates": run_rates,
    "meixner": run_meixner,
    "edgeworth": run_edgeworth,
    "formal": run_formal,
    "entropy": run_entropy,
}


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_dat(path: Path, header: Sequence[str], rows: Sequence[Sequence]):
    """Whitespace-separated table for gnuplot (header as a comment line)."""
    lines = ["# " + " ".join(header)]
    lines += [" ".join(_fmt(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def run(cfg: ExperimentConfig) -> tuple[Result, bool]:
    mu = load_measure(cfg.measure) if cfg.experiment != "formal" else None
    res = RUNNERS[cfg.experiment](cfg, mu)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in res.tables.items():
        write_csv(out / f"{cfg.experiment}_{name}.csv", header, rows)
        if cfg.plots:
            write_dat(out / f"{cfg.experiment}_{name}.dat", header, rows)
    for name, text in res.text.items():
        (out / f"{cfg.experiment}_{name}.csv").write_text(text)
    write_csv(out / f"{cfg.experiment}_verdicts.csv", ["name", "value", "target", "status"],
              [[v.name, v.value, v.target, _status(v)] for v in res.verdicts])
    ok = all(v.passed is not False for v in res.verdicts)
    return res, ok


def _status(v: Verdict) -> str:
    return "skip" if v.passed is None else ("pass" if v.passed else "fail")


def _parse_ns(s: str) -> tuple[int, ...]:
    return tuple(int(t) for t in s.replace(" ", "").split(",") if t)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freeclt", description="Free CLT experiment harness")
    ap.add_argument("--config", help="JSON file with default values for the flags below")
    ap.add_argument("--measure", help="preset name or JSON measure file")
    ap.add_argument("--experiment", choices=EXPERIMENTS)
    ap.add_argument("--ns", type=_parse_ns, help="comma-separated increasing n values")
    ap.add_argument("--grid", type=int, help="Chebyshev node budget for mu_n")
    ap.add_argument("--eps", type=float, help="inversion height (0 = boundary values)")
    ap.add_argument("--tol", type=float, help="fixed-point tolerance")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--kmax", type=int, help="highest u power for the formal expansion")
    ap.add_argument("--order", type=int, help="Laurent truncation order for the formal expansion")
    ap.add_argument("--plots", action="store_true", default=None, help="also write gnuplot .dat files")
    return ap


def config_from_args(argv: Sequence[str] | None = None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        values.update(json.loads(Path(args.config).read_text()))
        if "ns" in values and isinstance(values["ns"], str):
            values["ns"] = _parse_ns(values["ns"])
    for key in ("measure", "experiment", "ns", "grid", "eps", "tol", "out", "kmax", "order", "plots"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    unknown = set(values) - set(ExperimentConfig.__dataclass_fields__)
    if unknown:
        raise InvalidArgumentError(f"unknown config keys {sorted(unknown)}")
    return ExperimentConfig(**values)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
        res, ok = run(cfg)
    except (FreeCLTError, OSError, json.JSONDecodeError) as exc:
        print(f"freeclt: error: {exc}", file=sys.stderr)
        return 2
    for v in res.verdicts:
        print(f"{_status(v):4s}  {v.name}: {_fmt(v.value)} (target {v.target})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
