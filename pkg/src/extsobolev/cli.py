"""Experiment runner: configs, orchestration, caching, reports, plots.

``extsobolev run <experiment> [key=value ...] --config FILE --out DIR
[--jobs N] [--seed S]`` executes one verification suite and writes
``report.json``, ``tables/*.csv``, ``plotdata/*.dat``, ``figures/*.png``
and ``manifest.json`` into the output directory.  ``extsobolev list``
enumerates the experiments with the statement each one checks.

Config files are line-oriented ``key = value`` text (UTF-8, ``#``
comments); inline ``key=value`` arguments override the file.  Exit status
is 0 when every invariant of the suite passes, 1 when an invariant fails
(the failing invariant is named on stderr), and 2 for an invalid config
(with line-numbered diagnostics).

``report.json`` is deterministic for a fixed config and seed: it carries
no timestamps (timings live in ``manifest.json``), reductions are ordered,
and cached tables round-trip floats exactly, so cold and warm runs emit
byte-identical reports.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__, cache
from .counterexamples import (default_schedule, interpolation_bound_check,
                              prop71_run, prop72_limit_A, prop72_run)
from .domain import DomainKind, DomainSpec, exterior_ball, whole_space
from .errors import ExtSobolevError
from .heat import (exterior_kernel, gauss_kernel, halfspace_kernel,
                   supporting_halfspace, verify_heat_bounds)
from .inequalities import (WeightSpec, hardy_ratio, norm_equivalence_ratio,
                           region_kernel, region_weight, riesz_constant,
                           riesz_kernel, riesz_shape_ratio, schur_bound,
                           schur_lower_bound, schur_refinement_trend)
from .lp_theory import (DyadicRange, ProjectorKind,
                        fit_kernel_difference_bound, projector_symbol,
                        sq_equivalence_ratio, test_family)


# -- small utilities -----------------------------------------------------------------

def _jsonable(obj):
    """Recursively convert results to JSON-safe, deterministic values."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if hasattr(obj, "as_dict"):
        return _jsonable(obj.as_dict())
    return obj


def _pmap(fn: Callable, items: list, jobs: int) -> list:
    """Order-preserving map, threaded when jobs > 1."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _inv(name: str, passed: bool, detail) -> dict:
    return {"name": name, "passed": bool(passed), "detail": _jsonable(detail)}


def _unit_vectors(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    v = rng.normal(size=(n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass
class RunResult:
    results: dict = field(default_factory=dict)
    invariants: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)      # stem -> (columns, rows)
    plotdata: dict = field(default_factory=dict)    # stem -> (columns, rows)
    figures: dict = field(default_factory=dict)     # stem -> plot spec


# -- experiment: heat-verify ---------------------------------------------------------

def _run_heat_verify(cfg: dict, jobs: int) -> RunResult:
    d, n = cfg["d"], cfg["n_samples"]
    rng = np.random.default_rng(cfg["seed"])
    rx = rng.uniform(cfg["r_min"], cfg["r_max"], n)
    ry = rng.uniform(cfg["r_min"], cfg["r_max"], n)
    ts = np.exp(rng.uniform(math.log(cfg["t_min"]), math.log(cfg["t_max"]), n))
    ux = _unit_vectors(rng, n, d)
    uy = _unit_vectors(rng, n, d)
    samples = [(rx[i] * ux[i], ry[i] * uy[i], float(ts[i])) for i in range(n)]

    params = {"d": d, "n_samples": n, "seed": cfg["seed"],
              "r": [cfg["r_min"], cfg["r_max"]],
              "t": [cfg["t_min"], cfg["t_max"]]}
    fit = cache.cached("heat-verify-kernels", params,
                       lambda: _jsonable(verify_heat_bounds(samples, d=d)))

    res = RunResult()
    rows = fit["rows"]
    chain_rows, worst_margin = [], math.inf
    for (x, y, t), row in zip(samples, rows):
        hs = float(halfspace_kernel(d, x, y, t, supporting_halfspace(y)))
        gs = float(gauss_kernel(d, x, y, t))
        # cached rows stringify non-finite errors; float() parses them back
        ext, err = float(row["value"]), float(row["err"])
        if math.isfinite(ext) and math.isfinite(err):
            tol = err + 1e-9 * gs + 1e-300
            margin = min(ext + tol - hs, gs + tol - ext, ext + tol)
            worst_margin = min(worst_margin, margin)
        chain_rows.append([t, row["q"], hs, ext, err, gs])
    res.tables["samples"] = (["t", "q", "halfspace", "exterior",
                              "exterior_err", "gaussian"], chain_rows)

    violation = fit.get("violation")
    res.invariants.append(_inv(
        "heat-kernel-nonnegative", violation is None, violation))
    res.invariants.append(_inv(
        "heat-ordering-chain", worst_margin >= 0.0,
        {"worst_margin": worst_margin}))
    fitted = violation is None and "c_upper" in fit
    res.invariants.append(_inv(
        "heat-shape-decay-rate", fitted and fit["c_upper"] > 0.01,
        {"c": fit.get("c_upper")}))
    res.invariants.append(_inv(
        "heat-shape-envelope-spread",
        fitted and fit["spread"] < 1.0e4,
        {"spread": fit.get("spread"),
         "C_upper": fit.get("C_upper"), "C_lower": fit.get("C_lower")}))

    res.results = {"fit": {k: fit.get(k) for k in
                           ("c_upper", "c_lower", "C_upper", "C_lower",
                            "spread", "n_samples", "n_unresolved")},
                   "worst_chain_margin": worst_margin}
    ratio_rows = [[row["q"], float(row["ratio"])] for row in rows
                  if math.isfinite(float(row["ratio"]))
                  and float(row["ratio"]) > 0]
    ratio_rows.sort()
    res.plotdata["ratio_vs_q"] = (["q", "ratio"], ratio_rows)
    res.figures["ratio_vs_q"] = {
        "title": "exterior kernel over shape factor",
        "xlabel": "q = |x-y|^2 / t", "ylabel": "ratio", "logy": True,
        "series": [{"label": "samples", "style": "o",
                    "x": [r[0] for r in ratio_rows],
                    "y": [r[1] for r in ratio_rows]}]}
    return res


# -- experiment: riesz-verify --------------------------------------------------------

def _run_riesz_verify(cfg: dict, jobs: int) -> RunResult:
    d, s = cfg["d"], cfg["s"]
    res = RunResult()

    # whole-space: kernel equals the classical constant times |x-y|^{s-d}
    dists = np.geomspace(0.5, 4.0, cfg["n_whole"])
    whole_rows, worst_rel = [], 0.0
    for dist in dists:
        x = np.zeros(d); x[0] = 2.0
        y = np.zeros(d); y[0] = 2.0 + dist
        val = riesz_kernel(s, x, y, d=d,
                           domain_kind=DomainKind.WHOLE_SPACE).value
        exact = riesz_constant(d, s) * dist ** (s - d)
        rel = abs(val - exact) / exact
        worst_rel = max(worst_rel, rel)
        whole_rows.append([float(dist), val, exact, rel])
    res.tables["whole_space"] = (["dist", "computed", "exact", "rel_err"],
                                 whole_rows)
    res.invariants.append(_inv("riesz-whole-space-match", worst_rel < 1e-5,
                               {"worst_rel_err": worst_rel}))

    # exterior: symmetry and boundary-shape envelope, cached (expensive)
    radii = np.geomspace(1.0 + cfg["delta_min"], cfg["r_max"],
                         cfg["n_exterior"])
    params = {"d": d, "s": s, "radii": [float(r) for r in radii],
              "delta_min": cfg["delta_min"]}

    def compute() -> dict:
        pairs = [(float(ra), float(rb))
                 for i, ra in enumerate(radii) for rb in radii[i + 1:]]

        def one(pair):
            ra, rb = pair
            x = np.zeros(d); x[0] = ra
            y = np.zeros(d); y[1] = rb
            ratio = riesz_shape_ratio(s, x, y, d=d)
            return [ra, rb, ratio]

        shape_rows = _pmap(one, pairs, jobs)
        xa = np.zeros(d); xa[0] = 1.5
        ya = np.zeros(d); ya[1] = 2.5
        k_xy = riesz_kernel(s, xa, ya, d=d).value
        k_yx = riesz_kernel(s, ya, xa, d=d).value
        return {"shape_rows": shape_rows, "k_xy": k_xy, "k_yx": k_yx}

    table = cache.cached("riesz-exterior", params, compute)
    shape_rows = table["shape_rows"]
    ratios = np.array([row[2] for row in shape_rows])
    sym_rel = abs(table["k_xy"] - table["k_yx"]) / abs(table["k_xy"])
    res.tables["exterior_shape"] = (["r_x", "r_y", "shape_ratio"], shape_rows)
    res.invariants.append(_inv("riesz-exterior-symmetry", sym_rel < 1e-8,
                               {"rel_diff": sym_rel}))
    res.invariants.append(_inv(
        "riesz-shape-ratios-positive",
        bool(np.all(np.isfinite(ratios)) and np.all(ratios > 0)),
        {"min": float(ratios.min()), "max": float(ratios.max())}))
    spread = float(ratios.max() / ratios.min())
    res.invariants.append(_inv("riesz-shape-envelope-spread", spread < 1e4,
                               {"spread": spread}))
    res.results = {"worst_whole_rel_err": worst_rel, "symmetry_rel": sym_rel,
                   "shape_spread": spread}
    rows = sorted([[row[0] * row[1], row[2]] for row in shape_rows])
    res.plotdata["shape_ratio"] = (["rx_ry", "ratio"], rows)
    res.figures["shape_ratio"] = {
        "title": "Riesz kernel over boundary-shape envelope",
        "xlabel": "r_x r_y", "ylabel": "ratio", "logy": True,
        "series": [{"label": "pairs", "style": "o",
                    "x": [r[0] for r in rows], "y": [r[1] for r in rows]}]}
    return res


# -- experiment: lp-verify -----------------------------------------------------------

def _run_lp_verify(cfg: dict, jobs: int) -> RunResult:
    d, k = cfg["d"], cfg["k"]
    res = RunResult()
    dyadic = DyadicRange(cfg["j_min"], cfg["j_max"])

    # telescoping identity: sum of heat symbols over N = 2^j is exact
    lam = np.geomspace(1e-3, 64.0, 400)
    total = np.zeros_like(lam)
    for N in dyadic.frequencies():
        total += projector_symbol(N, ProjectorKind("heat", 1))(lam)
    a_hi = np.exp(-lam ** 2 * 4.0 ** (-dyadic.j_max))
    a_lo = np.exp(-lam ** 2 * 4.0 ** (-(dyadic.j_min - 1)))
    tel_err = float(np.max(np.abs(total - (a_hi - a_lo))))
    res.invariants.append(_inv("telescoping-identity", tel_err < 1e-8,
                               {"max_abs_err": tel_err}))

    # square function vs fractional norm over the fixed family
    family = test_family(d=d, seed=cfg["seed"])[: cfg["n_family"]]
    dom = exterior_ball(d)
    pairs = [(2.0, 1.0), (4.0, 0.5)]
    sq_rows, spreads = [], {}
    for p, s in pairs:
        vals = _pmap(lambda f: sq_equivalence_ratio(
            f, s, p, k, dom, dyadic=dyadic).value, family, jobs)
        for f, v in zip(family, vals):
            sq_rows.append([p, s, f.label, v])
        spreads[f"p={p},s={s}"] = max(vals) / min(vals)
    res.tables["square_function_ratios"] = (["p", "s", "function", "ratio"],
                                            sq_rows)
    worst_spread = max(spreads.values())
    res.invariants.append(_inv("square-function-equivalence-band",
                               worst_spread < 20.0, spreads))

    # Gaussian decay of the projector-difference kernel, cached
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["n_kernel_samples"]
    ns_freq = 2.0 ** rng.integers(0, 3, n)
    rxs = rng.uniform(0.3, 2.5, n)
    rys = rng.uniform(1.05, 3.0, n)
    dirs = _unit_vectors(rng, n, d)
    triples = []
    for i in range(n):
        x = rxs[i] * dirs[i]
        y = rys[i] * np.roll(dirs[i], 1)
        triples.append((x.tolist(), y.tolist(), float(ns_freq[i])))
    params = {"d": d, "k": k, "seed": cfg["seed"], "n": n}
    fit = cache.cached(
        "lp-kernel-difference", params,
        lambda: _jsonable(fit_kernel_difference_bound(
            [(np.array(x), np.array(y), N) for x, y, N in triples],
            k=k, d=d)))
    res.invariants.append(_inv("kernel-difference-gaussian-decay",
                               fit["c"] > 0.01, fit))
    res.results = {"telescoping_max_err": tel_err, "spreads": spreads,
                   "kernel_difference_fit": fit}

    rows = sorted([[row[3], row[0], row[1]] for row in sq_rows])
    res.plotdata["sq_ratios"] = (["ratio", "p", "s"], rows)
    res.figures["sq_ratios"] = {
        "title": "square-function / fractional-norm ratios",
        "xlabel": "family member", "ylabel": "ratio",
        "series": [{"label": f"p={p},s={s}", "style": "o-",
                    "x": list(range(len(family))),
                    "y": [r[3] for r in sq_rows
                          if r[0] == p and r[1] == s]}
                   for p, s in pairs]}
    return res


# -- experiment: hardy-sweep ---------------------------------------------------------

def _run_hardy_sweep(cfg: dict, jobs: int) -> RunResult:
    d = cfg["d"]
    res = RunResult()
    family = test_family(d=d, seed=cfg["seed"])[: cfg["n_family"]]
    s_values = cfg["s_values"] if isinstance(cfg["s_values"], list) \
        else [cfg["s_values"]]
    p_values = cfg["p_values"] if isinstance(cfg["p_values"], list) \
        else [cfg["p_values"]]

    jobs_list = [(op, float(s), float(p), f)
                 for op in ("euclidean", "dirichlet")
                 for s in s_values for p in p_values for f in family]

    def one(job):
        op, s, p, f = job
        rep = hardy_ratio(f, s, p, op, r_max=cfg["r_max"])
        return [op, s, p, f.label, rep.value, int(rep.diverged)]

    rows = _pmap(one, jobs_list, jobs)
    res.tables["hardy_ratios"] = (["operator", "s", "p", "function",
                                   "ratio", "diverged"], rows)
    bad = [r for r in rows
           if _hardy_window_ok(r[0], r[1], r[2], d)
           and (r[5] or not np.isfinite(r[4]))]
    res.invariants.append(_inv(
        "hardy-ratios-finite-in-window", len(bad) == 0,
        {"n_rows": len(rows), "offending": bad[:5]}))
    vals = np.array([r[4] for r in rows])
    spread = float(vals.max() / vals.min()) if len(vals) else float("nan")
    res.invariants.append(_inv("hardy-family-band", spread < 100.0,
                               {"spread": spread}))
    res.results = {"n_rows": len(rows), "spread": spread,
                   "max_ratio": float(vals.max()),
                   "min_ratio": float(vals.min())}
    pts = sorted([[r[1] + 0.001 * r[2], r[4]] for r in rows])
    res.plotdata["ratios"] = (["s_p_key", "ratio"], pts)
    res.figures["ratios"] = {
        "title": "Hardy ratios across (s, p) and the family",
        "xlabel": "s (offset by p/1000)", "ylabel": "ratio",
        "series": [{"label": op, "style": "o",
                    "x": [r[1] + 0.001 * r[2] for r in rows if r[0] == op],
                    "y": [r[4] for r in rows if r[0] == op]}
                   for op in ("euclidean", "dirichlet")]}
    return res


def _hardy_window_ok(op: str, s: float, p: float, d: int) -> bool:
    if s >= d / p:
        return False
    return op == "euclidean" or s < 1.0 + 1.0 / p


# -- experiment: equivalence-sweep ---------------------------------------------------

def _run_equivalence_sweep(cfg: dict, jobs: int) -> RunResult:
    d, p, s = cfg["d"], cfg["p"], cfg["s"]
    res = RunResult()
    if not (0 < s < min(1.0 + 1.0 / p, d / p)):
        raise ExtSobolevError(
            f"(p={p}, s={s}) is outside the equivalence window "
            f"s < min(1+1/p, d/p)")
    family = test_family(d=d, seed=cfg["seed"])[: cfg["n_family"]]
    vals = _pmap(lambda f: norm_equivalence_ratio(
        f, s, p, r_max=cfg["r_max"]).value, family, jobs)
    rows = [[f.label, v] for f, v in zip(family, vals)]
    res.tables["ratios"] = (["function", "ratio"], rows)
    spread = max(vals) / min(vals)
    res.invariants.append(_inv(
        "equivalence-ratios-finite",
        bool(np.all(np.isfinite(vals)) and min(vals) > 0),
        {"min": min(vals), "max": max(vals)}))
    res.invariants.append(_inv("equivalence-family-band", spread < 20.0,
                               {"spread": spread}))
    if p == 2.0 and s == 1.0:
        worst = max(abs(v - 1.0) for v in vals)
        res.invariants.append(_inv("exact-equality-at-p2-s1", worst < 1e-4,
                                   {"worst_rel": worst}))
    res.results = {"p": p, "s": s, "spread": spread, "ratios": vals}
    res.plotdata["ratios"] = (["index", "ratio"],
                              [[i, v] for i, v in enumerate(vals)])
    res.figures["ratios"] = {
        "title": f"whole-space / exterior norm ratio (p={p}, s={s})",
        "xlabel": "family member", "ylabel": "ratio",
        "series": [{"label": "ratio", "style": "o-",
                    "x": list(range(len(vals))), "y": vals}]}
    return res


# -- experiment: schur ---------------------------------------------------------------

def _run_schur(cfg: dict, jobs: int) -> RunResult:
    d, p, s, region = cfg["d"], cfg["p"], cfg["s"], cfg["region"]
    res = RunResult()
    weight = region_weight(region, p, s, d)
    kernel = region_kernel(region, s, d)
    if not weight.admissible:
        raise ExtSobolevError(
            f"region {region} weight window {weight.window} is empty "
            f"at (p={p}, s={s})")

    rep = schur_bound(kernel, weight, p, d, n0=cfg["n0"],
                      refinements=cfg["refinements"])
    lower = schur_lower_bound(kernel, p, d, n=cfg["n_lower"],
                              n_trials=cfg["n_trials"], seed=cfg["seed"])
    res.invariants.append(_inv("schur-sups-stabilize", rep.converged,
                               {"history": rep.history}))
    res.invariants.append(_inv(
        "schur-bound-dominates-lower-bound", rep.bound >= lower,
        {"bound": rep.bound, "lower": lower}))

    lo, hi = weight.window
    trends = {}
    for label, alpha in (("below", lo - 0.8 * (hi - lo) / 2 - 0.3),
                         ("above", hi + 0.8 * (hi - lo) / 2 + 0.3)):
        bad = WeightSpec(family=weight.family, alpha=alpha,
                         window=weight.window, admissible=True,
                         note="deliberately outside the window")
        trends[label] = schur_refinement_trend(
            kernel, bad, p, d, levels=cfg["levels"], n0=cfg["n0"] // 2)
    growing = {}
    for label, rows in trends.items():
        g0 = rows[-1]["C0"] / rows[0]["C0"]
        g1 = rows[-1]["C1"] / rows[0]["C1"]
        growing[label] = max(g0, g1)
    res.invariants.append(_inv(
        "schur-sup-grows-outside-window",
        all(g > 2.0 for g in growing.values()),
        {"growth_factors": growing}))

    res.results = {"region": region, "window": list(weight.window),
                   "alpha": weight.alpha, "report": rep.as_dict(),
                   "lower_bound": lower, "trends": trends}
    hist_rows = [[h["n"], h["C0"], h["C1"]] for h in rep.history]
    res.tables["refinement"] = (["n", "C0", "C1"], hist_rows)
    res.plotdata["refinement"] = (["n", "C0", "C1"], hist_rows)
    res.figures["refinement"] = {
        "title": f"Schur sups under refinement (region {region})",
        "xlabel": "grid points", "ylabel": "sup integral",
        "logx": True, "logy": True,
        "series": [{"label": "C0 (admissible)", "style": "o-",
                    "x": [h[0] for h in hist_rows],
                    "y": [h[1] for h in hist_rows]},
                   {"label": "C1 (admissible)", "style": "s-",
                    "x": [h[0] for h in hist_rows],
                    "y": [h[2] for h in hist_rows]}]
        + [{"label": f"C0/C1 max ({lbl} window)", "style": "^--",
            "x": [row["n"] for row in rows],
            "y": [max(row["C0"], row["C1"]) for row in rows]}
           for lbl, rows in trends.items()]}
    return res


# -- experiment: counterexample-71 ---------------------------------------------------

def _run_counterexample_71(cfg: dict, jobs: int) -> RunResult:
    d, p, s = cfg["d"], cfg["p"], cfg["s"]
    res = RunResult()
    deltas = 2.0 ** -np.arange(1, cfg["n_deltas"] + 1)
    main = prop71_run(d=d, p=p, s=s, delta_schedule=deltas,
                      t_smooth=cfg["t_smooth"])
    control = prop71_run(d=d, p=p, s=cfg["s_control"], delta_schedule=deltas,
                         t_smooth=cfg["t_smooth"])

    res.invariants.append(_inv(
        "weighted-partials-diverge", main["diverged"],
        {"slope": main["slope"]}))
    lo, hi = cfg["slope_lo"], cfg["slope_hi"]
    res.invariants.append(_inv(
        "divergence-rate-matches-exponent",
        lo <= main["slope"] <= hi,
        {"slope": main["slope"], "expected": main["expected_slope"],
         "window": [lo, hi]}))
    den_ok = (np.isfinite(main["denominator"])
              and main["denominator_error"] < 0.01 * main["denominator"])
    res.invariants.append(_inv(
        "unweighted-side-finite", den_ok,
        {"denominator": main["denominator"],
         "error": main["denominator_error"]}))
    res.invariants.append(_inv(
        "subcritical-control-converges", not control["diverged"],
        {"slope": control["slope"]}))

    res.results = {"main": {k: main[k] for k in
                            ("p", "s", "slope", "expected_slope", "diverged",
                             "denominator", "denominator_error")},
                   "control": {k: control[k] for k in
                               ("s", "slope", "diverged", "denominator")},
                   "linear_vanishing": main["linear_vanishing"]}
    rows = [[float(dl), float(v), float(w)]
            for dl, v, w in zip(main["deltas"], main["partials"],
                                control["partials"])]
    res.tables["partials"] = (["delta", f"partial_s{s}",
                               f"partial_s{cfg['s_control']}"], rows)
    res.plotdata["partials"] = (["delta", "partial_main", "partial_control"],
                                rows)
    res.figures["partials"] = {
        "title": "weighted partial integrals vs boundary cutoff",
        "xlabel": "delta", "ylabel": "partial integral",
        "logx": True, "logy": True,
        "series": [{"label": f"s={s} (divergent)", "style": "o-",
                    "x": [r[0] for r in rows], "y": [r[1] for r in rows]},
                   {"label": f"s={cfg['s_control']} (convergent)",
                    "style": "s-",
                    "x": [r[0] for r in rows], "y": [r[2] for r in rows]}]}
    return res


# -- experiment: counterexample-72 ---------------------------------------------------

def _run_counterexample_72(cfg: dict, jobs: int) -> RunResult:
    d, p = cfg["d"], cfg["p"]
    res = RunResult()
    schedule = default_schedule(cfg["n_lo"], cfg["n_hi"])
    entries = prop72_run(d=d, p=p, schedule=schedule)
    limit = prop72_limit_A(p)

    first, last = entries[0], entries[-1]
    res.invariants.append(_inv(
        "B-decreases-tenfold", last.B < first.B / 10.0,
        {"B_first": first.B, "B_last": last.B,
         "drop": first.B / last.B}))
    min_A = min(e.A for e in entries)
    res.invariants.append(_inv(
        "A-stays-above-half-limit", min_A > 0.5 * limit,
        {"min_A": min_A, "limit": limit}))
    final_ratio = last.A / last.B
    res.invariants.append(_inv(
        "final-ratio-exceeds-ten", final_ratio > 10.0,
        {"ratio": final_ratio}))
    riesz_ok = all(0.2 < e.A_riesz / e.A < 5.0 for e in entries)
    res.invariants.append(_inv(
        "gradient-riesz-comparable", riesz_ok,
        {"ratios": [e.A_riesz / e.A for e in entries]}))
    tail_ok = all(e.tail_fraction < 0.01
                  for e in entries if e.n >= cfg["tail_from_n"])
    res.invariants.append(_inv(
        "truncation-tail-negligible", tail_ok,
        {"tail_fractions": [e.tail_fraction for e in entries]}))

    # interpolation upper bound on one moderate entry: computed B^2 <= ||g|| ||Lap g||
    mid = entries[min(2, len(entries) - 1)]
    ib = interpolation_bound_check(mid.lam, mid.eps, mid.R)
    res.invariants.append(_inv("interpolation-upper-bound", ib["ok"], ib))

    res.results = {"p": p, "limit_A": limit, "final_ratio": final_ratio,
                   "B_drop": first.B / last.B,
                   "interpolation_check": ib,
                   "entries": [e.as_dict() for e in entries]}
    rows = [[e.n, e.lam, e.eps, e.R, e.A, e.B, e.A / e.B] for e in entries]
    res.tables["schedule"] = (["n", "lambda", "eps", "R", "A", "B", "A_over_B"],
                              rows)
    res.plotdata["schedule"] = (["n", "A", "B"],
                                [[e.n, e.A, e.B] for e in entries])
    res.figures["schedule"] = {
        "title": "weighted vs fractional norm along the schedule",
        "xlabel": "n", "ylabel": "norm", "logy": True,
        "series": [{"label": "A_n", "style": "o-",
                    "x": [e.n for e in entries], "y": [e.A for e in entries]},
                   {"label": "B_n", "style": "s-",
                    "x": [e.n for e in entries], "y": [e.B for e in entries]},
                   {"label": "A limit / 2", "style": "--",
                    "x": [entries[0].n, entries[-1].n],
                    "y": [0.5 * limit, 0.5 * limit]}]}
    return res


# -- registry ------------------------------------------------------------------------

@dataclass(frozen=True)
class Experiment:
    name: str
    statement: str
    defaults: dict
    run: Callable[[dict, int], RunResult]
    check: Optional[Callable[[dict], list]] = None


def _check_common(cfg: dict) -> list:
    errs = []
    if cfg.get("d", 3) < 3:
        errs.append("d must be >= 3")
    if "p" in cfg and not cfg["p"] > 1:
        errs.append("p must be > 1")
    if "n_family" in cfg and not (1 <= cfg["n_family"] <= 12):
        errs.append("n_family must be between 1 and 12")
    return errs


def _check_72(cfg: dict) -> list:
    errs = _check_common(cfg)
    if cfg["p"] <= cfg["d"]:
        errs.append("the divergence regime requires p > d")
    if not (4 < cfg["n_lo"] < cfg["n_hi"]):
        errs.append("need 4 < n_lo < n_hi so that R > 4 and eps <= 1/4")
    return errs


def _check_71(cfg: dict) -> list:
    errs = _check_common(cfg)
    if not (1 < cfg["p"] < cfg["d"] - 1):
        errs.append("need 1 < p < d - 1")
    if not cfg["s"] > 1 + 1 / cfg["p"]:
        errs.append("the divergent run needs s > 1 + 1/p")
    if not cfg["s_control"] < 1 + 1 / cfg["p"]:
        errs.append("the control run needs s_control < 1 + 1/p")
    return errs


EXPERIMENTS: dict[str, Experiment] = {}


def _register(exp: Experiment):
    EXPERIMENTS[exp.name] = exp


_register(Experiment(
    "heat-verify",
    "Two-sided Gaussian bounds with boundary-distance factors for the "
    "exterior Dirichlet heat kernel, and the pointwise ordering "
    "0 <= half-space <= exterior <= whole-space Gaussian.",
    {"d": 3, "n_samples": 200, "r_min": 1.05, "r_max": 4.0,
     "t_min": 0.05, "t_max": 4.0, "seed": 0},
    _run_heat_verify, _check_common))

_register(Experiment(
    "riesz-verify",
    "The negative fractional power (-Lap)^{-s/2} as a power-weighted time "
    "integral of the heat semigroup: whole-space values match the classical "
    "Riesz potential; exterior values are symmetric and obey the "
    "boundary-shape envelope.",
    {"d": 3, "s": 1.0, "n_whole": 6, "n_exterior": 4, "delta_min": 0.1,
     "r_max": 4.0, "seed": 0},
    _run_riesz_verify, _check_common))

_register(Experiment(
    "lp-verify",
    "Dyadic heat-semigroup frequency decomposition: exact telescoping of "
    "the projector symbols, square-function / fractional-norm equivalence "
    "over the fixed bump family, and Gaussian off-diagonal decay of the "
    "whole-space-minus-exterior projector kernel.",
    {"d": 3, "k": 1, "j_min": -6, "j_max": 8, "n_family": 12,
     "n_kernel_samples": 12, "seed": 0},
    _run_lp_verify, _check_common))

_register(Experiment(
    "hardy-sweep",
    "Boundary-weighted Hardy inequalities: the weighted norm "
    "||f/dist^s||_p is controlled by the fractional norm inside the "
    "admissible (s, p) windows, for the whole-space weight |x| and the "
    "exterior-domain weight dist(x, ball).",
    {"d": 3, "s_values": [0.5, 0.9], "p_values": [2.0, 4.0],
     "n_family": 3, "r_max": 64.0, "seed": 0},
    _run_hardy_sweep, _check_common))

_register(Experiment(
    "equivalence-sweep",
    "Comparability of the whole-space and exterior-domain fractional "
    "Sobolev norms for functions supported away from the obstacle, with "
    "exact equality at p = 2, s = 1.",
    {"d": 3, "p": 2.0, "s": 1.0, "n_family": 12, "r_max": 64.0, "seed": 0},
    _run_equivalence_sweep, _check_common))

_register(Experiment(
    "schur",
    "Weighted Schur bounds for the boundary-region kernels: sup integrals "
    "stabilize under refinement for weights inside the admissibility "
    "window, grow without bound outside it, and dominate a randomized "
    "operator-norm lower bound.",
    {"d": 3, "p": 2.0, "s": 1.0, "region": "IIa", "n0": 192,
     "refinements": 2, "levels": 3, "n_lower": 384, "n_trials": 100,
     "seed": 0},
    _run_schur, _check_common))

_register(Experiment(
    "counterexample-71",
    "Failure of the boundary Hardy inequality above the critical exponent "
    "s = 1 + 1/p: weighted partial integrals of a heat-smoothed bump "
    "diverge at the predicted rate delta^{-((s-1)p-1)} while the "
    "fractional-norm side stays finite; a subcritical exponent converges.",
    {"d": 3, "p": 1.5, "s": 1.9, "s_control": 1.2, "n_deltas": 12,
     "t_smooth": 1.0, "slope_lo": 0.25, "slope_hi": 0.45, "seed": 0},
    _run_counterexample_71, _check_71))

_register(Experiment(
    "counterexample-72",
    "Divergence of the weighted-to-fractional norm ratio for truncated "
    "low eigenmodes at p > d: A_n stays bounded below while B_n tends to "
    "zero along the schedule, so no Hardy-type bound can hold.",
    {"d": 3, "p": 4.0, "n_lo": 5, "n_hi": 40, "tail_from_n": 14, "seed": 0},
    _run_counterexample_72, _check_72))


# -- config parsing ------------------------------------------------------------------

def _parse_scalar(tok: str):
    t = tok.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [_parse_scalar(t) for t in text.split(",") if t.strip()]
    return _parse_scalar(text)


def _coerce(key: str, value, defaults: dict, where: str, errs: list):
    """Type-check one assignment against the experiment's defaults."""
    if key not in defaults:
        errs.append(f"{where}: unknown key {key!r} (known: "
                    f"{', '.join(sorted(defaults))})")
        return None
    ref = defaults[key]
    if isinstance(ref, list):
        vals = value if isinstance(value, list) else [value]
        out = []
        for v in vals:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                errs.append(f"{where}: {key} entries must be numbers, "
                            f"got {v!r}")
                return None
            out.append(float(v))
        return out
    if isinstance(ref, bool):
        if not isinstance(value, bool):
            errs.append(f"{where}: {key} must be true/false, got {value!r}")
            return None
        return value
    if isinstance(ref, int):
        if isinstance(value, bool) or not isinstance(value, int):
            errs.append(f"{where}: {key} must be an integer, got {value!r}")
            return None
        return value
    if isinstance(ref, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errs.append(f"{where}: {key} must be a number, got {value!r}")
            return None
        return float(value)
    return str(value)


def load_config(path: str, defaults: dict) -> tuple[dict, list]:
    """Parse a key=value config file; diagnostics carry line numbers."""
    cfg, errs = {}, []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        return {}, [f"{path}: cannot read config: {exc}"]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"{path}:{lineno}: expected key = value, got {raw!r}")
            continue
        key, _sep, val = line.partition("=")
        key = key.strip()
        if not key:
            errs.append(f"{path}:{lineno}: empty key")
            continue
        coerced = _coerce(key, _parse_value(val), defaults,
                          f"{path}:{lineno}", errs)
        if coerced is not None:
            cfg[key] = coerced
    return cfg, errs


def parse_overrides(pairs: list, defaults: dict) -> tuple[dict, list]:
    cfg, errs = {}, []
    for i, pair in enumerate(pairs, start=1):
        if "=" not in pair:
            errs.append(f"override {i} ({pair!r}): expected key=value")
            continue
        key, _sep, val = pair.partition("=")
        coerced = _coerce(key.strip(), _parse_value(val), defaults,
                          f"override {i}", errs)
        if coerced is not None:
            cfg[key.strip()] = coerced
    return cfg, errs


# -- output emission -----------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_outputs(out_dir: Path, exp: Experiment, cfg: dict,
                   result: RunResult, timings: dict, seed: int,
                   jobs: int) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []

    report = {
        "experiment": exp.name,
        "statement": exp.statement,
        "version": __version__,
        "config": _jsonable(cfg),
        "results": _jsonable(result.results),
        "invariants": result.invariants,
        "all_passed": all(i["passed"] for i in result.invariants),
    }
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report, sort_keys=True, indent=2)
                           + "\n", encoding="utf-8")
    files.append("report.json")

    tdir = out_dir / "tables"
    for stem, (cols, rows) in result.tables.items():
        tdir.mkdir(exist_ok=True)
        with open(tdir / f"{stem}.csv", "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        files.append(f"tables/{stem}.csv")

    pdir = out_dir / "plotdata"
    for stem, (cols, rows) in result.plotdata.items():
        pdir.mkdir(exist_ok=True)
        lines = ["# " + " ".join(cols)]
        lines += [" ".join(_fmt(v) for v in row) for row in rows]
        (pdir / f"{stem}.dat").write_text("\n".join(lines) + "\n",
                                          encoding="utf-8")
        files.append(f"plotdata/{stem}.dat")

    if result.figures:
        files += _write_figures(out_dir / "figures", result.figures)

    manifest = {
        "experiment": exp.name,
        "version": __version__,
        "config_hash": cache.cache_key(exp.name, _jsonable(cfg)),
        "seed": seed,
        "jobs": jobs,
        "files": sorted(files),
        "timings_seconds": timings,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n",
        encoding="utf-8")
    files.append("manifest.json")
    return files


def _write_figures(fig_dir: Path, specs: dict) -> list:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig_dir.mkdir(exist_ok=True)
    written = []
    for stem, spec in specs.items():
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for series in spec.get("series", []):
            y = np.asarray(series["y"], dtype=float)
            if spec.get("logy") and np.any(y <= 0):
                y = np.where(y > 0, y, np.nan)
            ax.plot(series["x"], y, series.get("style", "-"),
                    label=series.get("label"), markersize=4)
        if spec.get("logx"):
            ax.set_xscale("log")
        if spec.get("logy"):
            ax.set_yscale("log")
        ax.set_title(spec.get("title", stem))
        ax.set_xlabel(spec.get("xlabel", ""))
        ax.set_ylabel(spec.get("ylabel", ""))
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(fig_dir / f"{stem}.png", dpi=130)
        plt.close(fig)
        written.append(f"figures/{stem}.png")
    return written


# -- entry points --------------------------------------------------------------------

def cmd_list() -> int:
    width = max(len(name) for name in EXPERIMENTS)
    for name in sorted(EXPERIMENTS):
        exp = EXPERIMENTS[name]
        print(f"{name:<{width}}  {exp.statement}")
    return 0


def cmd_run(args) -> int:
    exp = EXPERIMENTS.get(args.experiment)
    if exp is None:
        print(f"unknown experiment {args.experiment!r}; "
              f"choose from: {', '.join(sorted(EXPERIMENTS))}",
              file=sys.stderr)
        return 2

    cfg = dict(exp.defaults)
    errs = []
    if args.config:
        file_cfg, file_errs = load_config(args.config, exp.defaults)
        errs += file_errs
        cfg.update(file_cfg)
    over_cfg, over_errs = parse_overrides(args.overrides, exp.defaults)
    errs += over_errs
    cfg.update(over_cfg)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if not errs and exp.check is not None:
        errs += [f"precondition: {msg}" for msg in exp.check(cfg)]
    if errs:
        for msg in errs:
            print(f"config error: {msg}", file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    result = exp.run(cfg, max(1, args.jobs))
    t_run = time.perf_counter() - t0

    out_dir = Path(args.out) if args.out else Path(f"out-{exp.name}")
    t1 = time.perf_counter()
    _write_outputs(out_dir, exp, cfg, result,
                   {"run": round(t_run, 3),
                    "emit": round(time.perf_counter() - t1, 3)},
                   seed=cfg.get("seed", 0), jobs=max(1, args.jobs))

    failed = [inv["name"] for inv in result.invariants if not inv["passed"]]
    for inv in result.invariants:
        status = "PASS" if inv["passed"] else "FAIL"
        print(f"[{status}] {inv['name']}")
    print(f"report written to {out_dir}")
    if failed:
        print(f"invariant failed: {failed[0]}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="extsobolev",
        description="Verification experiments for harmonic analysis on the "
                    "exterior of the unit ball.")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one experiment")
    runp.add_argument("experiment")
    runp.add_argument("overrides", nargs="*", metavar="key=value",
                      help="inline config overrides")
    runp.add_argument("--config", help="key=value config file")
    runp.add_argument("--out", help="output directory "
                                    "(default: out-<experiment>)")
    runp.add_argument("--jobs", type=int, default=1,
                      help="worker threads for independent points")
    runp.add_argument("--seed", type=int, default=None,
                      help="override the sampling seed")

    sub.add_parser("list", help="list experiments and their statements")

    args, extra = parser.parse_known_args(argv)
    if args.command == "list":
        if extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
        return cmd_list()
    # argparse stops filling the greedy positional once an option appears;
    # accept trailing key=value overrides wherever they occur
    for tok in extra:
        if tok.startswith("-") or "=" not in tok:
            parser.error(f"unrecognized argument: {tok}")
        args.overrides.append(tok)
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
