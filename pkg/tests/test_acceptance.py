"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``CRITERION k: PASS|FAIL`` line with the measured
numbers and then asserts the criterion as stated.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from levyarea.analysis import (c_irr, exp_moment_check, fit_scaling, independence_test,
                               ks_gaussian_test, markov_tail_check, second_moment_singular_coefficient)
from levyarea.checks import fn_sweep, hyp2f1_connection_sweep, hyp2f1_oracle_sweep, ipm_sweep
from levyarea.cli import main
from levyarea.diagrams import bilinear_moment_isserlis, moments_by_series, moments_from_cumulants, wick_moment
from levyarea.kernels import ModelParams
from levyarea.quadrature import MAX_NODES, connected_moment_trace
from levyarea.simulate import DEFAULT_SEED, TimeGrid, levy_area, overlap_covariance, sample_paths

ALPHA = 0.2


def report(capsys, k, passed, detail):
    with capsys.disabled():
        print(f"\nCRITERION {k}: {'PASS' if passed else 'FAIL'} | {detail}")


@pytest.fixture(scope="module")
def mc_ensemble():
    """alpha = 0.2, eta = 0.01, t = 1, 2e4 paths, shared by criteria 5 and 7."""
    start = time.perf_counter()
    e = sample_paths(ModelParams(ALPHA, 0.01), TimeGrid.uniform(1.0, 0.001), 20_000, seed=DEFAULT_SEED,
                     workers=os.cpu_count() or 1)
    return e, time.perf_counter() - start


def test_criterion_1_hypergeometric(capsys):
    start = time.perf_counter()
    oracle = hyp2f1_oracle_sweep(500, seed=1)
    conn = hyp2f1_connection_sweep(200, seed=2)
    elapsed = time.perf_counter() - start
    ok = oracle["max_rel_error"] <= 1e-8 and conn["max_rel_error"] <= 1e-9 and elapsed < 10
    report(capsys, 1, ok, f"oracle max rel {oracle['max_rel_error']:.2e} (<= 1e-8), connection max rel "
                          f"{conn['max_rel_error']:.2e} (<= 1e-9), {elapsed:.1f} s (< 10 s)")
    assert ok


def test_criterion_2_closed_form_integrals(capsys):
    start = time.perf_counter()
    minus = ipm_sweep("minus", 100, seed=3)
    plus = ipm_sweep("plus", 100, seed=3)
    elapsed = time.perf_counter() - start
    ok = minus["max_rel_error"] <= 1e-7 and plus["max_rel_error"] <= 1e-7 and elapsed < 30
    report(capsys, 2, ok, f"I- max rel {minus['max_rel_error']:.2e}, I+ max rel {plus['max_rel_error']:.2e} "
                          f"(<= 1e-7), {elapsed:.1f} s (< 30 s)")
    assert ok


def test_criterion_3_divergence_rate(capsys):
    start = time.perf_counter()
    etas = [0.04, 0.02, 0.01, 0.005]
    pairs = [(e, connected_moment_trace(ModelParams(ALPHA, e), 1.0, 1)) for e in etas]
    nodes = max(8 * max(8, math.ceil(1.0 / e)) for e in etas)
    # exponent and amplitude both fitted: value = R + S eta^p
    free = fit_scaling(pairs)
    # exponent imposed, for reference
    fixed = fit_scaling(pairs, exponent=4 * ALPHA - 1)
    elapsed = time.perf_counter() - start
    target = c_irr(1, ALPHA) * 1.0
    exp_ok = abs(free.exponent - (4 * ALPHA - 1)) <= 0.05
    coef_ok = abs(free.coefficient - target) <= 0.05 * target
    ok = exp_ok and coef_ok and elapsed < 120 and nodes <= MAX_NODES
    report(capsys, 3, ok, f"fitted exponent {free.exponent:.4f} (target -0.2 +- 0.05), fitted coefficient "
                          f"{free.coefficient:.4f} vs c_irr t = {target:.4f} (5%); with the exponent fixed "
                          f"the coefficient is {fixed.coefficient:.4f} and the direct kernel constant is "
                          f"{second_moment_singular_coefficient(ALPHA):.4f}; {elapsed:.1f} s, {nodes} nodes")
    assert ok


def test_criterion_4_fourth_connected_moment(capsys):
    start = time.perf_counter()
    etas = [0.04, 0.02, 0.01]
    phi = [connected_moment_trace(ModelParams(ALPHA, e), 1.0, 2) for e in etas]
    diffs = np.abs(np.diff(phi))
    # each difference |phi(eta) - phi(eta/2)| is attributed to the larger eta
    slope = float(np.polyfit(np.log(etas[:-1]), np.log(diffs), 1)[0])
    expected = min(2 * ALPHA, 8 * ALPHA - 1)
    elapsed = time.perf_counter() - start
    ok = abs(slope - expected) <= 0.15 and elapsed < 300
    report(capsys, 4, ok, f"phi_4 = {', '.join(f'{v:.5f}' for v in phi)}; difference slope {slope:.4f} "
                          f"(target {expected} +- 0.15); {elapsed:.1f} s")
    assert ok


def test_criterion_5_gaussian_moment_pattern(capsys, mc_ensemble):
    e, setup = mc_ensemble
    start = time.perf_counter()
    a = levy_area(e, 0.0, 1.0).value
    m2 = float(np.mean(a ** 2))
    m4 = float(np.mean(a ** 4))
    ratio = m4 / m2 ** 2
    p = ModelParams(ALPHA, 0.01)
    phi2 = connected_moment_trace(p, 1.0, 1)
    phi4 = connected_moment_trace(p, 1.0, 2)
    exact = 3 + 6 * phi4 / phi2 ** 2
    elapsed = setup + time.perf_counter() - start
    ok = abs(ratio - 3) <= 0.3 and elapsed < 120
    report(capsys, 5, ok, f"m4/m2^2 = {ratio:.4f} (target 3 +- 10%); exact value from traces {exact:.4f}; "
                          f"n = {e.n_paths}, {elapsed:.1f} s")
    assert ok


def test_criterion_6_clt(capsys):
    start = time.perf_counter()
    n = 2000
    e = sample_paths(ModelParams(ALPHA, 0.01), TimeGrid.uniform(1.5, 0.001), n, seed=DEFAULT_SEED,
                     workers=os.cpu_count() or 1)
    area = levy_area(e, 0.0, 1.0)
    var = c_irr(1, ALPHA) * 1.0
    ks = ks_gaussian_test(area.rescaled, var)
    incs = [(c, k / 4, (k + 1) / 4) for c in (1, 2) for k in range(4)]
    ind = independence_test(e, area, incs)
    cov = overlap_covariance(e, 0.0, 1.0, 0.5, 1.5)
    target = c_irr(1, ALPHA) * 0.5
    cov_ok = abs(cov - target) <= 0.15 * target
    elapsed = time.perf_counter() - start
    ok = ks.passed and ind.passed and cov_ok and elapsed < 180
    report(capsys, 6, ok, f"KS {ks.statistic:.4f} vs {ks.threshold:.4f} ({'pass' if ks.passed else 'fail'}; "
                          f"sample var {np.var(area.rescaled):.4f} vs c_irr {var:.4f}); max |corr| "
                          f"{ind.statistic:.4f} vs {ind.threshold:.4f} ({'pass' if ind.passed else 'fail'}); "
                          f"overlap cov {cov:.4f} vs {target:.4f} +- 15% ({'pass' if cov_ok else 'fail'}); "
                          f"{elapsed:.1f} s")
    assert ok


def test_criterion_7_exponential_moment(capsys, mc_ensemble):
    e, setup = mc_ensemble
    start = time.perf_counter()
    x = levy_area(e, 0.0, 1.0).rescaled
    rep = exp_moment_check(x, [0.5, 1.0, 2.0], 1.0, ALPHA, 0.01, c0=2.0)
    tail = markov_tail_check(x, 1.0, ALPHA, levels=(2.0, 3.0), c0=2.0)
    elapsed = setup + time.perf_counter() - start
    ok = rep.passed and tail.passed and elapsed < 120
    ratios = ", ".join(f"{k}: {v:.3f}" for k, v in rep.details["ratios"].items())
    tails = ", ".join(f"{k}: {v:.3f}" for k, v in tail.details["ratios"].items())
    report(capsys, 7, ok, f"E[exp] / bound = {{{ratios}}} (<= 1); tail / bound = {{{tails}}} (<= 1); "
                          f"{elapsed:.1f} s")
    assert ok


def test_criterion_8_combinatorial_oracles(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 7))
        g1, g2 = rng.normal(size=(2, m, m))
        k, kp = g1 @ g1.T / m, g2 @ g2.T / m
        for N in (1, 2, 3):
            a = wick_moment(k, kp, N)
            b = bilinear_moment_isserlis(k, kp, N)
            worst = max(worst, abs(a - b) / abs(b))
    worst_rt = 0.0
    for _ in range(20):
        kappa = {2 * j: float(v) for j, v in enumerate(rng.normal(size=4), start=1)}
        series = moments_by_series(kappa, 8)
        for order in (2, 4, 6, 8):
            m = moments_from_cumulants(kappa, order)
            worst_rt = max(worst_rt, abs(m - series[order]) / max(abs(series[order]), 1e-300))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and worst_rt <= 1e-10 and elapsed < 10
    report(capsys, 8, ok, f"Wick vs Isserlis max rel {worst:.2e}; cumulant round trip max rel {worst_rt:.2e} "
                          f"(<= 1e-10); {elapsed:.1f} s")
    assert ok


def test_criterion_9_appendix_integral(capsys):
    start = time.perf_counter()
    res = fn_sweep(50, seed=4)
    elapsed = time.perf_counter() - start
    ok = res["max_rel_error"] <= 1e-6 and elapsed < 30
    report(capsys, 9, ok, f"F_n max rel {res['max_rel_error']:.2e} (<= 1e-6); {elapsed:.1f} s")
    assert ok


DETERMINISM_RUNS = [
    ["hyp2f1-check", "--set", "n_cases=40", "--set", "n_connection=20"],
    ["connected-moment", "--set", "N=2"],
    ["simulate", "--n-paths", "3000"],
    ["clt-test"],
    ["independence-test", "--set", "overlap=[0, 1, 0.5, 1.5]"],
    ["exp-moment", "--n-paths", "4000"],
]


def test_criterion_10_determinism(capsys, tmp_path):
    budgets = sorted({1, 2, os.cpu_count() or 1})
    mismatches = []
    for args in DETERMINISM_RUNS:
        bodies = []
        for w in budgets:
            out = tmp_path / f"{args[0]}_{w}.json"
            code = main(args + ["--workers", str(w), "--output", str(out)])
            assert code in (0, 2)
            doc = json.loads(out.read_text())
            doc["config"].pop("output")
            bodies.append(json.dumps(doc, sort_keys=True).encode())
        if len(set(bodies)) != 1:
            mismatches.append(args[0])
    capsys.readouterr()
    ok = not mismatches
    report(capsys, 10, ok, f"{len(DETERMINISM_RUNS)} experiments x worker budgets {budgets}: "
                           f"{'byte-identical' if ok else 'differ: ' + ', '.join(mismatches)}")
    assert ok
