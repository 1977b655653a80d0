"""Exit criteria. Each test records one PASS/FAIL line, printed at the end of the run."""
import json
import math
import time

import numpy as np
import pytest

from bandcast import (
    BandlimitedModel,
    FitConfig,
    Signal,
    TimeWindow,
    analyze,
    brute_force_fit,
    design_matrix,
    fit,
    fit_highband,
    gram,
    objective,
    synthesize_many,
)
from bandcast.cli import main
from bandcast.solver import certify_positive_definite, conjugate_gradient, regularize
from bandcast.streaming_filter import FilterState, run_offline

from conftest import SMALL_CASE, LARGE_CASE, covering_window, small_case_signal, planted

ACCEPTANCE_LINES = []


def record(number, name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name}: {detail}")
    assert ok, detail


def rel(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300))


def test_c01_gram_identity():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        omega = float(rng.uniform(1e-3, 3.0))
        n = int(rng.integers(0, 13))
        m = int(rng.integers(1, 81))
        q = int(rng.integers(-100, 50))
        w = TimeWindow(q, q + m - 1)
        A = design_matrix(w, omega, n)
        worst = max(worst, float(np.max(np.abs(gram(w, omega, n).entries - A.T @ A))))
    elapsed = time.perf_counter() - start
    record(1, "Gram identity", worst <= 1e-12 and elapsed < 5.0,
           f"max |R - A^T A| = {worst:.2e} (tol 1e-12), {elapsed:.2f}s (limit 5s)")


def test_c02_positive_definite_unique_regime():
    rows = []
    ok = True
    for omega in (0.4, 1.0, math.pi / 2):
        for n in (4, 8, 15):
            for span in (2 * n + 1, 4 * n):
                for q in (-n, 3):
                    cert = certify_positive_definite(TimeWindow(q, q + span), omega, n)
                    ok &= cert.positive_definite
                    rows.append(cert.digits)
    f64 = sum(d == 16 for d in rows)
    record(2, "R positive definite in unique regime", ok,
           f"{len(rows)} instances factored; {f64} in float64, {len(rows) - f64} needed extended precision "
           f"(max {max(rows)} digits)")


def test_c03_oracle_equivalence():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(0, 9))
        m = int(rng.integers(1, 65))
        q = int(rng.integers(-60, 20))
        omega = float(rng.uniform(0.05, 3.1))
        sig = Signal(TimeWindow(q, q + m - 1), rng.standard_normal(m))
        cfg = FitConfig(omega, n, 1e-3)
        worst = max(worst, rel(fit(sig, cfg, warn=False).coefficients, brute_force_fit(sig, cfg)))
    elapsed = time.perf_counter() - start
    record(3, "fit vs brute-force oracle", worst <= 1e-8 and elapsed < 10.0,
           f"max relative difference {worst:.2e} (tol 1e-8), {elapsed:.2f}s (limit 10s)")


def test_c04_planted_recovery():
    rng = np.random.default_rng(4)
    worst_y = worst_r = 0.0
    cases = [(TimeWindow(-11, 11), 1.0, 5)]
    for _ in range(60):
        n = int(rng.integers(0, 9))
        omega = float(rng.uniform(0.3, 3.1))
        cases.append((covering_window(omega, n, int(rng.integers(1, 8)), int(rng.integers(1, 8))), omega, n))
    for w, omega, n in cases:
        y0 = rng.standard_normal(2 * n + 1)
        sig, _ = planted(w, omega, y0)
        res = fit(sig, FitConfig(omega, n, 0.0))
        assert res.unique_regime
        worst_y = max(worst_y, rel(res.coefficients, y0))
        worst_r = max(worst_r, res.residual_l2 / np.linalg.norm(sig.values))

    worst_f = 0.0
    for _ in range(60):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 2 * n + 2))
        omega = float(rng.uniform(0.2, 3.0))
        q = int(rng.integers(-20, 6))
        w = TimeWindow(q, q + m - 1)
        sig, _ = planted(w, omega, rng.standard_normal(2 * n + 1))
        cfg = FitConfig(omega, n, 0.0)
        res = fit(sig, cfg, warn=False)
        assert not res.unique_regime
        f_oracle = objective(sig, BandlimitedModel(omega, brute_force_fit(sig, cfg)))
        worst_f = max(worst_f, abs(objective(sig, res.model) - f_oracle) / (sig.values @ sig.values))
    ok = worst_y <= 1e-6 and worst_r <= 1e-8 and worst_f <= 1e-8
    record(4, "planted recovery", ok,
           f"unique: max rel coef error {worst_y:.1e} (tol 1e-6), max residual/|x| {worst_r:.1e} (tol 1e-8); "
           f"degenerate: max |F_fit - F_oracle|/|x|^2 {worst_f:.1e} (tol 1e-8)")


def test_c05_regularization_behaviour():
    sig = small_case_signal()
    omega, n = SMALL_CASE["omega"], SMALL_CASE["half_order"]
    res = fit(sig, FitConfig(omega, n, 1e-3))
    b = analyze(sig, omega, n)
    R = gram(sig.window, omega, n)
    y0, iters, converged = conjugate_gradient(R, b, tol=1e-10, max_iter=10 * (2 * n + 1))
    norm_eps = float(np.linalg.norm(res.coefficients))
    norm_0 = float(np.linalg.norm(y0))
    # Reported only: the normal-equation residual inequality depends on the solver environment.
    r_eps = float(np.linalg.norm(b - regularize(R, 1e-3) @ res.coefficients))
    r_0 = float(np.linalg.norm(b - R.entries @ y0))
    ok = (res.solver_info["method"] == "direct_factorization" and norm_eps <= norm_0
          and res.normal_residual <= 1e-8 * np.linalg.norm(b))
    record(5, "regularization, omega=0.4 N=15 case", ok,
           f"|y_eps|={norm_eps:.3e} <= |y_0,CG|={norm_0:.3e} (CG {iters} it, converged={converged}); "
           f"normal residual {res.normal_residual:.1e} <= {1e-8 * np.linalg.norm(b):.1e}; "
           f"reported: |Q*x - R_eps y_eps|={r_eps:.1e} vs |Q*x - R y_0|={r_0:.1e}")


def _cli_case(tmp_path, params, seed, horizon):
    inp = tmp_path / f"x{seed}.csv"
    out = tmp_path / f"o{seed}.csv"
    summ = tmp_path / f"s{seed}.json"
    assert main(["synth", "--from", str(params["q"]), "--to", str(params["s"]), "--sinusoid", "1,0.11,0.2",
                 "--sinusoid", "0.6,0.37,1.0", "--sinusoid", "0.3,0.9", "--noise", "0.05", "--seed", str(seed),
                 "--output", str(inp)]) == 0
    start = time.perf_counter()
    rc = main(["fit", "--input", str(inp), "--omega", repr(params["omega"]), "--half-order",
               str(params["half_order"]), "--epsilon", repr(params["epsilon"]), "--horizon", str(horizon),
               "--output", str(out), "--summary", str(summ)])
    elapsed = time.perf_counter() - start
    return rc, elapsed, out, summ


def test_c06_large_case_performance(tmp_path):
    rc, elapsed, _, summ = _cli_case(tmp_path, LARGE_CASE, 2, 200)
    gram_time = json.loads(summ.read_text())["timing"]["fit"] if rc == 0 else float("nan")
    record(6, "large-case cmd_fit", rc == 0 and elapsed < 10.0,
           f"N=200, 801 samples, eps=0.002: exit {rc}, {elapsed:.2f}s end to end (fit {gram_time:.2f}s, limit 10s)")


def test_c07_parseval_energy():
    rng = np.random.default_rng(7)
    worst = 0.0
    for omega in (0.5, 1.5):
        for _ in range(3):
            n = int(rng.integers(0, 7))
            model = BandlimitedModel(omega, rng.standard_normal(2 * n + 1))
            T = int(1e5 / omega)
            x = synthesize_many(model, np.arange(-T, T + 1))
            expected = omega / math.pi * float(model.coefficients @ model.coefficients)
            worst = max(worst, abs(float(x @ x) - expected) / expected)
    record(7, "Parseval energy", worst <= 1e-2, f"max relative energy gap {worst:.2e} at T=1e5/omega (tol 1e-2)")


def test_c08_causality_fuzz():
    rng = np.random.default_rng(8)
    changed = 0
    for i in range(20):
        m = int(rng.integers(10, 40))
        n = int(rng.integers(1, 5))
        omega = float(rng.uniform(0.3, 3.0))
        mode = "sliding" if i % 2 else "expanding"
        x = rng.standard_normal(m)
        cut = int(rng.integers(0, m - 1))
        y = x.copy()
        y[cut + 1:] += rng.standard_normal(m - cut - 1) * 5
        template = FilterState(FitConfig(omega, n), horizon=3, mode=mode, width=int(rng.integers(3, 15)))
        q = int(rng.integers(-30, 10))
        a = run_offline(Signal(TimeWindow(q, q + m - 1), x), template)
        b = run_offline(Signal(TimeWindow(q, q + m - 1), y), template)
        for oa, ob in zip(a[:cut + 1], b[:cut + 1]):
            if oa.smoothed_now != ob.smoothed_now or not np.array_equal(oa.forecasts, ob.forecasts):
                changed += 1
    record(8, "causality fuzz", changed == 0, f"20 streams, {changed} outputs at or before the cut changed (bitwise)")


def test_c09_highband_involution():
    rng = np.random.default_rng(9)
    ok = True
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(0, 9))
        omega = float(rng.uniform(0.2, 3.0))
        q = int(rng.integers(-40, 10))
        m = int(rng.integers(2 * n + 2, 70))
        sig = Signal(TimeWindow(q, q + m - 1), rng.standard_normal(m))
        cfg = FitConfig(omega, n)
        high = fit_highband(sig, cfg)
        low = fit(sig.modulated(), cfg)
        sign = np.where(sig.times() % 2 == 0, 1.0, -1.0)
        ok &= np.array_equal(high.fitted_values, sign * low.fitted_values)
        ok &= np.array_equal(high.coefficients, low.coefficients)
        worst = max(worst, abs(high.residual_l2 - low.residual_l2))
    ok &= worst <= 1e-12
    record(9, "high-band involution", ok, f"20 cases bitwise equal traces; max residual gap {worst:.1e} (tol 1e-12)")


def test_c10_reference_runs(tmp_path):
    details = []
    ok = True
    for label, params, seed, horizon in (("small case", SMALL_CASE, 1, 15), ("large case", LARGE_CASE, 2, 200)):
        rc, elapsed, out, summ = _cli_case(tmp_path, params, seed, horizon)
        ok &= rc == 0
        if rc != 0:
            details.append(f"{label}: exit {rc}")
            continue
        lines = out.read_text().splitlines()
        flagged = sum(line.endswith(",1") for line in lines[1:])
        summary = json.loads(summ.read_text())
        finite = all(math.isfinite(v) for v in _numbers(summary))
        ok &= flagged == horizon and finite and summary["unique_regime"]
        details.append(f"{label}: {flagged} forecast rows, finite summary={finite}, "
                       f"unique={summary['unique_regime']}, residual {summary['residual_l2']:.3g}")
    record(10, "reference parameter runs via CLI", ok, "; ".join(details))


def _numbers(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _numbers(v)
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        yield float(obj)
