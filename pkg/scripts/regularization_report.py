"""Sweep epsilon on the omega=0.4, N=15, [-25, 15] configuration.

For each shift prints the coefficient norm, in-window residual, the
normal-equation residual, and the forecast error; the last row is plain CG
on the unshifted system.
"""
import argparse

import numpy as np

from bandcast import (BandlimitedModel, FitConfig, Signal, TimeWindow, analyze, fit, forecast, gram,
                      synthesize_many)
from bandcast.solver import conjugate_gradient


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--horizon", type=int, default=20)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    omega, n = 0.4, 15
    window = TimeWindow(-25, 15)
    t_all = np.arange(window.q, window.s + args.horizon + 1)
    clean = np.cos(0.15 * t_all + 0.3) + 0.5 * np.cos(0.31 * t_all)
    m = window.sample_count
    sig = Signal(window, clean[:m] + 0.1 * rng.standard_normal(m))
    future = clean[m:]

    print(f"{'epsilon':>10} {'|y|':>11} {'residual':>10} {'normal res':>11} {'fc rms':>10}")
    for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8):
        res = fit(sig, FitConfig(omega, n, eps))
        err = forecast(res, args.horizon) - future
        print(f"{eps:>10.0e} {np.linalg.norm(res.coefficients):>11.4g} {res.residual_l2:>10.4g} "
              f"{res.normal_residual:>11.2e} {np.sqrt(np.mean(err ** 2)):>10.4g}")

    b = analyze(sig, omega, n)
    R = gram(window, omega, n)
    y, iters, ok = conjugate_gradient(R, b, tol=1e-10, max_iter=10 * (2 * n + 1))
    model = BandlimitedModel(omega, y)
    fc0 = synthesize_many(model, np.arange(window.s + 1, window.s + args.horizon + 1))
    inside = synthesize_many(model, window.times())
    err = fc0 - future
    print(f"{'0 (CG)':>10} {np.linalg.norm(y):>11.4g} {np.linalg.norm(inside - sig.values):>10.4g} "
          f"{np.linalg.norm(R.entries @ y - b):>11.2e} {np.sqrt(np.mean(err ** 2)):>10.4g}"
          f"   ({iters} iterations, converged={ok})")


if __name__ == "__main__":
    main()
