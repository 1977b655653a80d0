"""Optimal band-limited approximation of a sample window, and its extrapolation."""
from __future__ import annotations

import math
import warnings

import numpy as np

from .signal_model import (
    BandcastError,
    BandlimitedModel,
    DegenerateRegimeWarning,
    FitConfig,
    FitResult,
    Signal,
    TimeWindow,
    alternating_sign,
    is_unique_regime,
)
from .sinc_ops import _accumulate_columns, analyze, design_matrix, gram_from_table, synthesize_many
from .solver import regularize, solve_spd


class SingularSystem(BandcastError, ArithmeticError):
    """Gaussian elimination met a pivot column with no usable entry."""


def _warn_degenerate(window: TimeWindow, half_order: int) -> None:
    warnings.warn(
        f"window [{window.q}, {window.s}] has s-q={window.s - window.q} < 2N+1={2 * half_order + 1}; "
        "minimizers are not unique and the returned model is one representative",
        DegenerateRegimeWarning,
        stacklevel=3,
    )


def fit(signal: Signal, config: FitConfig, method: str = "auto", warn: bool = True) -> FitResult:
    """Fit the band-limited model minimizing the squared error on the window.

    Solves ``(R + epsilon*I) y = Q*x``. With ``epsilon == 0`` outside the
    unique regime R is singular by construction, so the solve goes straight
    to conjugate gradient from zero, which lands on the minimum-norm
    minimizer. Raises :class:`~bandcast.solver.NotPositiveDefinite` when the
    solver cannot reach tolerance.
    """
    window = signal.window
    omega, n = config.omega, config.half_order
    unique = is_unique_regime(window, n)
    if not unique and warn:
        _warn_degenerate(window, n)

    table = design_matrix(window, omega, n)
    b = analyze(signal, omega, n, table=table)
    M = regularize(gram_from_table(table), config.epsilon)

    if method == "auto" and not unique and config.epsilon == 0.0:
        method = "cg"
    if not unique:
        tie_break = "regularized minimizer" if config.epsilon > 0 else "minimum-norm (CG from zero)"
    else:
        tie_break = "unique"

    y, report = solve_spd(M, b, tol=config.solver_tol, max_iter=config.max_iter, method=method)
    model = BandlimitedModel(omega, y)
    fitted = _accumulate_columns(table, y)
    info = report.as_dict()
    info["tie_break"] = tie_break
    return FitResult(
        model=model,
        window=window,
        fitted_values=fitted,
        residual_l2=float(np.linalg.norm(fitted - signal.values)),
        normal_residual=float(np.linalg.norm(M @ y - b)),
        unique_regime=unique,
        solver_info=info,
    )


def forecast(result: FitResult, horizon: int) -> np.ndarray:
    """Model values at ``s+1, ..., s+horizon``.

    Outside the unique regime the values are those of one minimizer out of
    many; check ``result.unique_regime`` before trusting them.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    times = np.arange(result.window.s + 1, result.window.s + horizon + 1)
    values = synthesize_many(result.model, times)
    if result.highband:
        values = alternating_sign(times) * values
    return values


def forecast_times(result: FitResult, horizon: int) -> np.ndarray:
    return np.arange(result.window.s + 1, result.window.s + horizon + 1)


def objective(signal: Signal, model: BandlimitedModel) -> float:
    """``sum_{t=q}^{s} (xhat(t) - x(t))**2``."""
    d = synthesize_many(model, signal.times()) - signal.values
    return float(d @ d)


def objective_regularized(signal: Signal, model: BandlimitedModel, epsilon: float) -> float:
    """Squared error plus ``epsilon**2 * ||y||**2``.

    Its minimizer solves ``(R + epsilon**2 I) y = Q*x``; note the square,
    unlike the ``R + epsilon*I`` shift used by :func:`fit`.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    y = model.coefficients
    return objective(signal, model) + epsilon**2 * float(y @ y)


def _gauss_solve(M: list[list[float]], rhs: list[float]) -> list[float]:
    # Textbook elimination with partial pivoting, in plain Python floats.
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    scale = max((abs(v) for row in M for v in row), default=0.0)
    if scale == 0.0:
        raise SingularSystem("zero matrix")
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0.0:
            raise SingularSystem(f"no nonzero pivot in column {col}")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f != 0.0:
                row_r, row_c = a[r], a[col]
                for c in range(col, n + 1):
                    row_r[c] -= f * row_c[c]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        acc = a[i][n]
        for j in range(i + 1, n):
            acc -= a[i][j] * x[j]
        x[i] = acc / a[i][i]
    return x


def brute_force_fit(signal: Signal, config: FitConfig) -> np.ndarray:
    """Independent reference solve of the same regularized least-squares problem.

    Sums the normal equations over descending times in plain Python and
    solves them by Gaussian elimination with partial pivoting. When the
    window has fewer samples than unknowns it solves the equivalent
    sample-space system ``(A A^T + epsilon*I) z = x`` and returns
    ``y = A^T z`` (the minimum-norm minimizer when ``epsilon == 0``).
    Only meant for ``2N + 1 <= 64``.
    """
    n_coef = config.dimension
    if n_coef > 64:
        raise ValueError(f"brute_force_fit is limited to 2N+1 <= 64, got {n_coef}")
    A = design_matrix(signal.window, config.omega, config.half_order).tolist()
    x = signal.values.tolist()
    m = len(x)
    eps = config.epsilon

    if m >= n_coef:
        normal = [[0.0] * n_coef for _ in range(n_coef)]
        rhs = [0.0] * n_coef
        for i in range(m - 1, -1, -1):
            row = A[i]
            for k in range(n_coef):
                rk = row[k]
                rhs[k] += rk * x[i]
                nk = normal[k]
                for j in range(n_coef):
                    nk[j] += rk * row[j]
        for k in range(n_coef):
            normal[k][k] += eps
        return np.array(_gauss_solve(normal, rhs))

    dual = [[0.0] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            acc = 0.0
            for k in range(n_coef - 1, -1, -1):
                acc += A[i][k] * A[j][k]
            dual[i][j] = acc
        dual[i][i] += eps
    z = _gauss_solve(dual, x)
    return np.array([math.fsum(A[i][k] * z[i] for i in range(m)) for k in range(n_coef)])


def fit_highband(signal: Signal, config: FitConfig, method: str = "auto", warn: bool = True) -> FitResult:
    """Fit a process whose spectrum sits on ``[-pi, -pi+omega] U [pi-omega, pi]``.

    Modulates by ``(-1)**t``, fits the low band, and modulates the trace back.
    The stored model is the low-band model of the modulated signal;
    :func:`forecast` re-applies the modulation because ``highband`` is set.
    """
    low = fit(signal.modulated(), config, method=method, warn=warn)
    sign = alternating_sign(signal.times())
    return FitResult(
        model=low.model,
        window=low.window,
        fitted_values=sign * low.fitted_values,
        residual_l2=low.residual_l2,
        normal_residual=low.normal_residual,
        unique_regime=low.unique_regime,
        solver_info=dict(low.solver_info),
        highband=True,
    )


def reconstruct(result: FitResult, times) -> np.ndarray:
    """Evaluate the fitted process (low- or high-band) at arbitrary integer times."""
    times = np.asarray(times, dtype=np.int64)
    values = synthesize_many(result.model, times)
    if result.highband:
        values = alternating_sign(times) * values
    return values
