"""Solvers for the shifted normal equations ``(R + eps*I) y = b``.

R is positive definite in the unique regime but its spectrum reaches far
below float64 resolution whenever the time-bandwidth product of the window
is small, so every solve carries diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg

from .signal_model import BandcastError, TimeWindow
from .sinc_ops import GramMatrix, gram_extended

DIRECT = "direct_factorization"
CG = "conjugate_gradient"


class NotPositiveDefinite(BandcastError, ArithmeticError):
    """Factorization failed and conjugate gradient did not reach tolerance.

    Usually means epsilon is too small for this (omega, N, window).
    """


@dataclass(frozen=True)
class SolveReport:
    method: str
    iterations: int
    achieved_residual: float
    condition_estimate: float
    lambda_max: float = float("nan")
    lambda_min: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "iterations": self.iterations,
            "achieved_residual": self.achieved_residual,
            "condition_estimate": self.condition_estimate,
            "lambda_max": self.lambda_max,
            "lambda_min": self.lambda_min,
        }


def _entries(M) -> np.ndarray:
    return M.entries if isinstance(M, GramMatrix) else np.asarray(M, dtype=np.float64)


def regularize(R, epsilon: float) -> np.ndarray:
    """Return ``R + epsilon*I`` as a new array; off-diagonal entries are untouched."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    M = np.array(_entries(R), dtype=np.float64, copy=True)
    idx = np.arange(M.shape[0])
    M[idx, idx] += epsilon
    return M


def _power_iteration(matvec, n: int, iters: int, rtol: float = 1e-15) -> float:
    """Rayleigh-quotient estimate of the dominant eigenvalue.

    Stops early once the quotient moves by less than ``rtol`` (relative) for
    ``_STALL`` consecutive steps; clustered spectra need many steps.
    """
    v = np.cos(np.arange(1, n + 1) * 1.2345) + 1.0 / math.sqrt(n)
    v /= np.linalg.norm(v)
    lam = float(v @ matvec(v))
    stalled = 0
    for _ in range(max(1, iters)):
        w = matvec(v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        new = float(v @ matvec(v))
        if abs(new - lam) <= rtol * abs(new):
            stalled += 1
            if stalled >= _STALL:
                return new
        else:
            stalled = 0
        lam = new
    return lam


_STALL = 5


def condition_estimate(M, iters: int = 2000) -> tuple[float, float]:
    """Power-iteration estimates ``(lambda_max, lambda_min)`` of a symmetric matrix.

    ``lambda_min`` comes from power iteration on ``lambda_max*I - M``, so it
    cannot resolve eigenvalues much below ``lambda_max * 1e-16``, and on a
    spectrum clustered near zero it converges slowly from above. These are
    estimates, not bounds.
    """
    A = _entries(M)
    n = A.shape[0]
    lam_max = _power_iteration(lambda v: A @ v, n, iters)
    shifted = _power_iteration(lambda v: lam_max * v - A @ v, n, iters)
    return lam_max, lam_max - shifted


def _condition_number(lam_max: float, lam_min: float) -> float:
    floor = max(abs(lam_max), 1e-300) * np.finfo(float).eps
    return abs(lam_max) / max(lam_min, floor)


def conjugate_gradient(M, b, tol: float = 1e-10, max_iter: int = 1000, x0=None):
    """Plain CG on a symmetric matrix; returns ``(x, iterations, converged)``.

    Stops when ``||M x - b|| <= tol * ||b||``. Started from zero, the iterates
    stay in the range of ``M`` (the minimum-norm solution for consistent
    singular systems).
    """
    A = _entries(M)
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0, True
    r = b - A @ x
    p = r.copy()
    rr = r @ r
    for it in range(1, max_iter + 1):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0.0:
            return x, it - 1, False
        alpha = rr / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = r @ r
        if math.sqrt(rr_new) <= tol * bnorm:
            # Confirm against the true residual; recursion drifts on ill-conditioned M.
            if np.linalg.norm(A @ x - b) <= tol * bnorm:
                return x, it, True
            r = b - A @ x
            rr_new = r @ r
            p = r.copy()
            rr = rr_new
            continue
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, max_iter, bool(np.linalg.norm(A @ x - b) <= tol * bnorm)


def solve_spd(M, b, tol: float = 1e-10, max_iter: int | None = None, method: str = "auto",
              power_iters: int = 100):
    """Solve ``M y = b`` for symmetric ``M``; returns ``(y, SolveReport)``.

    ``method="auto"`` tries a Cholesky factorization and falls back to CG
    when a pivot is not positive; ``"direct"`` and ``"cg"`` force one route.
    Raises :class:`NotPositiveDefinite` only when CG misses ``tol`` within
    ``max_iter`` steps (or when ``"direct"`` is forced and fails).
    """
    A = _entries(M)
    b = np.asarray(b, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError(f"shape mismatch: M {A.shape}, b {b.shape}")
    if max_iter is None:
        max_iter = 10 * n
    if method not in ("auto", "direct", "cg"):
        raise ValueError(f"unknown method {method!r}")

    lam_max, lam_min = condition_estimate(A, power_iters)
    cond = _condition_number(lam_max, lam_min)

    if method in ("auto", "direct"):
        try:
            factor = scipy.linalg.cho_factor(A, lower=True, check_finite=True)
        except np.linalg.LinAlgError:
            if method == "direct":
                raise NotPositiveDefinite("Cholesky factorization hit a non-positive pivot")
        else:
            y = scipy.linalg.cho_solve(factor, b)
            res = float(np.linalg.norm(A @ y - b))
            return y, SolveReport(DIRECT, 0, res, cond, lam_max, lam_min)

    y, iters, ok = conjugate_gradient(A, b, tol=tol, max_iter=max_iter)
    res = float(np.linalg.norm(A @ y - b))
    if not ok:
        raise NotPositiveDefinite(
            f"conjugate gradient reached residual {res:.3e} (target {tol * np.linalg.norm(b):.3e}) "
            f"after {iters} iterations; increase epsilon"
        )
    return y, SolveReport(CG, iters, res, cond, lam_max, lam_min)


def eigvals_deflation(M, iters: int = 2000, tol: float = 1e-13) -> np.ndarray:
    """All eigenvalues of a symmetric PSD matrix by power iteration with Hotelling deflation.

    Slow and only as accurate as ``lambda_max * 1e-16`` near zero; kept as an
    independent check on LAPACK for small matrices. Ascending order.
    """
    A = np.array(_entries(M), dtype=np.float64, copy=True)
    n = A.shape[0]
    vals = []
    vecs = []
    start = np.cos(np.arange(1, n + 1) * 0.7071) + 0.5
    for j in range(n):
        v = start.copy()
        for u in vecs:
            v -= (u @ v) * u
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(iters):
            w = A @ v
            for u in vecs:
                w -= (u @ w) * u
            nrm = np.linalg.norm(w)
            if nrm == 0.0:
                break
            w /= nrm
            new_lam = float(w @ A @ w)
            if abs(new_lam - lam) <= tol * max(abs(new_lam), 1e-300) and np.linalg.norm(w - v) < 1e-6:
                v = w
                lam = new_lam
                break
            v, lam = w, new_lam
        vals.append(lam)
        vecs.append(v)
        A = A - lam * np.outer(v, v)
    return np.sort(np.array(vals))


@dataclass(frozen=True)
class SpdCertificate:
    """Outcome of a positive-definiteness check of ``R`` for one (window, omega, N)."""

    positive_definite: bool
    digits: int  # 16 means plain float64 succeeded
    min_pivot: float


def certify_positive_definite(window: TimeWindow, omega: float, half_order: int,
                              dps_schedule=(50, 100, 200, 400)) -> SpdCertificate:
    """Check that ``R`` admits a Cholesky factorization.

    Tries float64 first. If that fails the matrix is rebuilt and factored in
    increasing decimal precision; success is accepted only once two
    consecutive precisions agree on the smallest squared pivot to 1e-6
    relative, so rounding cannot fake a positive pivot.
    """
    from .sinc_ops import gram

    R = gram(window, omega, half_order).entries
    try:
        L = np.linalg.cholesky(R)
        return SpdCertificate(True, 16, float(np.min(np.diag(L)) ** 2))
    except np.linalg.LinAlgError:
        pass

    previous = None
    for dps in dps_schedule:
        with mpmath.workdps(dps):
            Rm = gram_extended(window, omega, half_order, dps)
            try:
                L = mpmath.cholesky(Rm, tol=mpmath.mpf(0))
            except (ValueError, ZeroDivisionError):
                previous = None
                continue
            pivot = min(L[i, i] ** 2 for i in range(Rm.rows))
            if pivot <= 0:
                previous = None
                continue
            if previous is not None and abs(pivot - previous) <= mpmath.mpf("1e-6") * pivot:
                return SpdCertificate(True, dps, float(pivot))
            previous = pivot
    return SpdCertificate(False, dps_schedule[-1], float("nan"))
