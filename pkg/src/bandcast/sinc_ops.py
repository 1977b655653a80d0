"""Sinc basis operators: synthesis, analysis, design matrix, Gram matrix, spectrum.

Conventions: ``sinc(x) = sin(x)/x`` (unnormalized) and the basis value
``A[t, k] = (omega/pi) * sinc(k*pi + omega*t)`` carries the ``omega/pi``
factor, so ``xhat = A @ y``, ``analyze(x) = A.T @ x`` and ``R = A.T @ A``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np

from .signal_model import BandlimitedModel, Signal, TimeWindow

_SERIES_CUTOFF = 1e-6


def sinc(x: float) -> float:
    """Unnormalized sinc with the removable singularity filled (``sinc(0) == 1``)."""
    x = float(x)
    if abs(x) < _SERIES_CUTOFF:
        x2 = x * x
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    return math.sin(x) / x


def sinc_array(x) -> np.ndarray:
    """Vectorized :func:`sinc`; agrees with the scalar version bit for bit."""
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUTOFF
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(x) / x
    if np.any(small):
        x2 = x[small] * x[small]
        out[small] = 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    return out


def basis_table(times, omega: float, half_order: int) -> np.ndarray:
    """Return ``A[i, k + N] = (omega/pi) * sinc(k*pi + omega*times[i])``.

    Uses ``sin(k*pi + omega*t) = (-1)**k * sin(omega*t)`` so that no rounded
    multiple of pi enters the sine; entries vanish exactly where the sinc has
    its zeros at ``t = 0``. Computed once per (window, omega, N) and reused
    for R, Q* and synthesis.
    """
    t = np.asarray(times, dtype=np.float64).reshape(-1, 1)
    kk = np.arange(-half_order, half_order + 1)
    k = kk.astype(np.float64).reshape(1, -1)
    sign = np.where(kk % 2 == 0, 1.0, -1.0).reshape(1, -1)
    wt = omega * t
    arg = k * math.pi + wt
    small = np.abs(arg) < _SERIES_CUTOFF
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (sign * np.sin(wt)) / arg
    if np.any(small):
        a2 = arg[small] * arg[small]
        out[small] = 1.0 - a2 / 6.0 + a2 * a2 / 120.0
    return (omega / math.pi) * out


def basis_value(k: int, t: int, omega: float) -> float:
    """Coefficient of ``y_k`` in ``xhat(t)``: ``(omega/pi) * sinc(k*pi + omega*t)``."""
    # Routed through basis_table so design_matrix entries match exactly.
    return float(basis_table([t], omega, abs(k))[0, k + abs(k)])


def design_matrix(window: TimeWindow, omega: float, half_order: int) -> np.ndarray:
    """Dense ``(s-q+1) x (2N+1)`` matrix with ``A[t-q, k+N] = basis_value(k, t, omega)``."""
    return basis_table(window.times(), omega, half_order)


def synthesize(model: BandlimitedModel, t: int) -> float:
    """Evaluate ``xhat(t)`` at one integer time (inside or outside any window)."""
    return float(synthesize_many(model, [t])[0])


def synthesize_many(model: BandlimitedModel, times) -> np.ndarray:
    """Evaluate ``xhat`` at many integer times; summation over k in ascending order."""
    table = basis_table(times, model.omega, model.half_order)
    return _accumulate_columns(table, model.coefficients)


def _accumulate_columns(table: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Fixed order (ascending k) so results do not depend on BLAS threading.
    out = np.zeros(table.shape[0])
    for j in range(table.shape[1]):
        out += table[:, j] * y[j]
    return out


def analyze(signal: Signal, omega: float, half_order: int, table: np.ndarray | None = None) -> np.ndarray:
    """Analysis vector ``b_k = (omega/pi) * sum_{t=q}^{s} sinc(k*pi + omega*t) x(t)``.

    ``table`` may be a precomputed :func:`design_matrix` for the same inputs.
    """
    if table is None:
        table = design_matrix(signal.window, omega, half_order)
    x = signal.values
    b = np.zeros(table.shape[1])
    for i in range(table.shape[0]):
        b += table[i] * x[i]
    return b


@dataclass(frozen=True)
class GramMatrix:
    """``R = Q*Q`` for one (window, omega, N); ``entries[k+N, m+N] = R_km``."""

    entries: np.ndarray
    omega: float
    window: TimeWindow

    @property
    def half_order(self) -> int:
        return (self.entries.shape[0] - 1) // 2

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]


def thread_count() -> int:
    """Worker threads for Gram assembly, from ``BANDCAST_THREADS`` (0 or unset = auto)."""
    raw = os.environ.get("BANDCAST_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return max(1, n)


def _gram_rows(table: np.ndarray, r0: int, r1: int) -> np.ndarray:
    # Rows r0:r1, columns r0: (upper part only); ascending-t accumulation per entry.
    block = np.zeros((r1 - r0, table.shape[1] - r0))
    tmp = np.empty_like(block)
    for i in range(table.shape[0]):
        row = table[i]
        np.multiply.outer(row[r0:r1], row[r0:], out=tmp)
        block += tmp
    return block


def gram_from_table(table: np.ndarray, threads: int | None = None) -> np.ndarray:
    """Upper-triangle accumulation of ``table.T @ table``, mirrored to exact symmetry.

    Each entry is summed over rows in ascending order, so the result is
    bit-identical for any thread count.
    """
    n = table.shape[1]
    threads = thread_count() if threads is None else max(1, int(threads))
    # Balanced split of the triangle: row r carries n - r entries.
    nblocks = min(threads, n) if n * table.shape[0] > 50_000 else 1
    bounds = [0]
    total = n * (n + 1) / 2
    for j in range(1, nblocks):
        target = total * j / nblocks
        r = int(n - math.sqrt(max(0.0, (n * (n + 1) - 2 * target))))
        bounds.append(min(max(r, bounds[-1] + 1), n - 1))
    bounds.append(n)
    spans = [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    full = np.zeros((n, n))
    if len(spans) == 1:
        full[:, :] = _gram_rows(table, 0, n)
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            blocks = list(pool.map(lambda ab: _gram_rows(table, *ab), spans))
        for (a, b), block in zip(spans, blocks):
            full[a:b, a:] = block
    upper = np.triu(full)
    return upper + np.triu(full, 1).T


def gram(window: TimeWindow, omega: float, half_order: int, table: np.ndarray | None = None,
         threads: int | None = None) -> GramMatrix:
    """Gram matrix ``R_km = (omega^2/pi^2) * sum_{j=q}^{s} sinc(m*pi+omega*j) sinc(k*pi+omega*j)``."""
    if table is None:
        table = design_matrix(window, omega, half_order)
    return GramMatrix(gram_from_table(table, threads=threads), float(omega), window)


def gram_extended(window: TimeWindow, omega: float, half_order: int, dps: int) -> mpmath.matrix:
    """Gram matrix in ``dps``-digit arithmetic, for the binary value of ``omega``.

    Used to certify positive definiteness where float64 rounding swamps the
    smallest eigenvalues.
    """
    with mpmath.workdps(dps):
        om = mpmath.mpf(float(omega))
        pi = mpmath.pi
        scale = om / pi
        n = 2 * half_order + 1
        cols = []
        for k in range(-half_order, half_order + 1):
            col = []
            for t in range(window.q, window.s + 1):
                arg = k * pi + om * t
                col.append(scale * (mpmath.sin(arg) / arg if arg != 0 else mpmath.mpf(1)))
            cols.append(col)
        R = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(i, n):
                v = mpmath.fsum(a * b for a, b in zip(cols[i], cols[j]))
                R[i, j] = v
                R[j, i] = v
        return R


def spectrum(model: BandlimitedModel, omega_eval: float) -> tuple[float, float]:
    """Return ``(re, im)`` of ``Xhat(e^{i w}) = sum_k y_k exp(i k w pi / omega)`` on ``|w| <= omega``, else ``(0, 0)``."""
    if not (-math.pi <= omega_eval <= math.pi):
        raise ValueError(f"omega_eval must lie in [-pi, pi], got {omega_eval}")
    if abs(omega_eval) > model.omega:
        return 0.0, 0.0
    n = model.half_order
    phase = np.arange(-n, n + 1) * (omega_eval * math.pi / model.omega)
    y = model.coefficients
    return float(np.sum(y * np.cos(phase))), float(np.sum(y * np.sin(phase)))
