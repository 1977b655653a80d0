"""Domain types shared by the fitting, solving and filtering code.

All types are frozen; array fields are stored as read-only float64 copies so
instances can be shared between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class BandcastError(Exception):
    """Base class for errors raised by this package."""


class EmptyWindow(BandcastError, ValueError):
    pass


class InvalidSignal(BandcastError, ValueError):
    pass


class InvalidConfig(BandcastError, ValueError):
    pass


class DegenerateRegimeWarning(UserWarning):
    """The window is too short for the fit to be unique (minimizers form a manifold)."""


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise InvalidSignal(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeWindow:
    """The integer observation times ``q, q+1, ..., s``."""

    q: int
    s: int

    def __post_init__(self):
        if not (isinstance(self.q, (int, np.integer)) and isinstance(self.s, (int, np.integer))):
            raise EmptyWindow(f"window bounds must be integers, got {self.q!r}, {self.s!r}")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "s", int(self.s))
        if self.q > self.s:
            raise EmptyWindow(f"empty window: q={self.q} > s={self.s}")

    @property
    def sample_count(self) -> int:
        return self.s - self.q + 1

    def times(self) -> np.ndarray:
        return np.arange(self.q, self.s + 1, dtype=np.int64)

    def shifted(self, tau: int) -> TimeWindow:
        return TimeWindow(self.q + tau, self.s + tau)


def new_window(q: int, s: int) -> TimeWindow:
    """Build the window ``{q..s}``; raises :class:`EmptyWindow` when ``q > s``."""
    return TimeWindow(q, s)


def is_unique_regime(window: TimeWindow, half_order: int) -> bool:
    """True when ``s - q >= 2N + 1``.

    The condition is on the index difference, not on the sample count, so a
    window of exactly ``2N + 1`` samples is *not* in the unique regime.
    Outside it the least-squares minimizers form a linear manifold and a
    regularized solve returns one representative.
    """
    if half_order < 0:
        raise InvalidConfig(f"half_order must be >= 0, got {half_order}")
    return window.s - window.q >= 2 * half_order + 1


@dataclass(frozen=True)
class Signal:
    """Real samples ``values[i] = x(q + i)`` on a finite window."""

    window: TimeWindow
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen_array(self.values, "values")
        if vals.shape[0] != self.window.sample_count:
            raise InvalidSignal(
                f"expected {self.window.sample_count} values for window "
                f"[{self.window.q}, {self.window.s}], got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidSignal("signal values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, q: int, values: Sequence[float]) -> Signal:
        n = len(values)
        if n == 0:
            raise EmptyWindow("no samples")
        return cls(TimeWindow(q, q + n - 1), values)

    def times(self) -> np.ndarray:
        return self.window.times()

    def modulated(self) -> Signal:
        """Return ``(-1)**t * x(t)``, which maps the high band onto the low band."""
        return Signal(self.window, alternating_sign(self.window.times()) * self.values)


def alternating_sign(times) -> np.ndarray:
    """``(-1)**t`` for integer times, as float64 (exactly +-1)."""
    t = np.asarray(times, dtype=np.int64)
    return np.where(t % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class FitConfig:
    """Bandwidth ``omega`` (rad/sample), half order ``N`` and Tikhonov shift ``epsilon``.

    ``solver_max_iter=None`` means ``10 * (2N + 1)`` conjugate-gradient steps.
    """

    omega: float
    half_order: int
    epsilon: float = 1e-3
    solver_tol: float = 1e-10
    solver_max_iter: int | None = None

    def __post_init__(self):
        omega = float(self.omega)
        if not (0.0 < omega < math.pi):
            raise InvalidConfig(f"omega must lie strictly inside (0, pi), got {omega}")
        if not isinstance(self.half_order, (int, np.integer)) or self.half_order < 0:
            raise InvalidConfig(f"half_order must be a nonnegative integer, got {self.half_order!r}")
        eps = float(self.epsilon)
        if not (eps >= 0.0 and math.isfinite(eps)):
            raise InvalidConfig(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not (self.solver_tol > 0.0):
            raise InvalidConfig(f"solver_tol must be positive, got {self.solver_tol}")
        if self.solver_max_iter is not None and self.solver_max_iter < 1:
            raise InvalidConfig(f"solver_max_iter must be positive, got {self.solver_max_iter}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "half_order", int(self.half_order))
        object.__setattr__(self, "epsilon", eps)

    @property
    def dimension(self) -> int:
        return 2 * self.half_order + 1

    @property
    def max_iter(self) -> int:
        if self.solver_max_iter is None:
            return 10 * self.dimension
        return int(self.solver_max_iter)


@dataclass(frozen=True)
class BandlimitedModel:
    """Coefficients ``y_k`` for ``k = -N..N`` (stored at ``k + N``) and the bandwidth.

    The model defines ``xhat(t) = (omega/pi) * sum_k y_k sinc(k*pi + omega*t)``
    at every integer ``t``.
    """

    omega: float
    coefficients: np.ndarray

    def __post_init__(self):
        coef = _frozen_array(self.coefficients, "coefficients")
        if coef.shape[0] % 2 != 1:
            raise InvalidConfig(f"coefficient vector must have odd length, got {coef.shape[0]}")
        if not np.all(np.isfinite(coef)):
            raise InvalidConfig("coefficients must be finite")
        omega = float(self.omega)
        if not (0.0 < omega < math.pi):
            raise InvalidConfig(f"omega must lie strictly inside (0, pi), got {omega}")
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "omega", omega)

    @property
    def half_order(self) -> int:
        return (self.coefficients.shape[0] - 1) // 2

    def coefficient(self, k: int) -> float:
        n = self.half_order
        if abs(k) > n:
            raise IndexError(k)
        return float(self.coefficients[k + n])

    @classmethod
    def zeros(cls, omega: float, half_order: int) -> BandlimitedModel:
        return cls(omega, np.zeros(2 * half_order + 1))

    @classmethod
    def unit(cls, omega: float, half_order: int, k: int) -> BandlimitedModel:
        y = np.zeros(2 * half_order + 1)
        y[k + half_order] = 1.0
        return cls(omega, y)


@dataclass(frozen=True)
class FitResult:
    """Outcome of one fit: the model, its trace on the window and solver diagnostics.

    ``solver_info`` keys: ``method``, ``iterations``, ``achieved_residual``,
    ``lambda_max``, ``lambda_min``, ``condition_estimate`` and ``tie_break``
    (how a representative was chosen when the minimizer is not unique).
    """

    model: BandlimitedModel
    window: TimeWindow
    fitted_values: np.ndarray
    residual_l2: float
    normal_residual: float
    unique_regime: bool
    solver_info: dict[str, Any] = field(default_factory=dict)
    highband: bool = False

    def __post_init__(self):
        fitted = _frozen_array(self.fitted_values, "fitted_values")
        if fitted.shape[0] != self.window.sample_count:
            raise InvalidSignal("fitted_values length must match the window")
        object.__setattr__(self, "fitted_values", fitted)

    @property
    def coefficients(self) -> np.ndarray:
        return self.model.coefficients
