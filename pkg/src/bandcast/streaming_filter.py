"""Causal smoothing/forecasting filter that re-fits on every new sample.

Expanding mode keeps ``q`` fixed and grows the window. Sliding mode keeps
the newest ``width`` samples and fits them on a fixed reference window
ending at ``frame_end`` (0 by default): the sinc basis is not
shift-invariant, so re-indexing to a fixed frame is what makes the
fixed-memory filter time-invariant.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .approximator import fit, forecast
from .signal_model import BandcastError, FitConfig, FitResult, Signal, TimeWindow

Mode = Literal["expanding", "sliding"]


class NonConsecutiveTime(BandcastError, ValueError):
    pass


@dataclass(frozen=True)
class FilterOutput:
    t_now: int
    smoothed_now: float
    forecasts: np.ndarray
    unique_regime: bool
    residual_l2: float
    result: FitResult = field(repr=False, compare=False)


@dataclass
class FilterState:
    """Mutable single-owner filter state; feed it with :func:`push`."""

    config: FitConfig
    horizon: int
    mode: Mode = "expanding"
    width: int | None = None
    frame_end: int = 0
    times: deque = field(default_factory=deque)
    values: deque = field(default_factory=deque)

    def __post_init__(self):
        if self.mode not in ("expanding", "sliding"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "sliding" and (self.width is None or self.width < 1):
            raise ValueError("sliding mode needs a positive width")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    def fresh(self) -> FilterState:
        """Same settings, empty buffer."""
        return FilterState(self.config, self.horizon, self.mode, self.width, self.frame_end)

    @property
    def last_time(self) -> int | None:
        return self.times[-1] if self.times else None

    def buffer_signal(self) -> Signal:
        """The samples the next fit sees, in the frame the fit uses."""
        q = self.times[0]
        if self.mode == "sliding":
            q = self.frame_end - (len(self.values) - 1)
        return Signal(TimeWindow(q, q + len(self.values) - 1), np.fromiter(self.values, float))


def push(state: FilterState, t: int, value: float) -> FilterOutput:
    """Append ``x(t)``, re-fit on the buffer, and report ``xhat(t)`` plus forecasts.

    Raises :class:`NonConsecutiveTime` unless ``t`` follows the previous sample.
    """
    t = int(t)
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"sample at t={t} is not finite")
    last = state.last_time
    if last is not None and t != last + 1:
        raise NonConsecutiveTime(f"expected t={last + 1}, got t={t}")
    state.times.append(t)
    state.values.append(value)
    if state.mode == "sliding":
        while len(state.values) > state.width:
            state.times.popleft()
            state.values.popleft()

    result = fit(state.buffer_signal(), state.config, warn=False)
    return FilterOutput(
        t_now=t,
        smoothed_now=float(result.fitted_values[-1]),
        forecasts=forecast(result, state.horizon),
        unique_regime=result.unique_regime,
        residual_l2=result.residual_l2,
        result=result,
    )


def run_offline(signal: Signal, state_template: FilterState) -> list[FilterOutput]:
    """Replay a recorded signal through a fresh copy of ``state_template``."""
    state = state_template.fresh()
    return [push(state, t, v) for t, v in zip(signal.times().tolist(), signal.values.tolist())]


def stream(samples: Iterable[tuple[int, float]], state: FilterState):
    """Lazily push ``(t, value)`` pairs, yielding one output per sample."""
    for t, v in samples:
        yield push(state, t, v)
