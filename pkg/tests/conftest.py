import math
import warnings

import numpy as np
import pytest
from hypothesis import settings

from bandcast import BandlimitedModel, Signal, TimeWindow, synthesize_many

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

SMALL_CASE = dict(omega=0.4, half_order=15, q=-25, s=15, epsilon=1e-3)
LARGE_CASE = dict(omega=math.pi / 2, half_order=200, q=-600, s=200, epsilon=2e-3)


def covering_window(omega, half_order, margin_lo=2, margin_hi=2):
    """Window reaching past every basis centre -k*pi/omega; R is well conditioned there."""
    c = math.ceil(half_order * math.pi / omega)
    return TimeWindow(-c - margin_lo, c + margin_hi)


def planted(window, omega, y0):
    model = BandlimitedModel(omega, y0)
    return Signal(window, synthesize_many(model, window.times())), model


def small_case_signal(seed=7):
    rng = np.random.default_rng(seed)
    w = TimeWindow(SMALL_CASE["q"], SMALL_CASE["s"])
    t = w.times().astype(float)
    x = np.cos(0.15 * t + 0.3) + 0.5 * np.cos(0.31 * t) + 0.1 * rng.standard_normal(t.size)
    return Signal(w, x)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _quiet_degenerate():
    from bandcast import DegenerateRegimeWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateRegimeWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
