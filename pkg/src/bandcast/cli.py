"""Command-line interface: ``bandcast {synth,fit,filter,eigs}``.

Exit codes: 0 success, 2 input/parse error, 3 solver failure, 4 IO error.
Settings resolve as command-line flag, then ``--config`` JSON, then default.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .approximator import fit, fit_highband, forecast, forecast_times
from .signal_model import BandcastError, FitConfig, InvalidConfig, Signal, TimeWindow
from .sinc_ops import gram
from .solver import NotPositiveDefinite, condition_estimate, regularize
from .streaming_filter import FilterState, NonConsecutiveTime, run_offline

log = logging.getLogger("bandcast")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_IO = 4

SUMMARY_KEYS = (
    "omega", "half_order", "epsilon", "q", "s", "sample_count", "horizon", "highband",
    "unique_regime", "residual_l2", "normal_residual", "solver_method", "solver_iterations",
    "lambda_max_est", "lambda_min_est", "condition_estimate", "timing",
)


class ParseError(BandcastError, ValueError):
    pass


class GapError(BandcastError, ValueError):
    pass


def fmt(x: float) -> str:
    """17 significant digits: exact round trip for binary64."""
    return format(float(x), ".17g")


@dataclass
class Sinusoid:
    amplitude: float
    frequency: float
    phase: float = 0.0

    @classmethod
    def parse(cls, text) -> Sinusoid:
        if isinstance(text, dict):
            return cls(float(text["amplitude"]), float(text["frequency"]), float(text.get("phase", 0.0)))
        if isinstance(text, (list, tuple)):
            parts = list(text)
        else:
            parts = [p for p in str(text).split(",") if p.strip()]
        if len(parts) not in (2, 3):
            raise ParseError(f"sinusoid needs amplitude,frequency[,phase], got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError as exc:
            raise ParseError(f"bad sinusoid {text!r}: {exc}") from None


@dataclass
class RunConfig:
    omega: float | None = None
    half_order: int | None = None
    epsilon: float = 1e-3
    q: int | None = None
    s: int | None = None
    horizon: int | None = None
    mode: str = "expanding"
    width: int | None = None
    frame_end: int = 0
    input: str | None = None
    output: str | None = None
    summary: str | None = None
    seed: int = 0
    noise: float = 0.0
    sinusoids: list = field(default_factory=list)
    highband: bool = False
    iters: int = 20000

    def fit_config(self) -> FitConfig:
        if self.omega is None or self.half_order is None:
            raise InvalidConfig("--omega and --half-order are required")
        return FitConfig(self.omega, self.half_order, self.epsilon)

    def resolved_horizon(self) -> int:
        if self.horizon is not None:
            return int(self.horizon)
        return 2 * int(self.half_order) + 1

    def check_paths(self) -> None:
        paths = [Path(p).resolve() for p in (self.input, self.output, self.summary) if p]
        if len(set(paths)) != len(paths):
            raise InvalidConfig("input, output and summary paths must be distinct")


# Config-file keys accepted in addition to the field names.
_ALIASES = {"from": "q", "to": "s", "half-order": "half_order", "frame-end": "frame_end"}


def load_run_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"config file {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ParseError("config file must hold a JSON object")
        for key, value in raw.items():
            name = _ALIASES.get(key, key)
            if name not in known:
                raise ParseError(f"unknown config key {key!r}")
            setattr(cfg, name, value)
    for name in known:
        value = getattr(args, name, None)
        if value is not None and value != []:
            setattr(cfg, name, value)
    cfg.sinusoids = [Sinusoid.parse(s) for s in cfg.sinusoids]
    return cfg


# --- CSV ---------------------------------------------------------------------

def _open_text(path: str | None, mode: str):
    if path is None or path == "-":
        return io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8") if "r" in mode else sys.stdout
    return open(path, mode, encoding="utf-8", newline="")


def read_signal_csv(path: str | None) -> Signal:
    """Parse a ``t,value`` CSV with consecutive integer times."""
    with _open_text(path, "r") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty CSV")
    header = [c.strip() for c in rows[0]]
    if header[:2] != ["t", "value"]:
        raise ParseError(f"expected header 't,value', got {','.join(header)!r}")
    times, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ParseError(f"line {lineno}: expected 2 columns")
        try:
            t = int(row[0].strip())
            v = float(row[1].strip())
        except ValueError:
            raise ParseError(f"line {lineno}: malformed row {row!r}") from None
        if not math.isfinite(v):
            raise ParseError(f"line {lineno}: non-finite value")
        if times and t != times[-1] + 1:
            raise GapError(f"line {lineno}: time {t} does not follow {times[-1]}")
        times.append(t)
        values.append(v)
    if not times:
        raise ParseError("CSV has no data rows")
    return Signal(TimeWindow(times[0], times[-1]), values)


def restrict(signal: Signal, q: int | None, s: int | None) -> Signal:
    q = signal.window.q if q is None else int(q)
    s = signal.window.s if s is None else int(s)
    if q < signal.window.q or s > signal.window.s:
        raise InvalidConfig(f"requested window [{q}, {s}] exceeds data [{signal.window.q}, {signal.window.s}]")
    lo = q - signal.window.q
    return Signal(TimeWindow(q, s), signal.values[lo:lo + (s - q + 1)])


def write_rows(path: str | None, header: list[str], rows) -> None:
    fh = _open_text(path, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# --- commands ----------------------------------------------------------------

def synth_values(cfg: RunConfig) -> Signal:
    if cfg.q is None or cfg.s is None:
        raise InvalidConfig("synth needs --from and --to")
    window = TimeWindow(int(cfg.q), int(cfg.s))
    t = window.times().astype(float)
    x = np.zeros(t.size)
    for sn in cfg.sinusoids:
        x += sn.amplitude * np.cos(sn.frequency * t + sn.phase)
    if cfg.noise:
        rng = np.random.default_rng(int(cfg.seed))
        x += float(cfg.noise) * rng.standard_normal(t.size)
    return Signal(window, x)


def cmd_synth(cfg: RunConfig) -> int:
    sig = synth_values(cfg)
    write_rows(cfg.output, ["t", "value"], ((int(t), fmt(v)) for t, v in zip(sig.times(), sig.values)))
    return EXIT_OK


def fit_summary(cfg: RunConfig, result, horizon: int, timing: dict) -> dict:
    info = result.solver_info
    summary = {
        "omega": cfg.omega,
        "half_order": int(cfg.half_order),
        "epsilon": float(cfg.epsilon),
        "q": result.window.q,
        "s": result.window.s,
        "sample_count": result.window.sample_count,
        "horizon": horizon,
        "highband": bool(result.highband),
        "unique_regime": bool(result.unique_regime),
        "residual_l2": result.residual_l2,
        "normal_residual": result.normal_residual,
        "solver_method": info["method"],
        "solver_iterations": int(info["iterations"]),
        "lambda_max_est": float(info["lambda_max"]),
        "lambda_min_est": float(info["lambda_min"]),
        "condition_estimate": float(info["condition_estimate"]),
        "timing": timing,
    }
    assert tuple(summary) == SUMMARY_KEYS
    return summary


def cmd_fit(cfg: RunConfig) -> int:
    cfg.check_paths()
    t0 = time.perf_counter()
    signal = restrict(read_signal_csv(cfg.input), cfg.q, cfg.s)
    t1 = time.perf_counter()
    config = cfg.fit_config()
    horizon = cfg.resolved_horizon()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = (fit_highband if cfg.highband else fit)(signal, config)
    if not result.unique_regime:
        log.warning("s-q < 2N+1: fit is not unique; forecast is one representative")
    t2 = time.perf_counter()
    future = forecast(result, horizon)
    rows = [(int(t), fmt(x), fmt(xh), 0) for t, x, xh in zip(signal.times(), signal.values, result.fitted_values)]
    rows += [(int(t), "", fmt(v), 1) for t, v in zip(forecast_times(result, horizon), future)]
    write_rows(cfg.output, ["t", "x", "xhat", "is_forecast"], rows)
    t3 = time.perf_counter()
    timing = {"read": t1 - t0, "fit": t2 - t1, "write": t3 - t2, "total": t3 - t0}
    summary = fit_summary(cfg, result, horizon, timing)
    if cfg.summary:
        write_json(cfg.summary, summary)
    elif cfg.output not in (None, "-"):
        write_json(None, summary)
    return EXIT_OK


def cmd_filter(cfg: RunConfig) -> int:
    cfg.check_paths()
    signal = restrict(read_signal_csv(cfg.input), cfg.q, cfg.s)
    horizon = cfg.resolved_horizon()
    state = FilterState(cfg.fit_config(), horizon, mode=cfg.mode,
                        width=None if cfg.width is None else int(cfg.width), frame_end=int(cfg.frame_end))
    outputs = run_offline(signal, state)
    header = ["t", "x", "smoothed"] + [f"forecast_{h}" for h in range(1, horizon + 1)] + ["unique_regime"]
    rows = (
        [o.t_now, fmt(x), fmt(o.smoothed_now), *map(fmt, o.forecasts), int(o.unique_regime)]
        for o, x in zip(outputs, signal.values)
    )
    write_rows(cfg.output, header, rows)
    return EXIT_OK


def eigs_report(cfg: RunConfig) -> dict:
    if cfg.q is None or cfg.s is None:
        raise InvalidConfig("eigs needs --from and --to")
    config = cfg.fit_config()
    window = TimeWindow(int(cfg.q), int(cfg.s))
    R = gram(window, config.omega, config.half_order)
    M = regularize(R, config.epsilon)
    lam_max, lam_min = condition_estimate(M, int(cfg.iters))
    report = {
        "omega": config.omega,
        "half_order": config.half_order,
        "epsilon": config.epsilon,
        "q": window.q,
        "s": window.s,
        "dimension": config.dimension,
        "lambda_max_est": lam_max,
        "lambda_min_est": lam_min,
        "condition_estimate": lam_max / max(lam_min, lam_max * np.finfo(float).eps),
        "power_iterations": int(cfg.iters),
    }
    if config.dimension <= 512:
        ev = np.linalg.eigvalsh(M)
        report["eigenvalues"] = ev.tolist()
        report["lambda_min_over_max"] = float(ev[0] / ev[-1])
    return report


def cmd_eigs(cfg: RunConfig) -> int:
    write_json(cfg.output, eigs_report(cfg))
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--omega", type=float, help="bandwidth in rad/sample, 0 < omega < pi")
    common.add_argument("--half-order", dest="half_order", type=int, help="N; the model has 2N+1 coefficients")
    common.add_argument("--epsilon", type=float, help="Tikhonov shift added to the Gram diagonal (default 1e-3)")
    common.add_argument("--from", dest="q", type=int, help="first time index")
    common.add_argument("--to", dest="s", type=int, help="last time index")
    common.add_argument("--output", help="output path ('-' or omitted: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="bandcast", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic t,value CSV")
    p.add_argument("--sinusoid", dest="sinusoids", action="append", default=[],
                   metavar="A,F[,P]", help="add A*cos(F*t + P); repeatable")
    p.add_argument("--noise", type=float, help="standard deviation of added Gaussian noise")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("fit", parents=[common], help="fit a window and forecast past its end")
    p.add_argument("--input", help="t,value CSV ('-' or omitted: stdin)")
    p.add_argument("--horizon", type=int, help="forecast steps (default 2N+1)")
    p.add_argument("--summary", help="JSON summary path")
    p.add_argument("--highband", action="store_true", default=None,
                   help="fit the band [pi-omega, pi] via (-1)^t modulation")

    p = sub.add_parser("filter", parents=[common], help="causal re-fit on every sample")
    p.add_argument("--input")
    p.add_argument("--horizon", type=int)
    p.add_argument("--mode", choices=["expanding", "sliding"])
    p.add_argument("--width", type=int, help="sliding-window length")
    p.add_argument("--frame-end", dest="frame_end", type=int, help="reference time of the newest sample in sliding mode")

    p = sub.add_parser("eigs", parents=[common], help="spectrum and conditioning of R + epsilon*I")
    p.add_argument("--iters", type=int, help="power iterations for the estimates")
    return ap


COMMANDS = {"synth": cmd_synth, "fit": cmd_fit, "filter": cmd_filter, "eigs": cmd_eigs}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_run_config(args)
        return COMMANDS[args.command](cfg)
    except NotPositiveDefinite as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except (ParseError, GapError, NonConsecutiveTime, BandcastError, ValueError, TypeError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("IO error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
