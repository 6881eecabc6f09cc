"""``toa`` command-line interface.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .arrival import ArrivalSeries, run_config
from .config import ConfigError, load_config, load_preset, preset_path
from .propagate import LeakageError
from .wigner import ConvergenceError, minimize_uncertainty, wigner_curve

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2

CURVE_HEADER = "ratio,mean_E_over_eps,eps_tau,lambda_prime,iterations,converged"
ARRIVAL_HEADER = "T,pi_plus,pi_minus,j"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    d = path.parent if str(path.parent) else Path(".")
    if not d.is_dir():
        raise UsageError(f"output directory {d} does not exist")
    fd, tmp = tempfile.mkstemp(dir=d, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _summary_path(out: Path) -> Path:
    return out.with_suffix(".json")


def series_csv(series: ArrivalSeries) -> str:
    j = series.j if series.j is not None else np.full(len(series.times), np.nan)
    lines = [ARRIVAL_HEADER]
    for row in zip(series.times, series.pi_plus, series.pi_minus, j):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def series_summary(series: ArrivalSeries, raw_config: dict) -> dict:
    return {
        "X": series.X,
        "window": [float(series.times[0]), float(series.times[-1])],
        "window_integral": series.window_integrals(),
        "peak_time": {"plus": series.peak_time("plus"), "minus": series.peak_time("minus")},
        "config": raw_config,
    }


def _write_series(cfg, X: float, out: Path) -> None:
    series = run_config(cfg, X)
    raw = dict(cfg.raw)
    raw["arrival"] = dict(raw["arrival"], X=X)
    csv = series_csv(series)
    summary = json.dumps(series_summary(series, raw), indent=2, sort_keys=True) + "\n"
    _atomic_write(out, csv)
    _atomic_write(_summary_path(out), summary)


def _per_x_path(out: Path, X: float, multiple: bool) -> Path:
    if not multiple:
        return out
    return out.with_name(f"{out.stem}_X{fmt(X)}{out.suffix}")


def cmd_arrival(config_path: str, out_path: str) -> int:
    cfg = load_config(config_path)
    out = Path(out_path)
    # compute everything before writing anything
    results = []
    for X in cfg.X:
        series = run_config(cfg, X)
        raw = dict(cfg.raw)
        raw["arrival"] = dict(raw["arrival"], X=X)
        results.append((_per_x_path(out, X, len(cfg.X) > 1), series, raw))
    for path, series, raw in results:
        _atomic_write(path, series_csv(series))
        _atomic_write(_summary_path(path), json.dumps(series_summary(series, raw), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_figure2(position: float, out_path: str) -> int:
    cfg = load_preset("figure2")
    if not cfg.grid.contains(position):
        raise UsageError(f"position {position} outside simulation domain [{cfg.grid.x_min}, {cfg.grid.x_max}]")
    _write_series(cfg, position, Path(out_path))
    return EXIT_OK


def cmd_wigner_curve(ratio_min: float, ratio_max: float, steps: int, out_path: str) -> int:
    if not (ratio_min > -1 and ratio_max >= ratio_min):
        raise UsageError(f"need -1 < ratio-min <= ratio-max, got {ratio_min}, {ratio_max}")
    if steps < 1 or (steps == 1 and ratio_min != ratio_max):
        raise UsageError("steps must be >= 1, and 1 only when ratio-min == ratio-max")
    rows = wigner_curve(ratio_min, ratio_max, steps)
    lines = [CURVE_HEADER]
    for r in rows:
        lines.append(
            ",".join([fmt(r.ratio), fmt(r.mean_E_over_eps), fmt(r.eps_tau), fmt(r.lambda_prime), str(r.iterations), str(r.converged).lower()])
        )
    _atomic_write(Path(out_path), "\n".join(lines) + "\n")
    failed = [r for r in rows if not r.converged]
    for r in failed:
        print(f"ratio {fmt(r.ratio)}: {r.error}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_wigner_state(ratio: float, out_path: str) -> int:
    if not ratio > -1:
        raise UsageError(f"ratio must exceed -1, got {ratio}")
    st = minimize_uncertainty(ratio)
    lines = ["E,eta"] + [f"{fmt(e)},{fmt(v)}" for e, v in zip(st.eta.E_grid, st.eta.values)]
    out = Path(out_path)
    summary = {
        "ratio": st.ratio,
        "lambda_prime": st.lambda_prime,
        "tau": st.tau,
        "epsilon": st.epsilon,
        "eps_tau": st.eps_tau,
        "mean_E": st.mean_E,
        "iterations": st.iterations,
        "residual": st.residual,
    }
    _atomic_write(out, "\n".join(lines) + "\n")
    _atomic_write(_summary_path(out), json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="toa", description="Quantum time-of-arrival distributions and minimum time-energy uncertainty states.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("wigner-curve", help="sweep E0/eps and tabulate eps*tau against <E>/eps")
    c.add_argument("--ratio-min", type=float, required=True)
    c.add_argument("--ratio-max", type=float, required=True)
    c.add_argument("--steps", type=int, required=True)
    c.add_argument("--out", required=True)

    c = sub.add_parser("wigner-state", help="write the minimum-uncertainty eta(E) profile")
    c.add_argument("--ratio", type=float, required=True)
    c.add_argument("--out", required=True)

    c = sub.add_parser("arrival", help="arrival-time series from a YAML run config")
    c.add_argument("--config", required=True)
    c.add_argument("--out", required=True)

    c = sub.add_parser("figure2", help=f"barrier-collision preset ({preset_path('figure2').name}) at one position")
    c.add_argument("--position", type=float, required=True)
    c.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "wigner-curve":
            return cmd_wigner_curve(args.ratio_min, args.ratio_max, args.steps, args.out)
        if args.command == "wigner-state":
            return cmd_wigner_state(args.ratio, args.out)
        if args.command == "arrival":
            return cmd_arrival(args.config, args.out)
        return cmd_figure2(args.position, args.out)
    except (UsageError, ConfigError, OSError) as exc:
        print(f"toa: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, LeakageError) as exc:
        print(f"toa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"toa: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
