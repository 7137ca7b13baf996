"""Command-line front end.

Configuration files hold one ``key = value`` pair per line; ``#`` starts a
comment.  Exit codes: 0 success, 1 verification failure, 2 configuration
error, 3 runtime or solver error.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bgp import BgpRates, rates_row, validate_params
from .errors import ConfigError, DomainError, IntegrationError, ModelError
from .gradcheck import gradient_check
from .model import ExtendedState, Params
from .simulate import TrajectoryRecord, bgp_initial_state, integrate, verify_bgp

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

PARAM_NAMES = ("sigma", "gamma", "rho", "beta")
FLAG_NAMES = ("basic_domain", "denominator_ok", "convergence_regime", "bgp_feasible")
RATE_COLUMNS = PARAM_NAMES + BgpRates.FIELDS + FLAG_NAMES

_PARAM_RULES = {
    "sigma": (lambda v: v > 0 and v != 1, "sigma must be > 0 and != 1"),
    "gamma": (lambda v: v > 0, "gamma must be > 0"),
    "rho": (lambda v: v > 0, "rho must be > 0"),
    "beta": (lambda v: 0 < v < 1, "beta must lie in (0, 1)"),
}


@dataclass(frozen=True)
class SweepAxis:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def values(self):
        if self.count == 1:
            return [self.start]
        if self.spacing == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.count).tolist()
        return np.linspace(self.start, self.stop, self.count).tolist()


@dataclass
class RunConfig:
    params: Params
    h0: float = 1.0
    t_end: float = 20.0
    tol: float = 1e-9
    records: int = 200
    sweep: dict = field(default_factory=dict)
    out_prefix: str = "wfh"


def _number(key, raw, lineno):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects a number, got {raw!r}",
                          line=lineno, key=key) from None
    if not math.isfinite(value):
        raise ConfigError(f"line {lineno}: {key} must be finite", line=lineno, key=key)
    return value


def _integer(key, raw, lineno):
    value = _number(key, raw, lineno)
    if value != int(value):
        raise ConfigError(f"line {lineno}: {key} must be an integer, got {raw!r}",
                          line=lineno, key=key)
    return int(value)


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` text into a :class:`RunConfig`."""
    seen = {}
    sweep_raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}", line=lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"line {lineno}: empty key or value", line=lineno, key=key or None)
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", line=lineno, key=key)
        if key in PARAM_NAMES or key in ("h0", "t_end", "tol"):
            seen[key] = (_number(key, raw, lineno), lineno)
        elif key == "records":
            seen[key] = (_integer(key, raw, lineno), lineno)
        elif key == "out_prefix":
            seen[key] = (raw, lineno)
        elif key.startswith("sweep."):
            parts = key.split(".")
            if len(parts) != 3 or parts[1] not in PARAM_NAMES or parts[2] not in (
                    "start", "stop", "count", "spacing"):
                raise ConfigError(f"line {lineno}: unknown key {key!r}", line=lineno, key=key)
            _, name, attr = parts
            if attr == "count":
                value = _integer(key, raw, lineno)
            elif attr == "spacing":
                if raw not in ("linear", "log"):
                    raise ConfigError(f"line {lineno}: {key} must be 'linear' or 'log'",
                                      line=lineno, key=key)
                value = raw
            else:
                value = _number(key, raw, lineno)
            sweep_raw.setdefault(name, {})[attr] = (value, lineno)
            seen[key] = (value, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", line=lineno, key=key)

    for name in PARAM_NAMES:
        if name not in seen:
            raise ConfigError(f"missing required key {name!r}", key=name)
        value, lineno = seen[name]
        ok, msg = _PARAM_RULES[name]
        if not ok(value):
            raise ConfigError(f"line {lineno}: {msg}, got {value}", line=lineno, key=name)
    params = Params(*(seen[name][0] for name in PARAM_NAMES))

    cfg = RunConfig(params)
    checks = {
        "h0": (lambda v: v > 0, "h0 must be positive"),
        "t_end": (lambda v: v >= 0, "t_end must be non-negative"),
        "tol": (lambda v: v > 0, "tol must be positive"),
        "records": (lambda v: v >= 1, "records must be at least 1"),
    }
    for key, (ok, msg) in checks.items():
        if key in seen:
            value, lineno = seen[key]
            if not ok(value):
                raise ConfigError(f"line {lineno}: {msg}, got {value}", line=lineno, key=key)
            setattr(cfg, key, value)
    if "out_prefix" in seen:
        cfg.out_prefix = seen["out_prefix"][0]

    for name, attrs in sweep_raw.items():
        key = f"sweep.{name}"
        if "count" not in attrs or "start" not in attrs:
            raise ConfigError(f"{key} needs at least start and count", key=key)
        count = attrs["count"][0]
        if count < 1:
            raise ConfigError(f"line {attrs['count'][1]}: {key}.count must be >= 1",
                              line=attrs["count"][1], key=f"{key}.count")
        start = attrs["start"][0]
        if count > 1 and "stop" not in attrs:
            raise ConfigError(f"{key}.stop is required when count > 1", key=f"{key}.stop")
        stop = attrs["stop"][0] if "stop" in attrs else start
        spacing = attrs["spacing"][0] if "spacing" in attrs else "linear"
        if spacing == "log" and not (start > 0 and stop > 0):
            raise ConfigError(f"{key}: log spacing needs positive endpoints", key=key)
        cfg.sweep[name] = SweepAxis(start, stop, count, spacing)
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def format_value(v) -> str:
    """17 significant digits for floats, 0/1 for flags."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _write_csv(path_or_stream, header, rows):
    if hasattr(path_or_stream, "write"):
        writer = csv.writer(path_or_stream, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([format_value(v) for v in row] for row in rows)
        return
    path = Path(path_or_stream)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        _write_csv(fh, header, rows)


def _row_for(values: dict) -> dict:
    """Rates row for one parameter combination; invalid points become flagged NaN rows."""
    try:
        p = Params(*(values[name] for name in PARAM_NAMES))
    except DomainError:
        row = dict(values)
        row.update({name: math.nan for name in BgpRates.FIELDS})
        row.update({name: False for name in FLAG_NAMES})
        return row
    return rates_row(p)


def cmd_rates(cfg: RunConfig, as_csv=False, strict=False, out=None) -> int:
    out = out or sys.stdout
    row = rates_row(cfg.params)
    if as_csv:
        _write_csv(out, RATE_COLUMNS, [[row[c] for c in RATE_COLUMNS]])
    else:
        width = max(len(c) for c in RATE_COLUMNS)
        for c in RATE_COLUMNS:
            v = row[c]
            text = ("ok" if v else "FAILED") if isinstance(v, bool) else f"{v:.12g}"
            print(f"{c:<{width}}  {text}", file=out)
        for msg in validate_params(cfg.params).messages:
            print(f"warning: {msg}", file=out)
    if strict and not validate_params(cfg.params).ok:
        return EXIT_FAIL
    return EXIT_OK


def _perturbed_start(cfg: RunConfig, lambda2_factor):
    x0, _ = bgp_initial_state(cfg.params, cfg.h0)
    if lambda2_factor != 1.0:
        x0 = ExtendedState.from_values(x0.t, x0.state.k, x0.state.h, x0.costates.lambda1,
                                       x0.costates.lambda2 * lambda2_factor)
    return x0


def cmd_simulate(cfg: RunConfig, out_path=None, lambda2_factor=1.0) -> int:
    """Integrate from the balanced-path point and write the trajectory CSV.

    If integration aborts, the records computed so far are still written and
    the exit code is 3.
    """
    out_path = out_path or f"{cfg.out_prefix}_trajectory.csv"
    x0 = _perturbed_start(cfg, lambda2_factor)
    status = EXIT_OK
    try:
        traj = integrate(cfg.params, x0, cfg.t_end, tol=cfg.tol, records=cfg.records)
    except IntegrationError as exc:
        print(f"error: integration aborted at t = {exc.t}: {exc}", file=sys.stderr)
        traj = exc.partial
        status = EXIT_RUNTIME
        if traj is None:
            return status
    _write_csv(out_path, TrajectoryRecord.CSV_COLUMNS, [r.csv_values() for r in traj.records])
    return status


def cmd_verify(cfg: RunConfig, lambda2_factor=1.0, out=None) -> int:
    out = out or sys.stdout
    report = validate_params(cfg.params)
    if not report.ok:
        for msg in report.messages:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    result = verify_bgp(cfg.params, h0=cfg.h0, t_end=cfg.t_end, tol=cfg.tol,
                        records=cfg.records, lambda2_factor=lambda2_factor)
    print(f"{'check':<24} {'expected':>22} {'observed':>22} {'tolerance':>10}  result", file=out)
    for c in result.checks:
        line = (f"{c.name:<24} {c.expected:>22.15g} {c.observed:>22.15g} {c.tolerance:>10.1e}  "
                f"{'PASS' if c.passed else 'FAIL'}")
        if c.note and not c.passed:
            line += f"  ({c.note})"
        print(line, file=out)
    n_fail = len(result.failures())
    print(f"{len(result.checks) - n_fail}/{len(result.checks)} checks passed", file=out)
    return EXIT_OK if result.passed else EXIT_FAIL


def sweep_rows(cfg: RunConfig, jobs=1):
    """Rows over the Cartesian product of sweep axes, in lexicographic grid order."""
    if not cfg.sweep:
        raise ConfigError("sweep needs at least one sweep.<param> axis")
    names = [n for n in PARAM_NAMES if n in cfg.sweep]
    axes = [cfg.sweep[n].values() for n in names]
    base = {n: getattr(cfg.params, n) for n in PARAM_NAMES}
    combos = [dict(base, **dict(zip(names, point))) for point in itertools.product(*axes)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row_for, combos))
    else:
        rows = [_row_for(c) for c in combos]
    return rows


def cmd_sweep(cfg: RunConfig, out_path=None, jobs=1) -> int:
    rows = sweep_rows(cfg, jobs)
    out_path = out_path or f"{cfg.out_prefix}_sweep.csv"
    target = sys.stdout if out_path == "-" else out_path
    _write_csv(target, RATE_COLUMNS, [[r[c] for c in RATE_COLUMNS] for r in rows])
    return EXIT_OK


def cmd_gradcheck(points=100, seed=0, step=1e-6, tol=1e-6, out=None) -> int:
    out = out or sys.stdout
    if not step > 0:
        raise ConfigError(f"finite-difference step must be positive, got {step}", key="step")
    if points < 1:
        raise ConfigError("points must be at least 1", key="points")
    result = gradient_check(points=points, seed=seed, rel_step=step)
    for var, err in result.per_variable.items():
        print(f"H_{var}: max relative error {err:.3e}", file=out)
    verdict = "PASS" if result.passed(tol) else "FAIL"
    print(f"max relative error {result.max_rel_error:.3e} over {points} points "
          f"(seed {seed}, tolerance {tol:.0e}): {verdict}", file=out)
    return EXIT_OK if result.passed(tol) else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wfh-growth",
        description="Balanced-growth solver and verifier for the home-office growth model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="closed-form balanced-growth rates")
    p.add_argument("config")
    p.add_argument("--csv", action="store_true", help="emit one CSV row instead of a table")
    p.add_argument("--strict", action="store_true", help="exit 1 when validation flags fail")

    p = sub.add_parser("simulate", help="integrate from the balanced-path point, write CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="output CSV path (default <out_prefix>_trajectory.csv)")
    p.add_argument("--perturb-lambda2", type=float, default=1.0, metavar="FACTOR",
                   help="scale the initial human-capital price (debug)")

    p = sub.add_parser("verify", help="integrate and compare against the closed forms")
    p.add_argument("config")
    p.add_argument("--perturb-lambda2", type=float, default=1.0, metavar="FACTOR",
                   help="scale the initial human-capital price (negative control)")

    p = sub.add_parser("sweep", help="closed-form quantities over a parameter grid")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="output CSV path, '-' for stdout")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference Hamiltonian partials")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=1e-6, help="relative finite-difference step")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gradcheck":
            return cmd_gradcheck(args.points, args.seed, args.step)
        cfg = load_config(args.config)
        if args.command == "rates":
            return cmd_rates(cfg, as_csv=args.csv, strict=args.strict)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.output, args.perturb_lambda2)
        if args.command == "verify":
            return cmd_verify(cfg, args.perturb_lambda2)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.output, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
