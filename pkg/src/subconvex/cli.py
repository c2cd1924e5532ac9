"""Command-line front end.

    python -m subconvex <command> [--seed N] [--tol name=value ...] [--out PATH]
                        [--format csv|json] [--jobs N] [--coeff-file PATH]
                        [--config FILE.json] [--size quick|full]

Exit status is 0 when every record passes, 1 when a check fails and 2 for
configuration errors (including an unknown command). The report goes to
``--out`` or standard output; a one-line summary goes to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import calibration, suites
from .errors import CheckFailure, ConfigError, SubconvexError
from .lfunc import SCAN_COLUMNS
from .report import emit_report, render

COMMANDS = tuple(suites.SUITES) + ("scan-exponent",)


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "csv"
    jobs: int = 1
    coeff_file: str | None = None
    size: str = "full"
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.size not in ("quick", "full"):
            raise ConfigError(f"unknown size {self.size!r}")
        if int(self.jobs) < 1:
            raise ConfigError("--jobs must be at least 1")
        suites.check_tolerance_names(self.tolerances)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="subconvex", description="Numerical verification suites.")
    p.add_argument("command", help=", ".join(COMMANDS))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", action="append", default=None, metavar="NAME=VALUE",
                   help="override a tolerance; names: " + ", ".join(suites.DEFAULT_TOLERANCES))
    p.add_argument("--out", default=None)
    p.add_argument("--format", default=None, choices=("csv", "json"))
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--coeff-file", default=None)
    p.add_argument("--config", default=None, help="JSON file with defaults; flags win")
    p.add_argument("--size", default=None, choices=("quick", "full"))
    # compute-l / scan-exponent
    p.add_argument("--modulus", type=int, default=None)
    p.add_argument("--chi-index", type=int, default=None)
    p.add_argument("--t", type=float, nargs="+", default=None)
    p.add_argument("--M-max", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    return p


def _parse_tol(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        try:
            out[name.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"--tol value for {name!r} is not a number") from None
    return out


def _load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def config_from_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    base = _load_config(ns.config) if ns.config else {}
    tol = dict(base.get("tol", {}))
    tol.update(_parse_tol(ns.tol))
    options = dict(base.get("options", {}))
    for key in ("modulus", "chi_index", "t", "M_max", "eta"):
        if getattr(ns, key) is not None:
            options[key] = getattr(ns, key)

    def pick(name, default):
        val = getattr(ns, name)
        return val if val is not None else base.get(name, default)

    try:
        cfg = RunConfig(command=ns.command, seed=int(pick("seed", 0)), tolerances=tol,
                        out=pick("out", None), format=pick("format", "csv"),
                        jobs=int(pick("jobs", 1)), coeff_file=pick("coeff_file", None),
                        size=pick("size", "full"), options=options)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    cfg.validate()
    return cfg


def _scan(ctx: suites.SuiteContext) -> tuple[list[dict], bool, str]:
    rows, slope = suites.suite_scan(ctx)
    C = calibration.CONVEXITY
    worst = max(r["abs_L"] / (r["M"] * (3 + abs(r["t"]))) ** 0.6 for r in rows)
    ok = bool(rows) and slope < ctx.tol("scan_slope") and worst <= C.value
    cols = list(SCAN_COLUMNS)
    rows = [{c: r[c] for c in cols} for r in rows]
    note = (f"slope={slope:.6g} (< {ctx.tol('scan_slope')}), max |L|/(MT)^0.6={worst:.6g} "
            f"(<= {C.value}, {C.reference})")
    return rows, ok, note


def run(cfg: RunConfig) -> tuple[list[dict], str]:
    """Run one command; write the report; raise CheckFailure if anything failed."""
    cfg.validate()
    pool = ThreadPoolExecutor(cfg.jobs) if cfg.jobs > 1 else None
    try:
        ctx = suites.SuiteContext(seed=cfg.seed, tolerances=cfg.tolerances,
                                  quick=cfg.size == "quick",
                                  mapper=pool.map if pool else map,
                                  coeff_file=cfg.coeff_file, options=cfg.options)
        if cfg.command == "scan-exponent":
            records, ok, note = _scan(ctx)
        else:
            records = suites.SUITES[cfg.command](ctx)
            ok = bool(records) and all(bool(r.get("passed")) for r in records)
            failed = sum(not r.get("passed") for r in records)
            note = f"{len(records) - failed}/{len(records)} passed"
    finally:
        if pool:
            pool.shutdown()
    if records:
        if cfg.out:
            emit_report(records, cfg.format, cfg.out)
        else:
            sys.stdout.write(render(records, cfg.format))
    summary = f"{cfg.command}: {note}"
    if not ok:
        raise CheckFailure(summary, records)
    return records, summary


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        _, summary = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"FAILED {exc}", file=sys.stderr)
        return 1
    except (SubconvexError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"ok {summary}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
