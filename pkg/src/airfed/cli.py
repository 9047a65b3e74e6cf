"""Command-line front end.

    airfed run   [--config FILE] [--seed N] [--out DIR] [--set key=value ...] [--workers N]
    airfed sweep --axis KEY --values "v1,v2,..." [run options]
    airfed report RUN_DIR [RUN_DIR ...] [--out DIR] [--targets "0.5,0.7,0.9"]

``run`` simulates one configuration and writes config.txt, rounds.jsonl,
summary.csv, diagnostics.json, and geometry.json into the output directory.
``sweep`` repeats a run per value of one config key (same seed throughout, so
variants stay paired on geometry, channels, and data) in per-value
subdirectories plus a merged sweep.csv. ``report`` compares finished runs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report as report_mod
from .config import SWEEPABLE_KEYS, SimConfig, parse_config, set_key, validate
from .errors import ConfigError
from .orchestrator import run as run_simulation
from .records import format_float, write_run_outputs


def _build_config(args) -> SimConfig:
    config = SimConfig()
    if args.config:
        config = parse_config(args.config, base=config)
    for pair in args.set or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        config = set_key(config, key.strip(), value.strip())
    if args.seed is not None:
        config = set_key(config, "seed", str(args.seed))
    if args.workers is not None:
        config = set_key(config, "workers", str(args.workers))
    if args.out is not None:
        config = set_key(config, "out", args.out)
    return validate(config)


def _sanitize(value: str) -> str:
    return "".join(c if c.isalnum() or c in "-._" else "_" for c in value)


def _run_one(config: SimConfig, out_dir: Path, quiet: bool = False):
    result = run_simulation(config)
    write_run_outputs(out_dir, result)
    if not quiet:
        final = result.final_accuracy
        mean_active = (sum(r.n_active for r in result.records) / len(result.records)
                       if result.records else 0.0)
        total = result.records[-1].cumulative_energy if result.records else 0.0
        print(f"{out_dir}: T={config.T} final_accuracy="
              f"{'n/a' if final is None else f'{final:.4f}'} "
              f"mean_participation={mean_active:.2f} energy={total:.6g} J")
    return result


def cmd_run(args) -> int:
    config = _build_config(args)
    out_dir = Path(config.out or "airfed-out")
    _run_one(config, out_dir)
    return 0


def cmd_sweep(args) -> int:
    base = _build_config(args)
    axis = args.axis
    if axis not in SWEEPABLE_KEYS:
        raise ConfigError(f"--axis {axis!r} is not sweepable; choose from: "
                          + ", ".join(SWEEPABLE_KEYS))
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values must list at least one value")
    out_root = Path(base.out or "airfed-sweep")
    out_root.mkdir(parents=True, exist_ok=True)
    lines = [f"{axis},run_dir,final_accuracy,mean_participation,cumulative_energy"]
    for value in values:
        config = validate(set_key(base, axis, value))
        sub = out_root / f"{axis}={_sanitize(value)}"
        result = _run_one(config, sub)
        final = result.final_accuracy
        mean_active = (sum(r.n_active for r in result.records) / len(result.records)
                       if result.records else 0.0)
        total = result.records[-1].cumulative_energy if result.records else 0.0
        lines.append(f"{value},{sub.name},"
                     f"{'' if final is None else format_float(final)},"
                     f"{format_float(mean_active)},{format_float(total)}")
    (out_root / "sweep.csv").write_text("\n".join(lines) + "\n")
    return 0


def cmd_report(args) -> int:
    targets = [float(v) for v in args.targets.split(",") if v.strip()]
    report_mod.write_report(args.run_dirs, args.out or "airfed-report", targets=targets)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airfed", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int, help="override the root seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("--workers", type=int, help="training thread count")

    p_run = sub.add_parser("run", parents=[common], help="simulate one configuration")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="run once per value of one config key")
    p_sweep.add_argument("--axis", required=True, help="config key to sweep")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 'off,0.1 W,50 dBm'")
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report", help="compare finished runs")
    p_report.add_argument("run_dirs", nargs="+", help="run output directories")
    p_report.add_argument("--out", help="report directory")
    p_report.add_argument("--targets", default="0.5,0.7,0.9",
                          help="comma-separated accuracy targets")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
