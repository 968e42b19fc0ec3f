"""Command-line front end for campaigns, reports and calibration.

Exit codes: 0 on success, 1 for configuration problems (bad flags,
unreadable or invalid config, unknown testbed), 2 for runtime failures.
"""

import argparse
import json
import logging
import os
import sys

from .harness import (
    CampaignConfig,
    ConfigError,
    export_results,
    run_campaign,
    summarize_results,
)
from .testbeds import TESTBED_NAMES, calibrate

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orderedbo",
        description="Ordering-aware multi-objective Bayesian optimization "
                    "campaigns on synthetic testbeds.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a campaign from a JSON config")
    run.add_argument("--config", required=True,
                     help="path to a JSON campaign config")
    run.add_argument("--modes", nargs="+", default=None,
                     help="override acquisition modes")
    run.add_argument("--trials", type=int, default=None,
                     help="override trial count")
    run.add_argument("--seed", type=int, default=None,
                     help="override master seed")
    run.add_argument("--out", default=None,
                     help="override output directory")

    report = sub.add_parser("report",
                            help="aggregate campaign CSVs to a summary")
    report.add_argument("--in", dest="in_dir", required=True,
                        help="campaign output directory")
    report.add_argument("--out", required=True,
                        help="summary CSV destination")

    thresholds = sub.add_parser(
        "thresholds", help="recompute testbed calibration constants")
    thresholds.add_argument("--testbed", required=True,
                            choices=list(TESTBED_NAMES))
    thresholds.add_argument("--samples", type=int, default=10000)
    thresholds.add_argument("--seed", type=int, default=20260814)
    return parser


def _load_config(args) -> CampaignConfig:
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config!r} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    if args.modes is not None:
        data["modes"] = args.modes
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.out is not None:
        data["output_dir"] = args.out
    return CampaignConfig.from_dict(data)


def _cmd_run(args) -> int:
    config = _load_config(args)
    record = run_campaign(config)
    paths = export_results(record)
    for path in paths:
        print(path)
    return 0


def _cmd_report(args) -> int:
    if not os.path.isfile(os.path.join(args.in_dir, "iterations.csv")):
        raise ConfigError(
            f"no iterations.csv under {args.in_dir!r}; not a campaign "
            "output directory")
    print(summarize_results(args.in_dir, args.out))
    return 0


def _cmd_thresholds(args) -> int:
    if args.samples < 1 or args.seed < 0:
        raise ConfigError("samples must be positive and seed non-negative")
    result = calibrate(args.testbed, n_samples=args.samples, seed=args.seed)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    handlers = {"run": _cmd_run, "report": _cmd_report,
                "thresholds": _cmd_thresholds}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map any failure to exit 2
        print(f"runtime failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
