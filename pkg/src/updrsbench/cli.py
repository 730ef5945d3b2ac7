"""Command-line benchmark driver.

Builds an ExperimentConfig from flags (optionally seeded from a config file,
with flags taking precedence), runs the benchmark, writes the report to
stdout or --out, and optionally emits chart data and PNG charts.  Range
warnings and per-learner timings go to stderr.  Exit code 0 means every
selected learner produced a scored row.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .bench import (
    LEARNERS,
    REPORT_FORMATS,
    ExperimentConfig,
    parse_config,
    parse_override,
    render_chart_data,
    render_report,
    run_benchmark,
)
from .figures import save_figures


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="updrsbench",
        description="Train the eleven regression learners on a telemonitoring "
                    "table under a shared train/test split and report "
                    "correlation and error metrics per learner.")
    parser.add_argument("--config", metavar="PATH",
                        help="key-value config file; explicit flags override it")
    parser.add_argument("--data", metavar="PATH",
                        help="CSV export with the 22 telemonitoring columns")
    parser.add_argument("--target", metavar="NAME",
                        help="target column: total_UPDRS (default) or motor_UPDRS")
    parser.add_argument("--exclude", metavar="NAME", action="append", default=None,
                        help="drop a predictor column; repeatable")
    parser.add_argument("--seed", type=int, metavar="N",
                        help="master seed for the split and learner randomness")
    parser.add_argument("--train-fraction", type=float, metavar="F",
                        help="fraction of rows used for training (default 0.75)")
    parser.add_argument("--learners", metavar="LIST",
                        help="comma-separated learner keys (default: all)")
    parser.add_argument("--format", dest="report_format", choices=REPORT_FORMATS,
                        help="report format (default text)")
    parser.add_argument("--out", metavar="PATH",
                        help="write the report here instead of stdout")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="LEARNER.PARAM=VALUE",
                        help="hyperparameter override; repeatable")
    parser.add_argument("--chart-data", metavar="PATH",
                        help="also write plain columnar chart series here")
    parser.add_argument("--figures", metavar="DIR",
                        help="also render PNG charts into this directory")
    parser.add_argument("--list-learners", action="store_true",
                        help="print the learner registry and exit")
    return parser


def _list_learners() -> str:
    lines = []
    for spec in LEARNERS:
        parameters = ", ".join(spec.parameters) if spec.parameters else "-"
        lines.append(f"{spec.key:16} {spec.category:10} {spec.display_name:32} "
                     f"parameters: {parameters}")
    return "\n".join(lines) + "\n"


def assemble_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        config = parse_config(Path(args.config).read_text(encoding="utf-8"))
    else:
        if args.data is None:
            raise ValueError("--data is required (or provide it via --config)")
        config = ExperimentConfig(data_path=args.data)
    updates: dict = {}
    if args.config is not None and args.data is not None:
        updates["data_path"] = args.data
    if args.target is not None:
        updates["target"] = args.target
    if args.exclude is not None:
        updates["excluded"] = tuple(args.exclude)
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.train_fraction is not None:
        updates["train_fraction"] = args.train_fraction
    if args.learners is not None:
        selected = tuple(part.strip() for part in args.learners.split(",")
                         if part.strip())
        updates["learners"] = selected
    if args.report_format is not None:
        updates["report_format"] = args.report_format
    if args.out is not None:
        updates["output_path"] = args.out
    if args.overrides:
        parsed = tuple(parse_override(text) for text in args.overrides)
        updates["overrides"] = config.overrides + parsed
    return replace(config, **updates) if updates else config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_learners:
        sys.stdout.write(_list_learners())
        return 0
    try:
        config = assemble_config(args)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))

    try:
        result = run_benchmark(config)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for warning in result.range_warnings:
        print(f"warning: {warning}", file=sys.stderr)
    for outcome in result.outcomes:
        status = "ok" if outcome.succeeded else f"FAILED ({outcome.error})"
        print(f"{outcome.key}: {outcome.seconds:.2f}s {status}", file=sys.stderr)

    report = render_report(result)
    if config.output_path is not None:
        Path(config.output_path).write_text(report, encoding="utf-8")
        print(f"report written to {config.output_path}", file=sys.stderr)
    else:
        sys.stdout.write(report)

    if args.chart_data is not None:
        Path(args.chart_data).write_text(render_chart_data(result),
                                         encoding="utf-8")
        print(f"chart data written to {args.chart_data}", file=sys.stderr)
    if args.figures is not None:
        for path in save_figures(result, args.figures):
            print(f"figure written to {path}", file=sys.stderr)

    return 0 if result.all_succeeded else 1


if __name__ == "__main__":
    raise SystemExit(main())
