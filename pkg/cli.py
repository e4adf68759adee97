"""
Command line entry point
------------------------
    python cli.py experiment --config experiments/configs/synthetic_smoke.json
    python cli.py train --config experiments/configs/exp3.json --seed 7 --out results/exp3_seed7

Subcommands run the experiment pipeline up to a stage:
    ingest     bars.csv, posts_<variant>.jsonl
    score      scored_<variant>.jsonl
    featurize  features_<variant>.csv
    train      model_<variant>_<model>.npz, history_<variant>_<model>.csv
    evaluate   report.json / report.csv / plot_<variant>.csv from saved models
    experiment everything above in one go (trains, then evaluates)

Exit codes: 0 ok, 2 invalid input or config, 3 runtime failure (or any variant failed).
"""

import argparse
import logging
import sys
from datetime import datetime

from backtests.evaluate import print_report_table
from core.errors import ForecastError
from core.log import banner, fail, ok, setup_logging
from experiments.config import load_config
from experiments.runner import run_stage
from ingest.ohlcv import parse_ohlcv, summarize_bars

logger = logging.getLogger("cli")

COMMANDS = {
    "ingest": "parse prices and posts, write the cleaned inputs",
    "score": "score posts (lexicon or external logits)",
    "featurize": "build the daily feature frames",
    "train": "train every preset on every variant",
    "evaluate": "evaluate saved models and write reports",
    "experiment": "run the whole pipeline",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="cli.py", description="Sentiment-aware next-day close forecaster")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="experiment config (JSON)")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--out", default=None, help="override the config output_dir")
        cmd.add_argument("--log-dir", default=None, help="also write a timestamped log file here")
        cmd.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def _print_bars_summary(path):
    summary = summarize_bars(parse_ohlcv(path))
    print(f"\nPrice data: {summary['rows']} trading days ({summary.get('start')} to {summary.get('end')})")
    print(f"  Latest Close:  {summary.get('latest_close', float('nan')):>12.2f}")
    print(f"  Highest Close: {summary.get('highest_close', float('nan')):>12.2f}")
    print(f"  Lowest Close:  {summary.get('lowest_close', float('nan')):>12.2f}")
    for key in ("duplicate_dates", "non_positive_prices", "zero_volume_days"):
        count = summary.get(key, 0)
        (ok if count == 0 else fail)(f"{key.replace('_', ' ')}: {count}")


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, seed=args.seed, output_dir=args.out)
    except ForecastError as exc:
        setup_logging(args.log_level)
        fail(str(exc))
        return exc.exit_code

    log_file = setup_logging(args.log_level, args.log_dir)
    banner(f"{args.command.upper()}: {config.name}")
    print(f"Start Time: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print(f"Seed: {config.seed}   Output: {config.output_dir}")
    if log_file:
        print(f"Log: {log_file}")

    until = "evaluate" if args.command == "experiment" else args.command
    try:
        result = run_stage(config, until=until, from_checkpoints=args.command == "evaluate")
    except ForecastError as exc:
        fail(str(exc))
        return exc.exit_code
    except Exception as exc:
        logger.exception("Unexpected failure")
        fail(f"{type(exc).__name__}: {exc}")
        return 3

    if args.command == "ingest":
        _print_bars_summary(config.ohlcv_path)

    print()
    for variant in result.variants:
        if variant.failed:
            fail(f"{variant.label}: {variant.error}")
        else:
            ok(f"{variant.label}: done" + (f" ({variant.columns} feature columns)" if variant.columns else ""))
    if result.reports:
        print_report_table(result.reports)
    print(f"\nManifest: {result.manifest_path}")
    return 3 if result.failed else 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
