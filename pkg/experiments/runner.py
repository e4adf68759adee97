"""
Experiment runner
-----------------
For each dataset variant of a config:

    posts -> dedup -> executive/general split (+ sampling, + equalization)
          -> sentiment scores -> daily means -> trading-day alignment -> spline imputation
          -> feature frame (24 columns, or 9 for price-only) -> scaling -> windows
          -> train every preset -> evaluate in price units

and write report.json / report.csv / plot_<variant>.csv / history_<variant>_<model>.csv /
posts_per_day_<variant>.csv / manifest.json (with per-variant dataset counts) into the
output directory. The CLI stages stop the same pipeline
early (`until`) and write that stage's intermediate files instead.

A failing variant is recorded in the manifest; the others still run.
"""

import logging
import os
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import pandas as pd
from joblib import Parallel, delayed

from backtests.evaluate import evaluate_model, write_report
from core.errors import StartupError, ValidationError
from core.io import write_csv_atomic, write_json_atomic
from core.seeds import derive_seed
from experiments.plots import emit_plot_series
from experiments.synthetic import generate_synthetic_market, write_synthetic_market
from features.daily import aggregate_daily, align_to_trading_days, equalize_coverage, impute_spline
from features.frame import (
    apply_scaler,
    assemble_feature_frame,
    chrono_split,
    fit_scaler,
    make_windows,
    price_only_frame,
    split_windows,
    write_feature_frame,
)
from ingest.ohlcv import parse_ohlcv, serialize_ohlcv
from ingest.posts import dedup_posts, parse_handle_list, parse_posts, partition_posts, partition_reddit_posts, write_posts
from models.checkpoint import load_checkpoint, save_checkpoint
from models.network import init_parameters
from models.presets import build_preset
from models.training import train, write_history
from sentiment.external import attach_external_scores, parse_external_scores, write_scored_posts
from sentiment.lexicon import load_lexicon, score_posts

logger = logging.getLogger(__name__)

STAGES = ("ingest", "score", "featurize", "train", "evaluate")
POST_CATEGORIES = ("executive", "general", "unassigned")


@dataclass
class PreparedData:
    frame: object
    scaler: object
    train: object
    test: object
    target_dates: pd.DatetimeIndex
    ranges: dict
    p: int


@dataclass
class VariantResult:
    label: str
    status: str = "ok"
    error: str | None = None
    error_type: str | None = None
    columns: int | None = None
    posts: int | None = None
    stats: dict = field(default_factory=dict)
    ranges: dict = field(default_factory=dict)
    models: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    @property
    def failed(self):
        return self.status != "ok"


@dataclass
class RunResult:
    stage: str
    variants: list
    reports: list
    output_dir: str
    manifest_path: str

    @property
    def failed(self):
        return [v for v in self.variants if v.failed]


def _out(config, name):
    return os.path.join(config.output_dir, name)


def _span(dates):
    return [pd.Timestamp(dates[0]).date().isoformat(), pd.Timestamp(dates[-1]).date().isoformat()]


def materialize_synthetic(config):
    """Write the generated market files named by the config's synthetic section."""
    if config.synthetic is None:
        return None
    market = generate_synthetic_market(config.synthetic.days, config.synthetic.seed)
    return write_synthetic_market(market, config.synthetic.dir)


def checkpoint_path(config, variant, model):
    return _out(config, f"model_{variant.slug}_{model}.npz")


def check_inputs(config, need_checkpoints=False):
    """Fail before any output exists if a referenced file is missing."""
    missing = [f"{path} ({what})" for what, path in config.input_paths() if not path or not os.path.isfile(path)]
    if need_checkpoints:
        for variant in config.variants:
            for model in config.model_presets:
                path = checkpoint_path(config, variant, model)
                if not os.path.isfile(path):
                    missing.append(f"{path} (checkpoint; run 'train' first)")
    if missing:
        raise StartupError("missing input file(s): " + "; ".join(missing))


# Stage 1: posts

@dataclass
class PostTally:
    posts: int = 0
    kept: int = 0
    per_day: Counter = field(default_factory=Counter)

    def add(self, posts):
        self.per_day.update((post.date, post.category.value) for post in posts)

    def frame(self):
        """Posts per calendar day and category, one row per day that has any."""
        counts = pd.Series(self.per_day, dtype="int64")
        if counts.empty:
            return pd.DataFrame(columns=["date", *POST_CATEGORIES])
        table = counts.unstack(fill_value=0).reindex(columns=list(POST_CATEGORIES), fill_value=0)
        table.index = [day.isoformat() for day in table.index]
        return table.sort_index().rename_axis("date").reset_index()


def collect_posts(config, variant, tally=None):
    """Posts of one variant; `tally`, if given, receives the per-source counts."""
    tally = tally if tally is not None else PostTally()
    selected = []
    for i, source in enumerate(variant.post_sources):
        posts = dedup_posts(parse_posts(source.path))
        tally.posts += len(posts)
        if source.category_mode == "all":
            tally.add(posts)
            selected.extend(posts)
            continue

        listing = parse_handle_list(source.subreddits_path or source.handles_path)
        split = partition_reddit_posts if source.splits_by_subreddit else partition_posts
        seed = derive_seed(config.seed, f"sample/{variant.label}/{i}")
        executive, general = split(posts, listing, source.sample_size, seed)
        tally.add(executive)
        tally.add(general)
        if source.category_mode == "executive":
            chosen = executive
        else:
            chosen = general
            if config.equalize_coverage:
                chosen = equalize_coverage(general, {post.date for post in executive})
                logger.info("[%s] equalized general posts to executive days: %d -> %d",
                            variant.label, len(general), len(chosen))
        logger.info("[%s] source %d: %d executive, %d general, kept %d (%s)",
                    variant.label, i, len(executive), len(general), len(chosen), source.category_mode)
        selected.extend(chosen)

    ids = [post.id for post in selected]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"variant '{variant.label}': post ids repeat across sources")
    if not selected:
        raise ValidationError(f"variant '{variant.label}': no posts left after filtering")
    tally.kept = len(selected)
    return selected


# Stage 2: scores

def score_variant(variant, posts):
    if variant.sentiment.mode == "lexicon":
        return score_posts(posts, load_lexicon(variant.sentiment.lexicon))
    return attach_external_scores(posts, parse_external_scores(variant.sentiment.scores_path))


# Stage 3: features

def build_frame(config, variant, bars, scored=None):
    """Feature frame, the bars it was built from, and (days with posts, days without) or None."""
    if variant.price_only:
        return price_only_frame(bars, adjust=config.ewma_adjust), bars, None
    daily = aggregate_daily(scored)
    aligned = align_to_trading_days(daily, bars, trim_end=config.trim_trailing_gaps)
    with_posts = sum(entry.observed for entry in aligned)
    imputed = impute_spline(aligned)
    by_date = {bar.date: bar for bar in bars}
    used_bars = [by_date[entry.date] for entry in imputed]
    frame = assemble_feature_frame(used_bars, imputed, adjust=config.ewma_adjust)
    return frame, used_bars, (with_posts, len(aligned) - with_posts)


def prepare_windows(config, frame, bars):
    """Scale, window and split; test windows may reach back into the train range for history."""
    train_rows, test_rows = chrono_split(frame, config.split_ratio)
    last_train = train_rows.dates[-1]
    fit_end = last_train if config.scaler_fit == "train" else frame.dates[-1]
    scaler = fit_scaler(frame, (frame.dates[0], fit_end), config.target_scaling)
    windows = make_windows(apply_scaler(frame, scaler), config.window)
    train_windows, test_windows = split_windows(windows, last_train)
    if len(train_windows) == 0 or len(test_windows) == 0:
        raise ValidationError(
            f"window {config.window} leaves {len(train_windows)} train / {len(test_windows)} test windows"
        )
    p = config.adjusted_r2_p if config.adjusted_r2_p is not None else len(frame.column_names)
    if len(test_windows) <= p + 1:
        raise ValidationError(
            f"adjusted R² undefined: {len(test_windows)} test windows must exceed p+1={p + 1}"
        )

    bar_dates = pd.DatetimeIndex([pd.Timestamp(bar.date) for bar in bars])
    next_day = dict(zip(bar_dates[:-1], bar_dates[1:]))
    target_dates = pd.DatetimeIndex([next_day[d] for d in test_windows.end_dates])
    ranges = {
        "frame": _span(frame.dates),
        "train": _span(train_rows.dates),
        "test": _span(test_rows.dates),
        "scaler_fit": [d.isoformat() for d in scaler.fit_range],
        "test_targets": _span(target_dates),
    }
    return PreparedData(frame, scaler, train_windows, test_windows, target_dates, ranges, p)


# Stage 4-5: models

def train_models(config, variant, prepared):
    trained = {}
    for name in config.model_presets:
        spec = build_preset(name, config.units_override.get(name))
        tag = f"{variant.label}/{name}"
        params = init_parameters(spec, prepared.train.samples.shape[2], derive_seed(config.seed, f"init/{tag}"),
                                 window=config.window)
        train_config = replace(config.train, seed=derive_seed(config.seed, f"train/{tag}"))
        params, history = train(spec, prepared.train, train_config, params=params)
        write_history(history, _out(config, f"history_{variant.slug}_{name}.csv"))
        save_checkpoint(checkpoint_path(config, variant, name), spec, params, train_config.seed)
        trained[name] = (spec, params, history)
    return trained


def load_models(config, variant):
    loaded = {}
    for name in config.model_presets:
        spec = build_preset(name, config.units_override.get(name))
        stored, params, _ = load_checkpoint(checkpoint_path(config, variant, name), spec)
        loaded[name] = (stored, params, None)
    return loaded


def evaluate_models(config, variant, prepared, models):
    reports = [
        evaluate_model(spec, params, prepared.test, prepared.scaler, prepared.p, variant.label, name)
        for name, (spec, params, _) in models.items()
    ]
    emit_plot_series(
        reports[0].actual,
        {report.model_label: report.predicted for report in reports},
        prepared.target_dates,
        _out(config, f"plot_{variant.slug}.csv"),
    )
    return reports


def run_variant(config, variant, bars, until="evaluate", from_checkpoints=False):
    """Run one variant up to `until`; errors are caught and recorded, never raised."""
    result = VariantResult(variant.label)
    try:
        scored = None
        if not variant.price_only:
            tally = PostTally()
            posts = collect_posts(config, variant, tally)
            result.posts = len(posts)
            result.stats.update(posts=tally.posts, posts_kept=tally.kept)
            write_csv_atomic(_out(config, f"posts_per_day_{variant.slug}.csv"), tally.frame(), index=False)
            if until == "ingest":
                write_posts(posts, _out(config, f"posts_{variant.slug}.jsonl"))
                return result
            scored = score_variant(variant, posts)
            if until == "score":
                write_scored_posts(scored, _out(config, f"scored_{variant.slug}.jsonl"))
                return result
        elif until in ("ingest", "score"):
            return result

        frame, used_bars, coverage = build_frame(config, variant, bars, scored)
        result.stats["days_with_prices"] = len(used_bars)
        if coverage is not None:
            result.stats.update(days_with_posts=coverage[0], days_without_posts=coverage[1])
        result.columns = len(frame.column_names)
        if until == "featurize":
            write_feature_frame(frame, _out(config, f"features_{variant.slug}.csv"))
            result.ranges = {"frame": _span(frame.dates)}
            return result

        prepared = prepare_windows(config, frame, used_bars)
        result.ranges = prepared.ranges
        models = load_models(config, variant) if from_checkpoints else train_models(config, variant, prepared)
        for name, (spec, _, history) in models.items():
            entry = {"model": name, "layers": spec.describe(), "checkpoint": os.path.basename(checkpoint_path(config, variant, name))}
            if history is not None:
                entry.update(epochs=history.epochs, best_epoch=history.best_epoch,
                             best_val_loss=history.val_loss[history.best_epoch - 1])
            result.models.append(entry)
        if until == "train":
            return result

        result.reports = evaluate_models(config, variant, prepared, models)
    except Exception as exc:
        logger.error("[%s] variant failed: %s", variant.label, exc)
        result.status = "failed"
        result.error = str(exc)
        result.error_type = type(exc).__name__
    return result


def _manifest(config, stage, results, bars, started):
    return {
        "name": config.name,
        "stage": stage,
        "seed": config.seed,
        "config_path": config.source_path,
        "config_hash": config.config_hash(),
        "started_at": started,
        "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "ohlcv": {"path": config.ohlcv_path, "rows": len(bars), "range": _span([b.date for b in bars])},
        "variants": [
            {
                "label": r.label,
                "status": r.status,
                "error": r.error,
                "error_type": r.error_type,
                "posts": r.posts,
                "stats": r.stats,
                "columns": r.columns,
                "ranges": r.ranges,
                "models": r.models,
            }
            for r in results
        ],
    }


def run_stage(config, until="evaluate", from_checkpoints=False):
    """Run every variant up to `until` and write that stage's files plus manifest.json."""
    if until not in STAGES:
        raise ValidationError(f"unknown stage '{until}', expected one of {', '.join(STAGES)}")
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    materialize_synthetic(config)
    check_inputs(config, need_checkpoints=from_checkpoints)
    bars = parse_ohlcv(config.ohlcv_path)
    if not bars:
        raise ValidationError(f"{config.ohlcv_path}: no price rows")

    os.makedirs(config.output_dir, exist_ok=True)
    if until == "ingest":
        serialize_ohlcv(bars, _out(config, "bars.csv"))

    if config.n_jobs == 1 or len(config.variants) == 1:
        results = [run_variant(config, v, bars, until, from_checkpoints) for v in config.variants]
    else:
        # joblib keeps results in submission order
        results = Parallel(n_jobs=config.n_jobs)(
            delayed(run_variant)(config, v, bars, until, from_checkpoints) for v in config.variants
        )

    reports = [report for result in results for report in result.reports]
    if until == "evaluate":
        write_report(reports, _out(config, "report.json"), _out(config, "report.csv"))
    manifest_path = _out(config, "manifest.json")
    write_json_atomic(manifest_path, _manifest(config, until, results, bars, started))
    return RunResult(until, results, reports, config.output_dir, manifest_path)


def run_experiment(config):
    """Full pipeline for every variant: train, evaluate, report."""
    return run_stage(config, until="evaluate")
