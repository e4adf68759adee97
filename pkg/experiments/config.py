"""
Experiment configs
------------------
JSON files under experiments/configs/. Unknown keys are rejected at every level;
relative paths resolve against the working directory (run from the repo root).

    {
      "name": "exp1",
      "seed": 42,
      "ohlcv_path": "data/raw/TSLA.csv",
      "output_dir": "results/exp1",
      "window": 30,
      "scaler_fit": "train",            # or "all"
      "target_scaling": "separate",     # or "close"
      "split_ratio": 0.8,
      "model_presets": ["gru", "lstm"],
      "units_override": {"gru": [32, 32, 16]},
      "train": {"learning_rate": 0.0001, "max_epochs": 250},
      "sentiment": {"mode": "lexicon"},   # default for variants that omit it
      "variants": [
        {"label": "Y", "price_only": true},
        {"label": "Y+T", "post_sources": [{"path": "data/raw/tweets.jsonl"}],
         "sentiment": {"mode": "external", "scores_path": "data/raw/tweet_scores.jsonl"}}
      ]
    }
"""

import copy
import hashlib
import json
import os
from dataclasses import dataclass, field, fields

from core.errors import StartupError, ValidationError
from features.frame import TARGET_SCALINGS
from models.presets import PRESET_NAMES
from models.training import TrainConfig

DEFAULT_LEXICON = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "lexicon", "finance.tsv")
CATEGORY_MODES = ("all", "executive", "general")
SENTIMENT_MODES = ("lexicon", "external")
SCALER_FITS = ("train", "all")


@dataclass(frozen=True)
class PostSourceConfig:
    path: str
    category_mode: str = "all"
    handles_path: str | None = None
    subreddits_path: str | None = None
    sample_size: int | None = None

    @property
    def splits_by_subreddit(self):
        return self.subreddits_path is not None


@dataclass(frozen=True)
class SentimentConfig:
    mode: str = "lexicon"
    lexicon_path: str | None = None
    scores_path: str | None = None

    @property
    def lexicon(self):
        return self.lexicon_path or DEFAULT_LEXICON


@dataclass(frozen=True)
class VariantConfig:
    label: str
    price_only: bool = False
    post_sources: tuple = ()
    sentiment: SentimentConfig = field(default_factory=SentimentConfig)

    @property
    def slug(self):
        """Label made safe for file names: 'Y+T_vader' -> 'Y_T_vader'."""
        return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in self.label)


@dataclass(frozen=True)
class SyntheticConfig:
    dir: str
    days: int = 250
    seed: int = 7


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    ohlcv_path: str
    output_dir: str
    variants: tuple
    seed: int = 42
    window: int = 30
    scaler_fit: str = "train"
    target_scaling: str = "separate"
    split_ratio: float = 0.8
    ewma_adjust: bool = True
    adjusted_r2_p: int | None = None
    model_presets: tuple = ("gru",)
    units_override: dict = field(default_factory=dict)
    train: TrainConfig = field(default_factory=TrainConfig)
    equalize_coverage: bool = False
    trim_trailing_gaps: bool = False
    n_jobs: int = 1
    synthetic: SyntheticConfig | None = None
    source_path: str | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def config_hash(self):
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def input_paths(self):
        """(description, path) for every file the run reads."""
        paths = [("ohlcv_path", self.ohlcv_path)]
        for variant in self.variants:
            for i, source in enumerate(variant.post_sources):
                where = f"variants[{variant.label}].post_sources[{i}]"
                paths.append((f"{where}.path", source.path))
                if source.handles_path:
                    paths.append((f"{where}.handles_path", source.handles_path))
                if source.subreddits_path:
                    paths.append((f"{where}.subreddits_path", source.subreddits_path))
            if not variant.price_only:
                if variant.sentiment.mode == "lexicon":
                    paths.append((f"variants[{variant.label}].sentiment.lexicon_path", variant.sentiment.lexicon))
                else:
                    paths.append((f"variants[{variant.label}].sentiment.scores_path", variant.sentiment.scores_path))
        return paths


def _take(obj, cls, where, required=()):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    allowed = {f.name for f in fields(cls)} - {"raw", "source_path"}
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ValidationError(f"{where}: unknown key(s) {', '.join(unknown)}")
    missing = [key for key in required if key not in obj]
    if missing:
        raise ValidationError(f"{where}: missing key(s) {', '.join(missing)}")
    return dict(obj)


def _sentiment(obj, where):
    data = _take(obj, SentimentConfig, where)
    config = SentimentConfig(**data)
    if config.mode not in SENTIMENT_MODES:
        raise ValidationError(f"{where}.mode: expected one of {', '.join(SENTIMENT_MODES)}, got '{config.mode}'")
    if config.mode == "external" and not config.scores_path:
        raise ValidationError(f"{where}: external sentiment needs 'scores_path'")
    return config


def _post_source(obj, where):
    data = _take(obj, PostSourceConfig, where, required=("path",))
    source = PostSourceConfig(**data)
    if source.category_mode not in CATEGORY_MODES:
        raise ValidationError(f"{where}.category_mode: expected one of {', '.join(CATEGORY_MODES)}")
    if source.handles_path and source.subreddits_path:
        raise ValidationError(f"{where}: give either handles_path or subreddits_path, not both")
    if source.category_mode != "all" and not (source.handles_path or source.subreddits_path):
        raise ValidationError(f"{where}: category_mode '{source.category_mode}' needs handles_path or subreddits_path")
    if source.sample_size is not None:
        if source.category_mode != "general":
            raise ValidationError(f"{where}: sample_size only applies to category_mode 'general'")
        if isinstance(source.sample_size, bool) or not isinstance(source.sample_size, int) or source.sample_size < 1:
            raise ValidationError(f"{where}.sample_size must be a positive integer")
    return source


def _variant(obj, where, default_sentiment):
    data = _take(obj, VariantConfig, where, required=("label",))
    sources = data.get("post_sources", [])
    if not isinstance(sources, list):
        raise ValidationError(f"{where}.post_sources: expected a list")
    data["post_sources"] = tuple(_post_source(s, f"{where}.post_sources[{i}]") for i, s in enumerate(sources))
    data["sentiment"] = _sentiment(data["sentiment"], f"{where}.sentiment") if "sentiment" in data else default_sentiment
    variant = VariantConfig(**data)
    if not variant.label or not isinstance(variant.label, str):
        raise ValidationError(f"{where}.label must be a non-empty string")
    if variant.price_only and variant.post_sources:
        raise ValidationError(f"{where}: a price-only variant takes no post_sources")
    if not variant.price_only and not variant.post_sources:
        raise ValidationError(f"{where}: needs at least one post source or price_only: true")
    return variant


def parse_config(raw, seed=None, output_dir=None, source_path=None):
    """Build an ExperimentConfig from a decoded JSON object; seed/output_dir override the file."""
    if not isinstance(raw, dict):
        raise ValidationError("config: expected a JSON object")
    raw = copy.deepcopy(raw)
    if seed is not None:
        raw["seed"] = int(seed)
    if output_dir is not None:
        raw["output_dir"] = output_dir

    top_fields = {f.name for f in fields(ExperimentConfig)} - {"raw", "source_path"} | {"sentiment"}
    unknown = sorted(set(raw) - top_fields)
    if unknown:
        raise ValidationError(f"config: unknown key(s) {', '.join(unknown)}")
    missing = [key for key in ("name", "ohlcv_path", "output_dir", "variants") if key not in raw]
    if missing:
        raise ValidationError(f"config: missing key(s) {', '.join(missing)}")

    data = {k: v for k, v in raw.items() if k != "sentiment"}
    default_sentiment = _sentiment(raw.get("sentiment", {}), "config.sentiment")
    if not isinstance(data["variants"], list) or not data["variants"]:
        raise ValidationError("config.variants: expected a non-empty list")
    data["variants"] = tuple(_variant(v, f"config.variants[{i}]", default_sentiment) for i, v in enumerate(data["variants"]))
    labels = [v.label for v in data["variants"]]
    slugs = [v.slug for v in data["variants"]]
    if len(set(labels)) != len(labels) or len(set(slugs)) != len(slugs):
        raise ValidationError(f"config.variants: labels must be unique (also after file-name cleanup): {labels}")

    train = _take(raw.get("train", {}), TrainConfig, "config.train")
    data["train"] = TrainConfig(**train)
    if "synthetic" in data and data["synthetic"] is not None:
        data["synthetic"] = SyntheticConfig(**_take(data["synthetic"], SyntheticConfig, "config.synthetic", required=("dir",)))

    presets = data.get("model_presets", ["gru"])
    if not isinstance(presets, list) or not presets:
        raise ValidationError("config.model_presets: expected a non-empty list")
    bad = [p for p in presets if p not in PRESET_NAMES]
    if bad:
        raise ValidationError(f"config.model_presets: unknown preset(s) {', '.join(bad)}")
    if len(set(presets)) != len(presets):
        raise ValidationError("config.model_presets: duplicate preset names")
    data["model_presets"] = tuple(presets)
    overrides = data.get("units_override", {})
    if not isinstance(overrides, dict) or set(overrides) - set(presets):
        raise ValidationError("config.units_override: expected {preset: [units...]} for listed presets")
    data["units_override"] = {k: tuple(v) for k, v in overrides.items()}

    config = ExperimentConfig(**data, source_path=source_path, raw=raw)
    if config.scaler_fit not in SCALER_FITS:
        raise ValidationError(f"config.scaler_fit: expected one of {', '.join(SCALER_FITS)}")
    if config.target_scaling not in TARGET_SCALINGS:
        raise ValidationError(f"config.target_scaling: expected one of {', '.join(TARGET_SCALINGS)}")
    if not 0.0 < config.split_ratio < 1.0:
        raise ValidationError(f"config.split_ratio must be in (0, 1), got {config.split_ratio}")
    if isinstance(config.window, bool) or not isinstance(config.window, int) or config.window < 1:
        raise ValidationError(f"config.window must be a positive integer, got {config.window}")
    if config.n_jobs == 0 or not isinstance(config.n_jobs, int):
        raise ValidationError("config.n_jobs must be a non-zero integer (-1 = all cores)")
    if config.adjusted_r2_p is not None and config.adjusted_r2_p < 0:
        raise ValidationError("config.adjusted_r2_p must be >= 0")
    if config.equalize_coverage:
        for variant in config.variants:
            for source in variant.post_sources:
                if source.category_mode == "general" and not (source.handles_path or source.subreddits_path):
                    raise ValidationError(f"variant '{variant.label}': equalize_coverage needs the executive list of each general source")
    return config


def load_config(path, seed=None, output_dir=None):
    if not os.path.isfile(path):
        raise StartupError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    return parse_config(raw, seed=seed, output_dir=output_dir, source_path=path)
