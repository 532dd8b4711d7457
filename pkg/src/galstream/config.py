"""Experiment configuration: INI-style config files and JSON manifests.

Every key has a default except the dataset source. The same resolved
configuration is written into ``run_manifest.json`` after a run, and that
manifest can be fed back to ``run`` to reproduce the outputs byte for byte.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .datasets import SyntheticConfig
from .exceptions import ConfigError
from .gcn import EMBEDDING_MODES, TrainConfig
from .metrics import PERFORMANCE_METRICS
from .strategies import STRATEGY_NAMES

SIGNIFICANCE_UNITS = ("day", "bootstrap_mean")


@dataclass(frozen=True)
class ExperimentConfig:
    source: str = "synthetic"
    name: str = "experiment"
    edges_path: str | None = None
    features_path: str | None = None
    labels_path: str | None = None
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    synthetic_seed: int = 1

    strategies: tuple[str, ...] = STRATEGY_NAMES
    initial_days: int = 6
    queries_per_day: int = 5
    bootstraps: int = 20
    holdout_fraction: float = 0.2
    base_seed: int = 0
    gap_thresholds: tuple[int, ...] = (1, 2, 3, 4, 5)
    reference_gap: int = 3
    rolling_window: int = 5
    embedding_mode: str = "model_based"
    tradeoff_metric: str = "accuracy"
    significance_unit: str = "day"
    workers: int = 1
    output_dir: str = "results"

    hidden_dim: int = 16
    learning_rate: float = 0.05
    epochs: int = 200
    pagerank_damping: float = 0.85

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            hidden_dim=self.hidden_dim,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
        )


def validate_config(config: ExperimentConfig) -> None:
    """Check every invariant that does not require reading the dataset files."""
    if config.source not in ("synthetic", "files"):
        raise ConfigError(f"dataset source must be 'synthetic' or 'files', got {config.source!r}")
    if config.source == "files":
        for key in ("edges_path", "features_path", "labels_path"):
            if not getattr(config, key):
                raise ConfigError(f"dataset source 'files' requires {key}")
    if not config.strategies:
        raise ConfigError("at least one strategy is required")
    for name in config.strategies:
        if name not in STRATEGY_NAMES:
            raise ConfigError(f"unknown strategy {name!r}; expected one of {STRATEGY_NAMES}")
    if len(set(config.strategies)) != len(config.strategies):
        raise ConfigError("strategies must not repeat")
    if config.initial_days < 1:
        raise ConfigError("initial_days must be at least 1")
    if config.base_seed < 0 or config.synthetic_seed < 0:
        raise ConfigError("seeds must be nonnegative")
    if config.queries_per_day < 1:
        raise ConfigError("queries_per_day must be at least 1")
    if config.bootstraps < 1:
        raise ConfigError("bootstraps must be at least 1")
    if not 0.0 < config.holdout_fraction < 1.0:
        raise ConfigError("holdout_fraction must lie strictly between 0 and 1")
    if not config.gap_thresholds or any(t < 1 for t in config.gap_thresholds):
        raise ConfigError("gap_thresholds must be a nonempty list of integers >= 1")
    if config.reference_gap < 1:
        raise ConfigError("reference_gap must be at least 1")
    if config.rolling_window < 1:
        raise ConfigError("rolling_window must be at least 1")
    if config.embedding_mode not in EMBEDDING_MODES:
        raise ConfigError(f"embedding_mode must be one of {EMBEDDING_MODES}")
    if config.tradeoff_metric not in PERFORMANCE_METRICS:
        raise ConfigError(f"tradeoff_metric must be one of {PERFORMANCE_METRICS}")
    if config.significance_unit not in SIGNIFICANCE_UNITS:
        raise ConfigError(f"significance_unit must be one of {SIGNIFICANCE_UNITS}")
    if config.workers < 1:
        raise ConfigError("workers must be at least 1")
    if config.hidden_dim < 1:
        raise ConfigError("hidden_dim must be at least 1")
    if config.learning_rate <= 0:
        raise ConfigError("learning_rate must be positive")
    if config.epochs < 0:
        raise ConfigError("epochs must be nonnegative")
    if not 0.0 < config.pagerank_damping < 1.0:
        raise ConfigError("pagerank_damping must lie strictly between 0 and 1")
    if config.source == "synthetic":
        _validate_against_dataset(
            config, config.synthetic.node_count, config.synthetic.days
        )


def _validate_against_dataset(config: ExperimentConfig, node_count: int, days: int) -> None:
    holdout = int(round(config.holdout_fraction * node_count))
    pool = node_count - holdout
    if holdout == 0 or pool == 0:
        raise ConfigError("holdout_fraction leaves an empty holdout or pool")
    if config.queries_per_day > pool:
        raise ConfigError(
            f"queries_per_day={config.queries_per_day} exceeds the pool size {pool}"
        )
    if config.initial_days + 2 > days:
        raise ConfigError(
            f"need initial_days + 2 <= total days "
            f"({config.initial_days} + 2 > {days})"
        )


def validate_against_dataset(config: ExperimentConfig, node_count: int, days: int) -> None:
    """Run-time invariants that need the loaded dataset's dimensions."""
    _validate_against_dataset(config, node_count, days)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_SECTION_KEYS = {
    "dataset": {"source", "name", "edges", "features", "labels"},
    "synthetic": {
        "nodes",
        "communities",
        "days",
        "feature_dim",
        "regime_period",
        "p_in",
        "p_out",
        "noise",
        "offset_scale",
        "seed",
    },
    "experiment": {
        "strategies",
        "initial_days",
        "queries_per_day",
        "bootstraps",
        "holdout_fraction",
        "base_seed",
        "gap_thresholds",
        "reference_gap",
        "rolling_window",
        "embedding_mode",
        "tradeoff_metric",
        "significance_unit",
        "workers",
        "output_dir",
    },
    "model": {"hidden_dim", "learning_rate", "epochs", "pagerank_damping"},
}


def _get(parser, section, key, cast, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except (ValueError, TypeError):
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid value") from None


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(part.strip()) for part in raw.split(",") if part.strip())


def _strategy_list(raw: str) -> tuple[str, ...]:
    parts = [part.strip() for part in raw.split(",") if part.strip()]
    if parts == ["all"]:
        return STRATEGY_NAMES
    return tuple(parts)


def load_config(path: str | Path) -> ExperimentConfig:
    """Load an INI config file or a run manifest (JSON)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        with open(path) as fh:
            payload = json.load(fh)
        return config_from_dict(payload.get("config", payload))
    return _load_ini(path)


def _load_ini(path: Path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser.options(section):
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    if not parser.has_option("dataset", "source"):
        raise ConfigError("[dataset] source is required (synthetic or files)")

    defaults = ExperimentConfig()
    synth_defaults = SyntheticConfig()
    name = _get(parser, "dataset", "name", str, defaults.name)
    try:
        synthetic = SyntheticConfig(
            node_count=_get(parser, "synthetic", "nodes", int, synth_defaults.node_count),
            community_count=_get(
                parser, "synthetic", "communities", int, synth_defaults.community_count
            ),
            days=_get(parser, "synthetic", "days", int, synth_defaults.days),
            feature_dim=_get(
                parser, "synthetic", "feature_dim", int, synth_defaults.feature_dim
            ),
            regime_period=_get(
                parser, "synthetic", "regime_period", int, synth_defaults.regime_period
            ),
            p_in=_get(parser, "synthetic", "p_in", float, synth_defaults.p_in),
            p_out=_get(parser, "synthetic", "p_out", float, synth_defaults.p_out),
            noise=_get(parser, "synthetic", "noise", float, synth_defaults.noise),
            offset_scale=_get(
                parser, "synthetic", "offset_scale", float, synth_defaults.offset_scale
            ),
            name=name,
        )
    except ValueError as exc:
        raise ConfigError(f"[synthetic] {exc}") from None

    config = ExperimentConfig(
        source=_get(parser, "dataset", "source", str, "synthetic"),
        name=name,
        edges_path=_get(parser, "dataset", "edges", str, None),
        features_path=_get(parser, "dataset", "features", str, None),
        labels_path=_get(parser, "dataset", "labels", str, None),
        synthetic=synthetic,
        synthetic_seed=_get(parser, "synthetic", "seed", int, defaults.synthetic_seed),
        strategies=_get(
            parser, "experiment", "strategies", _strategy_list, defaults.strategies
        ),
        initial_days=_get(parser, "experiment", "initial_days", int, defaults.initial_days),
        queries_per_day=_get(
            parser, "experiment", "queries_per_day", int, defaults.queries_per_day
        ),
        bootstraps=_get(parser, "experiment", "bootstraps", int, defaults.bootstraps),
        holdout_fraction=_get(
            parser, "experiment", "holdout_fraction", float, defaults.holdout_fraction
        ),
        base_seed=_get(parser, "experiment", "base_seed", int, defaults.base_seed),
        gap_thresholds=_get(
            parser, "experiment", "gap_thresholds", _int_list, defaults.gap_thresholds
        ),
        reference_gap=_get(parser, "experiment", "reference_gap", int, defaults.reference_gap),
        rolling_window=_get(
            parser, "experiment", "rolling_window", int, defaults.rolling_window
        ),
        embedding_mode=_get(
            parser, "experiment", "embedding_mode", str, defaults.embedding_mode
        ),
        tradeoff_metric=_get(
            parser, "experiment", "tradeoff_metric", str, defaults.tradeoff_metric
        ),
        significance_unit=_get(
            parser, "experiment", "significance_unit", str, defaults.significance_unit
        ),
        workers=_get(parser, "experiment", "workers", int, defaults.workers),
        output_dir=_get(parser, "experiment", "output_dir", str, defaults.output_dir),
        hidden_dim=_get(parser, "model", "hidden_dim", int, defaults.hidden_dim),
        learning_rate=_get(parser, "model", "learning_rate", float, defaults.learning_rate),
        epochs=_get(parser, "model", "epochs", int, defaults.epochs),
        pagerank_damping=_get(
            parser, "model", "pagerank_damping", float, defaults.pagerank_damping
        ),
    )
    validate_config(config)
    return config


def config_to_dict(config: ExperimentConfig) -> dict:
    payload = asdict(config)
    payload["strategies"] = list(config.strategies)
    payload["gap_thresholds"] = list(config.gap_thresholds)
    return payload


def config_from_dict(payload: dict) -> ExperimentConfig:
    payload = dict(payload)
    try:
        synthetic = SyntheticConfig(**payload.pop("synthetic"))
        config = ExperimentConfig(
            synthetic=synthetic,
            **{
                **payload,
                "strategies": tuple(payload["strategies"]),
                "gap_thresholds": tuple(payload["gap_thresholds"]),
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid manifest config: {exc}") from None
    validate_config(config)
    return config


def override_output_dir(config: ExperimentConfig, output_dir: str | None) -> ExperimentConfig:
    if output_dir is None:
        return config
    return replace(config, output_dir=str(output_dir))
