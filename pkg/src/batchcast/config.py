"""Model and batch-run configuration.

Option names mirror the engine's model-option surface, lower-cased, so a
config file is a flat JSON or TOML document like::

    {"horizon": 30, "auto_arima_max_order": 2, "holiday_region": "US"}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from typing import Any, Optional

from .errors import ConfigError

MODEL_TYPES = ("ARIMA_PLUS", "ARIMA_PLUS_XREG")
DATA_FREQUENCIES = (
    "AUTO_FREQUENCY",
    "PER_MINUTE",
    "HOURLY",
    "DAILY",
    "WEEKLY",
    "MONTHLY",
    "QUARTERLY",
    "YEARLY",
)


@dataclass
class PipelineConfig:
    """Per-series modeling options; defaults fit most data unattended."""

    model_type: str = "ARIMA_PLUS"
    horizon: int = 30
    auto_arima: bool = True
    auto_arima_max_order: int = 2
    auto_arima_min_order: int = 0
    non_seasonal_order: Optional[tuple[int, int, int]] = None
    data_frequency: str = "AUTO_FREQUENCY"
    include_drift: Optional[bool] = None
    holiday_region: Optional[list[str]] = None
    clean_spikes_and_dips: bool = True
    adjust_step_changes: bool = True
    time_series_length_fraction: Optional[float] = None
    min_time_series_length: int = 20
    max_time_series_length: int = 1024
    trend_smoothing_window_size: Optional[int] = None
    decompose_time_series: bool = True
    forecast_limit_lower_bound: Optional[float] = None
    forecast_limit_upper_bound: Optional[float] = None
    seasonalities: Optional[list[str]] = None
    l2_reg: float = 0.0
    # extensions beyond the core option list
    time_zone: Optional[str] = None
    holidays_after_cleaning: bool = False
    spike_second_pass: bool = False
    stage_order: Optional[list[str]] = None
    spike_z_threshold: float = 5.0
    change_z_threshold: float = 5.0
    chow_alpha: float = 0.01

    def validate(self) -> "PipelineConfig":
        if self.model_type not in MODEL_TYPES:
            raise ConfigError(f"model_type must be one of {MODEL_TYPES}")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.auto_arima_min_order > self.auto_arima_max_order:
            raise ConfigError("auto_arima_min_order exceeds auto_arima_max_order")
        if self.auto_arima_max_order < 0:
            raise ConfigError("auto_arima_max_order must be >= 0")
        if self.data_frequency.upper() not in DATA_FREQUENCIES:
            raise ConfigError(f"data_frequency must be one of {DATA_FREQUENCIES}")
        if not self.auto_arima and self.non_seasonal_order is None:
            raise ConfigError("non_seasonal_order is required when auto_arima is off")
        if self.non_seasonal_order is not None:
            order = tuple(int(v) for v in self.non_seasonal_order)
            if len(order) != 3 or min(order) < 0:
                raise ConfigError("non_seasonal_order must be three non-negative ints")
            self.non_seasonal_order = order
        if self.min_time_series_length < 3:
            raise ConfigError("min_time_series_length must be >= 3")
        if self.max_time_series_length < self.min_time_series_length:
            raise ConfigError("max_time_series_length below min_time_series_length")
        frac = self.time_series_length_fraction
        if frac is not None and not 0.0 < frac <= 1.0:
            raise ConfigError("time_series_length_fraction must lie in (0, 1]")
        window = self.trend_smoothing_window_size
        if window is not None and window < 3:
            raise ConfigError("trend_smoothing_window_size must be >= 3")
        lo = self.forecast_limit_lower_bound
        hi = self.forecast_limit_upper_bound
        if lo is not None and hi is not None and lo >= hi:
            raise ConfigError("forecast limit lower bound must be below upper bound")
        if self.l2_reg < 0:
            raise ConfigError("l2_reg must be >= 0")
        return self


@dataclass
class RunConfig:
    """Batch front-end options on top of the per-series pipeline config."""

    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    time_series_timestamp_col: str = "timestamp"
    time_series_data_col: str = "value"
    time_series_id_col: list[str] = field(default_factory=list)
    workers: int = 1
    confidence_level: float = 0.95
    anomaly_threshold: float = 0.95
    strict: bool = False
    custom_holiday_file: Optional[str] = None

    def validate(self) -> "RunConfig":
        self.pipeline.validate()
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0.0 < self.confidence_level < 1.0:
            raise ConfigError("confidence_level must lie in (0, 1)")
        if not 0.0 < self.anomaly_threshold < 1.0:
            raise ConfigError("anomaly_threshold must lie in (0, 1)")
        return self


_PIPELINE_KEYS = {f.name for f in fields(PipelineConfig)}
_RUN_KEYS = {f.name for f in fields(RunConfig)} - {"pipeline"}
_LIST_KEYS = {"holiday_region", "seasonalities", "stage_order", "time_series_id_col"}


def _normalize(key: str, value: Any) -> Any:
    if value is None:
        return None
    if key in _LIST_KEYS and isinstance(value, str):
        return [value]
    if key == "non_seasonal_order":
        return tuple(int(v) for v in value)
    return value


def config_from_mapping(mapping: dict[str, Any]) -> RunConfig:
    """Build a validated RunConfig from a flat option dict (case-insensitive)."""
    pipeline_kwargs: dict[str, Any] = {}
    run_kwargs: dict[str, Any] = {}
    for raw_key, value in mapping.items():
        key = raw_key.lower()
        if key in _PIPELINE_KEYS:
            pipeline_kwargs[key] = _normalize(key, value)
        elif key in _RUN_KEYS:
            run_kwargs[key] = _normalize(key, value)
        else:
            raise ConfigError(f"unknown option {raw_key!r}")
    run = RunConfig(pipeline=PipelineConfig(**pipeline_kwargs), **run_kwargs)
    return run.validate()


def load_config(path: str) -> RunConfig:
    """Read a JSON or TOML config file."""
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib

        with open(path, "rb") as handle:
            mapping = tomllib.load(handle)
    else:
        with open(path, "r", encoding="utf-8") as handle:
            mapping = json.load(handle)
    if not isinstance(mapping, dict):
        raise ConfigError("config file must hold a single table/object")
    return config_from_mapping(mapping)


def with_overrides(run: RunConfig, **kwargs: Any) -> RunConfig:
    """Copy a run config with CLI-level overrides applied."""
    pipeline_updates = {k: v for k, v in kwargs.items() if k in _PIPELINE_KEYS and v is not None}
    run_updates = {k: v for k, v in kwargs.items() if k in _RUN_KEYS and v is not None}
    new_pipeline = replace(run.pipeline, **pipeline_updates)
    return replace(run, pipeline=new_pipeline, **run_updates).validate()
