"""Batch time-series forecasting and anomaly detection.

Fits an independent model per series through a sequential decomposition
pipeline (regularize, interpolate, holidays, spikes/dips, seasonality,
step changes, ARIMA trend) and exposes forecasting, per-component
explanation, and anomaly scoring over both history and horizon.
"""

from .config import PipelineConfig, RunConfig, config_from_mapping, load_config
from .pipeline import (
    ComponentDecomposition,
    FittedPipeline,
    ForecastResult,
    LimitsTransform,
    bundle_from_json,
    bundle_to_json,
    decompose,
    detect_anomalies,
    fit,
    forecast,
)
from .temporal import Frequency, FrequencyKind, RawSeries, RegularSeries, regularize

__all__ = [
    "ComponentDecomposition",
    "FittedPipeline",
    "ForecastResult",
    "Frequency",
    "FrequencyKind",
    "LimitsTransform",
    "PipelineConfig",
    "RawSeries",
    "RegularSeries",
    "RunConfig",
    "bundle_from_json",
    "bundle_to_json",
    "config_from_mapping",
    "decompose",
    "detect_anomalies",
    "fit",
    "forecast",
    "load_config",
    "regularize",
]

__version__ = "0.1.0"
