"""Forecast accuracy metrics and benchmark aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import NonPositiveValue
from .temporal import Frequency, FrequencyKind

# Scaled-error seasonal period per data frequency (benchmark convention).
MASE_PERIOD_BY_KIND = {
    FrequencyKind.YEARLY: 1,
    FrequencyKind.QUARTERLY: 4,
    FrequencyKind.MONTHLY: 12,
    FrequencyKind.WEEKLY: 1,
    FrequencyKind.DAILY: 7,
    FrequencyKind.HOURLY: 24,
}


def mase_period(freq: Frequency) -> int:
    return MASE_PERIOD_BY_KIND.get(freq.kind, 1)


@dataclass
class MetricReport:
    mae: float
    rmse: float
    mape: float
    smape: float
    mase: float
    mape_skipped: int = 0
    mase_defined: bool = True


def compute_metrics(
    actuals: np.ndarray,
    forecasts: np.ndarray,
    train_series: np.ndarray,
    seasonal_period: int = 1,
) -> MetricReport:
    """Standard error metrics of a forecast against held-out actuals.

    MAPE skips (and counts) slots with a zero actual; the scaled error
    normalizes by the in-sample seasonal-naive MAE at ``seasonal_period``
    and is flagged undefined when that denominator is zero.  Slots where
    actual and forecast are both zero contribute zero to sMAPE.
    """
    a = np.asarray(actuals, dtype=float)
    f = np.asarray(forecasts, dtype=float)
    if len(a) != len(f):
        raise ValueError(f"length mismatch: {len(a)} actuals vs {len(f)} forecasts")
    train = np.asarray(train_series, dtype=float)
    err = f - a

    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err**2)))

    nonzero = a != 0
    skipped = int(np.sum(~nonzero))
    mape = (
        float(100.0 * np.mean(np.abs(err[nonzero] / a[nonzero])))
        if nonzero.any()
        else 100.0
    )

    denom = np.abs(a) + np.abs(f)
    ratio = np.zeros_like(denom)
    ok = denom > 0
    ratio[ok] = np.abs(err[ok]) / denom[ok]
    smape = float(200.0 * np.mean(ratio))

    period = max(int(seasonal_period), 1)
    if len(train) <= period:
        raise ValueError(
            f"training series ({len(train)}) must exceed the seasonal period ({period})"
        )
    naive_mae = float(np.mean(np.abs(train[period:] - train[:-period])))
    if naive_mae > 0:
        mase = mae / naive_mae
        defined = True
    else:
        mase = float("nan")
        defined = False

    return MetricReport(
        mae=mae,
        rmse=rmse,
        mape=mape,
        smape=smape,
        mase=mase,
        mape_skipped=skipped,
        mase_defined=defined,
    )


def geometric_mean_mase(values) -> float:
    """exp(mean(log(values))); every value must be strictly positive."""
    x = np.asarray(list(values), dtype=float)
    if len(x) == 0:
        raise NonPositiveValue("empty input")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise NonPositiveValue("geometric mean needs positive finite values")
    return float(np.exp(np.mean(np.log(x))))


def average_rank(matrix: dict[str, dict[str, float]]) -> dict[str, float]:
    """Average per-dataset rank of each model (ties share the mean rank).

    ``matrix`` maps dataset -> model -> score; datasets missing a model's
    entry rank only the models present there.
    """
    totals: dict[str, float] = {}
    counts: dict[str, int] = {}
    for scores in matrix.values():
        models = [m for m, v in scores.items() if v is not None and np.isfinite(v)]
        if not models:
            continue
        ranks = stats.rankdata([scores[m] for m in models], method="average")
        for model, rank in zip(models, ranks):
            totals[model] = totals.get(model, 0.0) + float(rank)
            counts[model] = counts.get(model, 0) + 1
    return {m: totals[m] / counts[m] for m in totals}
