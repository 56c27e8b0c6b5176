"""Per-series orchestration: fit, forecast, decompose, score anomalies.

Stages run sequentially, each consuming the previous stage's output
series: gap interpolation, holiday effects, spike/dip cleaning, seasonal
extraction, step-change adjustment, then ARIMA trend modeling on the most
recent slots.  Every removed piece is kept as an additive component, so
history components sum exactly to the (interpolated) input and future
components sum exactly to the point forecast.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from datetime import date, datetime, timedelta
from typing import Any, Optional, Sequence

import numpy as np
from scipy.stats import norm

from . import arima as ar
from . import breaks as br
from . import holidays as hol
from . import seasonal as se
from . import spikes as sp
from .config import PipelineConfig
from .errors import (
    InvalidConfidence,
    InvalidThreshold,
    NoOccurrences,
    PipelineStageError,
    TooShort,
    ValueOutsideLimits,
)
from .gapfill import MissingMask, SmoothParams, interpolate, _loess_window
from .temporal import (
    Frequency,
    IndexBasis,
    RegularSeries,
    _LOCAL_EPOCH,
    micros_to_datetime,
    slots_per_year,
)

DEFAULT_STAGES = ("holidays", "spikes", "seasonality", "steps")
_LIMIT_EPS_FRACTION = 1e-6


# ---------------------------------------------------------------------------
# Forecast limits (scaled logit transform)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitsTransform:
    """Open interval (lower, upper) the series must stay inside."""

    lower: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self):
        if self.lower is not None and self.upper is not None:
            if self.lower >= self.upper:
                raise ValueError("lower limit must be below upper limit")

    @property
    def active(self) -> bool:
        return self.lower is not None or self.upper is not None

    @property
    def epsilon(self) -> float:
        if self.lower is not None and self.upper is not None:
            return _LIMIT_EPS_FRACTION * (self.upper - self.lower)
        anchor = self.lower if self.lower is not None else self.upper
        return _LIMIT_EPS_FRACTION * max(1.0, abs(anchor))

    @classmethod
    def from_config(cls, config: PipelineConfig) -> Optional["LimitsTransform"]:
        lower = config.forecast_limit_lower_bound
        upper = config.forecast_limit_upper_bound
        if lower is None and upper is None:
            return None
        return cls(lower, upper)


def apply_limits(values, limits: LimitsTransform) -> np.ndarray:
    """Map (lower, upper) onto the real line.

    Two-sided: ``log((x - a) / (b - x))``; one-sided uses the plain log
    distance to the bound.  Values within epsilon of a bound are nudged
    inside; values beyond a bound raise.
    """
    x = np.array(values, dtype=float)
    a, b = limits.lower, limits.upper
    eps = limits.epsilon
    finite = np.isfinite(x)
    if a is not None and np.any(x[finite] < a - eps):
        raise ValueOutsideLimits(f"value below lower limit {a}")
    if b is not None and np.any(x[finite] > b + eps):
        raise ValueOutsideLimits(f"value above upper limit {b}")
    if a is not None:
        x = np.maximum(x, a + eps)
    if b is not None:
        x = np.minimum(x, b - eps)
    if a is not None and b is not None:
        return np.log((x - a) / (b - x))
    if a is not None:
        return np.log(x - a)
    return np.log(b - x)


def invert_limits(values, limits: LimitsTransform) -> np.ndarray:
    """Inverse of :func:`apply_limits`."""
    y = np.array(values, dtype=float)
    a, b = limits.lower, limits.upper
    if a is not None and b is not None:
        # (b - a) e^y / (1 + e^y) + a, computed stably for large |y|
        out = np.empty_like(y)
        pos = y >= 0
        ey = np.exp(-y[pos])
        out[pos] = (b - a) / (1.0 + ey) + a
        ey = np.exp(y[~pos])
        out[~pos] = (b - a) * ey / (1.0 + ey) + a
        return out
    if a is not None:
        return np.exp(y) + a
    return b - np.exp(y)


def limited_interval(
    x: np.ndarray, c_sigma: np.ndarray, limits: LimitsTransform
) -> tuple[np.ndarray, np.ndarray]:
    """Interval endpoints around a limit-respecting point forecast.

    ``x`` is the point forecast on the original scale and ``c_sigma`` the
    z-score times the transformed-scale standard error.  Endpoints equal
    the inverse transform of ``transform(x) -+ c_sigma``.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(c_sigma, dtype=float)
    a, b = limits.lower, limits.upper
    if a is not None and b is not None:
        e = np.exp(c)
        lower = (a * (b - x) * e + b * (x - a)) / ((b - x) * e + (x - a))
        upper = (a * (b - x) + b * (x - a) * e) / ((b - x) + (x - a) * e)
        return lower, upper
    if a is not None:
        return a + (x - a) * np.exp(-c), a + (x - a) * np.exp(c)
    return b - (b - x) * np.exp(c), b - (b - x) * np.exp(-c)


# ---------------------------------------------------------------------------
# Result containers
# ---------------------------------------------------------------------------


@dataclass
class ForecastResult:
    timestamps: list
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    stderr: np.ndarray
    confidence_level: float


@dataclass
class ComponentDecomposition:
    """Additive components over history and horizon.

    ``sum(history.values()) == base`` and ``sum(future.values()) ==
    forecast_mean`` hold slot-exact (on the transformed scale when forecast
    limits are configured).
    """

    history: dict[str, np.ndarray]
    future: dict[str, np.ndarray]
    base: np.ndarray
    forecast_mean: np.ndarray


@dataclass
class AnomalyVerdict:
    slot: int
    timestamp: Any
    actual: float
    expected: float
    probability: float
    is_anomaly: bool
    lower: float
    upper: float


@dataclass
class FittedPipeline:
    """Everything produced by :func:`fit`; immutable once built."""

    config: PipelineConfig
    series: RegularSeries
    base: np.ndarray
    limits: Optional[LimitsTransform]
    holiday: Optional[hol.HolidayEffectSeries]
    spike_detected: np.ndarray
    spike_component: np.ndarray
    seasonal_components: list[se.SeasonalComponent]
    change_periods: list[br.ChangePeriod]
    step_component: np.ndarray
    trend_model: ar.ArimaModel
    trend_history: np.ndarray
    residual: np.ndarray
    horizon: int

    @property
    def n(self) -> int:
        return len(self.base)

    def seasonal_sum(self, horizon: Optional[int] = None) -> np.ndarray:
        if horizon is None:
            total = np.zeros(self.n)
            for comp in self.seasonal_components:
                total += comp.history
        else:
            total = np.zeros(horizon)
            for comp in self.seasonal_components:
                total += comp.future[:horizon]
        return total

    def holiday_history(self) -> np.ndarray:
        return self.holiday.history if self.holiday else np.zeros(self.n)

    def holiday_future(self, horizon: int) -> np.ndarray:
        return self.holiday.future[:horizon] if self.holiday else np.zeros(horizon)


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


def replace_values(series: RegularSeries, values: np.ndarray) -> RegularSeries:
    return replace(series, values=np.asarray(values, dtype=float))


def _slot_datetimes(series: RegularSeries, total: int) -> Optional[list[datetime]]:
    if series.index_basis == IndexBasis.MONTHS_SINCE_START:
        return None
    out = []
    for s in range(total):
        micros = series.start + s * series.freq.interval
        if series.index_basis == IndexBasis.LOCAL_MICROS_SINCE_1960:
            out.append(_LOCAL_EPOCH + timedelta(microseconds=int(micros)))
        else:
            out.append(micros_to_datetime(micros).replace(tzinfo=None))
    return out


def _grid_calendar(
    series: RegularSeries, candidates: list[se.SeasonalCandidate], horizon: int
) -> Optional[se.GridCalendar]:
    units = {c.std_unit for c in candidates if c.std_unit}
    if not units:
        return None
    dts = _slot_datetimes(series, len(series.values) + horizon)
    if dts is None:
        return None
    cal = se.GridCalendar()
    if "month" in units:
        cal.month = se.month_coords(dts, series.freq)
    if "year" in units:
        cal.year = se.year_coords(dts)
    return cal


def _stage_order(config: PipelineConfig) -> list[str]:
    if config.stage_order is not None:
        unknown = set(config.stage_order) - set(DEFAULT_STAGES)
        if unknown:
            raise PipelineStageError("config", ValueError(f"unknown stages {unknown}"))
        return list(config.stage_order)
    if config.holidays_after_cleaning:
        return ["spikes", "seasonality", "holidays", "steps"]
    return list(DEFAULT_STAGES)


def _candidates(config: PipelineConfig, freq: Frequency) -> list[se.SeasonalCandidate]:
    if config.seasonalities is not None:
        return se.candidates_by_name(config.seasonalities, freq)
    return se.default_candidates(freq)


def _preliminary_profile(
    working: np.ndarray, candidates: list[se.SeasonalCandidate]
) -> Optional[np.ndarray]:
    """One cheap decomposition pass so counterfactuals stay seasonal."""
    for cand in candidates:
        if cand.std_unit is None:
            period = int(round(cand.period))
            if period >= 2 and len(working) >= 2 * period:
                seasonal, _, _ = se.stl_decompose(working, period)
                return seasonal
    return None


def fit(
    series: RegularSeries,
    config: Optional[PipelineConfig] = None,
    holiday_specs: Optional[list[hol.HolidaySpec]] = None,
) -> FittedPipeline:
    """Run every enabled stage in order and return the fitted bundle.

    ``holiday_specs`` supplements the built-in calendars resolved from
    ``config.holiday_region``.  Stage failures re-raise tagged with the
    stage name.
    """
    config = (config or PipelineConfig()).validate()
    n = len(series.values)
    if n < config.min_time_series_length:
        raise TooShort(
            f"series has {n} points, below min_time_series_length "
            f"{config.min_time_series_length}"
        )
    horizon = config.horizon
    freq = series.freq

    def run(stage, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PipelineStageError:
            raise
        except Exception as exc:
            raise PipelineStageError(stage, exc) from exc

    # Gap interpolation, then the optional limits transform; all later
    # stages operate on this "base" scale.
    base = run(
        "interpolate",
        interpolate,
        series.values,
        MissingMask.from_values(series.values),
    )
    limits = LimitsTransform.from_config(config)
    if limits is not None:
        base = run("limits", apply_limits, base, limits)

    working = base.copy()
    candidates = _candidates(config, freq)

    holiday_series: Optional[hol.HolidayEffectSeries] = None
    spike_detected = np.empty(0, dtype=int)
    spike_component = np.zeros(n)
    seasonal_components: list[se.SeasonalComponent] = []
    change_periods: list[br.ChangePeriod] = []
    step_component = np.zeros(n)

    specs = []
    for region in config.holiday_region or []:
        specs.extend(hol.builtin_specs(region))
    specs.extend(holiday_specs or [])

    for stage in _stage_order(config):
        if stage == "holidays" and specs:
            def _holidays():
                nonlocal working, holiday_series
                profile = _preliminary_profile(working, candidates)
                windows = hol.expand_windows(specs, series, horizon)
                try:
                    effects, _ = hol.estimate_effects(working, windows, profile)
                except NoOccurrences:
                    return
                holiday_series = hol.extrapolate_effects(effects, windows, n, horizon)
                working = working - holiday_series.history

            run("holidays", _holidays)
        elif stage == "spikes" and config.clean_spikes_and_dips:
            def _spikes():
                nonlocal working, spike_detected, spike_component
                shortest = min(
                    (int(round(c.period)) for c in candidates if c.std_unit is None),
                    default=0,
                )
                edge = max(sp.DEFAULT_EDGE_LENGTH, shortest)
                if n <= 2 * edge:
                    return
                report = sp.detect_spikes(
                    working,
                    q=config.spike_z_threshold,
                    edge_length=edge,
                    yearly_period=slots_per_year(freq),
                )
                working = sp.clean_spikes(working, report)
                spike_detected = report.detected
                spike_component = report.component

            run("spikes", _spikes)
        elif stage == "seasonality" and candidates:
            def _seasonality():
                nonlocal working, seasonal_components
                calendar = _grid_calendar(series, candidates, horizon)
                comps, deseasoned = se.detect_and_extract(
                    working, candidates, horizon=horizon, calendar=calendar
                )
                seasonal_components = [c for c in comps if c.significant]
                working = deseasoned

            run("seasonality", _seasonality)

            if config.spike_second_pass and config.clean_spikes_and_dips:
                def _second_pass():
                    nonlocal working, spike_component, spike_detected
                    if n <= 2 * sp.DEFAULT_EDGE_LENGTH:
                        return
                    report = sp.detect_spikes(
                        working,
                        q=config.spike_z_threshold,
                        yearly_period=slots_per_year(freq),
                    )
                    working = sp.clean_spikes(working, report)
                    spike_component = spike_component + report.component
                    spike_detected = np.union1d(spike_detected, report.detected)

                run("spikes", _second_pass)
        elif stage == "steps" and config.adjust_step_changes:
            def _steps():
                nonlocal working, change_periods, step_component
                dominant = 0.0
                best_rms = -1.0
                for comp in seasonal_components:
                    rms = float(np.sqrt(np.mean(comp.history**2)))
                    if rms > best_rms:
                        best_rms = rms
                        dominant = comp.period
                m = max(5, int(dominant // 2))
                if n < 3 * m:
                    return
                periods = br.detect_change_periods(
                    working, m, config.change_z_threshold
                )
                if not periods:
                    return
                report = br.adjust_step_changes(working, periods, config.chow_alpha)
                change_periods = report.periods
                step_component = report.adjustment
                working = report.cleaned

            run("steps", _steps)

    def _trend():
        window = min(n, config.max_time_series_length)
        if config.time_series_length_fraction is not None:
            window = min(
                window,
                max(
                    int(math.ceil(config.time_series_length_fraction * n)),
                    min(n, config.min_time_series_length),
                ),
            )
        window = max(window, min(n, 20))
        trend_input = working[n - window :]
        if config.auto_arima:
            model = ar.auto_arima(
                trend_input,
                max_order=config.auto_arima_max_order,
                min_order=config.auto_arima_min_order,
                include_drift=config.include_drift,
            )
        else:
            p, d, q = config.non_seasonal_order
            drift = bool(config.include_drift) and d == 1
            model = ar.fit_arima(trend_input, ar.ArimaOrder(p, d, q, drift))

        trend_hist = working.copy()
        offset = n - window
        if config.trend_smoothing_window_size is not None:
            k = min(int(config.trend_smoothing_window_size), window)
            trend_hist[offset:] = _loess_window(working[offset:], max(k, 3), 1, 1)
        else:
            trend_hist[offset:] = working[offset:] - model.residuals
        return model, trend_hist

    trend_model, trend_history = run("trend", _trend)
    residual = working - trend_history

    return FittedPipeline(
        config=config,
        series=series,
        base=base,
        limits=limits,
        holiday=holiday_series,
        spike_detected=spike_detected,
        spike_component=spike_component,
        seasonal_components=seasonal_components,
        change_periods=change_periods,
        step_component=step_component,
        trend_model=trend_model,
        trend_history=trend_history,
        residual=residual,
        horizon=horizon,
    )


# ---------------------------------------------------------------------------
# Forecasting / decomposition / anomalies
# ---------------------------------------------------------------------------


def _check_horizon(bundle: FittedPipeline, horizon: Optional[int]) -> int:
    h = bundle.horizon if horizon is None else int(horizon)
    if h < 1:
        raise ValueError("horizon must be >= 1")
    if h > bundle.horizon:
        raise ValueError(
            f"horizon {h} exceeds the fitted horizon {bundle.horizon}; refit with "
            "a larger horizon"
        )
    return h


def forecast(
    bundle: FittedPipeline,
    horizon: Optional[int] = None,
    confidence_level: float = 0.95,
) -> ForecastResult:
    """Sum the extrapolated components and attach prediction intervals.

    Interval width uses the trend model's variance projected through its
    moving-average expansion, scaled by the normal quantile for the
    requested confidence level.
    """
    if not 0.0 < confidence_level < 1.0:
        raise InvalidConfidence(f"confidence_level {confidence_level} not in (0, 1)")
    h = _check_horizon(bundle, horizon)

    trend_fc = ar.forecast_trend(bundle.trend_model, h)
    mean_t = trend_fc.mean + bundle.seasonal_sum(h) + bundle.holiday_future(h)
    z = float(norm.ppf(0.5 + confidence_level / 2.0))
    spread = z * trend_fc.stderr

    timestamps = bundle.series.slot_timestamps(count=h, start_slot=bundle.n)
    if bundle.limits is not None:
        mean = invert_limits(mean_t, bundle.limits)
        lower, upper = limited_interval(mean, spread, bundle.limits)
    else:
        mean = mean_t
        lower, upper = mean_t - spread, mean_t + spread
    return ForecastResult(
        timestamps=timestamps,
        mean=mean,
        lower=lower,
        upper=upper,
        stderr=trend_fc.stderr,
        confidence_level=confidence_level,
    )


def decompose(bundle: FittedPipeline) -> ComponentDecomposition:
    """Per-slot additive components over history and the fitted horizon."""
    history: dict[str, np.ndarray] = {"trend": bundle.trend_history.copy()}
    future: dict[str, np.ndarray] = {
        "trend": ar.forecast_trend(bundle.trend_model, bundle.horizon).mean
    }
    for comp in bundle.seasonal_components:
        key = f"seasonal_{comp.period_name}"
        history[key] = comp.history.copy()
        future[key] = comp.future[: bundle.horizon].copy()
    history["holiday_effect"] = bundle.holiday_history()
    future["holiday_effect"] = bundle.holiday_future(bundle.horizon)
    history["spikes_and_dips"] = bundle.spike_component.copy()
    history["step_changes"] = bundle.step_component.copy()
    # Residual closes the history identity exactly.
    residual = bundle.base.copy()
    for values in history.values():
        residual = residual - values
    history["residual"] = residual
    forecast_mean = np.zeros(bundle.horizon)
    for values in future.values():
        forecast_mean = forecast_mean + values
    return ComponentDecomposition(
        history=history, future=future, base=bundle.base.copy(),
        forecast_mean=forecast_mean,
    )


def expected_history(bundle: FittedPipeline) -> np.ndarray:
    """Expected value per history slot: everything except spikes and noise."""
    return (
        bundle.trend_history
        + bundle.holiday_history()
        + bundle.seasonal_sum()
        + bundle.step_component
    )


def detect_anomalies(
    bundle: FittedPipeline,
    threshold: float = 0.95,
    new_values: Optional[np.ndarray] = None,
) -> list[AnomalyVerdict]:
    """Score history slots (or new slots extending the grid) for anomalies.

    The anomaly probability is ``|1 - 2 * Phi((actual - expected) / sigma)``
    with sigma from the trend fit (horizon-projected for future slots); a
    slot is anomalous exactly when it falls outside
    ``expected +- Phi^-1((1 + threshold) / 2) * sigma``.
    """
    if not 0.0 < threshold < 1.0:
        raise InvalidThreshold(f"threshold {threshold} not in (0, 1)")
    z_cut = float(norm.ppf((1.0 + threshold) / 2.0))

    if new_values is None:
        actual_t = bundle.base
        expected_t = expected_history(bundle)
        sigma = np.full(bundle.n, math.sqrt(max(bundle.trend_model.sigma2, 0.0)))
        slots = np.arange(bundle.n)
    else:
        values = np.asarray(new_values, dtype=float)
        h = _check_horizon(bundle, len(values))
        actual_t = (
            apply_limits(values, bundle.limits)
            if bundle.limits is not None
            else values
        )
        trend_fc = ar.forecast_trend(bundle.trend_model, h)
        expected_t = trend_fc.mean + bundle.seasonal_sum(h) + bundle.holiday_future(h)
        sigma = trend_fc.stderr
        slots = np.arange(bundle.n, bundle.n + h)

    timestamps = bundle.series.slot_timestamps(
        count=len(slots), start_slot=int(slots[0])
    )
    verdicts = []
    for i, slot in enumerate(slots):
        s = sigma[i]
        diff = actual_t[i] - expected_t[i]
        if s > 0:
            z = diff / s
            probability = abs(1.0 - 2.0 * float(norm.cdf(z)))
            spread = z_cut * s
            anomalous = abs(diff) > spread
        else:
            probability = 0.0 if diff == 0 else 1.0
            spread = 0.0
            anomalous = diff != 0
        lower_t, upper_t = expected_t[i] - spread, expected_t[i] + spread
        if bundle.limits is not None:
            actual = float(invert_limits(actual_t[i], bundle.limits))
            expected = float(invert_limits(expected_t[i], bundle.limits))
            lower = float(invert_limits(lower_t, bundle.limits))
            upper = float(invert_limits(upper_t, bundle.limits))
        else:
            actual, expected = float(actual_t[i]), float(expected_t[i])
            lower, upper = float(lower_t), float(upper_t)
        verdicts.append(
            AnomalyVerdict(
                slot=int(slot),
                timestamp=timestamps[i],
                actual=actual,
                expected=expected,
                probability=probability,
                is_anomaly=bool(anomalous),
                lower=lower,
                upper=upper,
            )
        )
    return verdicts


# ---------------------------------------------------------------------------
# Serialization (one self-contained JSON document per series)
# ---------------------------------------------------------------------------


def _array(values) -> list:
    return np.asarray(values, dtype=float).tolist()


def bundle_to_dict(bundle: FittedPipeline) -> dict:
    series = bundle.series
    model = bundle.trend_model
    return {
        "config": asdict(bundle.config),
        "series": {
            "start": series.start.isoformat()
            if isinstance(series.start, date)
            else int(series.start),
            "freq": {"kind": series.freq.kind.value, "interval": series.freq.interval},
            "values": _array(series.values),
            "timezone": series.timezone,
            "index_basis": series.index_basis.value,
        },
        "base": _array(bundle.base),
        "holiday": None
        if bundle.holiday is None
        else {
            "history": _array(bundle.holiday.history),
            "future": _array(bundle.holiday.future),
            "per_holiday": {k: _array(v) for k, v in bundle.holiday.per_holiday.items()},
        },
        "spike_detected": [int(i) for i in bundle.spike_detected],
        "spike_component": _array(bundle.spike_component),
        "seasonal_components": [
            {
                "period_name": c.period_name,
                "period": c.period,
                "history": _array(c.history),
                "future": _array(c.future),
                "significant": c.significant,
                "variance_reduction": c.variance_reduction,
                "kw_pvalue": c.kw_pvalue,
            }
            for c in bundle.seasonal_components
        ],
        "change_periods": [[p.start, p.end] for p in bundle.change_periods],
        "step_component": _array(bundle.step_component),
        "trend_model": {
            "order": [model.order.p, model.order.d, model.order.q],
            "drift": model.order.drift,
            "ar_coeffs": _array(model.ar_coeffs),
            "ma_coeffs": _array(model.ma_coeffs),
            "drift_coeff": model.drift_coeff,
            "sigma2": model.sigma2,
            "aic": model.aic,
            "loglik": model.loglik,
            "n_train": model.n_train,
            "mean": model.mean,
            "converged": model.converged,
            "tail_values": _array(model.tail_values),
            "tail_residuals": _array(model.tail_residuals),
            "last_levels": _array(model.last_levels),
            "residuals": _array(model.residuals),
        },
        "trend_history": _array(bundle.trend_history),
        "residual": _array(bundle.residual),
        "horizon": bundle.horizon,
    }


def bundle_from_dict(doc: dict) -> FittedPipeline:
    config = PipelineConfig(**{
        k: (tuple(v) if k == "non_seasonal_order" and v is not None else v)
        for k, v in doc["config"].items()
    })
    sdoc = doc["series"]
    freq = Frequency(sdoc["freq"]["kind"], sdoc["freq"]["interval"])
    basis = IndexBasis(sdoc["index_basis"])
    start = (
        date.fromisoformat(sdoc["start"])
        if basis == IndexBasis.MONTHS_SINCE_START
        else int(sdoc["start"])
    )
    series = RegularSeries(
        start=start,
        freq=freq,
        values=np.array(sdoc["values"], dtype=float),
        timezone=sdoc["timezone"],
        index_basis=basis,
    )
    holiday = None
    if doc["holiday"] is not None:
        holiday = hol.HolidayEffectSeries(
            history=np.array(doc["holiday"]["history"]),
            future=np.array(doc["holiday"]["future"]),
            per_holiday={
                k: np.array(v) for k, v in doc["holiday"]["per_holiday"].items()
            },
        )
    mdoc = doc["trend_model"]
    p, d, q = mdoc["order"]
    model = ar.ArimaModel(
        order=ar.ArimaOrder(p, d, q, mdoc["drift"]),
        ar_coeffs=np.array(mdoc["ar_coeffs"]),
        ma_coeffs=np.array(mdoc["ma_coeffs"]),
        drift_coeff=mdoc["drift_coeff"],
        sigma2=mdoc["sigma2"],
        aic=mdoc["aic"],
        loglik=mdoc["loglik"],
        n_train=mdoc["n_train"],
        mean=mdoc["mean"],
        converged=mdoc["converged"],
        tail_values=np.array(mdoc["tail_values"]),
        tail_residuals=np.array(mdoc["tail_residuals"]),
        last_levels=np.array(mdoc["last_levels"]),
        residuals=np.array(mdoc["residuals"]),
    )
    return FittedPipeline(
        config=config.validate(),
        series=series,
        base=np.array(doc["base"], dtype=float),
        limits=LimitsTransform.from_config(config),
        holiday=holiday,
        spike_detected=np.array(doc["spike_detected"], dtype=int),
        spike_component=np.array(doc["spike_component"], dtype=float),
        seasonal_components=[
            se.SeasonalComponent(
                period_name=c["period_name"],
                period=c["period"],
                history=np.array(c["history"], dtype=float),
                future=np.array(c["future"], dtype=float),
                significant=c["significant"],
                variance_reduction=c["variance_reduction"],
                kw_pvalue=c["kw_pvalue"],
            )
            for c in doc["seasonal_components"]
        ],
        change_periods=[br.ChangePeriod(a, b) for a, b in doc["change_periods"]],
        step_component=np.array(doc["step_component"], dtype=float),
        trend_model=model,
        trend_history=np.array(doc["trend_history"], dtype=float),
        residual=np.array(doc["residual"], dtype=float),
        horizon=doc["horizon"],
    )


def bundle_to_json(bundle: FittedPipeline) -> str:
    return json.dumps(bundle_to_dict(bundle))


def bundle_from_json(text: str) -> FittedPipeline:
    return bundle_from_dict(json.loads(text))
