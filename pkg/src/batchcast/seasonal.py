"""Multi-period seasonality extraction and extrapolation.

Seasonal-trend decomposition via iterated LOESS (cycle-subseries smoothing
with a low-pass filter), extended with two tricks: irregular calendar
periods (day-of-month, day-of-year) are handled by resampling each
calendar unit onto a fixed-slot grid, and drifting seasonal patterns are
extrapolated "by leaping" -- each within-cycle phase forms its own
sub-series forecast by double exponential smoothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .errors import NotSubMonthlyFrequency, PeriodTooLongForSeries, TooFewCycles
from .gapfill import _loess_window, _bisquare, loess_at
from .spikes import double_exp_smooth
from .temporal import (
    Frequency,
    FrequencyKind,
    MICROS_PER_DAY,
)

VARIANCE_REDUCTION_MIN = 0.05
KW_PVALUE_MAX = 0.01
# With only two observed cycles the phase-group test degenerates into a
# two-sample comparison and any level change between the cycles reads as
# seasonality, so significance demands a third cycle.
MIN_CYCLES_FOR_SIGNIFICANCE = 3


@dataclass
class StlParams:
    """Smoothing windows and iteration counts for the decomposition."""

    seasonal_window: int = 11
    trend_window: Optional[int] = None
    inner_iters: int = 2
    robust_iters: int = 1
    degree: int = 1

    def __post_init__(self):
        if self.seasonal_window < 7 or self.seasonal_window % 2 == 0:
            raise ValueError("seasonal_window must be odd and >= 7")
        if self.trend_window is not None and (
            self.trend_window < 3 or self.trend_window % 2 == 0
        ):
            raise ValueError("trend_window must be odd and >= 3")
        if self.degree not in (0, 1):
            raise ValueError("degree must be 0 or 1")


def _odd_at_least(x: float) -> int:
    k = int(np.ceil(x))
    return k if k % 2 == 1 else k + 1


def _moving_average(x: np.ndarray, window: int) -> np.ndarray:
    return np.convolve(x, np.full(window, 1.0 / window), mode="valid")


def stl_decompose(
    values: np.ndarray,
    period: int,
    params: Optional[StlParams] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Additive (seasonal, trend, remainder) decomposition.

    Cycle sub-series are LOESS-smoothed with ``seasonal_window`` (small
    windows let the pattern drift from cycle to cycle), a moving-average
    cascade plus LOESS removes low-frequency leakage, and robustness
    iterations downweight outliers.  ``seasonal + trend + remainder``
    equals the input exactly.
    """
    params = params or StlParams()
    y = np.asarray(values, dtype=float)
    n = len(y)
    period = int(period)
    if period < 2:
        raise ValueError("period must be >= 2")
    if n < 2 * period:
        raise PeriodTooLongForSeries(f"need n >= {2 * period}, got {n}")

    s_window = params.seasonal_window
    t_window = params.trend_window or _odd_at_least(
        1.5 * period / (1.0 - 1.5 / s_window)
    )
    l_window = _odd_at_least(period)

    rho = np.ones(n)
    trend = np.zeros(n)
    seasonal = np.zeros(n)
    for outer in range(params.robust_iters + 1):
        for _ in range(max(params.inner_iters, 1)):
            detrended = y - trend
            cycle = np.empty(n + 2 * period)
            for k in range(period):
                sub = detrended[k::period]
                n_sub = len(sub)
                window = min(s_window, n_sub)
                smoothed = _loess_window(
                    sub,
                    window,
                    params.degree if window >= params.degree + 2 else 0,
                    robustness_iters=0,
                    prior_weights=rho[k::period],
                )
                ext = loess_at(
                    np.arange(n_sub, dtype=float),
                    sub,
                    np.array([-1.0, float(n_sub)]),
                    k=window,
                    degree=params.degree if window >= params.degree + 2 else 0,
                )
                positions = k + (np.arange(-1, n_sub + 1) + 1) * period
                cycle[positions[0]] = ext[0]
                cycle[positions[-1]] = ext[1]
                cycle[positions[1:-1]] = smoothed
            low = _moving_average(
                _moving_average(_moving_average(cycle, period), period), 3
            )
            low = _loess_window(low, min(l_window, n), 1, 0)
            seasonal = cycle[period : period + n] - low
            deseason = y - seasonal
            trend = _loess_window(
                deseason,
                min(t_window, n),
                params.degree,
                robustness_iters=0,
                prior_weights=rho,
            )
        if outer < params.robust_iters:
            remainder = y - trend - seasonal
            scale = 6.0 * np.median(np.abs(remainder))
            if scale <= 0:
                break
            rho = _bisquare(remainder / scale)
            rho = np.maximum(rho, 1e-6)
    return seasonal, trend, y - seasonal - trend


def standardize_calendar(
    values: np.ndarray, coords: np.ndarray, slots_per_unit: int
) -> tuple[np.ndarray, np.ndarray]:
    """Resample onto a fixed number of slots per calendar unit.

    ``coords`` gives each observation's fractional position in units
    (e.g. 3.5 = halfway through the fourth month).  Returns the resampled
    values and the standardized grid coordinates; a 30-day month onto 30
    slots is the identity mapping.
    """
    coords = np.asarray(coords, dtype=float)
    units = int(np.floor(coords[-1])) + 1
    std_x = np.arange(units * slots_per_unit, dtype=float) / slots_per_unit
    std_values = np.interp(std_x, coords, np.asarray(values, dtype=float))
    return std_values, std_x


def destandardize(
    std_values: np.ndarray, std_x: np.ndarray, coords: np.ndarray
) -> np.ndarray:
    """Map values on the standardized grid back to calendar positions."""
    return np.interp(np.asarray(coords, dtype=float), std_x, std_values)


def month_coords(datetimes, freq: Frequency) -> np.ndarray:
    """Fractional month position of each slot (0.0 = start of first month)."""
    if freq.is_calendar or freq.interval > MICROS_PER_DAY:
        raise NotSubMonthlyFrequency("month standardization needs daily or finer data")
    return _calendar_coords(datetimes, "month")


def year_coords(datetimes) -> np.ndarray:
    """Fractional year position of each slot (0.0 = start of first year)."""
    return _calendar_coords(datetimes, "year")


def _calendar_coords(datetimes, unit: str) -> np.ndarray:
    from .temporal import _days_in_month

    out = np.empty(len(datetimes))
    first = datetimes[0]
    for j, dt in enumerate(datetimes):
        day_frac = (
            dt.hour / 24.0
            + dt.minute / 1440.0
            + (dt.second + dt.microsecond / 1e6) / 86400.0
        )
        if unit == "month":
            idx = (dt.year - first.year) * 12 + (dt.month - first.month)
            frac = (dt.day - 1 + day_frac) / _days_in_month(dt.year, dt.month)
        else:
            idx = dt.year - first.year
            days = 366 if _days_in_month(dt.year, 2) == 29 else 365
            frac = (dt.timetuple().tm_yday - 1 + day_frac) / days
        out[j] = idx + frac
    return out


def leap_extrapolate(
    seasonal: np.ndarray,
    period: int,
    horizon: int,
    alpha: float = 0.5,
    beta: float = 0.1,
) -> np.ndarray:
    """Extrapolate a seasonal component phase by phase.

    The history splits into ``period`` sub-series (one per within-cycle
    phase); each is extended by double exponential smoothing, so both fixed
    and steadily growing patterns continue naturally.  ``period`` of 1
    degenerates to plain smoothing of the whole component.
    """
    s = np.asarray(seasonal, dtype=float)
    n = len(s)
    period = int(period)
    if n < 2 * period:
        raise TooFewCycles(f"need >= 2 complete cycles ({2 * period}), got {n}")
    if horizon <= 0:
        return np.empty(0)

    future = np.empty(horizon)
    for k in range(period):
        sub = s[k::period]
        last_pos = k + (len(sub) - 1) * period
        if len(sub) >= 2:
            levels, slopes = double_exp_smooth(sub, alpha, beta, "forward")
            level, slope = levels[-1], slopes[-1]
        else:
            level, slope = sub[-1], 0.0
        for g in range(n + ((k - n) % period), n + horizon, period):
            step = (g - last_pos) // period
            future[g - n] = level + step * slope
    return future


@dataclass(frozen=True)
class SeasonalCandidate:
    """One period to try: direct on the native grid, or via a calendar unit."""

    period_name: str
    period: float
    std_unit: Optional[str] = None  # None, "month" or "year"
    std_slots: int = 0


@dataclass
class SeasonalComponent:
    period_name: str
    period: float
    history: np.ndarray
    future: np.ndarray
    significant: bool
    variance_reduction: float = 0.0
    kw_pvalue: float = 1.0


def default_candidates(freq: Frequency) -> list[SeasonalCandidate]:
    """Candidate periods for a data frequency, shortest first."""
    kind = freq.kind
    if kind == FrequencyKind.PER_MINUTE:
        return [
            SeasonalCandidate("daily", 1440),
            SeasonalCandidate("weekly", 10080),
        ]
    if kind == FrequencyKind.HOURLY:
        return [
            SeasonalCandidate("daily", 24),
            SeasonalCandidate("weekly", 168),
        ]
    if kind == FrequencyKind.DAILY:
        return [
            SeasonalCandidate("weekly", 7),
            SeasonalCandidate("monthly", 30.44, std_unit="month", std_slots=30),
            SeasonalCandidate("yearly", 365.25, std_unit="year", std_slots=365),
        ]
    if kind == FrequencyKind.WEEKLY:
        return [SeasonalCandidate("yearly", 52.18, std_unit="year", std_slots=52)]
    if kind == FrequencyKind.MONTHLY:
        return [SeasonalCandidate("yearly", 12)]
    if kind == FrequencyKind.QUARTERLY:
        return [SeasonalCandidate("yearly", 4)]
    return []


def candidates_by_name(names: list[str], freq: Frequency) -> list[SeasonalCandidate]:
    """Resolve configured seasonality names against the data frequency."""
    chosen = []
    wanted = {n.lower() for n in names}
    for cand in default_candidates(freq):
        if cand.period_name in wanted:
            chosen.append(cand)
    extra = {
        (FrequencyKind.MONTHLY, "quarterly"): SeasonalCandidate("quarterly", 3),
        (FrequencyKind.HOURLY, "monthly"): SeasonalCandidate(
            "monthly", 730.5, std_unit="month", std_slots=720
        ),
    }
    for (kind, name), cand in extra.items():
        if freq.kind == kind and name in wanted:
            chosen.append(cand)
    return sorted(chosen, key=lambda c: c.period)


def _phase_groups(detrended: np.ndarray, period: int) -> list[np.ndarray]:
    return [detrended[k::period] for k in range(period)]


def _significance(detrended: np.ndarray, seasonal: np.ndarray, period: int):
    """Variance-reduction share and Kruskal-Wallis p-value over phases."""
    base = float(np.var(detrended))
    if base <= 0:
        return 0.0, 1.0
    reduction = 1.0 - float(np.var(detrended - seasonal)) / base
    groups = [g for g in _phase_groups(detrended, period) if len(g) > 0]
    try:
        _, p_value = stats.kruskal(*groups)
    except ValueError:
        p_value = 1.0
    if not np.isfinite(p_value):
        p_value = 1.0
    return reduction, float(p_value)


@dataclass
class GridCalendar:
    """Per-slot calendar coordinates over history plus horizon."""

    month: Optional[np.ndarray] = None
    year: Optional[np.ndarray] = None

    def coords(self, unit: str) -> Optional[np.ndarray]:
        return self.month if unit == "month" else self.year


def detect_and_extract(
    values: np.ndarray,
    candidates: list[SeasonalCandidate],
    params: Optional[StlParams] = None,
    horizon: int = 0,
    calendar: Optional[GridCalendar] = None,
) -> tuple[list[SeasonalComponent], np.ndarray]:
    """Iteratively fit, test and remove each candidate seasonality.

    Candidates run shortest period first, each on the residual of the ones
    already accepted, so energy shared between nested periods lands on the
    higher-frequency component.  A candidate is kept when it explains at
    least ``VARIANCE_REDUCTION_MIN`` of the detrended variance and the
    Kruskal-Wallis test over phase groups rejects at ``KW_PVALUE_MAX``.
    Returns the evaluated components (with significance flags) and the
    series minus all significant ones.
    """
    params = params or StlParams()
    working = np.asarray(values, dtype=float).copy()
    n = len(working)
    components: list[SeasonalComponent] = []

    for cand in sorted(candidates, key=lambda c: c.period):
        if cand.std_unit is None:
            period = int(round(cand.period))
            if n < 2 * period or period < 2:
                continue
            seasonal, trend, _ = stl_decompose(working, period, params)
            reduction, p_value = _significance(working - trend, seasonal, period)
            significant = (
                reduction >= VARIANCE_REDUCTION_MIN
                and p_value < KW_PVALUE_MAX
                and n >= MIN_CYCLES_FOR_SIGNIFICANCE * period
            )
            future = (
                leap_extrapolate(seasonal, period, horizon)
                if significant and horizon > 0
                else np.zeros(horizon)
            )
            component = SeasonalComponent(
                cand.period_name, float(period), seasonal, future,
                significant, reduction, p_value,
            )
        else:
            coords = calendar.coords(cand.std_unit) if calendar else None
            if coords is None:
                continue
            hist_coords = coords[:n]
            std_values, std_x = standardize_calendar(
                working, hist_coords, cand.std_slots
            )
            period = cand.std_slots
            if len(std_values) < 2 * period:
                continue
            seasonal_std, trend_std, _ = stl_decompose(std_values, period, params)
            reduction, p_value = _significance(
                std_values - trend_std, seasonal_std, period
            )
            significant = (
                reduction >= VARIANCE_REDUCTION_MIN
                and p_value < KW_PVALUE_MAX
                and len(std_values) >= MIN_CYCLES_FOR_SIGNIFICANCE * period
            )
            history = destandardize(seasonal_std, std_x, hist_coords)
            future = np.zeros(horizon)
            if significant and horizon > 0:
                future_coords = coords[n : n + horizon]
                units_needed = int(np.floor(future_coords[-1])) + 1
                extra = units_needed * period - len(seasonal_std)
                if extra > 0:
                    ext = leap_extrapolate(seasonal_std, period, extra)
                    full = np.concatenate([seasonal_std, ext])
                else:
                    full = seasonal_std
                full_x = np.arange(len(full), dtype=float) / period
                future = np.interp(future_coords, full_x, full)
            component = SeasonalComponent(
                cand.period_name, float(period), history, future,
                significant, reduction, p_value,
            )
        components.append(component)
        if component.significant:
            working = working - component.history
    return components, working
