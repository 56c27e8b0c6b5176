"""Holiday and event effect estimation.

Each holiday's effect window is expanded onto the series grid, the
affected slots are masked and re-interpolated (seasonality-aware) to form
a counterfactual, and the actual-minus-counterfactual differences are
modeled per window offset ("sub-holidays": 1st day, 2nd day, ...) so a
multi-day window can carry drastically different levels.  Per-offset
effects are smoothed across years, reconciled when holidays collide on a
date, and applied to future occurrences.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, timedelta
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import NoOccurrences
from .gapfill import MissingMask, MissingSource, SmoothParams, interpolate
from .temporal import (
    IndexBasis,
    MICROS_PER_DAY,
    RegularSeries,
    _LOCAL_EPOCH,
    micros_to_datetime,
    to_month_index,
)

DEFAULT_PRE_DAYS = 1
DEFAULT_POST_DAYS = 1
_WEEKDAYS = {"mon": 0, "tue": 1, "wed": 2, "thu": 3, "fri": 4, "sat": 5, "sun": 6}


def _resolve_rule(rule: str, year: int) -> Optional[date]:
    """Evaluate a calendar rule for one year.

    ``fixed:MM-DD``, ``nth:MM:<weekday>:N`` (N-th weekday of month) and
    ``last:MM:<weekday>`` are supported.
    """
    parts = rule.split(":")
    if parts[0] == "fixed":
        month, day = (int(v) for v in parts[1].split("-"))
        return date(year, month, day)
    if parts[0] == "nth":
        month, weekday, nth = int(parts[1]), _WEEKDAYS[parts[2]], int(parts[3])
        first = date(year, month, 1)
        offset = (weekday - first.weekday()) % 7 + (nth - 1) * 7
        return first + timedelta(days=offset)
    if parts[0] == "last":
        month, weekday = int(parts[1]), _WEEKDAYS[parts[2]]
        if month == 12:
            last_day = date(year, 12, 31)
        else:
            last_day = date(year, month + 1, 1) - timedelta(days=1)
        return last_day - timedelta(days=(last_day.weekday() - weekday) % 7)
    raise ValueError(f"unknown holiday rule {rule!r}")


@dataclass(frozen=True)
class HolidaySpec:
    """One holiday: explicit per-year dates or a recurring calendar rule."""

    name: str
    region: str = ""
    pre_days: int = DEFAULT_PRE_DAYS
    post_days: int = DEFAULT_POST_DAYS
    dates: Optional[tuple[date, ...]] = None
    rule: Optional[str] = None

    def date_in_year(self, year: int) -> Optional[date]:
        if self.dates is not None:
            for d in self.dates:
                if d.year == year:
                    return d
            return None
        if self.rule is not None:
            return _resolve_rule(self.rule, year)
        return None


def builtin_specs(region: str) -> list[HolidaySpec]:
    """Holidays bundled for a region code (e.g. ``US``, ``GLOBAL``)."""
    wanted = region.upper()
    specs = []
    data = resources.files("batchcast.data").joinpath("builtin_holidays.csv")
    with data.open("r", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            if row["region"].upper() != wanted:
                continue
            specs.append(
                HolidaySpec(
                    name=row["holiday"],
                    region=row["region"],
                    pre_days=int(row["pre_days"]),
                    post_days=int(row["post_days"]),
                    rule=row["rule"],
                )
            )
    return specs


def specs_from_rows(rows: Iterable[dict]) -> list[HolidaySpec]:
    """Build specs from ``region,holiday,date,pre_days,post_days`` rows.

    One row per occurrence year; years without a row are treated as
    cancelled (no effect applied).
    """
    grouped: dict[tuple[str, str, int, int], list[date]] = {}
    for row in rows:
        key = (
            row.get("region", ""),
            row["holiday"],
            int(row.get("pre_days", DEFAULT_PRE_DAYS) or DEFAULT_PRE_DAYS),
            int(row.get("post_days", DEFAULT_POST_DAYS) or DEFAULT_POST_DAYS),
        )
        grouped.setdefault(key, []).append(date.fromisoformat(row["date"].strip()))
    return [
        HolidaySpec(name=name, region=region, pre_days=pre, post_days=post,
                    dates=tuple(sorted(dates)))
        for (region, name, pre, post), dates in grouped.items()
    ]


def specs_from_csv(path: str) -> list[HolidaySpec]:
    with open(path, newline="", encoding="utf-8") as handle:
        return specs_from_rows(csv.DictReader(handle))


def _slot_dates(series: RegularSeries, total: int) -> list[date]:
    """Wall-clock calendar date of each grid slot over history + horizon."""
    if series.index_basis == IndexBasis.MONTHS_SINCE_START:
        return [
            series.start if s == 0 else _month_slot_date(series, s)
            for s in range(total)
        ]
    out = []
    for s in range(total):
        micros = series.start + s * series.freq.interval
        if series.index_basis == IndexBasis.LOCAL_MICROS_SINCE_1960:
            out.append((_LOCAL_EPOCH + timedelta(microseconds=int(micros))).date())
        else:
            out.append(micros_to_datetime(micros).date())
    return out


def _month_slot_date(series: RegularSeries, slot: int) -> date:
    from .temporal import from_month_index

    return from_month_index(slot * series.freq.interval, series.start)


def expand_windows(
    specs: Sequence[HolidaySpec], series: RegularSeries, horizon: int = 0
) -> dict[str, dict[int, np.ndarray]]:
    """Slots affected by each holiday, keyed by occurrence year.

    Grids finer than daily enumerate every covered slot (a 3-day window on
    hourly data yields 72); coarser grids widen the window so exactly one
    slot (the nearest) falls inside per occurrence.  Slot indexes may reach
    into the horizon.
    """
    n_total = len(series.values) + horizon
    dates = _slot_dates(series, n_total)
    by_date: dict[date, list[int]] = {}
    for slot, d in enumerate(dates):
        by_date.setdefault(d, []).append(slot)

    first, last = dates[0], dates[-1]
    years = range(first.year - 1, last.year + 2)
    daily_or_finer = (
        not series.freq.is_calendar and series.freq.interval <= MICROS_PER_DAY
    )

    windows: dict[str, dict[int, np.ndarray]] = {}
    for spec in specs:
        yearly: dict[int, np.ndarray] = {}
        for year in years:
            day = spec.date_in_year(year)
            if day is None:
                continue
            if daily_or_finer:
                slots: list[int] = []
                for offset in range(-spec.pre_days, spec.post_days + 1):
                    slots.extend(by_date.get(day + timedelta(days=offset), ()))
                if slots:
                    yearly[year] = np.array(sorted(slots), dtype=int)
            else:
                slot = _nearest_slot(series, day, n_total)
                if slot is not None:
                    yearly[year] = np.array([slot], dtype=int)
        windows[spec.name] = yearly
    return windows


def _nearest_slot(series: RegularSeries, day: date, n_total: int) -> Optional[int]:
    if series.index_basis == IndexBasis.MONTHS_SINCE_START:
        if day < series.start:
            return None
        slot = round(to_month_index(day, series.start) / series.freq.interval)
    else:
        if series.index_basis == IndexBasis.LOCAL_MICROS_SINCE_1960:
            micros = round(
                (day - _LOCAL_EPOCH.date()).total_seconds() * 1_000_000
            )
        else:
            micros = round(
                (day - micros_to_datetime(0).date()).total_seconds() * 1_000_000
            )
        delta = micros - series.start
        slot = round(delta / series.freq.interval)
        if abs(delta - slot * series.freq.interval) > series.freq.interval / 2:
            return None
    return slot if 0 <= slot < n_total else None


@dataclass
class SubHolidayEffect:
    """Effect of one offset within a holiday's window."""

    holiday: str
    slot_offset: int
    yearly_raw: dict[int, float] = field(default_factory=dict)
    yearly_smoothed: dict[int, float] = field(default_factory=dict)
    future: dict[int, float] = field(default_factory=dict)
    smoothed: float = 0.0


def _smooth_across_years(values: list[float]) -> float:
    """Median when four or more years are observed, mean otherwise."""
    if len(values) >= 4:
        return float(np.median(values))
    return float(np.mean(values))


def estimate_effects(
    values: np.ndarray,
    windows: dict[str, dict[int, np.ndarray]],
    seasonal_profile: Optional[np.ndarray] = None,
) -> tuple[list[SubHolidayEffect], np.ndarray]:
    """Per-offset holiday effects from counterfactual interpolation.

    All windowed slots are masked together and re-interpolated; the raw
    effect is observed minus counterfactual, sliced per (holiday, offset)
    and smoothed across years.  Only occurrence years whose window lies
    fully in history at the holiday's modal width enter the estimate.
    Returns the effects and the counterfactual series.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    union: set[int] = set()
    history_windows: dict[str, dict[int, np.ndarray]] = {}
    for name, yearly in windows.items():
        full_sizes = [len(s) for s in yearly.values() if len(s) and s[-1] < n]
        if not full_sizes:
            continue
        n_h = int(np.bincount(full_sizes).argmax())
        kept = {
            year: slots
            for year, slots in yearly.items()
            if len(slots) == n_h and len(slots) and slots[-1] < n
        }
        if kept:
            history_windows[name] = kept
            for slots in kept.values():
                union.update(int(s) for s in slots)
    if not history_windows:
        raise NoOccurrences("no holiday occurrence falls inside the history")

    mask = MissingMask(
        {i: MissingSource.USER_MARKED_OUTLIER for i in union}
    )
    counterfactual = interpolate(
        y, mask, SmoothParams(seasonal_profile=seasonal_profile)
    )
    raw = y - counterfactual

    effects: list[SubHolidayEffect] = []
    for name, yearly in history_windows.items():
        n_h = len(next(iter(yearly.values())))
        for j in range(n_h):
            sub = SubHolidayEffect(holiday=name, slot_offset=j)
            for year, slots in sorted(yearly.items()):
                sub.yearly_raw[year] = float(raw[slots[j]])
            sub.smoothed = _smooth_across_years(list(sub.yearly_raw.values()))
            sub.yearly_smoothed = {yr: sub.smoothed for yr in sub.yearly_raw}
            effects.append(sub)
    return effects, counterfactual


def reconcile(effects: Sequence[float]) -> float:
    """Collision rule: largest positive effect plus smallest negative one."""
    positives = [e for e in effects if e > 0]
    negatives = [e for e in effects if e < 0]
    return (max(positives) if positives else 0.0) + (
        min(negatives) if negatives else 0.0
    )


@dataclass
class HolidayEffectSeries:
    """Reconciled per-slot effect over history and horizon."""

    history: np.ndarray
    future: np.ndarray
    per_holiday: dict[str, np.ndarray] = field(default_factory=dict)
    sub_effects: list[SubHolidayEffect] = field(default_factory=list)


def extrapolate_effects(
    effects: list[SubHolidayEffect],
    windows: dict[str, dict[int, np.ndarray]],
    n_history: int,
    horizon: int,
) -> HolidayEffectSeries:
    """Apply smoothed effects to every occurrence, past and future.

    Each covered slot receives its offset's smoothed effect; slots shared
    by several holidays are reconciled.  Years with no resolvable date get
    no effect, and slots outside every window stay zero.
    """
    total = n_history + horizon
    by_slot: dict[int, list[float]] = {}
    per_holiday: dict[str, np.ndarray] = {}
    lookup = {(e.holiday, e.slot_offset): e for e in effects}

    for name, yearly in windows.items():
        series = np.zeros(total)
        touched = False
        for year, slots in yearly.items():
            for j, slot in enumerate(slots):
                effect = lookup.get((name, j))
                if effect is None:
                    continue
                value = effect.smoothed
                if slot >= n_history:
                    effect.future[year] = value
                by_slot.setdefault(int(slot), []).append(value)
                series[slot] = value
                touched = True
        if touched:
            per_holiday[name] = series

    combined = np.zeros(total)
    for slot, vals in by_slot.items():
        combined[slot] = reconcile(vals)
    return HolidayEffectSeries(
        history=combined[:n_history],
        future=combined[n_history:],
        per_holiday=per_holiday,
        sub_effects=effects,
    )
