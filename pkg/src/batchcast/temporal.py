"""Regularize raw timestamped observations onto an equally spaced grid.

Timestamps are held internally as UTC microseconds.  Three grid bases are
supported: absolute UTC time, month indexes for calendar frequencies
(monthly, quarterly, yearly), and local wall-clock time for series that
must stay regular across daylight-saving transitions.
"""

from __future__ import annotations

import calendar
from collections import Counter
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from enum import Enum
from typing import Any, Optional, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .errors import EmptyAfterCleaning, TooFewPoints, UnknownZone

MICROS_PER_SECOND = 1_000_000
MICROS_PER_MINUTE = 60 * MICROS_PER_SECOND
MICROS_PER_HOUR = 60 * MICROS_PER_MINUTE
MICROS_PER_DAY = 24 * MICROS_PER_HOUR
MICROS_PER_WEEK = 7 * MICROS_PER_DAY

# Mean Gregorian month/quarter/year lengths, used only for snap tolerance.
_MEAN_MONTH_MICROS = int(365.2425 / 12 * MICROS_PER_DAY)
_MEAN_QUARTER_MICROS = 3 * _MEAN_MONTH_MICROS
_MEAN_YEAR_MICROS = 12 * _MEAN_MONTH_MICROS

_UTC_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_LOCAL_EPOCH = datetime(1960, 1, 1)

CALENDAR_SNAP_TOLERANCE = 0.05


class FrequencyKind(str, Enum):
    PER_MINUTE = "per_minute"
    HOURLY = "hourly"
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"
    QUARTERLY = "quarterly"
    YEARLY = "yearly"
    CUSTOM_INTERVAL = "custom_interval"


_CALENDAR_KINDS = {
    FrequencyKind.MONTHLY: 1,
    FrequencyKind.QUARTERLY: 3,
    FrequencyKind.YEARLY: 12,
}

_FIXED_KINDS = {
    FrequencyKind.PER_MINUTE: MICROS_PER_MINUTE,
    FrequencyKind.HOURLY: MICROS_PER_HOUR,
    FrequencyKind.DAILY: MICROS_PER_DAY,
    FrequencyKind.WEEKLY: MICROS_PER_WEEK,
}


@dataclass(frozen=True)
class Frequency:
    """Grid step: microseconds for absolute kinds, months for calendar kinds."""

    kind: FrequencyKind
    interval: int

    def __post_init__(self):
        if self.interval <= 0:
            raise ValueError("frequency interval must be positive")

    @property
    def is_calendar(self) -> bool:
        return self.kind in _CALENDAR_KINDS

    @classmethod
    def named(cls, name: str) -> "Frequency":
        kind = FrequencyKind(name.lower())
        if kind in _CALENDAR_KINDS:
            return cls(kind, _CALENDAR_KINDS[kind])
        if kind in _FIXED_KINDS:
            return cls(kind, _FIXED_KINDS[kind])
        raise ValueError(f"{name!r} needs an explicit interval")


class IndexBasis(str, Enum):
    UTC_MICROS = "utc_micros"
    MONTHS_SINCE_START = "months_since_start"
    LOCAL_MICROS_SINCE_1960 = "local_micros_since_1960"


@dataclass(frozen=True)
class RawSeries:
    """Unvalidated input: (timestamp, value) pairs plus an optional ID tuple."""

    points: Sequence[tuple]
    series_id: Optional[tuple] = None


@dataclass
class RegularSeries:
    """Equally spaced values on a grid; NaN marks missing slots.

    ``start`` is microseconds for the UTC/local bases and the origin
    calendar date for the month basis.  ``slot_counts`` records how many
    raw observations were downsampled into each slot (0 means the slot was
    created empty).
    """

    start: Any
    freq: Frequency
    values: np.ndarray
    timezone: Optional[str] = None
    index_basis: IndexBasis = IndexBasis.UTC_MICROS
    slot_counts: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.values)

    def slot_timestamps(self, count: Optional[int] = None, start_slot: int = 0):
        """Timestamps of grid slots ``start_slot .. start_slot+count-1``.

        Returns UTC microseconds for absolute bases (local slots are mapped
        back through the zone database) and calendar dates for the month
        basis.
        """
        n = len(self.values) if count is None else count
        slots = range(start_slot, start_slot + n)
        if self.index_basis == IndexBasis.MONTHS_SINCE_START:
            return [from_month_index(s * self.freq.interval, self.start) for s in slots]
        micros = [self.start + s * self.freq.interval for s in slots]
        if self.index_basis == IndexBasis.LOCAL_MICROS_SINCE_1960:
            return delocalize_timestamps(micros, self.timezone)
        return micros


def micros_to_datetime(micros: int) -> datetime:
    return _UTC_EPOCH + timedelta(microseconds=int(micros))


def datetime_to_micros(dt: datetime) -> int:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return round((dt - _UTC_EPOCH).total_seconds() * MICROS_PER_SECOND)


def parse_timestamp(value: Any) -> Optional[int]:
    """Parse one timestamp into UTC microseconds; None when malformed.

    Accepts ISO-8601 strings (date or datetime, optional offset or ``Z``),
    integer/float epoch microseconds, and ``date``/``datetime`` objects.
    """
    if value is None:
        return None
    if isinstance(value, bool):
        return None
    if isinstance(value, datetime):
        return datetime_to_micros(value)
    if isinstance(value, date):
        return datetime_to_micros(datetime(value.year, value.month, value.day))
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value) or value != int(value):
            return None
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            return None
        try:
            return int(text)
        except ValueError:
            pass
        try:
            dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
        except ValueError:
            return None
        return datetime_to_micros(dt)
    return None


def parse_value(value: Any) -> float:
    """Parse one observation value; NaN when missing or unparseable."""
    if value is None:
        return float("nan")
    if isinstance(value, (int, float, np.integer, np.floating)):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or text.lower() in ("na", "nan", "null", "none"):
            return float("nan")
        try:
            return float(text)
        except ValueError:
            return float("nan")
    return float("nan")


def infer_frequency(timestamps: Sequence[int]) -> Frequency:
    """Infer the grid step as the mode of inter-timestamp gaps.

    Snaps to a named kind when the modal gap falls within
    ``CALENDAR_SNAP_TOLERANCE`` of that kind's mean gap; ties between gap
    counts resolve to the smallest gap.
    """
    distinct = sorted(set(int(t) for t in timestamps))
    if len(distinct) < 3:
        raise TooFewPoints(f"need >= 3 distinct timestamps, got {len(distinct)}")
    gaps = [b - a for a, b in zip(distinct, distinct[1:])]
    counts = Counter(gaps)
    best = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))
    modal_gap = best[0]

    for kind, mean in _FIXED_KINDS.items():
        if abs(modal_gap - mean) <= CALENDAR_SNAP_TOLERANCE * mean:
            return Frequency(kind, mean)
    for kind, mean in (
        (FrequencyKind.MONTHLY, _MEAN_MONTH_MICROS),
        (FrequencyKind.QUARTERLY, _MEAN_QUARTER_MICROS),
        (FrequencyKind.YEARLY, _MEAN_YEAR_MICROS),
    ):
        if abs(modal_gap - mean) <= CALENDAR_SNAP_TOLERANCE * mean:
            return Frequency(kind, _CALENDAR_KINDS[kind])
    return Frequency(FrequencyKind.CUSTOM_INTERVAL, modal_gap)


def _days_in_month(year: int, month: int) -> int:
    return calendar.monthrange(year, month)[1]


def to_month_index(day: date, origin: date) -> int:
    """Whole months elapsed from ``origin`` to ``day``.

    A month is complete on the origin's day-of-month anniversary, clamped
    to the target month's length so that e.g. one month after Jan 31 is
    Feb 28/29.
    """
    if day < origin:
        raise ValueError(f"date {day} precedes origin {origin}")
    months = (day.year - origin.year) * 12 + (day.month - origin.month)
    anniversary = min(origin.day, _days_in_month(day.year, day.month))
    if day.day < anniversary:
        months -= 1
    return months


def from_month_index(months: int, origin: date) -> date:
    """Inverse of :func:`to_month_index` for on-grid dates."""
    total = origin.month - 1 + int(months)
    year = origin.year + total // 12
    month = total % 12 + 1
    return date(year, month, min(origin.day, _days_in_month(year, month)))


def _zone(name: str) -> ZoneInfo:
    try:
        return ZoneInfo(name)
    except Exception as exc:
        raise UnknownZone(f"unknown IANA zone {name!r}") from exc


def localize_timestamps(timestamps: Sequence[int], zone: str) -> list[int]:
    """Re-express UTC microseconds as local wall-clock microseconds since 1960.

    DST transitions surface as grid gaps (spring forward) or duplicate
    slots (fall back); both are resolved later by regularization.
    """
    tz = _zone(zone)
    out = []
    for micros in timestamps:
        local = micros_to_datetime(micros).astimezone(tz).replace(tzinfo=None)
        out.append(round((local - _LOCAL_EPOCH).total_seconds() * MICROS_PER_SECOND))
    return out


def delocalize_timestamps(local_micros: Sequence[int], zone: Optional[str]) -> list[int]:
    """Map local wall-clock microseconds back to UTC microseconds.

    Ambiguous wall times resolve to their first occurrence; nonexistent
    wall times (inside a spring-forward gap) follow the zone database's
    forward mapping, so duplicates may appear and must be dropped by the
    caller when a strictly increasing output grid is required.
    """
    tz = _zone(zone or "UTC")
    out = []
    for micros in local_micros:
        naive = _LOCAL_EPOCH + timedelta(microseconds=int(micros))
        out.append(datetime_to_micros(naive.replace(tzinfo=tz)))
    return out


def _clean_points(raw: RawSeries) -> tuple[list[int], list[float]]:
    stamps, values = [], []
    for point in raw.points:
        ts = parse_timestamp(point[0])
        if ts is None:
            continue
        stamps.append(ts)
        values.append(parse_value(point[1]))
    if not stamps:
        raise EmptyAfterCleaning("no points with parseable timestamps")
    order = np.argsort(np.asarray(stamps), kind="stable")
    return [stamps[i] for i in order], [values[i] for i in order]


def regularize(
    raw: RawSeries,
    freq_override: Optional[Frequency] = None,
    aggregator: str = "mean",
    tz: Optional[str] = None,
) -> RegularSeries:
    """Snap cleaned observations onto an equally spaced grid.

    Malformed timestamps are dropped; multiple observations landing in one
    slot are downsampled with ``aggregator`` (``mean`` or ``sum``); slots
    with no observation become NaN.  Calendar frequencies use the month
    index basis anchored at the first observation's date, and a ``tz``
    switches sub-monthly grids to the local wall-clock basis.
    """
    stamps, values = _clean_points(raw)
    if len(set(stamps)) < 3:
        raise TooFewPoints("need >= 3 distinct timestamps after cleaning")
    freq = freq_override or infer_frequency(stamps)

    if freq.is_calendar:
        zone = _zone(tz) if tz else None
        dates = []
        for micros in stamps:
            dt = micros_to_datetime(micros)
            if zone is not None:
                dt = dt.astimezone(zone)
            dates.append(dt.date())
        origin = dates[0]
        slots = [round(to_month_index(d, origin) / freq.interval) for d in dates]
        basis, start = IndexBasis.MONTHS_SINCE_START, origin
    else:
        if tz and tz.upper() != "UTC":
            stamps = localize_timestamps(stamps, tz)
            basis = IndexBasis.LOCAL_MICROS_SINCE_1960
        else:
            basis = IndexBasis.UTC_MICROS
        start = stamps[0]
        slots = [round((t - start) / freq.interval) for t in stamps]

    n = max(slots) + 1
    sums = np.zeros(n)
    counts = np.zeros(n, dtype=int)
    for slot, value in zip(slots, values):
        if np.isnan(value):
            continue
        sums[slot] += value
        counts[slot] += 1
    out = np.full(n, np.nan)
    observed = counts > 0
    if aggregator == "mean":
        out[observed] = sums[observed] / counts[observed]
    elif aggregator == "sum":
        out[observed] = sums[observed]
    else:
        raise ValueError(f"unknown aggregator {aggregator!r}")
    return RegularSeries(
        start=start,
        freq=freq,
        values=out,
        timezone=tz,
        index_basis=basis,
        slot_counts=counts,
    )


def slots_per_year(freq: Frequency) -> float:
    """Approximate number of grid slots in one year."""
    if freq.is_calendar:
        return 12.0 / freq.interval
    return _MEAN_YEAR_MICROS / freq.interval
