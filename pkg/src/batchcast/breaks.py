"""Change-period detection and step-change adjustment.

Rolling local forecasts (double exponential smoothing with trend) are run
forward and backward; slots where the summed out-of-sample residuals are
extreme mark potential change starts/ends, which are paired into change
periods.  Confirmed level or trend shifts (Chow F-test across neighboring
stable periods) are then removed so that history aligns with the most
recent stable period, which is left untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .errors import TooShort
from .gapfill import MissingMask, MissingSource, SmoothParams, interpolate
from .spikes import DEFAULT_ALPHA, DEFAULT_BETA, double_exp_smooth, _robust_z

DEFAULT_Z_THRESHOLD = 5.0
DEFAULT_CHOW_ALPHA = 0.01


@dataclass(frozen=True)
class ChangePeriod:
    """Inclusive slot range [start, end] suspected to contain a change."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid change period [{self.start}, {self.end}]")


@dataclass
class BreakReport:
    periods: list[ChangePeriod]
    adjustment: np.ndarray
    cleaned: np.ndarray
    boundary_pvalues: list[float] = field(default_factory=list)


def rolling_residual_scores(
    values: np.ndarray,
    m: int,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
) -> np.ndarray:
    """Robust z-scores of summed m-step-ahead local forecast residuals.

    At each index i the smoother state fitted on slots [0, i) forecasts the
    next m+1 slots; the residual total is z-scored over all valid i.  Slots
    without a full forecast window, or inside the ``max(10, 2m)`` burn-in
    where the smoother state is still unsettled, are NaN.  The smoother
    starts with a flat slope: a first-difference start would inject one
    noise sample into every early forecast through the step multiplier.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    if n < 3 * m:
        raise TooShort(f"need n >= 3m = {3 * m}, got {n}")
    levels, slopes = double_exp_smooth(y, alpha, beta, "forward", initial_slope=0.0)
    cumsum = np.concatenate([[0.0], np.cumsum(y)])
    steps = (m + 1) * (m + 2) / 2.0

    burn_in = max(10, 2 * m)
    totals = np.full(n, np.nan)
    for i in range(min(burn_in, max(n - m - 1, 2)), n - m):
        window_sum = cumsum[i + m + 1] - cumsum[i]
        totals[i] = (m + 1) * levels[i - 1] + steps * slopes[i - 1] - window_sum

    valid = np.isfinite(totals)
    z = np.full(n, np.nan)
    if valid.any():
        z[valid] = _robust_z(totals[valid])
    return z


def _runs(indices: np.ndarray) -> list[tuple[int, int]]:
    """Group sorted indices into maximal runs of consecutive values."""
    if indices.size == 0:
        return []
    splits = np.flatnonzero(np.diff(indices) > 1)
    starts = np.concatenate([[0], splits + 1])
    ends = np.concatenate([splits, [indices.size - 1]])
    return [(int(indices[s]), int(indices[e])) for s, e in zip(starts, ends)]


def detect_change_periods(
    values: np.ndarray,
    m: int,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
) -> list[ChangePeriod]:
    """Pair forward change starts with backward change ends.

    Runs of consecutive flagged slots count as one candidate; a start and
    an end pair up when the end trails the start by less than m slots, and
    unmatched candidates fall back to an m-wide window.  Overlapping or
    near-adjacent periods are merged, expanded by one slot and clipped.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    z_fwd = rolling_residual_scores(y, m, alpha, beta)
    z_rev = rolling_residual_scores(y[::-1], m, alpha, beta)

    fpcs = np.flatnonzero(np.abs(np.nan_to_num(z_fwd)) > z_threshold)
    bpce_rev = np.flatnonzero(np.abs(np.nan_to_num(z_rev)) > z_threshold)
    bpce = np.sort(n - 1 - bpce_rev)

    start_runs = _runs(fpcs)
    end_runs = _runs(bpce)

    raw: list[tuple[int, int]] = []
    matched_ends = set()
    for s_lo, s_hi in start_runs:
        partners = [
            k
            for k, (e_lo, e_hi) in enumerate(end_runs)
            if 0 < e_hi - s_lo < m or 0 < e_lo - s_lo < m
        ]
        if partners:
            e_hi = max(end_runs[k][1] for k in partners)
            matched_ends.update(partners)
            raw.append((s_lo, max(e_hi, s_hi)))
        else:
            raw.append((s_lo, s_hi + m))
    for k, (e_lo, e_hi) in enumerate(end_runs):
        if k not in matched_ends:
            raw.append((e_lo - m, e_hi))

    if not raw:
        return []
    raw.sort()
    merged = [list(raw[0])]
    for lo, hi in raw[1:]:
        if lo - merged[-1][1] < m:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    periods = []
    for lo, hi in merged:
        lo = max(lo - 1, 0)
        hi = min(hi + 1, n - 1)
        if hi > lo:
            periods.append(ChangePeriod(lo, hi))
    return periods


def _line_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line a + b*t; returns (a, b, rss)."""
    if len(y) == 1:
        return float(y[0]), 0.0, 0.0
    coeffs = np.polyfit(t, y, 1)
    fitted = np.polyval(coeffs, t)
    rss = float(np.sum((y - fitted) ** 2))
    return float(coeffs[1]), float(coeffs[0]), rss


def chow_test(
    t1: np.ndarray, y1: np.ndarray, t2: np.ndarray, y2: np.ndarray
) -> tuple[float, float]:
    """Chow F-statistic and p-value for a structural break between segments.

    Compares one pooled intercept+slope fit against separate fits (two
    parameters per segment).
    """
    n1, n2 = len(y1), len(y2)
    dof = n1 + n2 - 4
    if dof < 1:
        return 0.0, 1.0
    _, _, rss1 = _line_fit(t1, y1)
    _, _, rss2 = _line_fit(t2, y2)
    _, _, rss_pooled = _line_fit(
        np.concatenate([t1, t2]), np.concatenate([y1, y2])
    )
    denom = (rss1 + rss2) / dof
    if denom <= 0:
        # Segments fit exactly; any pooled misfit is an unambiguous break.
        return (np.inf, 0.0) if rss_pooled > 1e-12 else (0.0, 1.0)
    f_stat = ((rss_pooled - rss1 - rss2) / 2.0) / denom
    p_value = float(stats.f.sf(f_stat, 2, dof))
    return float(f_stat), p_value


def _stable_segments(
    n: int, periods: list[ChangePeriod], min_points: int = 3
) -> tuple[list[tuple[int, int]], list[ChangePeriod]]:
    """Slot ranges between change windows; short fragments fold into windows."""
    windows = [[p.start, p.end] for p in sorted(periods, key=lambda p: p.start)]
    merged: list[list[int]] = []
    for lo, hi in windows:
        if merged and lo - merged[-1][1] - 1 < min_points:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    segments = []
    cursor = 0
    for lo, hi in merged:
        if lo - cursor >= min_points:
            segments.append((cursor, lo - 1))
        cursor = hi + 1
    if n - cursor >= min_points:
        segments.append((cursor, n - 1))
    return segments, [ChangePeriod(lo, hi) for lo, hi in merged]


def adjust_step_changes(
    values: np.ndarray,
    periods: list[ChangePeriod],
    chow_alpha: float = DEFAULT_CHOW_ALPHA,
    seasonal_profile: Optional[np.ndarray] = None,
) -> BreakReport:
    """Remove confirmed level/trend shifts, anchoring on the latest data.

    Intercept and slope differences across each significant boundary are
    accumulated backward so earlier stable periods re-align with the final
    one; change windows are masked and re-interpolated from the adjusted
    neighbors.  ``adjustment`` is defined as ``original - cleaned`` so the
    additive identity is exact everywhere.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    report = BreakReport(periods=list(periods), adjustment=np.zeros(n), cleaned=y.copy())
    if not periods:
        return report

    segments, windows = _stable_segments(n, periods)
    report.periods = windows
    if not segments:
        return report

    t = np.arange(n, dtype=float)
    fits = []
    for lo, hi in segments:
        seg = slice(lo, hi + 1)
        a, b, _ = _line_fit(t[seg], y[seg])
        fits.append((a, b))

    adjusted = y.copy()
    cum_a = cum_b = 0.0
    for k in range(len(segments) - 2, -1, -1):
        lo1, hi1 = segments[k]
        lo2, hi2 = segments[k + 1]
        _, p_value = chow_test(
            t[lo1 : hi1 + 1], y[lo1 : hi1 + 1], t[lo2 : hi2 + 1], y[lo2 : hi2 + 1]
        )
        report.boundary_pvalues.insert(0, p_value)
        if p_value < chow_alpha:
            cum_a += fits[k][0] - fits[k + 1][0]
            cum_b += fits[k][1] - fits[k + 1][1]
        if cum_a != 0.0 or cum_b != 0.0:
            seg = slice(lo1, hi1 + 1)
            adjusted[seg] = y[seg] - (cum_a + cum_b * t[seg])

    mask = MissingMask(
        {
            int(i): MissingSource.USER_MARKED_OUTLIER
            for w in windows
            for i in range(w.start, w.end + 1)
        }
    )
    cleaned = interpolate(
        adjusted, mask, SmoothParams(seasonal_profile=seasonal_profile)
    )
    report.cleaned = cleaned
    report.adjustment = y - cleaned
    return report
