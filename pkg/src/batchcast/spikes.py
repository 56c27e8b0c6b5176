"""Temporary spike and dip removal.

Double exponential smoothing is run front-to-back and back-to-front; slots
whose robust z-scored deviation is extreme in both directions, with the
same sign, are temporary outliers.  Sign disagreement separates them from
step changes, series edges fall back to one-way detection, and deviations
recurring at the same seasonal position every year are left for the
seasonality stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import TooShort
from .gapfill import MissingMask, MissingSource, SmoothParams, interpolate

DEFAULT_ALPHA = 0.5   # large: adapts quickly to seasonal swings
DEFAULT_BETA = 0.05   # small: slope robust to local variation
DEFAULT_Z_THRESHOLD = 5.0
DEFAULT_EDGE_LENGTH = 10


@dataclass
class SmoothingState:
    """Level/slope pair advanced by the double exponential recursion."""

    level: float
    slope: float
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA

    def update(self, y: float) -> "SmoothingState":
        level = self.alpha * y + (1.0 - self.alpha) * (self.level + self.slope)
        slope = self.beta * (level - self.level) + (1.0 - self.beta) * self.slope
        return SmoothingState(level, slope, self.alpha, self.beta)

    def forecast(self, steps: int) -> float:
        return self.level + steps * self.slope


def double_exp_smooth(
    values: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    direction: str = "forward",
    initial_slope: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Smoothed levels and slopes, forward or backward over the series.

    Initialized with the first observed value and first difference (or an
    explicit ``initial_slope``); the backward pass is the forward recursion
    on the reversed series.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    if n < 2:
        raise TooShort("double exponential smoothing needs >= 2 points")
    if direction == "backward":
        levels, slopes = double_exp_smooth(
            y[::-1], alpha, beta, "forward", initial_slope
        )
        return levels[::-1], slopes[::-1]
    levels = np.empty(n)
    slopes = np.empty(n)
    levels[0] = y[0]
    slopes[0] = y[1] - y[0] if initial_slope is None else initial_slope
    lv, sl = levels[0], slopes[0]
    one_minus_a = 1.0 - alpha
    one_minus_b = 1.0 - beta
    for i in range(1, n):
        prev = lv
        lv = alpha * y[i] + one_minus_a * (lv + sl)
        sl = beta * (lv - prev) + one_minus_b * sl
        levels[i] = lv
        slopes[i] = sl
    return levels, slopes


def robust_std(x: np.ndarray) -> float:
    """1.4826 * median absolute deviation; mean-based fallback when MAD is 0."""
    x = np.asarray(x, dtype=float)
    x = x[np.isfinite(x)]
    if x.size == 0:
        return 0.0
    med = np.median(x)
    mad = np.median(np.abs(x - med))
    if mad > 0:
        return 1.4826 * mad
    avg_dev = np.mean(np.abs(x - med))
    return 1.2533 * avg_dev


def _robust_z(deviations: np.ndarray) -> np.ndarray:
    scale = robust_std(deviations)
    if scale <= 0:
        return np.zeros_like(deviations)
    return deviations / scale


@dataclass
class SpikeReport:
    """Detected spike/dip slots plus the per-slot removed component."""

    detected: np.ndarray
    z_forward: np.ndarray
    z_backward: np.ndarray
    replaced_values: dict[int, float] = field(default_factory=dict)
    component: Optional[np.ndarray] = None


def _recurring_every_year(
    detected: np.ndarray, n: int, yearly_period: float
) -> set[int]:
    """Indices detected at the same seasonal position (+-1 slot) every year."""
    full_years = int(n // yearly_period)
    if full_years < 2:
        return set()
    recurring = set()
    det = detected.astype(float)
    for i in detected:
        hits = 0
        for year in range(full_years):
            lo = round(year * yearly_period)
            hi = round((year + 1) * yearly_period)
            in_year = det[(det >= lo) & (det < hi)]
            if in_year.size == 0:
                break
            delta = np.abs(in_year - float(i)) % yearly_period
            delta = np.minimum(delta, yearly_period - delta)
            if (delta <= 1.0).any():
                hits += 1
            else:
                break
        if hits == full_years:
            recurring.add(int(i))
    return recurring


def detect_spikes(
    values: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    q: float = DEFAULT_Z_THRESHOLD,
    edge_length: int = DEFAULT_EDGE_LENGTH,
    yearly_period: Optional[float] = None,
) -> SpikeReport:
    """Flag temporary outliers confirmed by both smoothing directions.

    ``q`` is the robust z-score threshold and ``edge_length`` the number of
    slots at each end where only the burn-in-free direction is trusted.
    ``yearly_period`` (slots per year) enables the every-year exclusion.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    if n <= 2 * edge_length:
        raise TooShort(f"need more than {2 * edge_length} points, got {n}")

    fwd_levels, _ = double_exp_smooth(y, alpha, beta, "forward")
    bwd_levels, _ = double_exp_smooth(y, alpha, beta, "backward")
    d_fwd = y - fwd_levels
    d_bwd = y - bwd_levels
    z_fwd = _robust_z(d_fwd)
    z_bwd = _robust_z(d_bwd)

    a_fwd = np.abs(z_fwd) > q
    a_bwd = np.abs(z_bwd) > q
    same_sign = d_fwd * d_bwd >= 0
    a_both = a_fwd & a_bwd & same_sign

    idx = np.arange(n)
    tail = idx >= n - edge_length
    head = idx < edge_length
    detected_mask = a_both | (a_fwd & tail) | (a_bwd & head)
    detected = np.flatnonzero(detected_mask)

    if yearly_period is not None and detected.size:
        recurring = _recurring_every_year(detected, n, yearly_period)
        if recurring:
            detected = np.array(
                [i for i in detected if i not in recurring], dtype=int
            )

    return SpikeReport(detected=detected, z_forward=z_fwd, z_backward=z_bwd)


def clean_spikes(
    values: np.ndarray,
    report: SpikeReport,
    seasonal_profile: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Replace detected slots with interpolated values.

    Fills ``report.replaced_values`` and ``report.component`` so that
    ``cleaned + component == original`` holds slot-exact.
    """
    y = np.asarray(values, dtype=float)
    component = np.zeros_like(y)
    if report.detected.size == 0:
        report.component = component
        return y.copy()
    mask = MissingMask(
        {int(i): MissingSource.USER_MARKED_OUTLIER for i in report.detected}
    )
    cleaned = interpolate(y, mask, SmoothParams(seasonal_profile=seasonal_profile))
    for i in report.detected:
        report.replaced_values[int(i)] = float(cleaned[i])
    component[report.detected] = y[report.detected] - cleaned[report.detected]
    report.component = component
    return cleaned
