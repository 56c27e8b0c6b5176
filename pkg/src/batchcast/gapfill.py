"""Missing-value interpolation and locally weighted (LOESS) smoothing.

Fills masked slots with linear interpolation for short gaps and LOESS for
longer ones.  When a per-slot seasonal profile is supplied it is removed
before smoothing and restored afterwards, so filled values carry the
seasonal shape instead of flattening it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .errors import AllMissing, IndexOutOfRange, SpanTooSmall

LINEAR_GAP_LIMIT = 2  # longest gap still filled by straight lines


class MissingSource(str, Enum):
    NATIVE_NA = "native_na"
    SENTINEL_VALUE = "sentinel_value"
    USER_MARKED_OUTLIER = "user_marked_outlier"


@dataclass
class MissingMask:
    """Slots to fill, each labeled with why it is missing."""

    sources: dict[int, MissingSource] = field(default_factory=dict)

    @property
    def indices(self) -> np.ndarray:
        return np.array(sorted(self.sources), dtype=int)

    def __len__(self) -> int:
        return len(self.sources)

    @classmethod
    def from_values(
        cls,
        values: np.ndarray,
        sentinel: Optional[float] = None,
        outlier_indices: Iterable[int] = (),
    ) -> "MissingMask":
        """Collect native NaNs, sentinel matches and user-marked outliers."""
        sources: dict[int, MissingSource] = {}
        for i in np.flatnonzero(np.isnan(values)):
            sources[int(i)] = MissingSource.NATIVE_NA
        if sentinel is not None:
            for i in np.flatnonzero(values == sentinel):
                sources.setdefault(int(i), MissingSource.SENTINEL_VALUE)
        for i in outlier_indices:
            sources[int(i)] = MissingSource.USER_MARKED_OUTLIER
        return cls(sources)


@dataclass
class SmoothParams:
    """Interpolation settings.

    ``method`` may be ``linear``, ``loess`` or ``auto``; auto uses straight
    lines for gaps of up to ``LINEAR_GAP_LIMIT`` slots and LOESS beyond.
    """

    method: str = "auto"
    loess_span: float = 0.2
    seasonal_profile: Optional[np.ndarray] = None


def _tricube(u: np.ndarray) -> np.ndarray:
    u = np.clip(np.abs(u), 0.0, 1.0)
    return (1.0 - u**3) ** 3


def _bisquare(u: np.ndarray) -> np.ndarray:
    u = np.abs(u)
    out = np.zeros_like(u)
    inside = u < 1.0
    out[inside] = (1.0 - u[inside] ** 2) ** 2
    return out


def _wls_fit(dx: np.ndarray, y: np.ndarray, w: np.ndarray, degree: int) -> np.ndarray:
    """Weighted polynomial fit evaluated at dx = 0, vectorized over rows."""
    s0 = w.sum(axis=-1)
    t0 = (w * y).sum(axis=-1)
    if degree == 0:
        return t0 / np.where(s0 > 0, s0, 1.0)
    s1 = (w * dx).sum(axis=-1)
    s2 = (w * dx * dx).sum(axis=-1)
    t1 = (w * dx * y).sum(axis=-1)
    denom = s0 * s2 - s1 * s1
    flat = t0 / np.where(s0 > 0, s0, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sloped = (s2 * t0 - s1 * t1) / denom
    # Degenerate windows (all weight on one slot) fall back to the mean.
    scale = s0 * s2
    bad = ~np.isfinite(sloped) | (np.abs(denom) <= 1e-12 * np.where(scale > 0, scale, 1.0))
    return np.where(bad, flat, sloped)


def _robustness_weights(resid: np.ndarray) -> Optional[np.ndarray]:
    finite = resid[np.isfinite(resid)]
    s = np.median(np.abs(finite)) if finite.size else 0.0
    if s <= 0:
        return None
    return _bisquare(resid / (6.0 * s))


def loess_smooth(
    values: np.ndarray,
    span: float = 0.3,
    degree: int = 1,
    robustness_iters: int = 2,
    prior_weights: Optional[np.ndarray] = None,
) -> np.ndarray:
    """LOESS fit of an equally spaced series, evaluated at every slot.

    Tricube neighborhood weights over the ``ceil(span * n)`` nearest slots,
    polynomial degree 0 or 1, and bisquare robustness reweighting.
    ``prior_weights`` multiply the neighborhood weights (used by the STL
    robustness loop).
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    if degree not in (0, 1):
        raise ValueError("loess degree must be 0 or 1")
    k = int(np.ceil(span * n))
    if k < degree + 2:
        raise SpanTooSmall(f"span {span} covers {k} points, need >= {degree + 2}")
    return _loess_window(y, min(k, n), degree, robustness_iters, prior_weights)


def _loess_window(
    y: np.ndarray,
    k: int,
    degree: int,
    robustness_iters: int,
    prior_weights: Optional[np.ndarray] = None,
) -> np.ndarray:
    n = len(y)
    centers = np.arange(n)
    starts = np.clip(centers - (k - 1) // 2, 0, n - k)
    idx = starts[:, None] + np.arange(k)[None, :]
    dx = (idx - centers[:, None]).astype(float)
    dmax = np.abs(dx).max(axis=1, keepdims=True)
    dmax[dmax == 0] = 1.0
    base_w = _tricube(dx / (dmax + 1e-9))
    if prior_weights is not None:
        base_w = base_w * np.asarray(prior_weights, dtype=float)[idx]
    yw = y[idx]

    rho = np.ones(n)
    fit = _wls_fit(dx, yw, base_w, degree)
    for _ in range(robustness_iters):
        rho_new = _robustness_weights(y - fit)
        if rho_new is None:
            break
        rho = rho_new
        fit = _wls_fit(dx, yw, base_w * rho[idx], degree)
    return fit


def loess_at(
    x_obs: np.ndarray,
    y_obs: np.ndarray,
    x_eval: np.ndarray,
    k: int,
    degree: int = 1,
) -> np.ndarray:
    """LOESS of scattered observations evaluated at arbitrary positions."""
    x_obs = np.asarray(x_obs, dtype=float)
    y_obs = np.asarray(y_obs, dtype=float)
    k = min(max(k, degree + 2), len(x_obs))
    out = np.empty(len(x_eval))
    for j, x0 in enumerate(np.asarray(x_eval, dtype=float)):
        d = np.abs(x_obs - x0)
        near = np.argpartition(d, k - 1)[:k]
        dx = x_obs[near] - x0
        dmax = np.abs(dx).max()
        w = _tricube(dx / (dmax + 1e-9)) if dmax > 0 else np.ones(k)
        out[j] = _wls_fit(dx, y_obs[near], w, degree if k >= degree + 2 else 0)
    return out


def interpolate(
    values: np.ndarray,
    mask: MissingMask,
    params: Optional[SmoothParams] = None,
) -> np.ndarray:
    """Fill masked slots; untouched slots are returned bit-identical.

    With a seasonal profile the fill runs on profile-subtracted values and
    the profile is added back, so gaps keep their seasonal shape.  Edge
    gaps extend flat from the nearest observed value.
    """
    params = params or SmoothParams()
    y = np.array(values, dtype=float)
    n = len(y)
    masked = mask.indices
    if len(masked) and (masked.min() < 0 or masked.max() >= n):
        raise IndexOutOfRange("mask index outside the series grid")

    is_missing = np.zeros(n, dtype=bool)
    is_missing[masked] = True
    is_missing |= np.isnan(y)
    observed = ~is_missing
    if not observed.any():
        raise AllMissing("every slot is masked or NaN")
    if not is_missing.any():
        return y

    work = y.copy()
    profile = params.seasonal_profile
    if profile is not None:
        work = work - np.asarray(profile, dtype=float)

    obs_idx = np.flatnonzero(observed)
    obs_val = work[obs_idx]
    # Linear pass doubles as flat edge extension (np.interp clamps ends).
    linear = np.interp(np.arange(n), obs_idx, obs_val)

    filled = work.copy()
    gap_starts = []
    i = 0
    while i < n:
        if is_missing[i]:
            j = i
            while j < n and is_missing[j]:
                j += 1
            gap_starts.append((i, j))
            i = j
        else:
            i += 1

    for start, end in gap_starts:
        gap = np.arange(start, end)
        length = end - start
        at_edge = start == 0 or end == n
        if params.method == "linear" or (
            params.method == "auto" and (length <= LINEAR_GAP_LIMIT or at_edge)
        ):
            filled[gap] = linear[gap]
        else:
            k = max(int(np.ceil(params.loess_span * len(obs_idx))), 3)
            filled[gap] = loess_at(obs_idx, obs_val, gap, k=k)

    if profile is not None:
        filled = filled + np.asarray(profile, dtype=float)
    out = y.copy()
    out[is_missing] = filled[is_missing]
    return out


def backfill_noise(
    values: np.ndarray,
    outlier_indices: Iterable[int],
    local_smooth: np.ndarray,
    interpolated: np.ndarray,
) -> np.ndarray:
    """Replace marked outliers with interpolation plus their local noise.

    Each outlier slot becomes ``value - local_smooth + interpolated``: the
    interpolated mean carries the locally observed residual, so variation is
    preserved instead of flattened.
    """
    out = np.array(values, dtype=float)
    n = len(out)
    for i in outlier_indices:
        if not 0 <= i < n:
            raise IndexOutOfRange(f"outlier index {i} outside [0, {n})")
        out[i] = values[i] - local_smooth[i] + interpolated[i]
    return out
