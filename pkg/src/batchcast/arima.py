"""Non-seasonal ARIMA trend modeling with automatic order selection.

The differencing order comes from repeated KPSS level-stationarity tests;
(p, q) and an optional drift term are chosen by AIC over an exhaustive
candidate grid.  Coefficients are estimated by conditional-sum-of-squares
Gaussian likelihood with a limited-memory quasi-Newton optimizer, using a
partial-autocorrelation transform to keep every iterate stationary and
invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize, signal

from .errors import AllFitsFailed, SingularFit, TooShort

KPSS_CRITICAL_5PCT = 0.463
DEFAULT_MAX_ORDER = 2
DEFAULT_MIN_ORDER = 0
_GRAD_STEP = 1e-6
_MAX_ITER = 200
_FTOL = 1e-9


@dataclass(frozen=True)
class ArimaOrder:
    p: int
    d: int
    q: int
    drift: bool = False

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError("orders must be non-negative")
        if self.drift and self.d != 1:
            raise ValueError("drift term requires d = 1")


@dataclass
class ArimaModel:
    """Fitted coefficients plus the state needed to forecast from the end."""

    order: ArimaOrder
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    drift_coeff: float
    sigma2: float
    aic: float
    loglik: float
    n_train: int
    mean: float = 0.0
    converged: bool = True
    tail_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    tail_residuals: np.ndarray = field(default_factory=lambda: np.empty(0))
    last_levels: np.ndarray = field(default_factory=lambda: np.empty(0))
    fitted: Optional[np.ndarray] = None
    residuals: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass
class TrendForecast:
    mean: np.ndarray
    stderr: np.ndarray


def kpss_statistic(values: np.ndarray) -> float:
    """KPSS level-stationarity statistic with Bartlett long-run variance.

    Lag truncation is ``floor(4 * (n/100)^0.25)``; a zero long-run variance
    (constant input) counts as stationary.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    e = y - y.mean()
    partial = np.cumsum(e)
    lags = int(np.floor(4.0 * (n / 100.0) ** 0.25))
    gamma0 = float(e @ e) / n
    lrv = gamma0
    for j in range(1, lags + 1):
        w = 1.0 - j / (lags + 1.0)
        lrv += 2.0 * w * float(e[j:] @ e[:-j]) / n
    if lrv <= 0:
        return 0.0
    return float(partial @ partial) / (n * n * lrv)


def kpss_d(values: np.ndarray, max_d: int = 2) -> int:
    """Number of differences until the KPSS test stops rejecting at 5%."""
    y = np.asarray(values, dtype=float)
    if len(y) < 20:
        raise TooShort(f"KPSS needs >= 20 points, got {len(y)}")
    d = 0
    while d < max_d and kpss_statistic(y) > KPSS_CRITICAL_5PCT:
        y = np.diff(y)
        d += 1
    return d


def _pacf_to_coeffs(pacf: np.ndarray) -> np.ndarray:
    """Durbin-Levinson map from partial autocorrelations to AR coefficients."""
    phi = np.zeros(len(pacf))
    for k, r in enumerate(pacf):
        if k:
            phi[:k] = phi[:k] - r * phi[:k][::-1]
        phi[k] = r
    return phi


def _coeffs_to_pacf(coeffs: np.ndarray) -> np.ndarray:
    a = np.array(coeffs, dtype=float)
    pacf = np.empty(len(a))
    for k in range(len(a) - 1, -1, -1):
        r = a[k]
        pacf[k] = r
        if k:
            denom = 1.0 - r * r
            if abs(denom) < 1e-12:
                denom = np.copysign(1e-12, denom if denom != 0 else 1.0)
            a[:k] = (a[:k] + r * a[:k][::-1]) / denom
    return pacf


def _unpack(u: np.ndarray, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    phi = _pacf_to_coeffs(np.tanh(u[:p])) if p else np.empty(0)
    theta = -_pacf_to_coeffs(np.tanh(u[p:])) if q else np.empty(0)
    return phi, theta


def _pack(phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    def to_u(coeffs):
        pacf = _coeffs_to_pacf(coeffs)
        return np.arctanh(np.clip(pacf, -0.98, 0.98))

    parts = []
    if len(phi):
        parts.append(to_u(phi))
    if len(theta):
        parts.append(to_u(-theta))
    return np.concatenate(parts) if parts else np.empty(0)


def _css_residuals(x: np.ndarray, phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Residuals for t >= p conditioning on the first p observations."""
    p = len(phi)
    u = x[p:].copy()
    n = len(x)
    for i in range(1, p + 1):
        u -= phi[i - 1] * x[p - i : n - i]
    if len(theta):
        u = signal.lfilter([1.0], np.concatenate(([1.0], theta)), u)
    return u


def _hannan_rissanen(x: np.ndarray, p: int, q: int) -> np.ndarray:
    """Long-AR initialization for the optimizer; zeros on failure."""
    n = len(x)
    m = min(max(8, p + q + 1), max(n // 4, 1))
    if n - m <= p + q + 2 or m < 1:
        return np.zeros(p + q)
    try:
        design = np.column_stack([x[m - i : n - i] for i in range(1, m + 1)])
        ar_long, *_ = np.linalg.lstsq(design, x[m:], rcond=None)
        resid = np.concatenate([np.zeros(m), x[m:] - design @ ar_long])
        t0 = max(p, m)
        cols = [x[t0 - i : n - i] for i in range(1, p + 1)]
        cols += [resid[t0 - j : n - j] for j in range(1, q + 1)]
        if not cols:
            return np.empty(0)
        beta, *_ = np.linalg.lstsq(np.column_stack(cols), x[t0:], rcond=None)
        return _pack(beta[:p], beta[p : p + q])
    except np.linalg.LinAlgError:
        return np.zeros(p + q)


def fit_arima(values: np.ndarray, order: ArimaOrder) -> ArimaModel:
    """Fit one ARIMA(p, d, q) model by conditional sum of squares.

    The series is differenced ``d`` times; the level mean (d = 0) or the
    drift (d = 1 with drift) is fixed at the sample mean of that scale.
    Gradients use central differences and the optimizer runs in the
    transformed parameter space, so every candidate stays stationary and
    invertible.  A failed line search returns the best iterate with
    ``converged = False``.
    """
    y = np.asarray(values, dtype=float)
    p, d, q = order.p, order.d, order.q
    if len(y) <= p + q + d + 1:
        raise TooShort(f"need more than {p + q + d + 1} points, got {len(y)}")

    w = np.diff(y, n=d) if d else y.copy()
    if d == 0:
        mean = float(w.mean())
    elif d == 1 and order.drift:
        mean = float(w.mean())
    else:
        mean = 0.0
    x = w - mean
    n = len(x)
    n_eff = n - p

    if p + q == 0:
        phi = np.empty(0)
        theta = np.empty(0)
        resid = x.copy()
        converged = True
    else:
        u0 = _hannan_rissanen(x, p, q)
        best = {"u": u0, "f": np.inf}

        def objective(u):
            phi_c, theta_c = _unpack(u, p, q)
            eps = _css_residuals(x, phi_c, theta_c)
            rss = float(eps @ eps)
            if not np.isfinite(rss) or rss <= 0:
                return 1e12
            f = 0.5 * n_eff * np.log(rss / n_eff)
            if f < best["f"]:
                best["f"] = f
                best["u"] = u.copy()
            return f

        def gradient(u):
            g = np.empty(len(u))
            for i in range(len(u)):
                step = np.zeros(len(u))
                step[i] = _GRAD_STEP
                g[i] = (objective(u + step) - objective(u - step)) / (2 * _GRAD_STEP)
            return g

        result = optimize.minimize(
            objective,
            u0,
            jac=gradient,
            method="L-BFGS-B",
            options={"maxiter": _MAX_ITER, "ftol": _FTOL},
        )
        u_opt = best["u"] if best["f"] < result.fun else result.x
        converged = bool(result.success)
        phi, theta = _unpack(u_opt, p, q)
        resid = _css_residuals(x, phi, theta)

    rss = float(resid @ resid)
    if not np.isfinite(rss):
        raise SingularFit(f"degenerate fit for order {order}")
    sigma2 = rss / max(n_eff, 1)
    safe_sigma2 = max(sigma2, 1e-300)
    loglik = -0.5 * n_eff * (np.log(2.0 * np.pi * safe_sigma2) + 1.0)
    k = p + q + (1 if order.drift else 0) + 1
    aic = 2.0 * k - 2.0 * loglik

    fitted_x = np.concatenate([x[:p], x[p:] - resid])
    last_levels = np.array([np.diff(y, n=i)[-1] for i in range(d)])
    return ArimaModel(
        order=order,
        ar_coeffs=phi,
        ma_coeffs=theta,
        drift_coeff=mean if (d == 1 and order.drift) else 0.0,
        sigma2=sigma2,
        aic=float(aic),
        loglik=float(loglik),
        n_train=len(y),
        mean=mean if d == 0 else 0.0,
        converged=converged,
        tail_values=x[n - p :] if p else np.empty(0),
        tail_residuals=resid[len(resid) - q :] if q else np.empty(0),
        last_levels=last_levels,
        fitted=fitted_x + mean,
        # On the undifferenced scale the one-step residual equals the
        # differenced-scale residual; conditioned-on slots carry zero.
        residuals=np.concatenate([np.zeros(d + p), resid]),
    )


def candidate_orders(
    max_order: int, min_order: int, d: int, include_drift: Optional[bool] = None
) -> list[ArimaOrder]:
    """All (p, q) pairs with min_order <= p + q <= max_order, plus drift
    variants when d = 1, in deterministic tie-break order."""
    drifts: tuple[bool, ...]
    if d == 1:
        drifts = (False, True) if include_drift is None else (bool(include_drift),)
    else:
        drifts = (False,)
    orders = []
    for p in range(max_order + 1):
        for q in range(max_order + 1 - p):
            if p + q < min_order:
                continue
            for drift in drifts:
                orders.append(ArimaOrder(p, d, q, drift))
    orders.sort(key=lambda o: (o.p + o.q, o.q, o.p, o.drift))
    return orders


def auto_arima(
    values: np.ndarray,
    max_order: int = DEFAULT_MAX_ORDER,
    min_order: int = DEFAULT_MIN_ORDER,
    d: Optional[int] = None,
    include_drift: Optional[bool] = None,
    max_d: int = 2,
) -> ArimaModel:
    """Select the lowest-AIC model over the exhaustive candidate grid.

    ``d`` defaults to the KPSS rule; ties break toward smaller p + q, then
    smaller q, then no drift.
    """
    if min_order > max_order:
        raise ValueError("min_order must not exceed max_order")
    y = np.asarray(values, dtype=float)
    if d is None:
        d = kpss_d(y, max_d)

    best: Optional[ArimaModel] = None
    errors = []
    for order in candidate_orders(max_order, min_order, d, include_drift):
        try:
            model = fit_arima(y, order)
        except (TooShort, SingularFit) as exc:
            errors.append(f"{order}: {exc}")
            continue
        if best is None or model.aic < best.aic:
            best = model
    if best is None:
        raise AllFitsFailed("; ".join(errors) or "no candidate orders")
    return best


def psi_weights(model: ArimaModel, horizon: int) -> np.ndarray:
    """Moving-average expansion weights of the differenced-and-AR process."""
    phi = model.ar_coeffs
    theta = model.ma_coeffs
    d = model.order.d
    poly = np.concatenate(([1.0], -phi)) if len(phi) else np.array([1.0])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    a = -poly[1:]  # recursion weights on past values
    psi = np.zeros(horizon)
    if horizon == 0:
        return psi
    psi[0] = 1.0
    for j in range(1, horizon):
        acc = theta[j - 1] if j - 1 < len(theta) else 0.0
        for i in range(1, min(j, len(a)) + 1):
            acc += a[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def forecast_trend(model: ArimaModel, horizon: int) -> TrendForecast:
    """Point forecasts with variance projected through the psi-weights.

    Future shocks are zero in the mean recursion; the step-h variance is
    ``sigma^2 * sum(psi_j^2, j < h)``, so the first standard error equals
    the residual standard deviation.
    """
    p, d, q = model.order.p, model.order.d, model.order.q
    phi = model.ar_coeffs
    theta = model.ma_coeffs

    xs = list(model.tail_values)
    eps = list(model.tail_residuals)
    path = np.empty(horizon)
    for h in range(horizon):
        value = 0.0
        for i in range(1, p + 1):
            if len(xs) >= i:
                value += phi[i - 1] * xs[-i]
        for j in range(1, q + 1):
            if len(eps) >= j:
                value += theta[j - 1] * eps[-j]
        path[h] = value
        xs.append(value)
        eps.append(0.0)

    if d == 0:
        mean_path = path + model.mean
    else:
        mean_path = path + model.drift_coeff
        for level in model.last_levels[::-1]:
            mean_path = level + np.cumsum(mean_path)

    psi = psi_weights(model, horizon)
    variance = model.sigma2 * np.cumsum(psi**2)
    return TrendForecast(mean=mean_path, stderr=np.sqrt(np.maximum(variance, 0.0)))
