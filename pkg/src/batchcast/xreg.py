"""Covariate (external regressor) modeling.

Categorical covariates are dummy-encoded, a ridge regression with an
intercept and a linear time term absorbs the covariate contribution, and
the leftover series runs through the full univariate pipeline.  Forecasts
add the linear covariate part back; interval width comes from the residual
pipeline alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np
from scipy import linalg

from .errors import (
    MisalignedCovariates,
    MissingFutureCovariates,
    SingularSystem,
    TypeMismatch,
)

if TYPE_CHECKING:  # pragma: no cover
    from .pipeline import FittedPipeline, ForecastResult, PipelineConfig
    from .temporal import RegularSeries

INTERCEPT_COL = "intercept"
TIME_COL = "time_index"


@dataclass
class DesignMatrix:
    matrix: np.ndarray
    column_names: list[str]
    encoding_map: dict[str, dict]

    @property
    def feature_slice(self) -> slice:
        return slice(2, len(self.column_names))  # after intercept and time


def _column_kind(values: list) -> str:
    numeric = 0
    for v in values:
        if isinstance(v, (int, float, np.integer, np.floating)):
            numeric += 1
            continue
        try:
            float(str(v).strip())
            numeric += 1
        except ValueError:
            pass
    if numeric == len(values):
        return "numeric"
    if numeric == 0:
        return "categorical"
    raise TypeMismatch("column mixes numeric and non-numeric values")


def dummy_encode(
    table: dict[str, list],
    encoding_map: Optional[dict[str, dict]] = None,
    time_offset: int = 0,
    n_rows: Optional[int] = None,
) -> DesignMatrix:
    """Encode a covariate table into a full-rank design matrix.

    Each categorical column expands to indicator columns with its first
    (sorted) level dropped as the reference; numeric columns pass through.
    An intercept and a ``time_index`` column are always prepended.  Passing
    a stored ``encoding_map`` reuses the training encoding, with unseen
    categories mapping to the all-zero reference row.
    """
    if n_rows is None:
        n_rows = len(next(iter(table.values()))) if table else 0
    for name, values in table.items():
        if len(values) != n_rows:
            raise MisalignedCovariates(
                f"column {name!r} has {len(values)} rows, expected {n_rows}"
            )

    if encoding_map is None:
        encoding_map = {}
        for name, values in table.items():
            kind = _column_kind(values)
            if kind == "numeric":
                encoding_map[name] = {"kind": "numeric"}
            else:
                levels = sorted({str(v).strip() for v in values})
                encoding_map[name] = {"kind": "categorical", "levels": levels}

    columns = [np.ones(n_rows), np.arange(time_offset, time_offset + n_rows, dtype=float)]
    names = [INTERCEPT_COL, TIME_COL]
    for name, spec in encoding_map.items():
        if name not in table:
            raise MissingFutureCovariates(f"covariate column {name!r} is missing")
        values = table[name]
        if spec["kind"] == "numeric":
            try:
                columns.append(np.array([float(str(v).strip()) for v in values]))
            except ValueError as exc:
                raise TypeMismatch(f"column {name!r}: {exc}") from exc
            names.append(name)
        else:
            tokens = [str(v).strip() for v in values]
            for level in spec["levels"][1:]:
                columns.append(np.array([1.0 if t == level else 0.0 for t in tokens]))
                names.append(f"{name}={level}")
    return DesignMatrix(np.column_stack(columns), names, encoding_map)


@dataclass
class RidgeModel:
    beta: np.ndarray
    lam: float
    column_names: list[str]

    def predict(self, design: DesignMatrix) -> np.ndarray:
        return design.matrix @ self.beta

    def covariate_part(self, design: DesignMatrix) -> np.ndarray:
        """Contribution of the covariate columns only.

        The intercept and time-trend terms stay in the residual series so
        the downstream trend model owns them.
        """
        cols = design.feature_slice
        if design.matrix.shape[1] <= 2:
            return np.zeros(design.matrix.shape[0])
        return design.matrix[:, cols] @ self.beta[cols]


def fit_ridge(design: DesignMatrix, y: np.ndarray, lam: float = 0.0) -> RidgeModel:
    """Closed-form ridge solution; intercept and time trend unpenalized."""
    x = design.matrix
    y = np.asarray(y, dtype=float)
    if x.shape[0] != len(y):
        raise MisalignedCovariates(f"{x.shape[0]} design rows vs {len(y)} targets")
    penalty = np.full(x.shape[1], float(lam))
    penalty[:2] = 0.0
    gram = x.T @ x + np.diag(penalty)
    rhs = x.T @ y
    try:
        factor = linalg.cho_factor(gram)
        beta = linalg.cho_solve(factor, rhs)
    except np.linalg.LinAlgError:
        raise SingularSystem("design matrix is rank deficient with no L2 penalty")
    except linalg.LinAlgError:
        if lam <= 0:
            raise SingularSystem(
                "design matrix is rank deficient with no L2 penalty"
            ) from None
        jitter = 1e-10 * np.trace(gram)
        factor = linalg.cho_factor(gram + jitter * np.eye(x.shape[1]))
        beta = linalg.cho_solve(factor, rhs)
    return RidgeModel(beta=beta, lam=float(lam), column_names=design.column_names)


@dataclass
class XregBundle:
    """Ridge model plus the univariate pipeline fitted on its residual."""

    ridge: RidgeModel
    encoding_map: dict[str, dict]
    residual_pipeline: "FittedPipeline"
    n_train: int
    linear_history: np.ndarray = field(default_factory=lambda: np.empty(0))


def fit_xreg_pipeline(
    series: "RegularSeries",
    covariates: dict[str, list],
    config: "PipelineConfig",
) -> XregBundle:
    """Regress the series on covariates, pipeline-fit what remains.

    ``covariates`` must supply one row per series grid slot.
    """
    from . import pipeline as pl

    n = len(series.values)
    design = dummy_encode(covariates, n_rows=n)
    ridge = fit_ridge(design, series.values, config.l2_reg)
    linear = ridge.covariate_part(design)
    residual = pl.replace_values(series, series.values - linear)
    fitted = pl.fit(residual, config)
    return XregBundle(
        ridge=ridge,
        encoding_map=design.encoding_map,
        residual_pipeline=fitted,
        n_train=n,
        linear_history=linear,
    )


def forecast_xreg(
    bundle: XregBundle,
    future_covariates: dict[str, list],
    horizon: int,
    confidence_level: float = 0.95,
) -> "ForecastResult":
    """Linear covariate part plus the residual pipeline's forecast.

    Bounds shift by the linear part only, so interval width equals the
    univariate residual interval width.
    """
    from . import pipeline as pl

    n_future = (
        len(next(iter(future_covariates.values()))) if future_covariates else 0
    )
    if bundle.encoding_map and n_future < horizon:
        raise MissingFutureCovariates(
            f"need {horizon} future covariate rows, got {n_future}"
        )
    design = dummy_encode(
        {k: v[:horizon] for k, v in future_covariates.items()},
        encoding_map=bundle.encoding_map,
        time_offset=bundle.n_train,
        n_rows=horizon,
    )
    linear = bundle.ridge.covariate_part(design)
    base = pl.forecast(bundle.residual_pipeline, horizon, confidence_level)
    return pl.ForecastResult(
        timestamps=base.timestamps,
        mean=base.mean + linear,
        lower=base.lower + linear,
        upper=base.upper + linear,
        stderr=base.stderr,
        confidence_level=base.confidence_level,
    )
