"""Exception types raised across the forecasting pipeline."""


class BatchcastError(Exception):
    """Base class for all library errors."""


# --- temporal grid ---------------------------------------------------------

class TooFewPoints(BatchcastError):
    """Fewer than three distinct timestamps; frequency cannot be inferred."""


class EmptyAfterCleaning(BatchcastError):
    """No usable observations remain after dropping malformed rows."""


class UnknownZone(BatchcastError):
    """Time zone name not found in the IANA database."""


# --- gap filling -----------------------------------------------------------

class AllMissing(BatchcastError):
    """Every slot of the series is missing; nothing to interpolate from."""


class SpanTooSmall(BatchcastError):
    """Smoothing span covers too few points for the polynomial degree."""


class IndexOutOfRange(BatchcastError):
    """An index refers to a slot outside the series grid."""


# --- holidays --------------------------------------------------------------

class NoOccurrences(BatchcastError):
    """Holiday never falls inside the observed history."""


# --- smoothing / detection -------------------------------------------------

class TooShort(BatchcastError):
    """Series has too few points for the requested operation."""


class PeriodTooLongForSeries(BatchcastError):
    """Seasonal period exceeds half the series length."""


class NotSubMonthlyFrequency(BatchcastError):
    """Month-grid standardization needs daily or finer data."""


class TooFewCycles(BatchcastError):
    """Seasonal extrapolation needs at least two complete cycles."""


class DegenerateStablePeriod(BatchcastError):
    """A stable period between change windows has fewer than three points."""


# --- ARIMA -----------------------------------------------------------------

class NonConvergence(BatchcastError):
    """Optimizer did not converge (models carry a flag instead when possible)."""


class SingularFit(BatchcastError):
    """Likelihood surface is degenerate; no usable parameter estimate."""


class AllFitsFailed(BatchcastError):
    """Every candidate order failed to fit."""


# --- covariates ------------------------------------------------------------

class TypeMismatch(BatchcastError):
    """Covariate column mixes numeric and non-numeric values."""


class SingularSystem(BatchcastError):
    """Normal equations are rank deficient and no ridge penalty was given."""


class MisalignedCovariates(BatchcastError):
    """Covariate rows do not line up with the target series grid."""


class MissingFutureCovariates(BatchcastError):
    """Forecasting a covariate model requires future covariate rows."""


# --- pipeline --------------------------------------------------------------

class InvalidConfidence(BatchcastError):
    """Confidence level must lie strictly between 0 and 1."""


class InvalidThreshold(BatchcastError):
    """Anomaly probability threshold must lie strictly between 0 and 1."""


class ValueOutsideLimits(BatchcastError):
    """A value falls outside the configured forecast limits."""


class PipelineStageError(BatchcastError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


# --- metrics ---------------------------------------------------------------

class NonPositiveValue(BatchcastError):
    """Geometric mean requires strictly positive inputs."""


# --- batch front end -------------------------------------------------------

class MissingColumn(BatchcastError):
    """A configured column name is absent from the input header."""


class ConfigError(BatchcastError):
    """Run configuration failed validation."""
