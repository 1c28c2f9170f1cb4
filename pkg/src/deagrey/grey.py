"""GM(1,1) grey model, the straight-line fallback, and holdout backtesting."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from deagrey.errors import FitError, ValidationError

DEGENERATE_A = 1e-10
MIN_TRAIN = 4


class Method(str, enum.Enum):
    GM11 = "gm11"
    LINEAR = "linear"


class ClassRatioWarning(UserWarning):
    """Series fails the class-ratio smoothness check; GM(1,1) may fit poorly."""


@dataclass(frozen=True)
class Series:
    """Consecutive yearly values starting at ``start_year``."""

    start_year: int
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float, ndmin=1)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("series values must be a non-empty vector")
        if not np.all(np.isfinite(v)):
            raise ValidationError("series values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "start_year", int(self.start_year))

    def __len__(self):
        return self.values.size

    @property
    def years(self):
        return np.arange(self.start_year, self.start_year + len(self))

    def head(self, k):
        return Series(self.start_year, self.values[:k], self.unit)

    def scaled(self, c):
        return Series(self.start_year, self.values * c, self.unit)


def _positive_vector(values, min_len=1):
    x = np.asarray(values.values if isinstance(values, Series) else values, dtype=float)
    if x.ndim != 1 or x.size < min_len:
        raise ValidationError(f"need a vector of at least {min_len} values")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValidationError("grey modelling needs strictly positive finite values")
    return x


def ago(series) -> np.ndarray:
    """Accumulated generating operation (running sum)."""
    return np.cumsum(_positive_vector(series))


def mean_sequence(x1) -> np.ndarray:
    """Adjacent means ``0.5 * (x1[k] + x1[k-1])`` for k = 2..n."""
    x1 = np.asarray(x1, dtype=float)
    if x1.ndim != 1 or x1.size < 2:
        raise ValidationError("mean sequence needs at least 2 accumulated values")
    return 0.5 * x1[1:] + 0.5 * x1[:-1]


def class_ratio_ok(series) -> bool:
    """Whether every ratio ``x(k-1)/x(k)`` lies in ``(exp(-2/(n+1)), exp(2/(n+1)))``."""
    x = _positive_vector(series, 2)
    n = x.size
    lam = x[:-1] / x[1:]
    lo, hi = math.exp(-2.0 / (n + 1)), math.exp(2.0 / (n + 1))
    return bool(np.all((lam > lo) & (lam < hi)))


@dataclass(frozen=True)
class Gm11Model:
    a: float
    b: float
    first_value: float
    n: int
    start_year: int = 0
    unit: str = ""

    @property
    def degenerate(self):
        return abs(self.a) < DEGENERATE_A

    def accumulated(self, k):
        """Time response for the accumulated series at 0-based offsets ``k``."""
        k = np.asarray(k, dtype=float)
        if self.degenerate:
            return self.first_value + self.b * k
        ratio = self.b / self.a
        return (self.first_value - ratio) * np.exp(-self.a * k) + ratio

    def grey_residual(self, series, a=None, b=None):
        """Sum of squared residuals of ``x0(k) + a z(k) - b`` over the training data."""
        a = self.a if a is None else a
        b = self.b if b is None else b
        x0 = _positive_vector(series)
        z = mean_sequence(np.cumsum(x0))
        r = x0[1:] + a * z - b
        return float(r @ r)


def fit_gm11(series: Series, check_ratio=False) -> Gm11Model:
    """Least-squares GM(1,1) coefficients ``(a, b)``.

    Solves ``B [a, b]^T ~= Y`` with rows ``B_k = [-z(k), 1]`` and
    ``Y_k = x0(k)`` for k = 2..n, through a QR factorisation of ``B``.
    """
    x0 = _positive_vector(series, MIN_TRAIN)
    if check_ratio and not class_ratio_ok(x0):
        warnings.warn("series fails the GM(1,1) class-ratio check", ClassRatioWarning,
                      stacklevel=2)
    z = mean_sequence(np.cumsum(x0))
    B = np.column_stack([-z, np.ones_like(z)])
    Y = x0[1:]
    Q, R = np.linalg.qr(B)
    diag = np.abs(np.diag(R))
    if diag.min() <= 10 * np.finfo(float).eps * diag.max():
        raise FitError("GM(1,1) normal equations are singular")
    a, b = np.linalg.solve(R, Q.T @ Y)
    start = series.start_year if isinstance(series, Series) else 0
    unit = series.unit if isinstance(series, Series) else ""
    return Gm11Model(float(a), float(b), float(x0[0]), int(x0.size), start, unit)


def fitted_and_forecast(model: Gm11Model, horizon: int = 0) -> np.ndarray:
    """Fitted values for the training span followed by ``horizon`` forecasts.

    The first value is the training series' first value; later values are
    first differences of the accumulated time response, written as
    ``(x0(1) - b/a) * exp(-a(k-1)) * expm1(-a)`` to avoid cancellation.
    A degenerate model (``|a| < 1e-10``) uses the ``a -> 0`` limit, where
    every value after the first equals ``b``.
    """
    if horizon < 0:
        raise ValidationError("horizon must be nonnegative")
    total = model.n + horizon
    out = np.empty(total)
    out[0] = model.first_value
    if total == 1:
        return out
    k = np.arange(1, total, dtype=float)
    if model.degenerate:
        out[1:] = model.b
    else:
        a = model.a
        out[1:] = (model.first_value - model.b / a) * np.exp(-a * (k - 1)) * np.expm1(-a)
    return out


def forecast_years(model: Gm11Model, years) -> np.ndarray:
    """Level forecasts at calendar ``years`` (at or after the training start)."""
    years = np.asarray(years, dtype=int)
    offs = years - model.start_year
    if np.any(offs < 0):
        raise ValidationError("forecast years precede the training data")
    path = fitted_and_forecast(model, max(0, int(offs.max()) + 1 - model.n))
    return path[offs]


@dataclass(frozen=True)
class LinearModel:
    slope: float
    intercept: float

    def __post_init__(self):
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise ValidationError("linear model coefficients must be finite")

    def predict(self, years):
        return self.slope * np.asarray(years, dtype=float) + self.intercept


def fit_linear(series: Series) -> LinearModel:
    """Ordinary least squares of value on calendar year."""
    if len(series) < 2:
        raise ValidationError("linear fit needs at least 2 points")
    t = series.years.astype(float)
    y = series.values
    tc = t - t.mean()
    sxx = tc @ tc
    if sxx == 0:
        raise FitError("all years identical")
    slope = (tc @ (y - y.mean())) / sxx
    return LinearModel(float(slope), float(y.mean() - slope * t.mean()))


def relative_error(actual, predicted):
    actual = np.asarray(actual, dtype=float)
    return np.abs(np.asarray(predicted, dtype=float) - actual) / np.abs(actual)


@dataclass(frozen=True)
class BacktestRow:
    year: int
    actual: float
    predicted: float
    relative_error: float


@dataclass(frozen=True)
class BacktestReport:
    method: Method
    train_len: int
    rows: tuple
    model: object = None

    @property
    def mean_relative_error(self):
        return float(np.mean([r.relative_error for r in self.rows]))


def backtest(series: Series, train_len: int, method: Method = Method.GM11) -> BacktestReport:
    """Fit on the first ``train_len`` points and score predictions for the rest."""
    method = Method(method)
    if not MIN_TRAIN <= train_len < len(series):
        raise ValidationError(
            f"train_len must satisfy {MIN_TRAIN} <= train_len < {len(series)}, got {train_len}")
    train = series.head(train_len)
    years = series.years[train_len:]
    actual = series.values[train_len:]
    if method is Method.GM11:
        model = fit_gm11(train)
        predicted = fitted_and_forecast(model, len(series) - train_len)[train_len:]
    else:
        model = fit_linear(train)
        predicted = model.predict(years)
    err = relative_error(actual, predicted)
    rows = tuple(BacktestRow(int(y), float(a), float(p), float(e))
                 for y, a, p, e in zip(years, actual, predicted, err))
    return BacktestReport(method, train_len, rows, model)
