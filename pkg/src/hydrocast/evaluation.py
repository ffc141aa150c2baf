"""Forecast error metrics, annual/monthly report columns and fold planning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

MONTHS_PER_YEAR = 12


def _pair(forecast, actual):
    f = np.asarray(forecast, dtype=np.float64).reshape(-1)
    a = np.asarray(actual, dtype=np.float64).reshape(-1)
    if f.shape != a.shape:
        raise DomainError(f"forecast has {f.size} values but actual has {a.size}")
    if f.size == 0:
        raise DomainError("cannot score empty vectors")
    return f, a


def rmse(forecast, actual) -> float:
    f, a = _pair(forecast, actual)
    return float(np.sqrt(np.mean((f - a) ** 2)))


def mape(forecast, actual) -> float:
    """Mean absolute percentage error as a fraction (0.1 means 10 %)."""
    f, a = _pair(forecast, actual)
    if np.any(a == 0):
        raise DomainError("MAPE is undefined when an actual value is zero")
    return float(np.mean(np.abs(a - f) / np.abs(a)))


@dataclass(frozen=True)
class ErrorReport:
    rmse_annual: float
    rmse_monthly_avg: float
    mape_annual: float
    mape_monthly_avg_pct: float


def aggregate_report(rmse_annual: float, mape_annual: float) -> ErrorReport:
    """Derive the monthly-average columns: RMSE / 12 and MAPE * 100 / 12."""
    if not (np.isfinite(rmse_annual) and np.isfinite(mape_annual)):
        raise DomainError("report inputs must be finite")
    if rmse_annual < 0 or mape_annual < 0:
        raise DomainError("report inputs must be non-negative")
    return ErrorReport(
        rmse_annual=float(rmse_annual),
        rmse_monthly_avg=rmse_annual / MONTHS_PER_YEAR,
        mape_annual=float(mape_annual),
        mape_monthly_avg_pct=mape_annual * 100.0 / MONTHS_PER_YEAR,
    )


def score_year(forecast, actual) -> ErrorReport:
    """Score a 12-month forecast.

    The annual RMSE column is twelve times the monthly RMSE, so the monthly
    average column equals the monthly RMSE itself.
    """
    monthly = rmse(forecast, actual)
    return aggregate_report(MONTHS_PER_YEAR * monthly, mape(forecast, actual))


@dataclass(frozen=True)
class Fold:
    train: tuple[range, ...]
    test: range


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[Fold, ...]

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)


def plan_folds(length: int, k: int = 3, window: int = 12, mode: str = "forward",
               test_size: int = MONTHS_PER_YEAR) -> FoldPlan:
    """Split ``length`` months into ``k`` twelve-month test blocks.

    ``forward`` (default): the test blocks are the last ``k`` years and each
    fold trains on every month before its block. ``rotating``: the series is
    cut into ``k`` equal sections, each section's final ``test_size`` months
    are tested and all other months train.

    Indices are 0-based half-open ranges.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if length < k * test_size + window:
        raise DomainError(
            f"series of {length} months is too short for {k} folds of {test_size} "
            f"months plus a {window}-month window (need {k * test_size + window})"
        )
    folds = []
    if mode == "forward":
        first = length - k * test_size
        for j in range(k):
            start = first + j * test_size
            folds.append(Fold((range(0, start),), range(start, start + test_size)))
    elif mode == "rotating":
        section = length // k
        for j in range(k):
            stop = (j + 1) * section if j < k - 1 else length
            test = range(stop - test_size, stop)
            train = tuple(r for r in (range(0, test.start), range(test.stop, length)) if len(r))
            folds.append(Fold(train, test))
    else:
        raise DomainError(f"unknown fold mode {mode!r}")
    return FoldPlan(tuple(folds))
