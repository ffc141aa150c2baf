"""Least-squares linear trend of installed capacity over recent years."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .series import CapacityRecord


@dataclass(frozen=True)
class LinearFit:
    slope: float       # MW per year
    intercept: float   # MW at base_year
    r2: float
    base_year: int

    def __post_init__(self):
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise DomainError("linear fit has non-finite coefficients")


def fit_linear(records: Sequence[CapacityRecord], lookback: int | None = 5) -> LinearFit:
    """OLS fit of installed MW against year over the latest ``lookback`` years.

    Years are shifted so the earliest year used sits at x = 0. When the
    targets have zero variance, r2 is 1 if the residuals vanish and 0
    otherwise.
    """
    years = [r.year for r in records]
    if len(set(years)) != len(years):
        raise ValidationError("capacity records contain duplicate years")
    used = sorted(records, key=lambda r: r.year)
    if lookback is not None:
        if lookback < 2:
            raise DomainError("lookback must cover at least 2 years")
        cutoff = used[-1].year - lookback + 1 if used else 0
        used = [r for r in used if r.year >= cutoff]
    if len(used) < 2:
        raise ValidationError(f"need at least 2 capacity records to fit a line, got {len(used)}")

    base = used[0].year
    x = np.array([r.year - base for r in used], dtype=np.float64)
    y = np.array([r.installed_mw for r in used], dtype=np.float64)
    if np.all(y == y[0]):
        return LinearFit(0.0, float(y[0]), 1.0, int(base))
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    sxy = np.sum((x - xm) * (y - ym))
    slope = sxy / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    # variance below rounding noise of the data counts as zero
    noise = y.size * (1e-12 * float(np.max(np.abs(y)))) ** 2
    if ss_tot <= noise:
        r2 = 1.0 if ss_res <= noise else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return LinearFit(float(slope), float(intercept), float(r2), int(base))


def predict_capacity(fit: LinearFit, year: int) -> float:
    mw = fit.intercept + fit.slope * (year - fit.base_year)
    if mw < 0:
        raise DomainError(f"regression predicts negative capacity ({mw:.1f} MW) for {year}")
    return float(mw)
