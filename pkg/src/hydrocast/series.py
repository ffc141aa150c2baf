"""Monthly generation data, capacity normalization, seasonal statistics,
min-max scaling and supervised window construction.

All containers are frozen dataclasses; numeric views are produced on
demand as fresh numpy arrays so callers cannot mutate shared state.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityLookupError, DomainError, ParseError, ValidationError

HOURS_PER_YEAR = 365 * 24
MAX_MONTH_HOURS = 31 * 24

MONTH_NAMES = (
    "January", "February", "March", "April", "May", "June", "July",
    "August", "September", "October", "November", "December",
)


@dataclass(frozen=True)
class MonthlyPoint:
    year: int
    month: int
    value: float

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValidationError(f"month must be in 1..12, got {self.month}")
        if not self.value >= 0 or not math.isfinite(self.value):
            raise ValidationError(
                f"{self.year}-{self.month:02d}: production must be a finite "
                f"non-negative value, got {self.value}"
            )

    @property
    def index(self) -> int:
        """Absolute month count, used for contiguity checks."""
        return self.year * 12 + (self.month - 1)


@dataclass(frozen=True)
class NormalizedPoint:
    year: int
    month: int
    hours: float

    @property
    def index(self) -> int:
        return self.year * 12 + (self.month - 1)


@dataclass(frozen=True)
class CapacityRecord:
    year: int
    installed_mw: float

    def __post_init__(self):
        if not self.installed_mw > 0 or not math.isfinite(self.installed_mw):
            raise ValidationError(
                f"installed capacity for {self.year} must be positive, "
                f"got {self.installed_mw}"
            )


def _check_contiguous(points, what):
    if not points:
        raise ValidationError(f"{what} must contain at least one month")
    for prev, cur in zip(points, points[1:]):
        step = cur.index - prev.index
        if step == 1:
            continue
        if step <= 0:
            raise ValidationError(
                f"{what} is not strictly chronological at "
                f"{cur.year}-{cur.month:02d} (after {prev.year}-{prev.month:02d})"
            )
        missing = prev.index + 1
        raise ValidationError(
            f"{what} has a gap: {missing // 12}-{missing % 12 + 1:02d} is missing "
            f"between {prev.year}-{prev.month:02d} and {cur.year}-{cur.month:02d}"
        )


class _SeriesMixin:
    points: tuple

    def __len__(self):
        return len(self.points)

    @property
    def years(self) -> np.ndarray:
        return np.array([p.year for p in self.points], dtype=np.int64)

    @property
    def months(self) -> np.ndarray:
        return np.array([p.month for p in self.points], dtype=np.int64)

    @property
    def start(self) -> tuple[int, int]:
        return self.points[0].year, self.points[0].month

    @property
    def end(self) -> tuple[int, int]:
        return self.points[-1].year, self.points[-1].month


@dataclass(frozen=True)
class GenerationSeries(_SeriesMixin):
    """Contiguous monthly production in MWh.

    The constructor rejects anything that is not already strictly
    chronological; use :meth:`from_points` to sort first.
    """

    points: tuple[MonthlyPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        _check_contiguous(self.points, "generation series")

    @classmethod
    def from_points(cls, points: Iterable[MonthlyPoint]) -> "GenerationSeries":
        """Sort by (year, month) and validate. Duplicates and gaps are rejected."""
        return cls(tuple(sorted(points, key=lambda p: p.index)))

    @classmethod
    def from_values(cls, start_year: int, start_month: int, values) -> "GenerationSeries":
        pts = []
        idx = start_year * 12 + start_month - 1
        for k, v in enumerate(values):
            pts.append(MonthlyPoint((idx + k) // 12, (idx + k) % 12 + 1, float(v)))
        return cls(tuple(pts))

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points], dtype=np.float64)

    def head(self, n: int) -> "GenerationSeries":
        return GenerationSeries(self.points[:n])

    def slice(self, start: int, stop: int) -> "GenerationSeries":
        return GenerationSeries(self.points[start:stop])


@dataclass(frozen=True)
class NormalizedSeries(_SeriesMixin):
    """Monthly production hours per installed MW."""

    points: tuple[NormalizedPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        _check_contiguous(self.points, "normalized series")
        for p in self.points:
            if not p.hours >= 0 or not math.isfinite(p.hours):
                raise ValidationError(
                    f"{p.year}-{p.month:02d}: hours must be finite and >= 0, got {p.hours}"
                )
            if p.hours > MAX_MONTH_HOURS:
                warnings.warn(
                    f"{p.year}-{p.month:02d}: {p.hours:.1f} production hours exceeds "
                    f"the {MAX_MONTH_HOURS} h monthly ceiling; check the input data",
                    stacklevel=3,
                )

    @property
    def values(self) -> np.ndarray:
        return np.array([p.hours for p in self.points], dtype=np.float64)


@dataclass(frozen=True)
class MonthStats:
    min: float
    max: float
    mean: float
    count: int


@dataclass(frozen=True)
class SeasonalProfile:
    """Twelve min-max standardized monthly coefficients (index 0 = January)."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        if len(self.coefficients) != 12:
            raise ValidationError("a seasonal profile needs exactly 12 coefficients")

    def __getitem__(self, month: int) -> float:
        return self.coefficients[month - 1]

    def for_months(self, months) -> np.ndarray:
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        return coeffs[np.asarray(months, dtype=np.int64) - 1]


# --------------------------------------------------------------------------
# capacity normalization


def capacity_factor(annual_production: float, installed: float) -> float:
    """Fraction of the year's full-capacity energy actually produced.

    Values above 1 are returned unchanged; flagging them is the caller's job.
    """
    if not installed > 0:
        raise DomainError(f"installed capacity must be positive, got {installed}")
    if annual_production < 0:
        raise DomainError(f"annual production must be >= 0, got {annual_production}")
    return annual_production / (installed * HOURS_PER_YEAR)


def full_load_hours(cf: float) -> float:
    """Equivalent hours at full capacity for a capacity factor."""
    return cf * HOURS_PER_YEAR


def capacity_lookup(capacities: Iterable[CapacityRecord]) -> dict[int, float]:
    table = {}
    for rec in capacities:
        if rec.year in table:
            raise ValidationError(f"duplicate capacity record for year {rec.year}")
        table[rec.year] = rec.installed_mw
    return table


def normalize_generation(
    gen: GenerationSeries, capacities: Iterable[CapacityRecord]
) -> NormalizedSeries:
    """Divide each month's MWh by that year's end-of-year installed MW."""
    table = capacity_lookup(capacities)
    pts = []
    for p in gen.points:
        if p.year not in table:
            raise CapacityLookupError(p.year)
        pts.append(NormalizedPoint(p.year, p.month, p.value / table[p.year]))
    return NormalizedSeries(tuple(pts))


def denormalize(estimated_hours, installed):
    """Production hours times installed MW gives MWh. Works elementwise."""
    hours = np.asarray(estimated_hours, dtype=np.float64)
    cap = np.asarray(installed, dtype=np.float64)
    if np.any(~(cap > 0)):
        raise DomainError(f"installed capacity must be positive, got {installed}")
    if np.any(~(hours >= 0)):
        raise DomainError(f"estimated hours must be >= 0, got {estimated_hours}")
    out = hours * cap
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# seasonal statistics


def monthly_stats(series) -> dict[int, MonthStats | None]:
    """Min/max/mean of every calendar month. Months with no data map to None."""
    if len(series) == 0:
        raise ValidationError("series must be non-empty")
    months = series.months
    values = series.values
    out: dict[int, MonthStats | None] = {}
    for m in range(1, 13):
        sel = values[months == m]
        if sel.size == 0:
            out[m] = None
        else:
            out[m] = MonthStats(float(sel.min()), float(sel.max()), float(sel.mean()), int(sel.size))
    return out


def seasonal_profile(series) -> SeasonalProfile:
    """Min-max standardized monthly means.

    When all twelve means coincide every coefficient is 0.5.
    """
    stats = monthly_stats(series)
    for m, s in stats.items():
        if s is None:
            raise ValidationError(f"seasonal profile needs data for {MONTH_NAMES[m - 1]}")
    means = np.array([stats[m].mean for m in range(1, 13)])
    lo, hi = means.min(), means.max()
    if hi == lo:
        return SeasonalProfile(tuple([0.5] * 12))
    return SeasonalProfile(tuple(float(v) for v in (means - lo) / (hi - lo)))


# --------------------------------------------------------------------------
# scaling and windows


@dataclass(frozen=True)
class MinMaxScaler:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError(f"scaler needs hi > lo, got lo={self.lo} hi={self.hi}")

    def apply(self, x):
        return (np.asarray(x, dtype=np.float64) - self.lo) / (self.hi - self.lo)

    def invert(self, y):
        return np.asarray(y, dtype=np.float64) * (self.hi - self.lo) + self.lo


def fit_scaler(values) -> MinMaxScaler:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2 or arr.min() == arr.max():
        raise DomainError("scaler fit needs at least two distinct values")
    return MinMaxScaler(float(arr.min()), float(arr.max()))


@dataclass(frozen=True)
class WindowSample:
    inputs: np.ndarray  # (L,) or (L, input_dim)
    target: float


def make_windows(values, window: int, aux=None) -> list[WindowSample]:
    """Slide a length-``window`` input over ``values``; target is the next value.

    If ``aux`` is given (same length as ``values``) each input step becomes
    ``(value, aux)``; the target is always the plain next value.
    """
    vals = np.asarray(values, dtype=np.float64)
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    if vals.ndim != 1:
        raise DomainError("values must be one-dimensional")
    if vals.size < window + 1:
        raise DomainError(
            f"series of length {vals.size} is too short for window {window}: "
            f"need at least {window + 1} values"
        )
    if aux is None:
        feats = vals
    else:
        aux = np.asarray(aux, dtype=np.float64)
        if aux.shape != vals.shape:
            raise DomainError("aux channel must match values in length")
        feats = np.stack([vals, aux], axis=1)
    return [
        WindowSample(feats[k:k + window].copy(), float(vals[k + window]))
        for k in range(vals.size - window)
    ]


def stack_samples(samples: Sequence[WindowSample]) -> tuple[np.ndarray, np.ndarray]:
    """Pack samples into ``X`` of shape (B, L, D) and ``y`` of shape (B,)."""
    if len(samples) == 0:
        raise DomainError("batch must contain at least one sample")
    X = np.stack([np.asarray(s.inputs, dtype=np.float64) for s in samples])
    if X.ndim == 2:
        X = X[:, :, None]
    y = np.array([s.target for s in samples], dtype=np.float64)
    return X, y


# --------------------------------------------------------------------------
# CSV ingestion


def _read_rows(path, header):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "header", "file is empty") from None
        got = [c.strip() for c in first]
        if got != list(header):
            raise ParseError(path, 1, "header", f"expected {','.join(header)}, got {','.join(got)}")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    path, reader.line_num, "row",
                    f"expected {len(header)} fields, got {len(row)}",
                )
            yield reader.line_num, [c.strip() for c in row]


def _parse(path, line, field, text, kind):
    try:
        val = kind(text)
    except ValueError:
        raise ParseError(path, line, field, f"cannot parse {text!r}") from None
    if kind is float and not math.isfinite(val):
        raise ParseError(path, line, field, f"non-finite value {text!r}")
    return val


def read_generation_csv(path) -> GenerationSeries:
    """Read ``year,month,mwh`` rows. Rows may be in any order; gaps are rejected."""
    pts = []
    for line, (y, m, v) in _read_rows(path, ("year", "month", "mwh")):
        year = _parse(path, line, "year", y, int)
        month = _parse(path, line, "month", m, int)
        value = _parse(path, line, "mwh", v, float)
        if not 1 <= month <= 12:
            raise ParseError(path, line, "month", f"month {month} outside 1..12")
        if value < 0:
            raise ParseError(path, line, "mwh", f"negative production {value}")
        pts.append(MonthlyPoint(year, month, value))
    if not pts:
        raise ParseError(path, 2, "row", "no data rows")
    return GenerationSeries.from_points(pts)


def read_capacity_csv(path) -> list[CapacityRecord]:
    """Read ``year,installed_mw`` rows, sorted by year."""
    recs = []
    seen = set()
    for line, (y, c) in _read_rows(path, ("year", "installed_mw")):
        year = _parse(path, line, "year", y, int)
        mw = _parse(path, line, "installed_mw", c, float)
        if mw <= 0:
            raise ParseError(path, line, "installed_mw", f"capacity must be positive, got {mw}")
        if year in seen:
            raise ParseError(path, line, "year", f"duplicate year {year}")
        seen.add(year)
        recs.append(CapacityRecord(year, mw))
    if not recs:
        raise ParseError(path, 2, "row", "no data rows")
    return sorted(recs, key=lambda r: r.year)


def write_generation_csv(series: GenerationSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year", "month", "mwh"])
        for p in series.points:
            w.writerow([p.year, p.month, repr(p.value)])


def write_capacity_csv(records: Sequence[CapacityRecord], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year", "installed_mw"])
        for r in records:
            w.writerow([r.year, repr(r.installed_mw)])
