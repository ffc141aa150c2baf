"""End-to-end forecasting: normalize, scale, window, train, forecast,
denormalize with regressed capacity. Also the window x width experiment
matrix, walk-forward folds and a synthetic seasonal data generator.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import lstm
from .capacity import LinearFit, fit_linear, predict_capacity
from .errors import HydrocastError, PipelineError, ValidationError
from .evaluation import ErrorReport, plan_folds, score_year
from .series import (
    CapacityRecord,
    GenerationSeries,
    MinMaxScaler,
    SeasonalProfile,
    capacity_lookup,
    denormalize,
    fit_scaler,
    make_windows,
    normalize_generation,
    seasonal_profile,
)

HORIZON = 12


@dataclass
class ExperimentConfig:
    months: list[int] = field(default_factory=lambda: [72, 120, 144])
    hidden: list[int] = field(default_factory=lambda: [100, 200, 400])
    training: lstm.TrainingConfig = field(default_factory=lstm.TrainingConfig)
    lookback: int = 5
    input_dim: int = 2
    capacity_override: float | None = None

    def __post_init__(self):
        if self.input_dim not in (1, 2):
            raise ValidationError("input_dim must be 1 (hours) or 2 (hours + seasonal coefficient)")
        if any(m < 1 for m in self.months) or any(h < 1 for h in self.hidden):
            raise ValidationError("months and hidden widths must be positive")
        if self.capacity_override is not None and not self.capacity_override > 0:
            raise ValidationError("capacity override must be positive")


@dataclass(frozen=True)
class ForecastRow:
    year: int
    month: int
    predicted_mwh: float
    predicted_hours: float
    capacity_mw: float


@dataclass
class ForecastResult:
    rows: list[ForecastRow]
    scaled: np.ndarray
    scaler: MinMaxScaler
    profile: SeasonalProfile
    capacity_fit: LinearFit
    params: lstm.LstmParams
    losses: list[float]
    input_dim: int

    @property
    def mwh(self) -> np.ndarray:
        return np.array([r.predicted_mwh for r in self.rows])

    @property
    def hours(self) -> np.ndarray:
        return np.array([r.predicted_hours for r in self.rows])


def derive_seed(base: int, index: int) -> int:
    """Independent 64-bit seed for sub-run ``index`` of a run seeded with ``base``."""
    ss = np.random.SeedSequence([int(base), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _month_at(start_year, start_month, offset):
    idx = start_year * 12 + start_month - 1 + offset
    return idx // 12, idx % 12 + 1


def pipeline_scaler(train_hours) -> MinMaxScaler:
    """Min-max scaler over the training hours.

    A constant series ``v`` cannot be min-max fitted; it gets the range
    [0, 2v] instead so that it sits at 0.5 (or [0, 1] when ``v`` is 0).
    """
    arr = np.asarray(train_hours, dtype=np.float64)
    if arr.min() == arr.max():
        v = float(arr[0])
        return MinMaxScaler(0.0, 2.0 * v) if v > 0 else MinMaxScaler(0.0, 1.0)
    return fit_scaler(arr)


class _Stage:
    """Context manager that tags any hydrocast failure with a stage name."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, HydrocastError) and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def forecast_from(
    gen: GenerationSeries,
    capacities: Sequence[CapacityRecord],
    config: ExperimentConfig,
    train_ranges: Sequence[range],
    start: int,
    hidden: int | None = None,
    seed: int | None = None,
    params: lstm.LstmParams | None = None,
) -> ForecastResult:
    """Train on ``train_ranges`` of ``gen`` and forecast the 12 months from index ``start``.

    The ``window`` months before ``start`` seed the recursion and must be
    training months. Supplying ``params`` skips training.
    """
    tc = config.training
    if hidden is not None or seed is not None:
        tc = replace(tc, hidden_dim=hidden or tc.hidden_dim,
                     seed=tc.seed if seed is None else seed)
    L = tc.window
    train_set = {i for r in train_ranges for i in r}
    train_idx = sorted(train_set)
    if start - L < 0 or any(i not in train_set for i in range(start - L, start)):
        raise PipelineError("window", ValidationError(
            f"the {L} months before the forecast start must be training data"))

    with _Stage("normalize"):
        # only training months are normalized; later years may lack a capacity record
        hours = np.full(len(gen), np.nan)
        for r in train_ranges:
            if len(r):
                hours[r.start:r.stop] = normalize_generation(
                    gen.slice(r.start, r.stop), capacities).values
        months = gen.months
    with _Stage("scale"):
        train_hours = hours[train_idx]
        profile = seasonal_profile(_Subset(months[train_idx], train_hours))
        scaler = pipeline_scaler(train_hours)
        scaled = scaler.apply(hours)
        aux = profile.for_months(months) if config.input_dim == 2 else None
    with _Stage("window"):
        samples = []
        for r in train_ranges:
            seg = slice(r.start, r.stop)
            if len(r) >= L + 1:
                samples += make_windows(scaled[seg], L, None if aux is None else aux[seg])
        if not samples:
            raise ValidationError(f"no training range is longer than the {L}-month window")
    with _Stage("train"):
        if params is None:
            result = lstm.train(tc, samples, input_dim=config.input_dim)
            params, losses = result.params, result.losses
        else:
            if params.input_dim != config.input_dim:
                raise ValidationError(
                    f"checkpoint expects {params.input_dim} input channel(s), "
                    f"config has input_dim={config.input_dim}")
            losses = []
    sy, sm = gen.points[0].year, gen.points[0].month
    targets = [_month_at(sy, sm, start + k) for k in range(HORIZON)]
    with _Stage("predict"):
        hist = scaled[start - L:start]
        if aux is not None:
            hist = np.stack([hist, aux[start - L:start]], axis=1)
        fut = None if aux is None else profile.for_months([m for _, m in targets])
        pred_scaled = lstm.predict_horizon(params, hist, HORIZON, fut)
    with _Stage("capacity"):
        last_year = _month_at(sy, sm, start - 1)[0]
        known = [r for r in capacities if r.year <= last_year]
        fit = fit_linear(known, config.lookback)
        table = capacity_lookup(known)
        caps = []
        for y, _ in targets:
            if config.capacity_override is not None and y > last_year:
                caps.append(config.capacity_override)
            elif y in table:
                caps.append(table[y])
            else:
                caps.append(predict_capacity(fit, y))
    with _Stage("denormalize"):
        est_hours = np.maximum(scaler.invert(pred_scaled), 0.0)
        mwh = denormalize(est_hours, np.array(caps))
    rows = [ForecastRow(y, m, float(mwh[k]), float(est_hours[k]), float(caps[k]))
            for k, (y, m) in enumerate(targets)]
    return ForecastResult(rows, pred_scaled, scaler, profile, fit, params, losses, config.input_dim)


class _Subset:
    """Minimal series view (months + values) for seasonal statistics."""

    def __init__(self, months, values):
        self.months = np.asarray(months)
        self.values = np.asarray(values)

    def __len__(self):
        return len(self.values)


def run_forecast(gen, capacities, config: ExperimentConfig | None = None,
                 hidden=None, params=None) -> ForecastResult:
    """Train on the whole series and forecast the following 12 months."""
    config = config or ExperimentConfig()
    n = len(gen)
    return forecast_from(gen, capacities, config, [range(0, n)], n, hidden=hidden, params=params)


@dataclass
class HoldoutResult:
    model: int
    hidden: int
    months: int
    train_months: int
    test_months: int
    report: ErrorReport
    input_dim: int
    forecast: np.ndarray
    actual: np.ndarray
    losses: list[float]
    params: lstm.LstmParams
    seed: int


@dataclass(frozen=True)
class SkippedRun:
    model: int
    hidden: int
    months: int
    reason: str


def evaluate_holdout(gen, capacities, config, months, hidden, seed, model=1) -> HoldoutResult:
    """Use the first ``months`` months: train on all but the last 12, score the last 12."""
    data = gen.head(months)
    train_n = months - HORIZON
    res = forecast_from(data, capacities, config, [range(0, train_n)], train_n,
                        hidden=hidden, seed=seed)
    actual = data.values[train_n:]
    report = score_year(res.mwh, actual)
    return HoldoutResult(model, hidden, months, train_n, HORIZON, report, config.input_dim,
                         res.mwh, actual, res.losses, res.params, seed)


def _matrix_cell(args):
    gen, capacities, config, months, hidden, seed, model = args
    return evaluate_holdout(gen, capacities, config, months, hidden, seed, model)


def run_table2_matrix(gen, capacities, config: ExperimentConfig, jobs: int = 1):
    """Evaluate every (data window, hidden width) pair.

    Returns one entry per pair, in window-major order: a
    :class:`HoldoutResult`, or a :class:`SkippedRun` when the data is too
    short for the window. Each pair is seeded from (base seed, pair index).
    """
    cells = []
    out: list = []
    base = config.training.seed
    idx = 0
    for model, months in enumerate(config.months, start=1):
        for hidden in config.hidden:
            if months > len(gen):
                out.append(SkippedRun(model, hidden, months,
                                      f"needs {months} months, data has {len(gen)}"))
            elif months - HORIZON < config.training.window + 1:
                out.append(SkippedRun(model, hidden, months,
                                      f"{months} months leaves no training windows"))
            else:
                out.append(None)
                cells.append((len(out) - 1, (gen, capacities, config, months, hidden,
                                             derive_seed(base, idx), model)))
            idx += 1
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_matrix_cell, [c for _, c in cells]))
    else:
        results = [_matrix_cell(c) for _, c in cells]
    for (pos, _), res in zip(cells, results):
        out[pos] = res
    return out


def run_folds(gen, capacities, config: ExperimentConfig, hidden=None, k=3, mode="forward"):
    """Walk-forward (or rotating) evaluation over ``k`` twelve-month test blocks."""
    plan = plan_folds(len(gen), k, config.training.window, mode)
    hidden = hidden or config.training.hidden_dim
    out = []
    for j, fold in enumerate(plan):
        res = forecast_from(gen, capacities, config, list(fold.train), fold.test.start,
                            hidden=hidden, seed=derive_seed(config.training.seed, j))
        actual = gen.values[fold.test.start:fold.test.stop]
        out.append((fold, score_year(res.mwh, actual), res))
    return out


# --------------------------------------------------------------------------
# synthetic data


def seasonal_shape(month: int) -> float:
    """Seasonal curve in [-1, 1]: +1 in May, -1 in October.

    Half-cosine falling over May..October, rising over October..May.
    """
    if 5 <= month <= 10:
        return math.cos(math.pi * (month - 5) / 5)
    return -math.cos(math.pi * ((month - 10) % 12) / 7)


def synth_dataset(years: int, seed: int = 0, noise_level: float = 0.0, start_year: int = 2007,
                  base_capacity: float = 13000.0, capacity_growth: float = 750.0,
                  mean_hours: float = 300.0, amplitude: float = 120.0):
    """Seasonal monthly generation on a linearly growing fleet.

    Returns ``(GenerationSeries, list[CapacityRecord])``. Monthly hours follow
    :func:`seasonal_shape` scaled by ``amplitude`` around ``mean_hours``,
    multiplied by ``1 + noise_level * N(0, 1)`` (floored at 0).
    """
    if years < 2:
        raise ValidationError("synthetic data needs at least 2 years")
    rng = np.random.default_rng(seed)
    caps = [CapacityRecord(start_year + k, base_capacity + capacity_growth * k) for k in range(years)]
    values = []
    for rec in caps:
        for m in range(1, 13):
            h = mean_hours + amplitude * seasonal_shape(m)
            if noise_level:
                h = max(0.0, h * (1.0 + noise_level * rng.standard_normal()))
            values.append(h * rec.installed_mw)
    return GenerationSeries.from_values(start_year, 1, values), caps
