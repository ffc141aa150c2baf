"""Writers for forecast/report CSVs, two-column plot data and run manifests.

Every writer emits deterministic bytes for identical inputs: floats use
``repr`` and nothing time-dependent is recorded.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

REPORT_COLUMNS = (
    "model", "hidden", "months", "train_months", "test_months",
    "rmse_annual", "rmse_monthly", "mape_annual", "mape_monthly_pct",
)
FORECAST_COLUMNS = ("year", "month", "predicted_mwh", "predicted_hours", "capacity_mw")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_forecast_csv(rows, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(FORECAST_COLUMNS)
        for r in rows:
            w.writerow([r.year, r.month, repr(r.predicted_mwh), repr(r.predicted_hours),
                        repr(r.capacity_mw)])


def write_report_csv(results, path) -> None:
    """One row per completed holdout run, columns as in ``REPORT_COLUMNS``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in results:
            rep = r.report
            w.writerow([r.model, r.hidden, r.months, r.train_months, r.test_months,
                        repr(rep.rmse_annual), repr(rep.rmse_monthly_avg),
                        repr(rep.mape_annual), repr(rep.mape_monthly_avg_pct)])


def write_skipped_csv(skipped, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["model", "hidden", "months", "reason"])
        for s in skipped:
            w.writerow([s.model, s.hidden, s.months, s.reason])


def write_xy(path, xs, ys) -> None:
    """Plain ``x y`` lines, one point per line."""
    lines = [f"{x!r} {float(y)!r}" for x, y in zip(xs, ys)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, entries: dict) -> None:
    """``key = value`` lines in insertion order."""
    lines = [f"{k} = {v}" for k, v in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            k, _, v = line.partition(" = ")
            out[k] = v
    return out
