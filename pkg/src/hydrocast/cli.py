"""Command-line entry point: ``hydrocast <subcommand> [options]``.

Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 numeric
failure (training divergence).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, _kernels, lstm
from .capacity import fit_linear
from .config import flatten, load_config, with_seed
from .errors import DivergenceError, HydrocastError, PipelineError
from .outputs import (
    file_sha256,
    write_forecast_csv,
    write_manifest,
    write_report_csv,
    write_skipped_csv,
    write_xy,
)
from .pipeline import (
    ExperimentConfig,
    HoldoutResult,
    SkippedRun,
    run_folds,
    run_forecast,
    run_table2_matrix,
    synth_dataset,
)
from .series import (
    MONTH_NAMES,
    monthly_stats,
    normalize_generation,
    read_capacity_csv,
    read_generation_csv,
    seasonal_profile,
    write_capacity_csv,
    write_generation_csv,
)

log = logging.getLogger("hydrocast")

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3
R2_WARN = 0.9


class UsageError(Exception):
    pass


def _common(p, need_data=True):
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--out", type=Path, help="output directory (created if absent)")
    p.add_argument("--seed", type=int, help="64-bit seed; overrides the config")
    p.add_argument("--gen", type=Path, required=need_data, help="generation CSV (year,month,mwh)")
    p.add_argument("--cap", type=Path, help="capacity CSV (year,installed_mw)")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hydrocast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hydrocast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check generation and capacity CSVs")
    _common(p)

    p = sub.add_parser("stats", help="monthly min/max/mean statistics")
    _common(p)

    p = sub.add_parser("synth", help="write a synthetic seasonal dataset")
    _common(p, need_data=False)
    p.add_argument("--years", type=int, help="number of years (default 12)")
    p.add_argument("--noise", type=float, help="relative noise level (default 0)")
    p.add_argument("--start-year", type=int, help="first calendar year (default 2007)")

    p = sub.add_parser("train", help="train on the full series and save a checkpoint")
    _common(p)
    p.add_argument("--hidden", type=int, help="hidden width (overrides config)")

    p = sub.add_parser("forecast", help="forecast the 12 months after the data")
    _common(p)
    p.add_argument("--checkpoint", type=Path, help="use a saved model instead of training")
    p.add_argument("--train", action="store_true", help="train a fresh model first")
    p.add_argument("--hidden", type=int, help="hidden width when training")
    p.add_argument("--capacity", type=float, help="override the regressed forecast-year capacity (MW)")

    p = sub.add_parser("matrix", help="window x width holdout experiment matrix")
    _common(p)
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    p.add_argument("--folds", type=int, default=0,
                   help="also run a K-fold walk-forward evaluation at the first hidden width")
    p.add_argument("--fold-mode", choices=("forward", "rotating"), default="forward")
    return parser


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"{args.command} requires --{name}")


def _out(args) -> Path:
    _need(args, "out")
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _config(args) -> tuple[ExperimentConfig, dict]:
    if args.config is not None:
        config, extra = load_config(args.config)
    else:
        config, extra = ExperimentConfig(), {}
    return with_seed(config, args.seed), extra


def _manifest(args, out, config=None, extra=()):
    entries = {"command": args.command, "version": __version__,
               "kernel_backend": _kernels.BACKEND}
    if config is not None:
        entries.update(flatten(config))
    entries.update(dict(extra))
    for name in ("gen", "cap", "config", "checkpoint"):
        path = getattr(args, name, None)
        if path is not None:
            entries[f"{name}_file"] = path.name
            entries[f"{name}_sha256"] = file_sha256(path)
    write_manifest(out / "manifest.txt", entries)


def _load_data(args):
    _need(args, "gen", "cap")
    gen = read_generation_csv(args.gen)
    caps = read_capacity_csv(args.cap)
    return gen, caps


def _report_fit(caps, lookback):
    fit = fit_linear(caps, lookback)
    print(f"capacity trend: slope {fit.slope:.3f} MW/yr, intercept {fit.intercept:.3f} MW "
          f"at {fit.base_year}, r2 {fit.r2:.4f}")
    if fit.r2 < R2_WARN:
        log.warning("capacity regression r2 %.3f is below %.1f; forecasts may be unreliable",
                    fit.r2, R2_WARN)


# --------------------------------------------------------------------------


def cmd_validate(args):
    gen, caps = _load_data(args)
    normalize_generation(gen, caps)
    (y0, m0), (y1, m1) = gen.start, gen.end
    print(f"ok: {len(gen)} months {y0}-{m0:02d}..{y1}-{m1:02d}, {len(caps)} capacity years")
    return EXIT_OK


def cmd_stats(args):
    _need(args, "gen")
    gen = read_generation_csv(args.gen)
    stats = monthly_stats(gen)
    print(f"{'month':<10} {'min':>14} {'max':>14} {'mean':>14}")
    for m, s in stats.items():
        if s is None:
            print(f"{MONTH_NAMES[m - 1]:<10} {'(no data)':>14}")
        else:
            print(f"{MONTH_NAMES[m - 1]:<10} {s.min:>14.1f} {s.max:>14.1f} {s.mean:>14.1f}")
    profile = None
    config, _ = _config(args)
    if args.cap is not None:
        caps = read_capacity_csv(args.cap)
        profile = seasonal_profile(normalize_generation(gen, caps))
        print("seasonal coefficients: " + " ".join(f"{c:.3f}" for c in profile.coefficients))
        _report_fit(caps, config.lookback)
    if args.out is not None:
        out = _out(args)
        present = [m for m, s in stats.items() if s is not None]
        for key in ("min", "max", "mean"):
            write_xy(out / f"monthly_{key}.xy", present,
                     [getattr(stats[m], key) for m in present])
        if profile is not None:
            write_xy(out / "seasonal_profile.xy", range(1, 13), profile.coefficients)
        _manifest(args, out, config)
    return EXIT_OK


def cmd_synth(args):
    out = _out(args)
    config, extra = _config(args)
    years = args.years if args.years is not None else extra.get("years", 12)
    noise = args.noise if args.noise is not None else extra.get("noise", 0.0)
    start = args.start_year if args.start_year is not None else extra.get("start_year", 2007)
    seed = config.training.seed
    gen, caps = synth_dataset(years, seed=seed, noise_level=noise, start_year=start)
    write_generation_csv(gen, out / "gen.csv")
    write_capacity_csv(caps, out / "cap.csv")
    _manifest(args, out, None, {"seed": seed, "years": years, "noise": noise,
                                "start_year": start})
    print(f"wrote {len(gen)} months to {out / 'gen.csv'} and {len(caps)} years to {out / 'cap.csv'}")
    return EXIT_OK


def cmd_train(args):
    gen, caps = _load_data(args)
    out = _out(args)
    config, _ = _config(args)
    res = run_forecast(gen, caps, config, hidden=args.hidden)
    lstm.save_checkpoint(res.params, out / "checkpoint.txt")
    write_xy(out / "loss_curve.xy", range(1, len(res.losses) + 1), res.losses)
    extra = {"hidden_used": args.hidden or config.training.hidden_dim}
    _manifest(args, out, config, extra)
    final = res.losses[-1] if res.losses else float("nan")
    print(f"trained {len(res.losses)} epochs, final loss {final:.6g}; "
          f"checkpoint at {out / 'checkpoint.txt'}")
    return EXIT_OK


def cmd_forecast(args):
    if args.checkpoint is None and not args.train:
        raise UsageError("forecast needs --checkpoint PATH or --train")
    if args.checkpoint is not None and args.train:
        raise UsageError("--checkpoint and --train are mutually exclusive")
    gen, caps = _load_data(args)
    out = _out(args)
    config, _ = _config(args)
    if args.capacity is not None:
        config = replace(config, capacity_override=args.capacity)
    params = lstm.load_checkpoint(args.checkpoint) if args.checkpoint else None
    _report_fit(caps, config.lookback)
    res = run_forecast(gen, caps, config, hidden=args.hidden, params=params)
    write_forecast_csv(res.rows, out / "forecast.csv")
    write_xy(out / "forecast.xy", range(1, len(res.rows) + 1), res.mwh)
    if params is None:
        lstm.save_checkpoint(res.params, out / "checkpoint.txt")
        write_xy(out / "loss_curve.xy", range(1, len(res.losses) + 1), res.losses)
    _manifest(args, out, config)
    for r in res.rows:
        print(f"{r.year}-{r.month:02d} {r.predicted_mwh:16.1f} MWh  "
              f"({r.predicted_hours:7.2f} h x {r.capacity_mw:.1f} MW)")
    return EXIT_OK


def cmd_matrix(args):
    gen, caps = _load_data(args)
    out = _out(args)
    config, extra = _config(args)
    jobs = args.jobs if args.jobs is not None else extra.get("jobs", 1)
    rows = run_table2_matrix(gen, caps, config, jobs=jobs)
    done = [r for r in rows if isinstance(r, HoldoutResult)]
    skipped = [r for r in rows if isinstance(r, SkippedRun)]
    write_report_csv(done, out / "report.csv")
    if skipped:
        write_skipped_csv(skipped, out / "skipped.csv")
    ckdir = out / "checkpoints"
    plots = out / "plots"
    ckdir.mkdir(exist_ok=True)
    plots.mkdir(exist_ok=True)
    for r in done:
        tag = f"m{r.months}_h{r.hidden}"
        lstm.save_checkpoint(r.params, ckdir / f"{tag}.txt")
        months = range(1, len(r.forecast) + 1)
        write_xy(plots / f"{tag}_forecast.xy", months, r.forecast)
        write_xy(plots / f"{tag}_actual.xy", months, r.actual)
        write_xy(plots / f"{tag}_error.xy", months, r.forecast - r.actual)
        write_xy(plots / f"{tag}_loss.xy", range(1, len(r.losses) + 1), r.losses)
    meta = {"rows": len(done), "skipped": len(skipped), "channel_input_dim": config.input_dim,
            "report_sha256": file_sha256(out / "report.csv")}
    for k, r in enumerate(rows):
        meta[f"row{k}_seed"] = getattr(r, "seed", "skipped")
    if args.folds:
        folds = run_folds(gen, caps, config, hidden=config.hidden[0], k=args.folds,
                          mode=args.fold_mode)
        with (out / "folds.csv").open("w", encoding="utf-8") as fh:
            fh.write("fold,test_start,test_stop,rmse_annual,rmse_monthly,mape_annual,mape_monthly_pct\n")
            for j, (fold, rep, _) in enumerate(folds, start=1):
                fh.write(f"{j},{fold.test.start},{fold.test.stop},{rep.rmse_annual!r},"
                         f"{rep.rmse_monthly_avg!r},{rep.mape_annual!r},{rep.mape_monthly_avg_pct!r}\n")
        meta["folds"] = args.folds
        meta["fold_mode"] = args.fold_mode
    _manifest(args, out, config, meta)
    print(f"{'model':>5} {'hidden':>6} {'months':>6} {'rmse_annual':>14} {'rmse_monthly':>13} "
          f"{'mape':>8} {'mape_m%':>8}")
    for r in rows:
        if isinstance(r, SkippedRun):
            print(f"{r.model:>5} {r.hidden:>6} {r.months:>6}  skipped: {r.reason}")
        else:
            rep = r.report
            print(f"{r.model:>5} {r.hidden:>6} {r.months:>6} {rep.rmse_annual:>14.2f} "
                  f"{rep.rmse_monthly_avg:>13.2f} {rep.mape_annual:>8.4f} "
                  f"{rep.mape_monthly_avg_pct:>8.2f}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "synth": cmd_synth,
    "train": cmd_train,
    "forecast": cmd_forecast,
    "matrix": cmd_matrix,
}


def _exit_code(exc) -> int:
    if isinstance(exc, PipelineError):
        exc = exc.cause
    if isinstance(exc, DivergenceError):
        return EXIT_NUMERIC
    if isinstance(exc, HydrocastError):
        return EXIT_VALIDATION
    return EXIT_IO


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else
                        logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (HydrocastError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
