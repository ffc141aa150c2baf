"""Flat ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Keys mirror the fields of
:class:`~hydrocast.lstm.TrainingConfig` and
:class:`~hydrocast.pipeline.ExperimentConfig`; list-valued keys take
comma-separated values. Example::

    # small smoke run
    epochs = 50
    hidden = 8, 16
    months = 72, 120
"""

from __future__ import annotations

from dataclasses import asdict, fields, replace
from pathlib import Path

from .errors import DomainError, ParseError
from .lstm import TrainingConfig
from .pipeline import ExperimentConfig

_TRAINING_KEYS = {f.name: f.type for f in fields(TrainingConfig)}
_LIST_KEYS = ("months", "hidden")
_EXPERIMENT_SCALARS = {"lookback": int, "input_dim": int, "capacity_override": float}
_EXTRA_KEYS = {"years": int, "noise": float, "start_year": int, "jobs": int}


def _int(text):
    return int(text, 0)


def _cast(kind, text):
    if kind in (int, "int"):
        return _int(text)
    return float(text)


def parse_config(text: str, path="<config>") -> tuple[ExperimentConfig, dict]:
    """Parse config text into an :class:`ExperimentConfig` plus extra CLI keys."""
    train_kw, exp_kw, extra = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParseError(path, lineno, key or line, "expected 'key = value'")
        try:
            if key in _TRAINING_KEYS:
                train_kw[key] = _cast(_TRAINING_KEYS[key], value)
            elif key in _LIST_KEYS:
                exp_kw[key] = [_int(v.strip()) for v in value.split(",") if v.strip()]
                if not exp_kw[key]:
                    raise ValueError("empty list")
            elif key in _EXPERIMENT_SCALARS:
                exp_kw[key] = _cast(_EXPERIMENT_SCALARS[key], value)
            elif key in _EXTRA_KEYS:
                extra[key] = _cast(_EXTRA_KEYS[key], value)
            else:
                raise ParseError(path, lineno, key, "unknown key")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(path, lineno, key, f"bad value {value!r}") from None
    try:
        training = TrainingConfig(**train_kw)
        config = ExperimentConfig(training=training, **exp_kw)
    except DomainError as exc:
        raise ParseError(path, 0, "config", str(exc)) from None
    return config, extra


def load_config(path) -> tuple[ExperimentConfig, dict]:
    return parse_config(Path(path).read_text(encoding="utf-8"), path)


def with_seed(config: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    if seed is None:
        return config
    return replace(config, training=replace(config.training, seed=seed))


def flatten(config: ExperimentConfig) -> dict:
    """Config as ordered ``key -> text`` pairs for manifests."""
    out = {k: str(v) for k, v in asdict(config.training).items()}
    out["months"] = ",".join(str(m) for m in config.months)
    out["hidden"] = ",".join(str(h) for h in config.hidden)
    out["lookback"] = str(config.lookback)
    out["input_dim"] = str(config.input_dim)
    out["capacity_override"] = str(config.capacity_override)
    return out
