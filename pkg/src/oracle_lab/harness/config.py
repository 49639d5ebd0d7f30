"""Flat ``section.key`` configuration documents.

Files are INI-style (``[latency]`` / ``kind = gaussian``); every value is
addressed by its dotted name, both in files and in ``--set`` overrides.
"""

from __future__ import annotations

import configparser
import os
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional

from ..engine import SimConfig
from ..errors import ConfigError
from ..latency import LatencyModel

SEED_ENV = "ORACLE_LAB_SEED"
BUILTIN = {"base": "baseline.cfg", "baseline": "baseline.cfg"}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


# dotted key -> (SimConfig field or "latency.<field>", parser)
KEYS = {
    "run.n_nodes": ("n_nodes", int),
    "run.m_sources": ("m_sources", int),
    "run.threshold": ("threshold", int),
    "run.n_tasks": ("n_tasks", int),
    "run.seed": ("master_seed", int),
    "run.convergence_window": ("convergence_window", int),
    "run.task_spacing_intervals": ("task_spacing_epochs", float),
    "run.event_jitter": ("event_jitter", float),
    "signal.frequency_hz": ("frequency_hz", float),
    "signal.mode": ("signal_mode", str),
    "signal.phase_offsets": ("phase_offsets", _parse_floats),
    "latency.kind": ("latency.kind", str),
    "latency.gaussian_mean": ("latency.gaussian_mean", float),
    "latency.gaussian_std": ("latency.gaussian_std", float),
    "latency.uniform_low": ("latency.uniform_low", float),
    "latency.uniform_high": ("latency.uniform_high", float),
    "latency.perturbation_high": ("latency.perturbation_high", float),
    "latency.persistence": ("latency.persistence", str),
    "aggregation.strategy": ("strategy", str),
    "timing.enabled": ("timing_enabled", _parse_bool),
    "timing.k": ("timing_k", int),
}


def read_flat(source: str | os.PathLike) -> dict[str, str]:
    """Read a config file (or a built-in name such as ``base``) into
    ``{"section.key": "raw value"}``."""
    parser = configparser.ConfigParser(interpolation=None)
    name = str(source)
    if name in BUILTIN:
        text = resources.files("oracle_lab.configs").joinpath(BUILTIN[name]).read_text()
        parser.read_string(text, source=name)
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
    return {f"{sec}.{key}": val for sec in parser.sections() for key, val in parser[sec].items()}


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def build_config(flat: Mapping[str, str], seed: Optional[int] = None) -> SimConfig:
    """Turn raw dotted values into a validated :class:`SimConfig`.

    Seed precedence: explicit ``seed`` argument, then ``run.seed``, then the
    ``ORACLE_LAB_SEED`` environment variable, then 0.
    """
    top: dict = {}
    lat: dict = {}
    for key, raw in flat.items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        field, conv = KEYS[key]
        try:
            value = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
        if field.startswith("latency."):
            lat[field.split(".", 1)[1]] = value
        else:
            top[field] = value
    if seed is not None:
        top["master_seed"] = seed
    elif "master_seed" not in top and os.environ.get(SEED_ENV):
        try:
            top["master_seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    return SimConfig(latency=LatencyModel(**lat), **top)


def load_config(source="base", overrides: Iterable[str] = (), seed: Optional[int] = None) -> SimConfig:
    flat = read_flat(source)
    flat.update(parse_overrides(overrides))
    return build_config(flat, seed)


def to_flat(config: SimConfig) -> dict[str, object]:
    """Dotted echo of a config; ``build_config`` of it gives the same config."""
    out: dict[str, object] = {}
    for key, (field, _) in KEYS.items():
        if field.startswith("latency."):
            value = getattr(config.latency, field.split(".", 1)[1])
        else:
            value = getattr(config, field)
        if isinstance(value, tuple):
            value = " ".join(repr(float(v)) for v in value)
        out[key] = value
    return out


def write_cfg(config: SimConfig, path: Path) -> None:
    parser = configparser.ConfigParser(interpolation=None)
    for key, value in to_flat(config).items():
        sec, name = key.split(".", 1)
        if not parser.has_section(sec):
            parser.add_section(sec)
        parser[sec][name] = str(value).lower() if isinstance(value, bool) else str(value)
    with open(path, "w") as fh:
        parser.write(fh)
