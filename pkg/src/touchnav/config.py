"""Engine configuration from file, environment and flags.

The config file is plain ``key = value`` lines (``#`` comments allowed),
one per ModeConfig field::

    sensitivity = 1.5
    depth_threshold = 0.04
    hysteresis_frames = 2

Precedence, lowest to highest: built-in defaults, config file, ``TS_*``
environment variables (``TS_SENSITIVITY=2`` etc.), CLI flags.
"""

from __future__ import annotations

import os
from dataclasses import fields

from .engine import ModeConfig
from .errors import ConfigInvalid, IoFailure

ENV_PREFIX = "TS_"

_FIELD_TYPES = {f.name: f.type for f in fields(ModeConfig)}


def config_field_names() -> tuple[str, ...]:
    return tuple(_FIELD_TYPES)


def load_config_file(path: str) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise IoFailure(f"cannot read config {path}: {e}") from e
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _FIELD_TYPES:
            raise ConfigInvalid(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = val
    return values


def _coerce(name: str, raw: str):
    try:
        if name in ("hysteresis_frames", "depth_sign"):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigInvalid(f"config value {name}={raw!r} is not a number") from None


def resolve_mode_config(
    file_values: dict[str, str] | None = None,
    env: dict[str, str] | None = None,
    flag_values: dict[str, float | int | None] | None = None,
) -> ModeConfig:
    """Merge the three sources into a validated ModeConfig."""
    env = os.environ if env is None else env
    merged: dict[str, float | int] = {}
    for name, raw in (file_values or {}).items():
        merged[name] = _coerce(name, raw)
    for name in _FIELD_TYPES:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            merged[name] = _coerce(name, raw)
    for name, val in (flag_values or {}).items():
        if val is not None:
            if name not in _FIELD_TYPES:
                raise ConfigInvalid(f"unknown config key {name!r}")
            merged[name] = val
    return ModeConfig(**merged)
