"""Flat key=value configuration with environment overrides.

Sources, later wins: dataclass defaults, a config file of ``key = value``
lines (# comments allowed), then ``PROXINORM_<KEY>`` environment
variables.  All values are positive integers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from typing import Optional

from .errors import InputFormatError

ENV_PREFIX = "PROXINORM_"


@dataclass
class Config:
    depth_budget: int = 5000
    precision_bits: int = 64
    elimination_budget: int = 10_000
    demo_n: int = 2
    rounding_denominator_bits: int = 16

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or value < 1:
                raise InputFormatError(f"config key {f.name!r} must be a positive integer")


def _parse_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputFormatError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def load_config(path: Optional[str] = None, env: Optional[dict] = None) -> Config:
    env = os.environ if env is None else env
    known = {f.name for f in fields(Config)}
    raw = {}
    if path is not None:
        for key, val in _parse_file(path).items():
            if key not in known:
                raise InputFormatError(f"unknown config key {key!r}")
            raw[key] = val
    for name in known:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            raw[name] = env[env_key]
    parsed = {}
    for key, val in raw.items():
        try:
            parsed[key] = int(val)
        except ValueError as exc:
            raise InputFormatError(f"config key {key!r} must be an integer, got {val!r}") from exc
    return Config(**parsed)
