#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Run configuration.

Values are layered: built-in defaults, then a TOML file (``--config`` or
SEPKIT_CONFIG), then command-line flags. Rectangles are written
"x_min,x_max,y_min,y_max" and points "re,im"; each number may be a literal,
``pi`` or a product such as ``-1.5*pi``.
"""

import math
import os
from pathlib import Path
from typing import Any, Literal, Optional

import toml
from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from sepkit.exceptions import ConfigError
from sepkit.flow import IntegrationSettings
from sepkit.separatrix import Method

# Load environment variables from .env file
load_dotenv(override=True)

CONFIG_ENV = "SEPKIT_CONFIG"


def parse_number(text: str) -> float:
    text = str(text).strip().replace(" ", "")
    try:
        if text.endswith("pi"):
            head = text[:-2]
            if head in ("", "+", "-"):
                value = -math.pi if head == "-" else math.pi
            elif head.endswith("*"):
                value = float(head[:-1]) * math.pi
            else:
                raise ValueError
        else:
            value = float(text)
    except ValueError:
        raise ConfigError(f"'{text}' is not a number (use e.g. 2, -1.5*pi or pi)") from None
    if not math.isfinite(value):
        raise ConfigError(f"'{text}' is not finite")
    return value


def parse_numbers(text: str, count: int, what: str) -> tuple[float, ...]:
    parts = str(text).split(",")
    if len(parts) != count:
        raise ConfigError(f"{what} needs {count} comma-separated numbers, got '{text}'")
    return tuple(parse_number(p) for p in parts)


def parse_domain(text: str) -> tuple[float, float, float, float]:
    return parse_numbers(text, 4, "domain")


def parse_point(text: str) -> complex:
    re, im = parse_numbers(text, 2, "point")
    return complex(re, im)


def _coerce(value: Any, count: int, what: str) -> Any:
    if isinstance(value, str):
        return parse_numbers(value, count, what)
    if isinstance(value, (list, tuple)):
        return tuple(parse_number(v) if isinstance(v, str) else v for v in value)
    return value


class RunConfig(BaseModel):
    """Everything a sub-command needs; echoed verbatim into the JSON output."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    function: Optional[str] = None
    domain: tuple[float, float, float, float] = (-10.0, 10.0, -1.5 * math.pi, 1.5 * math.pi)
    grid_n: int = 20
    method: Optional[Method] = None
    out: Optional[str] = None
    format: Literal["svg", "csv"] = "svg"

    # integration
    rtol: float = 1e-10
    atol: float = 1e-12
    t_max: float = 200.0
    portrait_t_max: float = 20.0
    workers: int = 1

    # escape
    z0: Optional[tuple[float, float]] = None

    # separatrix methods
    segment: Optional[tuple[float, float, float, float]] = None
    epsilon: float = 0.1
    x_star: tuple[float, ...] = (-2.0, -1.0, 0.0, 1.0, 2.0)
    t1: Optional[float] = None
    bracket: tuple[float, float] = (-1.0, 1.0)
    seeds: tuple[tuple[float, float], ...] = ()
    part: Literal["imag", "real"] = "imag"

    # portrait overlay of BVP separatrix points
    overlay_x_star: tuple[float, ...] = ()

    @field_validator("domain", "segment", mode="before")
    @classmethod
    def _rectangle(cls, value):
        return _coerce(value, 4, "rectangle")

    @field_validator("z0", "bracket", mode="before")
    @classmethod
    def _pair(cls, value):
        return _coerce(value, 2, "pair")

    @field_validator("x_star", "overlay_x_star", mode="before")
    @classmethod
    def _x_star(cls, value):
        if isinstance(value, str):
            return tuple(parse_number(v) for v in value.split(","))
        return _coerce(value, 0, "x_star")

    @field_validator("seeds", mode="before")
    @classmethod
    def _seeds(cls, value):
        return tuple(_coerce(v, 2, "seed") for v in value)

    @field_validator("grid_n")
    @classmethod
    def _grid(cls, value):
        if value < 2:
            raise ValueError("grid_n must be at least 2")
        return value

    @field_validator("rtol", "atol", "t_max", "portrait_t_max", "epsilon")
    @classmethod
    def _positive(cls, value, info):
        if not value > 0:
            raise ValueError(f"{info.field_name} must be positive")
        return value

    @field_validator("workers")
    @classmethod
    def _workers(cls, value):
        if value < 1:
            raise ValueError("workers must be at least 1")
        return value

    @model_validator(mode="after")
    def _checks(self):
        x_min, x_max, y_min, y_max = self.domain
        if not (x_min < x_max and y_min < y_max):
            raise ValueError(f"domain {self.domain} is degenerate")
        if not self.bracket[0] < self.bracket[1]:
            raise ValueError(f"bracket {self.bracket} is degenerate")
        return self

    def integration_settings(self, **changes) -> IntegrationSettings:
        try:
            return IntegrationSettings(rtol=self.rtol, atol=self.atol, t_max=self.t_max).replace(**changes)
        except ValueError as e:
            raise ConfigError(str(e)) from e


def load_config_file(path: str | Path | None = None) -> dict:
    """TOML values from path, or from SEPKIT_CONFIG when no path is given."""
    path = path or os.getenv(CONFIG_ENV)
    if not path:
        return {}
    try:
        values = toml.load(path)
    except toml.TomlDecodeError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    logger.debug(f"Loaded configuration from {path}: {sorted(values)}")
    return values


def build_config(file_values: dict, flags: dict) -> RunConfig:
    """Merge TOML values and flags (flags win; None means not given)."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flags.items() if v is not None})
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
