"""Run configuration: defaults, a key = value file, then environment overrides."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional

from .interval import CEILING_ENV, DEFAULT_CEILING_BITS, DEFAULT_START_BITS, PrecisionPolicy

FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n_max: int = 8
    A_max: float = 3.0
    precision_start_bits: int = DEFAULT_START_BITS
    precision_ceiling_bits: int = DEFAULT_CEILING_BITS
    tol: str = "1e-20"
    output_dir: str = "out"
    format: str = "csv"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.precision_start_bits > self.precision_ceiling_bits:
            raise ConfigError("precision_start_bits exceeds precision_ceiling_bits")
        if self.precision_start_bits < 16:
            raise ConfigError("precision_start_bits must be at least 16")
        if self.tol_fraction <= 0:
            raise ConfigError("tol must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        if self.n_max < 1:
            raise ConfigError("n_max must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")

    @property
    def tol_fraction(self) -> Fraction:
        try:
            return Fraction(self.tol)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad tol {self.tol!r}") from exc

    @property
    def policy(self) -> PrecisionPolicy:
        return PrecisionPolicy(self.precision_start_bits, self.precision_ceiling_bits)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def updated(self, **changes) -> "RunConfig":
        data = self.as_dict()
        data.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig(**data)


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    kind = types[name]
    try:
        if kind in ("int", int):
            return int(raw)
        if kind in ("float", float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from exc
    return raw


def read_config_file(path) -> Dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out: Dict[str, Any] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key.lower() == "a_max":
            key = "A_max"
        out[key] = _coerce(key, value)
    return out


def load_config(path: Optional[str] = None, env: Optional[Dict[str, str]] = None, **overrides) -> RunConfig:
    data: Dict[str, Any] = {}
    if path:
        data.update(read_config_file(path))
    env = os.environ if env is None else env
    if env.get(CEILING_ENV):
        try:
            data["precision_ceiling_bits"] = int(env[CEILING_ENV])
        except ValueError as exc:
            raise ConfigError(f"{CEILING_ENV} must be an integer") from exc
    # explicit command-line values win over both file and environment
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**data)
