"""Flat ``key = value`` run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .policy import PolicyParams

DEFAULT_LOG_FORMAT = '{X.X.X.X} * * [{DD/MMM/YYYY}:{HH:MM:SS} *] "{GET} {PAGE} *" {RETURN} {BYTES}'

RUN_KEYS = ("log_format", "ds", "out_dir", "inputs", "plot_width", "plot_height", "plot_y_axis")


class ConfigError(ValueError):
    pass


def parse_key_values(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def read_key_values(path) -> dict:
    return parse_key_values(Path(path).read_text(encoding="utf-8"), str(path))


@dataclass
class RunConfig:
    log_format: str
    params: PolicyParams = field(default_factory=PolicyParams)
    ds: float = 60.0
    out_dir: Optional[str] = None
    inputs: list = field(default_factory=list)
    plot_width: int = 1600
    plot_height: int = 900
    plot_y_axis: str = "rank"

    @classmethod
    def from_mapping(cls, values: dict, require_format: bool = True) -> "RunConfig":
        policy_keys = set(PolicyParams.names())
        unknown = sorted(set(values) - policy_keys - set(RUN_KEYS))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        if require_format and not values.get("log_format"):
            raise ConfigError("missing required key 'log_format'")
        try:
            params = PolicyParams.from_mapping({k: v for k, v in values.items() if k in policy_keys})
            cfg = cls(
                log_format=values.get("log_format") or DEFAULT_LOG_FORMAT,
                params=params,
                ds=float(values.get("ds", 60)),
                out_dir=values.get("out_dir") or None,
                inputs=[p.strip() for p in values.get("inputs", "").split(",") if p.strip()],
                plot_width=int(values.get("plot_width", 1600)),
                plot_height=int(values.get("plot_height", 900)),
                plot_y_axis=values.get("plot_y_axis", "rank"),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc).strip("'\"")) from None
        if cfg.ds <= 0:
            raise ConfigError("ds must be positive")
        if cfg.plot_y_axis not in ("rank", "raw"):
            raise ConfigError("plot_y_axis must be 'rank' or 'raw'")
        if cfg.plot_width <= 0 or cfg.plot_height <= 0:
            raise ConfigError("plot size must be positive")
        return cfg

    @classmethod
    def load(cls, path, require_format: bool = True) -> "RunConfig":
        return cls.from_mapping(read_key_values(path), require_format)
