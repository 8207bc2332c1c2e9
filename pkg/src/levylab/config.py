"""Experiment configurations for the command line.

Each config is a flat dataclass whose defaults reproduce the reference runs.
Configs load from JSON or ``key = value`` text and round-trip losslessly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, fields
from pathlib import Path

from .corpus import DEFAULT_SEED


class ConfigError(ValueError):
    """Malformed or unknown configuration entry."""


@dataclass(frozen=True)
class KernelConfig:
    name: str = "log"
    dim: int = 1
    rmin: float = 1e-4
    rmax: float = 30.0
    n: int = 2048
    sigma: float = 1.0
    rtol: float = 1e-9


@dataclass(frozen=True)
class FundsolConfig:
    dim: int = 2
    t: float = 0.5
    rmin: float = 1e-5
    rmax: float = 50.0
    n: int = 2048
    rtol: float = 1e-9


@dataclass(frozen=True)
class SimulateConfig:
    symbol: str = "log"
    dim: int = 1
    L: float = 40.0
    n: int = 1024
    times: tuple = (0.05, 0.1, 0.15, 0.2)
    width: float = 1.0
    solver: str = "spectral"
    dt: float = 1e-3
    sigma: float = 1.0


@dataclass(frozen=True)
class HyperConfig:
    symbol: str = "log"
    dim: int = 1
    p: float = 2.0
    times: tuple = (0.05, 0.1, 0.15, 0.2)
    L: float = 40.0
    n: int = 4096
    width: float = 1.0
    margin: float = 1.05


@dataclass(frozen=True)
class LogsobConfig:
    p: tuple = (2.0, 3.0, 4.0)
    family: str = "logIminusDelta"
    corpus: str = "default"
    dim: int = 1
    seed: int = DEFAULT_SEED
    n_random: int = 20
    tol: float = 1e-3


@dataclass(frozen=True)
class ClassifyConfig:
    kernel: str = "truncated"
    dim: int = 1
    alpha: float = 0.5
    t: float = 2.0
    kmin: int = 4
    kmax: int = 24
    xi_min: float = 1e2
    xi_max: float = 1e4


CONFIGS = {
    "kernel": KernelConfig,
    "fundsol": FundsolConfig,
    "simulate": SimulateConfig,
    "hyper": HyperConfig,
    "logsob": LogsobConfig,
    "classify": ClassifyConfig,
}


def _coerce(default, value):
    if isinstance(default, tuple):
        if isinstance(value, str):
            value = [v for v in value.replace(" ", "").split(",") if v]
        return tuple(float(v) for v in value)
    if isinstance(default, bool):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if isinstance(default, int):
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"expected an integer, got {value}")
        return int(float(value)) if isinstance(value, str) else int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def from_mapping(cls, mapping: dict):
    """Build ``cls`` from a mapping, coercing strings and lists to field types."""
    known = {f.name: f for f in fields(cls)}
    unknown = set(mapping) - set(known)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    base = cls()
    kwargs = {}
    for k, v in mapping.items():
        try:
            kwargs[k] = _coerce(getattr(base, k), v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {k}: {v!r}") from exc
    return dataclasses.replace(base, **kwargs)


def to_mapping(cfg) -> dict:
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def dumps(cfg) -> str:
    return json.dumps(to_mapping(cfg), sort_keys=True)


def loads(cls, text: str):
    return from_mapping(cls, json.loads(text))


def config_hash(cfg) -> str:
    return hashlib.sha256(dumps(cfg).encode()).hexdigest()[:16]


def read_config_file(path) -> dict:
    """JSON object, or ``key = value`` lines with ``#`` comments."""
    text = Path(path).read_text()
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        data[k.strip()] = v.strip()
    return data
