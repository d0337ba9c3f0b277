"""JSON-backed experiment configurations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..sysid import ConfigError, LinearSystem


def _build(cls, d: dict):
    if not isinstance(d, dict):
        raise ConfigError(f"{cls.__name__} config must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = dict(d)
    if "system" in kwargs and kwargs["system"] is not None and not isinstance(kwargs["system"], LinearSystem):
        kwargs["system"] = LinearSystem.from_dict(kwargs["system"])
    try:
        cfg = cls(**kwargs)
    except TypeError as err:
        raise ConfigError(str(err)) from err
    cfg.validate()
    return cfg


class _Config:
    @classmethod
    def from_dict(cls, d: dict):
        return _build(cls, d)

    @classmethod
    def from_json(cls, path):
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as err:
            raise ConfigError(f"invalid JSON in {path}: {err}") from err
        return cls.from_dict(d)

    def validate(self) -> None:
        for name in ("horizon", "trials"):
            v = getattr(self, name, None)
            if v is not None and (not isinstance(v, int) or v < 0):
                raise ConfigError(f"{name} must be a nonnegative integer")
        eps = getattr(self, "epsilon", None)
        if eps is not None and not eps > 0:
            raise ConfigError("epsilon must be positive")


@dataclass
class DemoConfig(_Config):
    """Three-filter demonstration on a fixed two-state system.

    ``system`` and ``seed`` default to the demo's own choices when omitted.
    """

    horizon: int = 50
    seed: int | None = None
    delta_bar: int | None = None
    epsilon: float = 1e-3
    refine_prior: bool = False
    grid: int = 720
    check_k: int = 6
    oit_delta: int = 2
    system: LinearSystem | None = None


@dataclass
class MonteCarloConfig(_Config):
    kind: str = "observable"
    n: int = 10
    n_o: int = 8
    p: int = 10
    m: int = 10
    trials: int = 100
    horizon: int = 100
    seed: int = 0
    epsilon: float = 1e-3
    delta_bar: int | None = None
    refine_prior: bool = True
    guess_offset: float = 1.0
    x0_half: float = 10.0
    record_time: bool = False
    workers: int | None = None

    def validate(self) -> None:
        super().validate()
        if self.kind not in ("observable", "detectable"):
            raise ConfigError("kind must be 'observable' or 'detectable'")
        if self.kind == "detectable" and not 0 < self.n_o <= self.n:
            raise ConfigError("need 0 < n_o <= n")
        if min(self.n, self.p, self.m) < 1:
            raise ConfigError("n, p and m must be positive")


@dataclass
class TimingConfig(_Config):
    n: int = 10
    p: int = 10
    m: int = 10
    horizon: int = 100
    seed: int = 0
    delta_bar: int | None = None
    repeats: int = 15
    warmup: int = 3


@dataclass
class BoundCheckConfig(_Config):
    """Random observable systems checked against the OIT diameter bound."""

    trials: int = 100
    max_n: int = 6
    horizon: int = 50
    seed: int = 0
    extra_delta: int = 2
    directions: int = 64


@dataclass
class SystemConfig(_Config):
    system: LinearSystem | None = None
    delta: int = 0

    def validate(self) -> None:
        if self.system is None:
            raise ConfigError("config needs a 'system' entry")
        if not isinstance(self.delta, int) or self.delta < 0:
            raise ConfigError("delta must be a nonnegative integer")
