"""Job configuration: a JSON document with the system definition at the top
level plus a target and command parameters.

Example::

    {
      "alphabet_size": 2,
      "psi": {"kind": "weighted", "thetas": [2, 4]},
      "target": {"kind": "subshift", "forbidden": ["11"]},
      "t_grid": {"start": -2, "stop": 2, "num": 9},
      "depth": 14,
      "tol": 1e-9,
      "seed": 0
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError
from .symbolic import ShiftSystem, system_from_config
from .targets import TargetSet, target_from_config, validate_target

VARIANTS = ("diam", "ball_diam", "two_r")


@dataclass
class JobConfig:
    system: ShiftSystem
    target: TargetSet
    t_grid: list[float] = field(default_factory=lambda: [float(t) for t in np.linspace(-2, 2, 9)])
    alpha_points: int = 101
    include_endpoints: bool = False
    depth: int = 14
    depths: list[int] | None = None
    delta: float = 0.3
    eps: float | None = None
    variant: str = "diam"
    tol: float = 1e-9
    seed: int = 0
    out: str | None = None
    plot: bool = True
    cover_estimate: bool = True
    corrupt_curve: dict | None = None
    verify: dict = field(default_factory=dict)

    @property
    def schedule(self) -> list[int]:
        return self.depths if self.depths else [max(1, self.depth - 2), self.depth]


def _grid(v: Any) -> list[float]:
    if isinstance(v, Mapping):
        try:
            return [float(t) for t in np.linspace(float(v["start"]), float(v["stop"]), int(v["num"]))]
        except KeyError as exc:
            raise ConfigError(f"t_grid needs start, stop and num (missing {exc})") from None
    if isinstance(v, (list, tuple)):
        return [float(t) for t in v]
    raise ConfigError("t_grid must be a list of numbers or {start, stop, num}")


KNOWN = {
    "alphabet_size", "transition", "psi", "log_a", "target", "t_grid", "alpha_points",
    "include_endpoints", "depth", "depths", "delta", "eps", "variant", "tol", "seed", "out",
    "plot", "cover_estimate", "corrupt_curve", "verify",
}


def config_from_dict(d: Mapping, overrides: Mapping | None = None) -> JobConfig:
    if not isinstance(d, Mapping):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(d) - KNOWN
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    d = {**d, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    sys = system_from_config(d)
    Z = target_from_config(d.get("target"))
    validate_target(sys, Z)
    try:
        cfg = JobConfig(system=sys, target=Z)
        if "t_grid" in d:
            cfg.t_grid = _grid(d["t_grid"])
        for key, conv in (("alpha_points", int), ("depth", int), ("delta", float), ("tol", float),
                          ("seed", int), ("include_endpoints", bool), ("plot", bool), ("cover_estimate", bool)):
            if key in d:
                setattr(cfg, key, conv(d[key]))
        if d.get("depths") is not None:
            cfg.depths = [int(v) for v in d["depths"]]
        if d.get("eps") is not None:
            cfg.eps = float(d["eps"])
        if "variant" in d:
            cfg.variant = str(d["variant"])
        if d.get("out") is not None:
            cfg.out = str(d["out"])
        if d.get("corrupt_curve") is not None:
            cc = d["corrupt_curve"]
            cfg.corrupt_curve = {"t": float(cc["t"]), "bump": float(cc.get("bump", 0.5))}
        if d.get("verify") is not None:
            cfg.verify = dict(d["verify"])
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    _check(cfg)
    return cfg


def _check(cfg: JobConfig) -> None:
    if cfg.depth < 1 or any(D < 1 for D in cfg.schedule):
        raise ConfigError("all depths must be >= 1")
    if not cfg.tol > 0:
        raise ConfigError("tol must be > 0")
    if not cfg.t_grid or not all(math.isfinite(t) for t in cfg.t_grid):
        raise ConfigError("t_grid must be a nonempty list of finite numbers")
    if cfg.alpha_points < 2:
        raise ConfigError("alpha_points must be >= 2")
    if not 0 < cfg.delta <= 1:
        raise ConfigError("delta must lie in (0, 1]")
    if cfg.eps is not None and not 0 < cfg.eps <= 1:
        raise ConfigError("eps must lie in (0, 1]")
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}")


def load_config(path: str | Path, overrides: Mapping | None = None) -> JobConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return config_from_dict(d, overrides)
