"""One structured configuration for campaigns, shared by the CLI and service.

Defaults reproduce the reference experiment: the bistable magnet system on
x in [-8, 8], v in [-25, 25], a 50x50 candidate pool, spacing 0.07, top-5%
margin shortlist, alternating selection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .campaign import HalConfig
from .domain import StateDomain
from .dynamics import MagnetSystemParams, SimConfig


class ConfigError(ValueError):
    def __init__(self, message: str, field_name: str | None = None):
        super().__init__(message)
        self.field_name = field_name


@dataclass
class RunConfig:
    domain: StateDomain
    system: MagnetSystemParams
    sim: SimConfig
    hal: HalConfig
    evaluate: bool = False

    def to_dict(self) -> dict:
        return {
            "domain": {
                "lower": [float(v) for v in self.domain.lower],
                "upper": [float(v) for v in self.domain.upper],
            },
            "system": {
                "m": self.system.m, "c": self.system.c, "k": self.system.k,
                "alpha": self.system.alpha, "h": self.system.h, "b": self.system.b,
            },
            "sim": {
                "step_size": self.sim.step_size, "max_time": self.sim.max_time,
                "capture_tol": self.sim.capture_tol, "speed_tol": self.sim.speed_tol,
                "dwell_steps": self.sim.dwell_steps,
            },
            "hal": self.hal.to_dict(),
            "evaluate": self.evaluate,
        }


def _build_section(cls, raw: dict, section: str):
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad {section} section: {exc}", section) from exc
    except ValueError as exc:
        raise ConfigError(f"bad {section} section: {exc}", section) from exc


def parse_config(raw: dict | None) -> RunConfig:
    """Merge a (possibly partial) config mapping over the defaults."""
    raw = dict(raw or {})
    known = {"domain", "system", "sim", "hal", "evaluate"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}", sorted(unknown)[0])

    dom_raw = raw.get("domain") or {}
    lower = dom_raw.get("lower", [-8.0, -25.0])
    upper = dom_raw.get("upper", [8.0, 25.0])
    try:
        domain = StateDomain(lower=lower, upper=upper)
    except ValueError as exc:
        raise ConfigError(f"bad domain section: {exc}", "domain") from exc

    system = _build_section(MagnetSystemParams, raw.get("system") or {}, "system")
    sim = _build_section(SimConfig, raw.get("sim") or {}, "sim")
    hal = _build_section(HalConfig, raw.get("hal") or {}, "hal")
    evaluate = bool(raw.get("evaluate", False))
    return RunConfig(domain=domain, system=system, sim=sim, hal=hal, evaluate=evaluate)


def load_config_file(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return parse_config(raw)
