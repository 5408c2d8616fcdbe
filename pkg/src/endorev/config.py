"""Flat ``key = value`` run configuration files."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

from .model import (
    BathSpec,
    FluxModel,
    HighTemperature,
    InvalidParameterError,
    Linear,
    MachineConfig,
    PowerLaw,
    ThreeLevelMaser,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "FLUX_NAMES", "KEYS"]

FLUX_NAMES = ("maser", "hight", "powerlaw", "linear")
KEYS = ("t_c", "t_h", "omega_h", "d_c", "d_h", "gamma_c", "gamma_h", "flux", "mode",
        "grid_lo", "grid_hi", "grid_n", "grid_scale", "out")


class ConfigError(InvalidParameterError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Machine, flux, mode and sweep grid for one CLI run.

    The power-law flux uses ``d_c`` as its exponent and a unit prefactor.
    """

    t_c: float = 5.0
    t_h: float = 10.0
    omega_h: float = 1.0
    d_c: int = 3
    d_h: int = 3
    gamma_c: float = 1.0
    gamma_h: float = 1.0
    flux: str = "maser"
    mode: str = "refrigerator"
    grid_lo: float = 1e-3
    grid_hi: float = 10.0
    grid_n: int = 200
    grid_scale: str = "log"
    out: Optional[str] = None

    def __post_init__(self):
        for key in ("t_c", "t_h", "omega_h", "gamma_c", "gamma_h"):
            value = getattr(self, key)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{key} must be > 0, got {value!r}")
        for key in ("d_c", "d_h"):
            value = getattr(self, key)
            if value != int(value) or value < 1:
                raise ConfigError(f"{key} must be an integer >= 1, got {value!r}")
        if not self.t_h > self.t_c:
            raise ConfigError(f"t_h must exceed t_c (got t_c={self.t_c!r}, t_h={self.t_h!r})")
        if self.flux not in FLUX_NAMES:
            raise ConfigError(f"flux must be one of {', '.join(FLUX_NAMES)}, got {self.flux!r}")
        if self.mode not in ("refrigerator", "engine", "both"):
            raise ConfigError(f"mode must be refrigerator, engine or both, got {self.mode!r}")
        if self.grid_n != int(self.grid_n) or self.grid_n < 2:
            raise ConfigError(f"grid_n must be an integer >= 2, got {self.grid_n!r}")
        if not self.grid_lo < self.grid_hi:
            raise ConfigError(f"grid_lo must be < grid_hi (got {self.grid_lo!r}, {self.grid_hi!r})")
        if self.grid_scale not in ("log", "linear"):
            raise ConfigError(f"grid_scale must be log or linear, got {self.grid_scale!r}")
        if self.grid_scale == "log" and not self.grid_lo > 0:
            raise ConfigError(f"grid_lo must be > 0 for a log grid, got {self.grid_lo!r}")

    def machine(self) -> MachineConfig:
        return MachineConfig(BathSpec(self.t_c, self.d_c, self.gamma_c),
                             BathSpec(self.t_h, self.d_h, self.gamma_h), self.omega_h)

    def flux_model(self) -> FluxModel:
        return {
            "maser": ThreeLevelMaser,
            "hight": HighTemperature,
            "powerlaw": lambda: PowerLaw(1.0, float(self.d_c)),
            "linear": Linear,
        }[self.flux]()

    def to_text(self, include_out: bool = False) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "out" and (not include_out or value is None):
                continue
            lines.append(f"{f.name} = {value!r}" if isinstance(value, float)
                         else f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


_FLOAT_KEYS = {"t_c", "t_h", "omega_h", "gamma_c", "gamma_h", "grid_lo", "grid_hi"}
_INT_KEYS = {"d_c", "d_h", "grid_n"}


def parse_config(text: str, **overrides) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Keyword ``overrides`` (ignored when ``None``) win over file values.
    Unknown or repeated keys and malformed values raise :class:`ConfigError`.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _INT_KEYS:
                number = float(value)
                if number != int(number):
                    raise ValueError
                values[key] = int(number)
            else:
                values[key] = value
        except ValueError:
            raise ConfigError(f"line {lineno}: invalid value {value!r} for {key!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def load_config(path: str, **overrides) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)
