"""Stationary currents of endoreversible two-bath machines.

Units are hbar = k_B = 1, so temperatures and frequencies share one energy
scale. The cold force ``x_c = omega_c / T_c`` is the free variable; the hot
force ``x_h = omega_h / T_h`` is fixed by the machine configuration.

Sign convention: heat currents and power are positive when they flow into
the working system, so a refrigerator has ``q_c > 0`` and ``power > 0`` and an
engine delivers work with ``power < 0``.

Flux evaluators accept complex ``x_c`` so the optimizer can take
complex-step derivatives; the public :func:`flux` entry point is real-only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

import numpy as np

__all__ = [
    "InvalidParameterError",
    "FluxEvaluationError",
    "Mode",
    "BathSpec",
    "MachineConfig",
    "ThreeLevelMaser",
    "HighTemperature",
    "PowerLaw",
    "Linear",
    "FluxModel",
    "OperatingPoint",
    "relaxation_rate",
    "flux",
    "operating_point",
    "classify_mode",
    "efficiency",
    "cop",
    "carnot_figures",
    "temperature_from_carnot",
]


class InvalidParameterError(ValueError):
    """A physical parameter or force lies outside its admissible range."""


class FluxEvaluationError(ArithmeticError):
    """The flux could not be evaluated to a finite number."""


class Mode(str, enum.Enum):
    REFRIGERATOR = "refrigerator"
    CARNOT = "carnot"
    ENGINE = "engine"
    DISSIPATOR = "dissipator"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BathSpec:
    """One bosonic reservoir.

    Parameters
    ----------
    temperature : float
        Bath temperature, strictly positive.
    dimensionality : int
        Physical dimensionality ``d`` of the bath, entering the spectral
        density as ``omega**d``.
    coupling : float
        Rate prefactor ``gamma``; zero decouples the bath.
    """

    temperature: float
    dimensionality: int = 3
    coupling: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise InvalidParameterError(
                f"temperature must be > 0, got {self.temperature!r}")
        if int(self.dimensionality) != self.dimensionality or self.dimensionality < 1:
            raise InvalidParameterError(
                f"dimensionality must be an integer >= 1, got {self.dimensionality!r}")
        if not (math.isfinite(self.coupling) and self.coupling >= 0):
            raise InvalidParameterError(
                f"coupling must be >= 0, got {self.coupling!r}")
        object.__setattr__(self, "dimensionality", int(self.dimensionality))


@dataclass(frozen=True)
class MachineConfig:
    """Cold bath, hot bath and hot transition frequency of a machine."""

    cold: BathSpec
    hot: BathSpec
    omega_h: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.omega_h) and self.omega_h > 0):
            raise InvalidParameterError(f"omega_h must be > 0, got {self.omega_h!r}")
        if not self.hot.temperature > self.cold.temperature:
            raise InvalidParameterError(
                "t_h must exceed t_c "
                f"(got t_c={self.cold.temperature!r}, t_h={self.hot.temperature!r})")

    @classmethod
    def symmetric(cls, t_c: float, t_h: float, omega_h: float = 1.0, d: int = 3,
                  coupling_ratio: float = 1.0) -> "MachineConfig":
        """Equal bath dimensionalities, ``gamma_h = 1`` and ``gamma_c = coupling_ratio``."""
        return cls(BathSpec(t_c, d, coupling_ratio), BathSpec(t_h, d, 1.0), omega_h)

    @property
    def t_c(self) -> float:
        return self.cold.temperature

    @property
    def t_h(self) -> float:
        return self.hot.temperature

    @property
    def x_h(self) -> float:
        return self.omega_h / self.hot.temperature

    @property
    def x_c_max(self) -> float:
        """Cold force at which ``omega_c = omega_h``: upper edge of the engine window."""
        return self.omega_h / self.cold.temperature

    @property
    def eta_carnot(self) -> float:
        return 1.0 - self.cold.temperature / self.hot.temperature

    @property
    def cop_carnot(self) -> float:
        return self.cold.temperature / (self.hot.temperature - self.cold.temperature)

    def with_x_h(self, x_h: float) -> "MachineConfig":
        """Same baths, hot frequency chosen so the hot force equals ``x_h``."""
        return replace(self, omega_h=x_h * self.hot.temperature)

    def with_cold_temperature(self, t_c: float) -> "MachineConfig":
        return replace(self, cold=replace(self.cold, temperature=t_c))


def _occupation_factor(x):
    # 1 + N = 1 / (1 - e^{-x}); stays finite for large x, ~1/x for small x.
    return -1.0 / np.expm1(-x)


def _rate(bath: BathSpec, omega):
    return bath.coupling * omega ** bath.dimensionality * _occupation_factor(
        omega / bath.temperature)


def relaxation_rate(bath: BathSpec, omega: float) -> float:
    """Bosonic relaxation rate ``gamma * omega**d * (1 + N(omega))``.

    ``N`` is the Bose-Einstein occupation at the bath temperature. At
    ``omega = 0`` the analytic limit is returned: ``gamma * T`` for ``d = 1``
    and zero for ``d >= 2``.
    """
    if not omega >= 0:
        raise InvalidParameterError(f"omega must be >= 0, got {omega!r}")
    if omega == 0:
        return bath.coupling * bath.temperature if bath.dimensionality == 1 else 0.0
    return float(_rate(bath, omega))


def _boltzmann_difference(x_c, x_h):
    # e^{-x_c} - e^{-x_h} without cancellation near x_c = x_h and without
    # inf * 0 when one exponential underflows.
    if np.real(x_c) <= x_h:
        return -np.exp(-x_c) * np.expm1(x_c - x_h)
    return np.exp(-x_h) * np.expm1(x_h - x_c)


def _combine_rates(rate_c, rate_h, drive, weight_c, weight_h, what):
    """``rate_h*rate_c*drive / (rate_h*weight_h + rate_c*weight_c)`` in harmonic form."""
    if rate_c == 0 or rate_h == 0:
        raise FluxEvaluationError(
            f"{what}: relaxation rate vanished "
            f"(rate_c={complex(rate_c).real!r}, rate_h={complex(rate_h).real!r}); "
            "denominator underflow or zero coupling")
    value = drive / (weight_h / rate_c + weight_c / rate_h)
    if not np.isfinite(value):
        raise FluxEvaluationError(f"{what}: non-finite flux")
    return value


@dataclass(frozen=True)
class ThreeLevelMaser:
    """Weak-driving stationary flux of the three-level maser."""

    def evaluate(self, config: MachineConfig, x_c, x_h: float):
        omega_c = x_c * config.cold.temperature
        omega_h = x_h * config.hot.temperature
        rate_c = _rate(config.cold, omega_c)
        rate_h = _rate(config.hot, omega_h)
        return _combine_rates(
            rate_c, rate_h, _boltzmann_difference(x_c, x_h),
            1.0 + 2.0 * np.exp(-x_c), 1.0 + 2.0 * np.exp(-x_h), "maser")


@dataclass(frozen=True)
class HighTemperature:
    """Leading high-temperature form of the maser flux.

    Both rates use their small-force limit ``gamma * x**(d-1) * T**d`` and the
    Boltzmann factors are expanded to first order, giving
    ``rate_c (x_h - x_c) / (3 (1 + rate_c / rate_h))``. The ``x_c`` dependence
    of the denominator is kept.
    """

    def evaluate(self, config: MachineConfig, x_c, x_h: float):
        if x_h <= 0:
            raise InvalidParameterError(f"x_h must be > 0, got {x_h!r}")
        cold, hot = config.cold, config.hot
        rate_c = cold.coupling * x_c ** (cold.dimensionality - 1) * cold.temperature ** cold.dimensionality
        rate_h = hot.coupling * x_h ** (hot.dimensionality - 1) * hot.temperature ** hot.dimensionality
        return _combine_rates(rate_c, rate_h, x_h - x_c, 3.0, 3.0, "high-temperature")


@dataclass(frozen=True)
class PowerLaw:
    """Model flux ``prefactor * x_c**(exponent - 1) * (x_h - x_c)``."""

    prefactor: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.prefactor) and self.prefactor > 0):
            raise InvalidParameterError(f"prefactor must be > 0, got {self.prefactor!r}")
        if not (math.isfinite(self.exponent) and self.exponent >= 1):
            raise InvalidParameterError(f"exponent d must be >= 1, got {self.exponent!r}")

    def evaluate(self, config: MachineConfig, x_c, x_h: float):
        return self.prefactor * x_c ** (self.exponent - 1) * (x_h - x_c)


@dataclass(frozen=True)
class Linear:
    """Linear-response flux ``prefactor * (x_h - x_c)``."""

    prefactor: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.prefactor) and self.prefactor > 0):
            raise InvalidParameterError(f"prefactor must be > 0, got {self.prefactor!r}")

    def evaluate(self, config: MachineConfig, x_c, x_h: float):
        return self.prefactor * (x_h - x_c)


FluxModel = Union[ThreeLevelMaser, HighTemperature, PowerLaw, Linear]


def _check_force(x_c) -> float:
    if not (isinstance(x_c, (int, float, np.floating, np.integer)) and math.isfinite(x_c)
            and x_c > 0):
        raise InvalidParameterError(f"x_c must be a finite number > 0, got {x_c!r}")
    return float(x_c)


def flux(model: FluxModel, config: MachineConfig, x_c: float) -> float:
    """Flux ``I(x_c, x_h)`` for the configured hot force.

    Positive in the refrigerator window, zero at ``x_c == x_h`` and negative
    beyond it.

    Raises
    ------
    InvalidParameterError
        If ``x_c`` is not a positive finite number.
    FluxEvaluationError
        If the rates underflow or the result is not finite.
    """
    x_c = _check_force(x_c)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        value = model.evaluate(config, x_c, config.x_h)
    return float(value)


def classify_mode(config: MachineConfig, x_c: float) -> Mode:
    x_h = config.x_h
    if x_c < x_h:
        return Mode.REFRIGERATOR
    if x_c == x_h:
        return Mode.CARNOT
    if x_c < config.x_c_max:
        return Mode.ENGINE
    return Mode.DISSIPATOR


def efficiency(config: MachineConfig, x_c: float, x_h: Optional[float] = None) -> float:
    """Engine efficiency ``1 - (1 - eta_C) x_c / x_h``; defined for any positive forces."""
    x_h = config.x_h if x_h is None else x_h
    if not (x_c > 0 and x_h > 0):
        raise InvalidParameterError(f"forces must be > 0 (x_c={x_c!r}, x_h={x_h!r})")
    return 1.0 - (config.t_c / config.t_h) * (x_c / x_h)


def cop(config: MachineConfig, x_c: float, x_h: Optional[float] = None) -> float:
    """Refrigerator COP ``eps_C / ((1 + eps_C) x_h / x_c - eps_C)``."""
    x_h = config.x_h if x_h is None else x_h
    if not (x_c > 0 and x_h > 0):
        raise InvalidParameterError(f"forces must be > 0 (x_c={x_c!r}, x_h={x_h!r})")
    eps = config.cop_carnot
    denominator = (1.0 + eps) * (x_h / x_c) - eps
    if not denominator > 0:
        raise InvalidParameterError(
            f"COP undefined: degenerate denominator {denominator!r} at x_c={x_c!r}, x_h={x_h!r}")
    return eps / denominator


def carnot_figures(config: MachineConfig) -> Tuple[float, float]:
    """Carnot efficiency and Carnot COP, ``(1 - T_c/T_h, T_c/(T_h - T_c))``."""
    return config.eta_carnot, config.cop_carnot


def temperature_from_carnot(t_h: float, *, eta_c: Optional[float] = None,
                            cop_c: Optional[float] = None) -> float:
    """Cold temperature giving the requested Carnot efficiency or Carnot COP."""
    if not t_h > 0:
        raise InvalidParameterError(f"t_h must be > 0, got {t_h!r}")
    if (eta_c is None) == (cop_c is None):
        raise InvalidParameterError("give exactly one of eta_c or cop_c")
    if eta_c is not None:
        if not 0 <= eta_c < 1:
            raise InvalidParameterError(f"eta_c must lie in [0, 1), got {eta_c!r}")
        return (1.0 - eta_c) * t_h
    if not (cop_c > 0 and math.isfinite(cop_c)):
        raise InvalidParameterError(f"cop_c must be > 0, got {cop_c!r}")
    return t_h * cop_c / (1.0 + cop_c)


@dataclass(frozen=True)
class OperatingPoint:
    x_c: float
    x_h: float
    flux: float
    q_c: float
    q_h: float
    power: float
    entropy_rate: float
    mode: Mode
    efficiency: Optional[float] = None
    cop: Optional[float] = None


def operating_point(model: FluxModel, config: MachineConfig, x_c: float) -> OperatingPoint:
    """Currents, entropy production and performance at one cold force."""
    current = flux(model, config, x_c)
    x_c = float(x_c)
    x_h = config.x_h
    q_c = config.t_c * x_c * current
    q_h = -config.omega_h * current
    power = -(q_c + q_h)
    mode = classify_mode(config, x_c)
    eta = efficiency(config, x_c, x_h) if mode in (Mode.ENGINE, Mode.CARNOT) else None
    eps = cop(config, x_c, x_h) if mode in (Mode.REFRIGERATOR, Mode.CARNOT) else None
    return OperatingPoint(
        x_c=x_c, x_h=x_h, flux=current, q_c=q_c, q_h=q_h, power=power,
        entropy_rate=(x_h - x_c) * current, mode=mode, efficiency=eta, cop=eps)
