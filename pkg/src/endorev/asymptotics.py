"""Closed-form small-force predictions for optimized machines.

For a flux of the form ``I0 * x_c**(d-1) * (x_h - x_c)`` the optimal cold
force is exactly proportional to ``x_h``, so the slope ``c1`` and the
normalized performance follow in closed form. These serve as oracles for the
numerical optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy.special import lambertw

from .model import (
    HighTemperature,
    InvalidParameterError,
    MachineConfig,
    Mode,
)

__all__ = [
    "AsymptoticPrediction",
    "curzon_ahlborn",
    "linear_predictions",
    "powerlaw_refrigerator",
    "powerlaw_engine",
    "lambert_w0",
    "saturation_force",
    "refrigerator_saturation",
    "high_temp_flux",
]

_BRANCH_POINT = -math.exp(-1.0)


@dataclass(frozen=True)
class AsymptoticPrediction:
    mode: Mode
    d: float
    carnot_figure: float
    c1: float
    normalized_performance: float


def curzon_ahlborn(eta_c: float) -> float:
    """Curzon-Ahlborn efficiency ``1 - sqrt(1 - eta_C)``."""
    if not 0 <= eta_c < 1:
        raise InvalidParameterError(f"eta_c must lie in [0, 1), got {eta_c!r}")
    # -expm1(log1p(-eta)/2) avoids the cancellation in 1 - sqrt(1 - eta).
    return -math.expm1(0.5 * math.log1p(-eta_c))


def _check_d(d: float) -> float:
    if not (math.isfinite(d) and d >= 1):
        raise InvalidParameterError(f"exponent d must be >= 1, got {d!r}")
    return float(d)


def powerlaw_refrigerator(d: float, cop_c: float) -> AsymptoticPrediction:
    """Optimal slope ``d/(d+1)`` and normalized COP ``d/(d+1+eps_C)``."""
    d = _check_d(d)
    if not (cop_c >= 0 and math.isfinite(cop_c)):
        raise InvalidParameterError(f"cop_c must be >= 0, got {cop_c!r}")
    return AsymptoticPrediction(Mode.REFRIGERATOR, d, cop_c, d / (d + 1.0),
                                d / (d + 1.0 + cop_c))


def powerlaw_engine(d: float, eta_c: float) -> AsymptoticPrediction:
    """Optimal slope and normalized efficiency at maximum power.

    With ``S = sqrt(d**2 eta**2 - 4 eta + 4)`` the normalized efficiency
    ``(2 + d eta - S) / (2 (d+1) eta)`` is evaluated in the rationalized form
    ``2 / (2 + d eta + S)``, which is free of cancellation and gives the
    ``eta -> 0`` limit of 1/2 directly.
    """
    d = _check_d(d)
    if not 0 <= eta_c < 1:
        raise InvalidParameterError(f"eta_c must lie in [0, 1), got {eta_c!r}")
    root = math.sqrt(d * d * eta_c * eta_c - 4.0 * eta_c + 4.0)
    c1 = (d * (2.0 - eta_c) + root) / (2.0 * (d + 1.0) * (1.0 - eta_c))
    normalized = 2.0 / (2.0 + d * eta_c + root)
    return AsymptoticPrediction(Mode.ENGINE, d, eta_c, c1, normalized)


def linear_predictions(*, eta_c: Optional[float] = None,
                       cop_c: Optional[float] = None) -> AsymptoticPrediction:
    """Linear-response predictions for the engine (``eta_c``) or refrigerator (``cop_c``)."""
    if (eta_c is None) == (cop_c is None):
        raise InvalidParameterError("give exactly one of eta_c or cop_c")
    if cop_c is not None:
        if not (cop_c >= 0 and math.isfinite(cop_c)):
            raise InvalidParameterError(f"cop_c must be >= 0, got {cop_c!r}")
        return AsymptoticPrediction(Mode.REFRIGERATOR, 1.0, cop_c, 0.5, 1.0 / (2.0 + cop_c))
    if not 0 <= eta_c < 1:
        raise InvalidParameterError(f"eta_c must lie in [0, 1), got {eta_c!r}")
    return AsymptoticPrediction(Mode.ENGINE, 1.0, eta_c,
                                (2.0 - eta_c) / (2.0 * (1.0 - eta_c)), 0.5)


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``."""
    if not math.isfinite(x) or x < _BRANCH_POINT:
        raise InvalidParameterError(f"lambert_w0 needs x >= -1/e, got {x!r}")
    offset = math.e * x + 1.0
    if offset < 1e-8:
        # Branch-point series; the float -1/e sits within an ulp of the true
        # branch point, where the library routine can return NaN.
        p = math.sqrt(2.0 * max(offset, 0.0))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    return float(lambertw(x, 0).real)


def saturation_force(d: int) -> float:
    """Large-``x_h`` limit of the optimal refrigerator cold force.

    As the hot rate dominates, ``q_c`` becomes proportional to
    ``x**(d+1) / (exp(x) - 1)``, whose maximizer solves
    ``(d+1)(1 - exp(-x)) = x``, i.e. ``x = d + 1 + W0(-(d+1) exp(-(d+1)))``.
    The result depends on the cold-bath dimensionality only.
    """
    d = _check_d(d)
    return d + 1.0 + lambert_w0(-(d + 1.0) * math.exp(-(d + 1.0)))


def refrigerator_saturation(d: int, t_c: float) -> float:
    """Saturation force in the normalization ``5 (d+1+W0(...)) / T_c``.

    Equals :func:`saturation_force` at ``T_c = 5`` only; the optimizer finds
    the limit to be independent of ``T_c`` (see ``saturation_force``).
    """
    if not t_c > 0:
        raise InvalidParameterError(f"t_c must be > 0, got {t_c!r}")
    return 5.0 * saturation_force(d) / t_c


def high_temp_flux(config: MachineConfig, x_c: float, x_h: Optional[float] = None) -> float:
    """High-temperature maser flux ``rate_c (x_h - x_c) / (3 (1 + rate_c/rate_h))``."""
    x_h = config.x_h if x_h is None else x_h
    if not x_h > 0:
        raise InvalidParameterError(f"x_h must be > 0, got {x_h!r}")
    if not x_c >= 0:
        raise InvalidParameterError(f"x_c must be >= 0, got {x_c!r}")
    if x_c == 0 and config.cold.dimensionality >= 2:
        return 0.0
    return float(HighTemperature().evaluate(config, float(x_c), float(x_h)))
