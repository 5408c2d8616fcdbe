"""Maximization of cooling rate and power output over the cold force.

The search is golden-section inside the mode window after a coarse grid
pre-scan. The golden-section answer is then polished by locating the zero of
the objective's derivative, taken by complex step, because a maximizer
located from function values alone is only resolved to about the square root
of machine precision.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .model import (
    FluxEvaluationError,
    FluxModel,
    InvalidParameterError,
    MachineConfig,
    Mode,
    cop,
    efficiency,
    flux,
)

log = logging.getLogger(__name__)

__all__ = [
    "OptimizationError",
    "BracketError",
    "ConvergenceError",
    "OptimizationResult",
    "C1Estimate",
    "scalar_maximize",
    "maximize_cooling_rate",
    "maximize_power",
    "optimize",
    "estimate_c1",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
    "DEFAULT_C1_SAMPLES",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
PRESCAN_POINTS = 64
# Bracket ends sit this fraction of x_h inside the window edges.
EDGE_OFFSET = 1e-9
DEFAULT_C1_SAMPLES = tuple(np.geomspace(1e-3, 1e-1, 10))

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_COMPLEX_STEP = 1e-30


class OptimizationError(ArithmeticError):
    pass


class BracketError(OptimizationError):
    """The objective has no usable interior maximum in the window."""


class ConvergenceError(OptimizationError):
    """The iteration cap was hit before the bracket reached the tolerance."""


@dataclass(frozen=True)
class OptimizationResult:
    x_c_opt: float
    x_h: float
    objective: float
    mode: Mode
    performance: float
    normalized_performance: float
    bracket: Tuple[float, float]
    iterations: int
    tolerance_achieved: float
    stationarity_residual: float

    @property
    def c1_ratio(self) -> float:
        return self.x_c_opt / self.x_h


@dataclass(frozen=True)
class C1Estimate:
    c1: float
    c2: float
    mode: Mode
    x_h_samples: Tuple[float, ...]
    x_c_opt: Tuple[float, ...]
    residual: float
    condition_number: float
    ill_conditioned: bool


def scalar_maximize(objective: Callable[[float], float], bracket: Tuple[float, float],
                    tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Golden-section search for the maximum of a unimodal function.

    Parameters
    ----------
    objective : callable
        Real function of one real variable.
    bracket : (float, float)
        Search interval ``(lo, hi)`` with ``lo < hi``.
    tol : float
        Stop once ``hi - lo <= tol * max(1, |x|)``.
    max_iter : int
        Iteration cap.

    Returns
    -------
    x, f, iterations : float, float, int
        Best abscissa, objective value there, and iterations used.

    Raises
    ------
    ConvergenceError
        If the cap is reached first.
    FluxEvaluationError
        If the objective returns a non-finite value.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise InvalidParameterError(f"bracket must satisfy lo < hi, got {bracket!r}")
    if not tol > 0:
        raise InvalidParameterError(f"tol must be > 0, got {tol!r}")

    def f(x):
        value = objective(x)
        if not math.isfinite(value):
            raise FluxEvaluationError(f"non-finite objective {value!r} at x={x!r}")
        return value

    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    iterations = 0
    while True:
        x_best, f_best = (c, fc) if fc >= fd else (d, fd)
        if hi - lo <= tol * max(1.0, abs(x_best)):
            return x_best, f_best, iterations
        if iterations >= max_iter:
            raise ConvergenceError(
                f"golden-section search did not reach tol={tol!r} in {max_iter} iterations "
                f"(bracket width {hi - lo!r})")
        iterations += 1
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)


def _objective(model: FluxModel, config: MachineConfig, mode: Mode):
    """Real objective, its complex-capable twin, and the stationarity residual."""
    x_h = config.x_h
    t_c = config.t_c
    omega_h = config.omega_h

    if mode is Mode.REFRIGERATOR:
        def raw(x):
            return t_c * x * model.evaluate(config, x, x_h)
    else:
        def raw(x):
            return (t_c * x - omega_h) * model.evaluate(config, x, x_h)

    def real(x):
        with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
            return float(np.real(raw(x)))

    def slope(x):
        with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
            return float(np.imag(raw(complex(x, _COMPLEX_STEP)))) / _COMPLEX_STEP

    def residual(x):
        # Central-difference check of the extremum condition, relative to |I|.
        h = 1e-5 * x
        current = flux(model, config, x)
        d_current = (flux(model, config, x + h) - flux(model, config, x - h)) / (2 * h)
        if mode is Mode.REFRIGERATOR:
            value = current + x * d_current
            scale = abs(current)
        else:
            ratio = t_c / config.t_h
            value = -ratio * current + (x_h - ratio * x) * d_current
            scale = ratio * abs(current)
        return abs(value) / scale if scale > 0 else math.inf

    return real, slope, residual


def _window(config: MachineConfig, mode: Mode) -> Tuple[float, float]:
    x_h = config.x_h
    delta = EDGE_OFFSET * x_h
    if mode is Mode.REFRIGERATOR:
        return delta, x_h - delta
    if mode is Mode.ENGINE:
        return x_h + delta, config.x_c_max - delta
    raise InvalidParameterError(f"mode must be refrigerator or engine, got {mode!r}")


def _prescan(objective, lo: float, hi: float) -> Tuple[float, float]:
    """Narrow the window to the grid cell pair around the coarse maximum."""
    grid = np.linspace(lo, hi, PRESCAN_POINTS)
    values = np.array([objective(x) for x in grid])
    if not np.all(np.isfinite(values)):
        bad = grid[~np.isfinite(values)][0]
        raise FluxEvaluationError(f"non-finite objective at x_c={bad!r}")
    peak = values.max()
    if not peak > 0:
        raise BracketError("objective is non-positive throughout the window")
    # Changes below the rounding floor count as ties.
    noise = 64 * np.finfo(float).eps * peak
    steps = np.diff(values)
    signs = np.where(steps > noise, 1, np.where(steps < -noise, -1, 0))
    signs = signs[signs != 0]
    if np.any(np.diff(signs) > 0):
        raise BracketError("objective is not unimodal over the window (pre-scan)")
    k = int(np.argmax(values))
    return grid[max(k - 1, 0)], grid[min(k + 1, PRESCAN_POINTS - 1)]


def _polish(slope, x0: float, lo: float, hi: float) -> float:
    """Zero of the derivative near ``x0``; falls back to ``x0`` if not bracketed."""
    width = max(1e-6 * abs(x0), 4 * np.finfo(float).eps * abs(x0))
    while width <= hi - lo:
        a, b = max(lo, x0 - width), min(hi, x0 + width)
        ga, gb = slope(a), slope(b)
        if ga == 0:
            return a
        if gb == 0:
            return b
        if ga > 0 > gb:
            return brentq(slope, a, b, xtol=2 * np.finfo(float).eps * abs(x0),
                          rtol=4 * np.finfo(float).eps, maxiter=200)
        width *= 8
    log.debug("derivative polish failed to bracket a root near %r", x0)
    return x0


def optimize(model: FluxModel, config: MachineConfig, mode: Mode,
             tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> OptimizationResult:
    """Maximize the cooling rate (refrigerator) or delivered power (engine).

    The returned ``objective`` is ``q_c`` for refrigerators and ``-power``,
    the power handed to the load, for engines; both are positive.
    """
    mode = Mode(mode)
    lo, hi = _window(config, mode)
    real, slope, residual = _objective(model, config, mode)

    a, b = _prescan(real, lo, hi)
    x_gs, f_gs, iterations = scalar_maximize(real, (a, b), tol=tol, max_iter=max_iter)
    x_opt = _polish(slope, x_gs, a, b)
    f_opt = real(x_opt)
    if f_gs - f_opt > 64 * np.finfo(float).eps * abs(f_gs):
        log.debug("derivative polish lost objective value; keeping golden-section point")
        x_opt, f_opt = x_gs, f_gs
    if not lo < x_opt < hi:
        raise BracketError(f"optimum {x_opt!r} escaped the window ({lo!r}, {hi!r})")
    if f_opt < max(real(lo), real(hi)):
        raise BracketError("optimum is below the objective at a window edge")

    x_h = config.x_h
    if mode is Mode.REFRIGERATOR:
        performance = cop(config, x_opt, x_h)
        normalized = performance / config.cop_carnot
    else:
        performance = efficiency(config, x_opt, x_h)
        normalized = performance / config.eta_carnot
    return OptimizationResult(
        x_c_opt=x_opt, x_h=x_h, objective=f_opt, mode=mode, performance=performance,
        normalized_performance=normalized, bracket=(lo, hi), iterations=iterations,
        tolerance_achieved=abs(x_opt - x_gs) / max(1.0, abs(x_opt)),
        stationarity_residual=residual(x_opt))


def maximize_cooling_rate(model: FluxModel, config: MachineConfig, tol: float = DEFAULT_TOL,
                          max_iter: int = DEFAULT_MAX_ITER) -> OptimizationResult:
    """Cold force in ``(0, x_h)`` maximizing ``q_c = T_c x_c I``."""
    return optimize(model, config, Mode.REFRIGERATOR, tol=tol, max_iter=max_iter)


def maximize_power(model: FluxModel, config: MachineConfig, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER) -> OptimizationResult:
    """Cold force in ``(x_h, x_h T_h / T_c)`` maximizing the delivered power."""
    return optimize(model, config, Mode.ENGINE, tol=tol, max_iter=max_iter)


def estimate_c1(model: FluxModel, config: MachineConfig, mode: Mode,
                x_h_samples: Optional[Sequence[float]] = None,
                tol: float = DEFAULT_TOL) -> C1Estimate:
    """Leading slope of the optimal cold force as ``x_h -> 0``.

    Optimizes at each sample (temperatures and couplings taken from
    ``config``, ``omega_h`` rescaled) and fits ``x_c = C1 x_h + C2 x_h**2`` by
    least squares. ``C2`` is a fit diagnostic only.
    """
    mode = Mode(mode)
    samples = tuple(float(x) for x in (DEFAULT_C1_SAMPLES if x_h_samples is None
                                       else x_h_samples))
    if len(samples) < 2 or not all(x > 0 for x in samples):
        raise InvalidParameterError("need at least two positive x_h samples")
    optima = tuple(optimize(model, config.with_x_h(x), mode, tol=tol).x_c_opt
                   for x in samples)

    xs = np.array(samples)
    design = np.column_stack([xs, xs**2])
    # Column scaling keeps the condition number about the fit, not the units.
    scale = np.abs(design).max(axis=0)
    (c1, c2), _, _, sv = np.linalg.lstsq(design / scale, np.array(optima), rcond=None)
    c1, c2 = c1 / scale[0], c2 / scale[1]
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    ill = condition > 1e8
    if ill:
        warnings.warn(f"ill-conditioned C1 fit (condition number {condition:.3g})",
                      RuntimeWarning, stacklevel=2)
    fitted = design @ np.array([c1, c2])
    return C1Estimate(
        c1=float(c1), c2=float(c2), mode=mode, x_h_samples=samples, x_c_opt=optima,
        residual=float(np.sqrt(np.mean((fitted - np.array(optima)) ** 2))),
        condition_number=condition, ill_conditioned=ill)
