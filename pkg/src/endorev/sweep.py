"""Parameter sweeps over optimized machines and numeric-vs-closed-form reports."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from . import __version__
from .asymptotics import AsymptoticPrediction, powerlaw_engine, powerlaw_refrigerator
from .model import (
    FluxEvaluationError,
    FluxModel,
    HighTemperature,
    InvalidParameterError,
    Linear,
    MachineConfig,
    Mode,
    PowerLaw,
    ThreeLevelMaser,
    classify_mode,
    operating_point,
    temperature_from_carnot,
)
from .optimize import DEFAULT_TOL, OptimizationError, optimize

__all__ = [
    "VARIABLES",
    "SweepSpec",
    "SweepRow",
    "SweepFailure",
    "CurveComparison",
    "make_grid",
    "apply_value",
    "analytic_prediction",
    "run_sweep",
    "run_sweeps",
    "compare_numeric_analytic",
    "format_report",
    "columns_for",
    "write_csv",
    "format_number",
    "csv_text",
]

VARIABLES = ("x_h", "x_c", "eta_c", "cop_c", "d", "gamma_ratio")
MODES = ("refrigerator", "engine", "both")

_CLOSURE_RTOL = 1e-12


class SweepFailure(RuntimeError):
    """Every grid point of a sweep failed."""


def make_grid(lo: float, hi: float, n: int, scale: str = "log") -> Tuple[float, ...]:
    """``n`` points from ``lo`` to ``hi`` inclusive, linearly or geometrically spaced."""
    if n < 2:
        raise InvalidParameterError(f"grid_n must be >= 2, got {n!r}")
    if not lo < hi:
        raise InvalidParameterError(f"grid_lo must be < grid_hi, got {lo!r} >= {hi!r}")
    if scale == "log":
        if not lo > 0:
            raise InvalidParameterError(f"log grid needs grid_lo > 0, got {lo!r}")
        points = np.geomspace(lo, hi, n)
    elif scale == "linear":
        points = np.linspace(lo, hi, n)
    else:
        raise InvalidParameterError(f"grid_scale must be 'log' or 'linear', got {scale!r}")
    return tuple(float(p) for p in points)


@dataclass(frozen=True)
class SweepSpec:
    """One curve: a flux model and machine template swept along one variable.

    ``variable`` is one of :data:`VARIABLES`. Sweeping ``x_c`` evaluates
    operating points without optimization; every other variable optimizes at
    each grid point in ``mode`` (``refrigerator``, ``engine`` or ``both``).
    ``outputs`` restricts the CSV columns; ``None`` keeps all of them.
    """

    model: FluxModel
    config: MachineConfig
    variable: str
    grid: Tuple[float, ...]
    mode: str = "refrigerator"
    outputs: Optional[Tuple[str, ...]] = None
    label: str = ""
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        if self.variable not in VARIABLES:
            raise InvalidParameterError(
                f"swept variable must be one of {VARIABLES}, got {self.variable!r}")
        if self.mode not in MODES:
            raise InvalidParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if len(self.grid) < 2:
            raise InvalidParameterError("grid needs at least 2 points")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise InvalidParameterError("grid must be strictly increasing")
        if self.variable == "cop_c" and self.mode != "refrigerator":
            raise InvalidParameterError("cop_c sweeps are refrigerator-only")
        if self.variable == "eta_c" and self.mode != "engine":
            raise InvalidParameterError("eta_c sweeps are engine-only")
        if self.variable == "d" and isinstance(self.model, Linear):
            raise InvalidParameterError("the linear flux has no exponent to sweep")
        if self.outputs is not None:
            known = {name for name, _ in columns_for(self.variable, self.mode)}
            unknown = [c for c in self.outputs if c not in known and c != "curve"]
            if unknown:
                raise InvalidParameterError(
                    f"unknown output column(s) {unknown} for a {self.variable} sweep")

    @property
    def modes(self) -> Tuple[Mode, ...]:
        if self.mode == "both":
            return (Mode.REFRIGERATOR, Mode.ENGINE)
        return (Mode(self.mode),)


@dataclass(frozen=True)
class SweepRow:
    """One grid point (and mode) of a sweep.

    For optimization sweeps ``x_c`` and the currents refer to the optimum;
    for ``x_c`` sweeps they refer to the evaluated point. ``power`` keeps the
    into-the-system sign, so it is negative for an engine.
    """

    curve: str
    index: int
    value: float
    mode: Optional[Mode] = None
    x_h: Optional[float] = None
    x_c: Optional[float] = None
    omega_c: Optional[float] = None
    flux: Optional[float] = None
    q_c: Optional[float] = None
    q_h: Optional[float] = None
    power: Optional[float] = None
    entropy_rate: Optional[float] = None
    performance: Optional[float] = None
    normalized: Optional[float] = None
    analytic: Optional[float] = None
    abs_dev: Optional[float] = None
    rel_dev: Optional[float] = None
    iterations: Optional[int] = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def apply_value(spec: SweepSpec, value: float) -> Tuple[FluxModel, MachineConfig]:
    """Model and machine with the swept variable set to ``value``."""
    model, config = spec.model, spec.config
    var = spec.variable
    if var == "x_h":
        config = config.with_x_h(value)
    elif var == "eta_c":
        config = config.with_cold_temperature(temperature_from_carnot(config.t_h, eta_c=value))
    elif var == "cop_c":
        config = config.with_cold_temperature(temperature_from_carnot(config.t_h, cop_c=value))
    elif var == "gamma_ratio":
        if not value >= 0:
            raise InvalidParameterError(f"gamma ratio must be >= 0, got {value!r}")
        config = replace(config, cold=replace(config.cold,
                                              coupling=value * config.hot.coupling))
    elif var == "d":
        if isinstance(model, PowerLaw):
            model = replace(model, exponent=value)
        else:
            if value != int(value):
                raise InvalidParameterError(f"bath dimensionality must be integer, got {value!r}")
            config = replace(config, cold=replace(config.cold, dimensionality=int(value)),
                             hot=replace(config.hot, dimensionality=int(value)))
    return model, config


def analytic_prediction(model: FluxModel, config: MachineConfig,
                        mode: Mode) -> Optional[AsymptoticPrediction]:
    """Small-force closed form matching ``model``.

    Exact for the model fluxes; for the maser and its high-temperature form
    the power-law prediction with ``d = d_c`` applies at small forces.
    """
    if isinstance(model, Linear):
        d = 1.0
    elif isinstance(model, PowerLaw):
        d = model.exponent
    elif isinstance(model, (ThreeLevelMaser, HighTemperature)):
        d = float(config.cold.dimensionality)
    else:
        return None
    if mode is Mode.REFRIGERATOR:
        return powerlaw_refrigerator(d, config.cop_carnot)
    return powerlaw_engine(d, config.eta_carnot)


def _check_invariants(point, config: MachineConfig, mode: Optional[Mode]) -> str:
    scale = max(abs(point.q_c), abs(point.q_h), abs(point.power))
    if abs(point.q_c + point.q_h + point.power) > _CLOSURE_RTOL * scale:
        return "invariant violated: energy closure"
    if point.entropy_rate < 0:
        return "invariant violated: negative entropy production"
    if mode is not None and classify_mode(config, point.x_c) is not mode:
        return "invariant violated: optimum outside its mode window"
    return ""


def _evaluate_point(spec: SweepSpec, index: int) -> List[SweepRow]:
    value = spec.grid[index]
    base = dict(curve=spec.label, index=index, value=value)
    try:
        model, config = apply_value(spec, value)
    except InvalidParameterError as exc:
        return [SweepRow(**base, mode=m, error=str(exc)) for m in spec.modes]

    if spec.variable == "x_c":
        try:
            pt = operating_point(model, config, value)
        except (InvalidParameterError, FluxEvaluationError) as exc:
            return [SweepRow(**base, error=str(exc))]
        perf = pt.efficiency if pt.mode is Mode.ENGINE else pt.cop
        return [SweepRow(**base, mode=pt.mode, x_h=pt.x_h, x_c=pt.x_c,
                         omega_c=pt.x_c * config.t_c, flux=pt.flux, q_c=pt.q_c, q_h=pt.q_h,
                         power=pt.power, entropy_rate=pt.entropy_rate, performance=perf,
                         error=_check_invariants(pt, config, None))]

    rows = []
    for mode in spec.modes:
        try:
            result = optimize(model, config, mode, tol=spec.tol)
            pt = operating_point(model, config, result.x_c_opt)
        except (InvalidParameterError, FluxEvaluationError, OptimizationError) as exc:
            rows.append(SweepRow(**base, mode=mode, error=f"{type(exc).__name__}: {exc}"))
            continue
        prediction = analytic_prediction(model, config, mode)
        analytic = abs_dev = rel_dev = None
        if prediction is not None:
            analytic = prediction.normalized_performance
            abs_dev = abs(result.normalized_performance - analytic)
            rel_dev = abs_dev / abs(analytic)
        rows.append(SweepRow(
            **base, mode=mode, x_h=result.x_h, x_c=result.x_c_opt,
            omega_c=result.x_c_opt * config.t_c, flux=pt.flux, q_c=pt.q_c, q_h=pt.q_h,
            power=pt.power, entropy_rate=pt.entropy_rate, performance=result.performance,
            normalized=result.normalized_performance, analytic=analytic, abs_dev=abs_dev,
            rel_dev=rel_dev, iterations=result.iterations,
            error=_check_invariants(pt, config, mode)))
    return rows


def _evaluate_task(task):
    spec, index = task
    return _evaluate_point(spec, index)


def run_sweeps(specs: Sequence[SweepSpec], workers: Optional[int] = None) -> List[SweepRow]:
    """Evaluate several curves; rows come back in (curve, grid index, mode) order.

    Raises
    ------
    SweepFailure
        If every point of some curve failed.
    """
    tasks = [(spec, i) for spec in specs for i in range(len(spec.grid))]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        chunks = [_evaluate_task(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    for spec in specs:
        curve = [r for r in rows if r.curve == spec.label]
        if curve and not any(r.ok for r in curve):
            raise SweepFailure(
                f"every point of sweep {spec.label or spec.variable!r} failed; "
                f"first error: {curve[0].error}")
    return rows


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> List[SweepRow]:
    return run_sweeps([spec], workers=workers)


@dataclass(frozen=True)
class CurveComparison:
    curve: str
    mode: Mode
    points: int
    failed: int
    max_rel_dev: float
    mean_rel_dev: float
    rtol: float

    @property
    def passed(self) -> bool:
        return self.points > 0 and self.max_rel_dev <= self.rtol


def compare_numeric_analytic(rows: Iterable[SweepRow], rtol: float = 0.02) -> List[CurveComparison]:
    """Max and mean relative deviation from the closed form, per curve and mode."""
    groups: Dict[Tuple[str, Mode], List[SweepRow]] = {}
    for row in rows:
        if row.mode not in (Mode.REFRIGERATOR, Mode.ENGINE):
            continue
        groups.setdefault((row.curve, row.mode), []).append(row)
    report = []
    for (curve, mode), members in groups.items():
        devs = [r.rel_dev for r in members if r.ok and r.rel_dev is not None]
        if not devs and all(r.ok for r in members):
            continue
        report.append(CurveComparison(
            curve=curve, mode=mode, points=len(devs),
            failed=sum(1 for r in members if not r.ok),
            max_rel_dev=max(devs) if devs else math.nan,
            mean_rel_dev=float(np.mean(devs)) if devs else math.nan, rtol=rtol))
    return report


def format_report(report: Sequence[CurveComparison]) -> str:
    lines = []
    for c in report:
        status = "PASS" if c.passed else "FAIL"
        lines.append(
            f"{status} curve={c.curve or '-'} mode={c.mode} points={c.points} "
            f"failed={c.failed} max_rel_dev={format_number(c.max_rel_dev)} "
            f"mean_rel_dev={format_number(c.mean_rel_dev)} rtol={format_number(c.rtol)}")
    return "\n".join(lines)


# (column, SweepRow attribute) per sweep kind.
_REFRIGERATOR_COLUMNS = [
    ("x_c_opt", "x_c"), ("q_c_opt", "q_c"), ("cop", "performance"), ("cop_norm", "normalized"),
    ("flux_opt", "flux"), ("cop_norm_analytic", "analytic"), ("abs_dev", "abs_dev"),
    ("rel_dev", "rel_dev"), ("iterations", "iterations"),
]
_ENGINE_COLUMNS = [
    ("x_c_opt", "x_c"), ("power_opt", "power"), ("eta", "performance"), ("eta_norm", "normalized"),
    ("flux_opt", "flux"), ("eta_norm_analytic", "analytic"), ("abs_dev", "abs_dev"),
    ("rel_dev", "rel_dev"), ("iterations", "iterations"),
]
_BOTH_COLUMNS = [
    ("mode", "mode"), ("x_c_opt", "x_c"), ("q_c_opt", "q_c"), ("power_opt", "power"),
    ("performance", "performance"), ("performance_norm", "normalized"), ("flux_opt", "flux"),
    ("analytic", "analytic"), ("abs_dev", "abs_dev"), ("rel_dev", "rel_dev"),
    ("iterations", "iterations"),
]
_EVALUATE_COLUMNS = [
    ("omega_c", "omega_c"), ("flux", "flux"), ("q_c", "q_c"), ("q_h", "q_h"), ("power", "power"),
    ("entropy_rate", "entropy_rate"), ("mode", "mode"), ("performance", "performance"),
]


def columns_for(variable: str, mode: str) -> List[Tuple[str, str]]:
    """Ordered (column, attribute) pairs of a sweep's CSV, excluding ``curve`` and ``error``."""
    if variable == "x_c":
        body = _EVALUATE_COLUMNS
    else:
        body = {"refrigerator": _REFRIGERATOR_COLUMNS, "engine": _ENGINE_COLUMNS,
                "both": _BOTH_COLUMNS}[mode]
    return [(variable, "value")] + body


def format_number(value) -> str:
    """Fixed 12-significant-digit scientific notation; ``None`` becomes empty."""
    if value is None:
        return ""
    if isinstance(value, Mode):
        return value.value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.11e}"


def write_csv(rows: Sequence[SweepRow], specs: Sequence[SweepSpec], stream: TextIO,
              header: Sequence[str] = ()) -> int:
    """Write ``rows`` as CSV to ``stream``; returns the number of data rows.

    ``header`` lines are emitted first, each prefixed with ``# ``. A ``curve``
    column leads when more than one curve is present; an ``error`` column
    always closes the row, and failed rows leave their numeric cells empty.
    """
    if not specs:
        raise InvalidParameterError("no sweep specs")
    variable, mode = specs[0].variable, specs[0].mode
    if any(s.variable != variable or s.mode != mode for s in specs):
        raise InvalidParameterError("all curves in one CSV must share variable and mode")
    columns = columns_for(variable, mode)
    if specs[0].outputs is not None:
        wanted = set(specs[0].outputs)
        columns = [c for c in columns if c[0] in wanted]
    if len(specs) > 1:
        columns = [("curve", "curve")] + columns
    columns = columns + [("error", "error")]

    for line in header:
        stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([name for name, _ in columns])
    for row in rows:
        cells = []
        for name, attr in columns:
            value = getattr(row, attr)
            if attr in ("curve", "error"):
                cells.append(value)
            elif attr == "value":
                cells.append(format_number(value))
            elif row.error and attr != "mode":
                cells.append("")
            else:
                cells.append(format_number(value))
        writer.writerow(cells)
    return len(rows)


def csv_text(rows: Sequence[SweepRow], specs: Sequence[SweepSpec],
             header: Sequence[str] = ()) -> str:
    buffer = io.StringIO()
    write_csv(rows, specs, buffer, header)
    return buffer.getvalue()


def default_header() -> List[str]:
    return [f"endorev {__version__}"]
