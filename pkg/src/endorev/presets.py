"""Named parameter sets ``fig2`` to ``fig9`` for standard sweeps.

Every preset has a refrigerator and an engine variant; ``mode`` picks one.
The grid ranges are choices: wide enough for the refrigerator optimum to
saturate (fig3) and for the engine power to pass its extremum (fig4).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .model import InvalidParameterError, MachineConfig, ThreeLevelMaser, temperature_from_carnot
from .sweep import SweepSpec, make_grid

__all__ = ["Preset", "PRESETS", "DEFAULT_MODES", "build_preset"]

T_C = 5.0
T_H = 10.0
OMEGA_H = 1.0

PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9")
DEFAULT_MODES = {name: "refrigerator" for name in PRESETS}
DEFAULT_MODES["fig4"] = "engine"

# Engine power underflows beyond x_h ~ 700, so the engine grids stop earlier.
_X_H_GRID = {"refrigerator": make_grid(1e-3, 1e3, 200), "engine": make_grid(1e-3, 1e2, 200)}
_SMALL_X_H_GRID = make_grid(1e-3, 10.0, 200)
_FLUX_X_H_GRID = make_grid(1e-3, 1.0, 200)
_CARNOT_GRID = {"refrigerator": ("cop_c", make_grid(0.2, 20.0, 100, "linear")),
                "engine": ("eta_c", make_grid(0.0099, 0.99, 100, "linear"))}


@dataclass(frozen=True)
class Preset:
    name: str
    mode: str
    specs: Tuple[SweepSpec, ...]


def _base(d: int = 3, coupling_ratio: float = 1.0, t_c: float = T_C) -> MachineConfig:
    return MachineConfig.symmetric(t_c, T_H, OMEGA_H, d, coupling_ratio)


def build_preset(name: str, mode: Optional[str] = None, tol: Optional[float] = None) -> Preset:
    """Sweep specs for the named figure preset."""
    if name not in PRESETS:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    mode = mode or DEFAULT_MODES[name]
    if mode not in ("refrigerator", "engine"):
        raise InvalidParameterError(f"preset mode must be refrigerator or engine, got {mode!r}")
    fridge = mode == "refrigerator"
    extra = {} if tol is None else {"tol": tol}
    maser = ThreeLevelMaser()

    if name == "fig2":
        config = _base()
        hi = config.x_c_max
        specs = [SweepSpec(maser, config, "x_c", make_grid(hi / 200, hi, 200, "linear"),
                           mode=mode, **extra)]
    elif name in ("fig3", "fig4"):
        if name == "fig3":
            outputs = (("x_h", "x_c_opt", "q_c_opt", "cop", "cop_norm") if fridge
                       else ("x_h", "x_c_opt", "power_opt", "eta", "eta_norm"))
        else:
            outputs = ("x_h", "x_c_opt", "q_c_opt") if fridge else ("x_h", "x_c_opt", "power_opt")
        specs = [SweepSpec(maser, _base(), "x_h", _X_H_GRID[mode], mode=mode,
                           outputs=outputs, **extra)]
    elif name in ("fig5", "fig6"):
        figures = (0.05, 19.0) if fridge else (0.05, 0.95)
        key = "cop_c" if fridge else "eta_c"
        if name == "fig5":
            outputs = ("x_h", "x_c_opt", "cop") if fridge else ("x_h", "x_c_opt", "eta")
        else:
            outputs = ("x_h", "x_c_opt", "cop_norm") if fridge else ("x_h", "x_c_opt", "eta_norm")
        specs = [SweepSpec(maser, _base(t_c=temperature_from_carnot(T_H, **{key: value})),
                           "x_h", _SMALL_X_H_GRID, mode=mode, outputs=outputs,
                           label=f"{key}={value:g}", **extra)
                 for value in figures]
    elif name == "fig7":
        specs = [SweepSpec(maser, _base(d=d), "x_h", _FLUX_X_H_GRID, mode=mode,
                           outputs=("x_h", "x_c_opt", "flux_opt"), label=f"d={d}", **extra)
                 for d in (1, 2, 3)]
    else:
        ratio = 1.0 if name == "fig8" else 0.01
        variable, grid = _CARNOT_GRID[mode]
        norm = "cop_norm" if fridge else "eta_norm"
        specs = [SweepSpec(maser, _base(d=d, coupling_ratio=ratio), variable, grid, mode=mode,
                           outputs=(variable, "x_c_opt", norm, f"{norm}_analytic", "abs_dev",
                                    "rel_dev"),
                           label=f"d={d}", **extra)
                 for d in (1, 2, 3)]
    return Preset(name, mode, tuple(specs))
