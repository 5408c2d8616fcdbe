"""Command line interface: ``endorev {evaluate,optimize,sweep,compare}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from typing import List, Optional, Sequence, Tuple

from . import __version__
from .config import FLUX_NAMES, RunConfig, load_config
from .model import FluxEvaluationError, InvalidParameterError, operating_point
from .optimize import DEFAULT_TOL, OptimizationError, optimize
from .presets import PRESETS, build_preset
from .sweep import (
    VARIABLES,
    SweepFailure,
    SweepSpec,
    compare_numeric_analytic,
    format_number,
    format_report,
    make_grid,
    run_sweeps,
    write_csv,
)

log = logging.getLogger("endorev")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _add_common(parser: argparse.ArgumentParser, sweeping: bool = False) -> None:
    parser.add_argument("--config", help="key = value run configuration file")
    parser.add_argument("--preset", choices=PRESETS, help="figure parameter preset")
    parser.add_argument("--mode", choices=("refrigerator", "engine", "both"))
    parser.add_argument("--flux", choices=FLUX_NAMES)
    parser.add_argument("--tol", type=float, help=f"relative optimizer tolerance (default {DEFAULT_TOL:g})")
    if sweeping:
        parser.add_argument("--out", help="CSV output path (default: config 'out' or stdout)")
        parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        parser.add_argument("--var", choices=[v for v in VARIABLES], default="x_h",
                            help="swept variable for config-driven sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="endorev",
        description="Endoreversible engines and refrigerators optimized over the cold force.")
    parser.add_argument("--version", action="version", version=f"endorev {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="currents and performance at one cold force")
    _add_common(p)
    p.add_argument("--x-c", dest="x_c", type=float, required=True, help="cold force x_c")

    p = sub.add_parser("optimize", help="optimal cold force for cooling rate or power")
    _add_common(p)

    p = sub.add_parser("sweep", help="optimize along a grid and write CSV")
    _add_common(p, sweeping=True)

    p = sub.add_parser("compare", help="sweep and report deviation from the closed forms")
    _add_common(p, sweeping=True)
    p.add_argument("--rtol", type=float, default=0.02,
                   help="relative deviation tolerance for PASS (default 0.02)")
    return parser


def _run_config(args) -> RunConfig:
    overrides = {"mode": args.mode, "flux": args.flux}
    if getattr(args, "out", None) is not None:
        overrides["out"] = args.out
    if args.config:
        return load_config(args.config, **overrides)
    return RunConfig(**{k: v for k, v in overrides.items() if v is not None})


def _print_fields(obj, skip: Sequence[str] = ()) -> None:
    for f in fields(obj):
        if f.name in skip:
            continue
        value = getattr(obj, f.name)
        if isinstance(value, tuple):
            text = " ".join(format_number(v) for v in value)
        elif value is None:
            text = "none"
        else:
            text = format_number(value)
        print(f"{f.name} = {text}")


def _model_and_machine(args):
    if args.preset:
        spec = build_preset(args.preset).specs[0]
        if args.flux:
            raise InvalidParameterError("--flux cannot be combined with --preset")
        return spec.model, spec.config, args.mode or "refrigerator"
    cfg = _run_config(args)
    return cfg.flux_model(), cfg.machine(), cfg.mode


def cmd_evaluate(args) -> int:
    model, machine, _ = _model_and_machine(args)
    if not args.x_c > 0:
        raise InvalidParameterError(f"x_c must be > 0, got {args.x_c!r}")
    _print_fields(operating_point(model, machine, args.x_c))
    return EXIT_OK


def cmd_optimize(args) -> int:
    model, machine, mode = _model_and_machine(args)
    modes = ("refrigerator", "engine") if mode == "both" else (mode,)
    for i, m in enumerate(modes):
        if i:
            print()
        result = optimize(model, machine, m, tol=args.tol or DEFAULT_TOL)
        _print_fields(result)
    return EXIT_OK


def _sweep_plan(args) -> Tuple[List[SweepSpec], List[str], Optional[str]]:
    """Specs, header lines and output path for ``sweep``/``compare``."""
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    header = [f"endorev {__version__}"]
    if args.preset:
        if args.config or args.flux:
            raise InvalidParameterError("--preset cannot be combined with --config or --flux")
        if args.var != "x_h":
            raise InvalidParameterError("--var cannot be combined with --preset")
        preset = build_preset(args.preset, args.mode, tol=tol)
        header.append(f"command: sweep --preset {preset.name} --mode {preset.mode} --tol {tol!r}")
        for spec in preset.specs:
            c = spec.config
            header.append(
                f"curve {spec.label or '-'}: variable={spec.variable} t_c={c.t_c!r} "
                f"t_h={c.t_h!r} omega_h={c.omega_h!r} d_c={c.cold.dimensionality} "
                f"d_h={c.hot.dimensionality} gamma_c={c.cold.coupling!r} "
                f"gamma_h={c.hot.coupling!r} grid={spec.grid[0]!r}..{spec.grid[-1]!r} "
                f"n={len(spec.grid)}")
        return list(preset.specs), header, args.out

    cfg = _run_config(args)
    grid = make_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_n, cfg.grid_scale)
    spec = SweepSpec(cfg.flux_model(), cfg.machine(), args.var, grid, mode=cfg.mode, tol=tol)
    header.append(f"command: sweep --var {args.var} --tol {tol!r}")
    header.extend(cfg.to_text().splitlines())
    return [spec], header, cfg.out


def _emit_csv(rows, specs, header, path: Optional[str]) -> None:
    if path is None or path == "-":
        write_csv(rows, specs, sys.stdout, header)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(rows, specs, fh, header)


def cmd_sweep(args) -> int:
    specs, header, path = _sweep_plan(args)
    try:
        rows = run_sweeps(specs, workers=args.workers)
    except SweepFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        _emit_csv(rows, specs, header, path)
    except OSError as exc:
        print(f"error: cannot write {path!r}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    summary = sys.stderr if path in (None, "-") else sys.stdout
    failed = sum(1 for r in rows if not r.ok)
    print(f"rows = {len(rows)}", file=summary)
    print(f"failed = {failed}", file=summary)
    report = format_report(compare_numeric_analytic(rows))
    if report:
        print(report, file=summary)
    return EXIT_OK


def cmd_compare(args) -> int:
    specs, header, path = _sweep_plan(args)
    try:
        rows = run_sweeps(specs, workers=args.workers)
    except SweepFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.out:
        try:
            _emit_csv(rows, specs, header, path)
        except OSError as exc:
            print(f"error: cannot write {path!r}: {exc}", file=sys.stderr)
            return EXIT_FAILURE
    report = compare_numeric_analytic(rows, rtol=args.rtol)
    print(format_report(report) if report else "no analytic predictions to compare")
    return EXIT_OK


COMMANDS = {"evaluate": cmd_evaluate, "optimize": cmd_optimize, "sweep": cmd_sweep,
            "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (InvalidParameterError, OSError) as exc:
        # OSError here comes from reading --config.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FluxEvaluationError, OptimizationError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
