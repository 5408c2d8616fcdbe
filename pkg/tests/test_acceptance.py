"""Acceptance criteria, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or as part of the full suite;
the summary lines are written straight to the terminal either way.
"""

import contextlib
import io
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from endorev.asymptotics import (
    curzon_ahlborn,
    linear_predictions,
    powerlaw_engine,
    powerlaw_refrigerator,
    refrigerator_saturation,
)
from endorev.cli import main
from endorev.model import (
    HighTemperature,
    Linear,
    MachineConfig,
    PowerLaw,
    ThreeLevelMaser,
    operating_point,
    temperature_from_carnot,
)
from endorev.optimize import maximize_cooling_rate, maximize_power
from endorev.presets import PRESETS, build_preset
from endorev.sweep import csv_text, run_sweeps

pytestmark = pytest.mark.acceptance

T_H = 10.0
ETAS = np.linspace(0.95 / 20, 0.95, 20)
COPS = np.linspace(19.0 / 20, 19.0, 20)


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if passed else 'FAIL'}: {title} ({detail})")
        assert passed, f"criterion {number} failed: {detail}"
    return emit


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_closed_form_equivalence(report):
    worst = 0.0
    checked = 0
    for model in [Linear(1.0)] + [PowerLaw(1.0, float(d)) for d in (1, 2, 3)]:
        d = model.exponent if isinstance(model, PowerLaw) else 1.0
        for eta in ETAS:
            config = MachineConfig.symmetric((1 - eta) * T_H, T_H, 1.0)
            r = maximize_power(model, config)
            p = linear_predictions(eta_c=eta) if isinstance(model, Linear) else powerlaw_engine(d, eta)
            worst = max(worst, rel(r.x_c_opt / r.x_h, p.c1),
                        rel(r.normalized_performance, p.normalized_performance))
            checked += 1
        for eps in COPS:
            config = MachineConfig.symmetric(temperature_from_carnot(T_H, cop_c=eps), T_H, 1.0)
            r = maximize_cooling_rate(model, config)
            p = linear_predictions(cop_c=eps) if isinstance(model, Linear) else powerlaw_refrigerator(d, eps)
            worst = max(worst, rel(r.x_c_opt / r.x_h, p.c1), rel(r.x_c_opt / r.x_h, d / (d + 1)),
                        rel(r.normalized_performance, p.normalized_performance))
            checked += 1
    report(1, "closed-form oracle equivalence", worst <= 1e-8,
           f"{checked} optima, max relative error {worst:.2e}, tolerance 1e-8")


def test_criterion_2_engine_half(report):
    values = []
    for d in (1, 2, 3):
        for ratio in (1.0, 0.01):
            for eta in (1e-3, 1e-2):
                config = MachineConfig.symmetric((1 - eta) * T_H, T_H, d=d, coupling_ratio=ratio)
                r = maximize_power(ThreeLevelMaser(), config.with_x_h(1e-3))
                values.append(r.normalized_performance)
    ok = all(0.48 <= v <= 0.52 for v in values)
    report(2, "engine normalized efficiency near 1/2", ok,
           f"{len(values)} cases in [{min(values):.6f}, {max(values):.6f}], band [0.48, 0.52]")


def test_criterion_3_refrigerator_plateau(report):
    worst = {1.0: 0.0, 0.01: 0.0}
    t_c = temperature_from_carnot(T_H, cop_c=1e-3)
    for d in (1, 2, 3):
        for ratio in worst:
            config = MachineConfig.symmetric(t_c, T_H, d=d, coupling_ratio=ratio).with_x_h(1e-3)
            r = maximize_cooling_rate(ThreeLevelMaser(), config)
            worst[ratio] = max(worst[ratio], rel(r.normalized_performance, d / (d + 1)))
    ok = worst[1.0] <= 0.02 and worst[0.01] <= 0.005
    report(3, "refrigerator plateau d/(d+1)", ok,
           f"max deviation {worst[1.0]:.2e} at ratio 1 (tol 2e-2), "
           f"{worst[0.01]:.2e} at ratio 0.01 (tol 5e-3)")


def test_criterion_4_lambert_limit(report):
    config = MachineConfig.symmetric(5.0, T_H, d=3).with_x_h(1e3)
    x_opt = maximize_cooling_rate(ThreeLevelMaser(), config).x_c_opt
    target = refrigerator_saturation(3, 5.0)
    dev = rel(x_opt, target)
    report(4, "saturation force", dev <= 0.01,
           f"x_c_opt {x_opt:.9f} vs {target:.9f}, relative deviation {dev:.2e}, tol 1e-2")


def _random_case(rng, variant):
    t_c = 10 ** rng.uniform(-1.3, 1.3)
    t_h = t_c * (1 + 10 ** rng.uniform(-3, 2))
    omega_h = 10 ** rng.uniform(-3, 2)
    cold_d, hot_d = (int(v) for v in rng.integers(1, 4, 2))
    config = MachineConfig.symmetric(t_c, t_h, omega_h, d=cold_d,
                                     coupling_ratio=10 ** rng.uniform(-2, 2))
    if variant in ("maser", "hight"):
        config = replace(config, hot=replace(config.hot, dimensionality=hot_d))
    x_c = config.x_c_max * 10 ** rng.uniform(-4, math.log10(3.0))
    if variant == "maser":
        model = ThreeLevelMaser()
    elif variant == "hight":
        model = HighTemperature()
    elif variant == "powerlaw":
        model = PowerLaw(10 ** rng.uniform(-2, 2), rng.uniform(1.0, 4.0))
    else:
        model = Linear(10 ** rng.uniform(-2, 2))
    return model, config, x_c


@pytest.mark.parametrize("variant", ["maser", "hight", "powerlaw", "linear"])
def test_criterion_5_conservation_and_second_law(report, variant):
    rng = np.random.default_rng(20261016)
    n = 10_000
    violations = 0
    for _ in range(n):
        model, config, x_c = _random_case(rng, variant)
        p = operating_point(model, config, x_c)
        scale = max(abs(p.q_c), abs(p.q_h), abs(p.power))
        closure = abs(p.q_c + p.q_h + p.power)
        # independent route: first law from frequencies, entropy from bath heat flows
        q_c = config.t_c * x_c * p.flux
        q_h = -config.omega_h * p.flux
        sigma = -(q_c / config.t_c + q_h / config.t_h)
        bad = (closure > 1e-12 * scale
               or abs(p.q_c - q_c) > 1e-12 * abs(q_c)
               or abs(p.q_h - q_h) > 1e-12 * abs(q_h)
               or p.entropy_rate < 0
               or sigma < -1e-12 * (abs(q_c / config.t_c) + abs(q_h / config.t_h)))
        violations += bad
    report(5, f"conservation and entropy ({variant})", violations == 0,
           f"{n} random inputs, {violations} violations")


def test_criterion_6_curzon_ahlborn_remainder(report):
    remainders = []
    for k in range(1, 5):
        eta = 10.0 ** -k
        remainders.append(abs(curzon_ahlborn(eta) - eta / 2 - eta**2 / 8) / eta**3)
    report(6, "Curzon-Ahlborn Taylor remainder", max(remainders) <= 1.0,
           "remainder / eta^3 = " + ", ".join(f"{r:.4f}" for r in remainders))


def test_criterion_7_figure_shapes(report):
    start = time.perf_counter()
    notes = []

    rows = run_sweeps(build_preset("fig3").specs)
    x_h = np.array([r.x_h for r in rows])
    x_opt = np.array([r.x_c for r in rows])
    monotone = bool(np.all(np.diff(x_opt) >= 0))
    last = x_h >= x_h[-1] / 10
    increase = x_opt[-1] / x_opt[last][0] - 1
    fig3 = monotone and increase < 1e-3
    notes.append(f"fig3 monotone={monotone} last-decade increase {increase:.2e}")

    rows = run_sweeps(build_preset("fig4").specs)
    power = np.array([r.power for r in rows])
    i_min = int(np.argmin(power))
    fig4 = 0 < i_min < len(power) - 1
    notes.append(f"fig4 minimum at index {i_min}/{len(power) - 1} (x_h={rows[i_min].x_h:.3g})")

    fig6 = True
    for mode in ("refrigerator", "engine"):
        preset = build_preset("fig6", mode)
        curves = []
        for spec in preset.specs:
            figure = spec.config.cop_carnot if mode == "refrigerator" else spec.config.eta_carnot
            curves.append((figure, np.array([r.normalized for r in run_sweeps([spec])])))
        curves.sort(key=lambda c: c[0])
        ordered = all(np.all(lo[1] > hi[1]) for lo, hi in zip(curves, curves[1:]))
        fig6 = fig6 and ordered
        notes.append(f"fig6 {mode} ordered={ordered}")

    elapsed = time.perf_counter() - start
    notes.append(f"{elapsed:.1f} s")
    report(7, "figure shapes", fig3 and fig4 and fig6 and elapsed < 60, "; ".join(notes))


def test_criterion_8_determinism(report, tmp_path):
    mismatched = []
    for name in PRESETS:
        for mode in ("refrigerator", "engine"):
            outputs = []
            for run in range(2):
                path = tmp_path / f"{name}-{mode}-{run}.csv"
                with contextlib.redirect_stdout(io.StringIO()):
                    code = main(["sweep", "--preset", name, "--mode", mode, "--out", str(path)])
                assert code == 0
                outputs.append(path.read_bytes())
            if outputs[0] != outputs[1]:
                mismatched.append(f"{name}/{mode}")
    specs = build_preset("fig7").specs
    if csv_text(run_sweeps(specs, workers=3), specs) != csv_text(run_sweeps(specs), specs):
        mismatched.append("fig7 parallel")
    report(8, "byte-identical reruns", not mismatched,
           f"{len(PRESETS) * 2} preset runs compared twice plus a parallel rerun; "
           f"mismatches: {', '.join(mismatched) or 'none'}")
