import math
import warnings

import numpy as np
import pytest

from endorev.model import (
    FluxEvaluationError,
    HighTemperature,
    InvalidParameterError,
    Linear,
    MachineConfig,
    Mode,
    PowerLaw,
    ThreeLevelMaser,
    flux,
)
from endorev.optimize import (
    BracketError,
    ConvergenceError,
    estimate_c1,
    maximize_cooling_rate,
    maximize_power,
    optimize,
    scalar_maximize,
)


def engine_slope(d, eta):
    # Independent route: stationarity of (x_h - (1-eta) c x_h) c^(d-1) (c - 1) in the
    # ratio c = x_c / x_h is the quadratic (d+1)(1-eta) c^2 - d(2-eta) c + (d-1) = 0;
    # the engine root is the larger one.
    a, b, c = (d + 1) * (1 - eta), -d * (2 - eta), d - 1
    return max(np.roots([a, b, c]).real)


class TestScalarMaximize:
    def test_parabola(self):
        x, f, _ = scalar_maximize(lambda x: -(x - 1) ** 2, (0.0, 2.0), tol=1e-10)
        assert x == pytest.approx(1.0, abs=1e-5)
        assert f == pytest.approx(0.0, abs=1e-10)

    def test_vertex(self):
        x, _, _ = scalar_maximize(lambda x: x * (0.1 - x), (0.0, 0.1))
        assert x == pytest.approx(0.05, abs=1e-7)

    def test_sine(self):
        x, f, iterations = scalar_maximize(math.sin, (0.0, math.pi), tol=1e-12)
        assert x == pytest.approx(math.pi / 2, abs=1e-6)
        assert f == pytest.approx(1.0, abs=1e-12)
        assert iterations < 200

    def test_deterministic(self):
        f = lambda x: -(x - 0.3) ** 4 + math.cos(x)
        assert scalar_maximize(f, (-1.0, 1.0)) == scalar_maximize(f, (-1.0, 1.0))

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            scalar_maximize(math.sin, (0.0, math.pi), tol=1e-12, max_iter=5)

    def test_non_finite_objective(self):
        with pytest.raises(FluxEvaluationError):
            scalar_maximize(lambda x: math.nan, (0.0, 1.0))

    def test_bad_bracket(self):
        with pytest.raises(InvalidParameterError):
            scalar_maximize(math.sin, (1.0, 0.0))


class TestClosedForms:
    @pytest.mark.parametrize("x_h", [1e-3, 0.1, 2.0])
    def test_linear_refrigerator_vertex(self, x_h):
        config = MachineConfig.symmetric(5.0, 10.0).with_x_h(x_h)
        r = maximize_cooling_rate(Linear(1.0), config)
        assert r.x_c_opt / r.x_h == pytest.approx(0.5, rel=1e-12)

    def test_powerlaw_three_quarters(self):
        config = MachineConfig.symmetric(5.0, 10.0)
        r = maximize_cooling_rate(PowerLaw(1.0, 3.0), config)
        assert r.x_c_opt / r.x_h == pytest.approx(0.75, rel=1e-12)

    def test_linear_engine(self):
        config = MachineConfig.symmetric(5.0, 10.0, 1.0)
        r = maximize_power(Linear(1.0), config)
        assert r.x_c_opt == pytest.approx(0.15, rel=1e-12)
        assert r.normalized_performance == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("d", [1.0, 1.5, 2.0, 3.0, 4.0])
    @pytest.mark.parametrize("eta", [0.01, 0.3, 0.5, 0.9])
    def test_powerlaw_engine_matches_quadratic_root(self, d, eta):
        config = MachineConfig.symmetric((1 - eta) * 10.0, 10.0, 1.0)
        r = maximize_power(PowerLaw(1.0, d), config)
        assert r.x_c_opt / r.x_h == pytest.approx(engine_slope(d, eta), rel=1e-10)


class TestResultInvariants:
    @pytest.mark.parametrize("model", [ThreeLevelMaser(), HighTemperature(), PowerLaw(1, 2), Linear()],
                             ids=lambda m: type(m).__name__)
    @pytest.mark.parametrize("x_h", [1e-3, 0.1, 3.0])
    def test_window_objective_and_stationarity(self, model, x_h):
        config = MachineConfig.symmetric(5.0, 10.0).with_x_h(x_h)
        fridge = maximize_cooling_rate(model, config)
        assert 0 < fridge.x_c_opt < config.x_h
        engine = maximize_power(model, config)
        assert config.x_h < engine.x_c_opt < config.x_c_max
        for r in (fridge, engine):
            assert r.stationarity_residual < 1e-6
            assert r.objective > 0
        t_c = config.t_c
        qc = lambda x: t_c * x * flux(model, config, x)
        assert fridge.objective >= max(qc(fridge.bracket[0]), qc(fridge.bracket[1]))
        power = lambda x: -(config.omega_h - t_c * x) * flux(model, config, x)
        assert engine.objective >= max(power(engine.bracket[0]), power(engine.bracket[1]))

    def test_objective_is_delivered_power(self):
        config = MachineConfig.symmetric(5.0, 10.0, 1.0)
        r = maximize_power(Linear(1.0), config)
        # P = (T_h x_h - T_c x_c) I at x_c = 0.15, I = -0.05
        assert r.objective == pytest.approx(0.0125, rel=1e-12)

    def test_refinement_consistency(self):
        config = MachineConfig.symmetric(5.0, 10.0)
        tol = 1e-4
        previous = maximize_cooling_rate(ThreeLevelMaser(), config, tol=tol).x_c_opt
        for _ in range(6):
            tol /= 2
            current = maximize_cooling_rate(ThreeLevelMaser(), config, tol=tol).x_c_opt
            assert abs(current - previous) <= 2 * tol * max(1.0, abs(previous))
            previous = current

    def test_maser_monotone_in_x_h(self):
        base = MachineConfig.symmetric(5.0, 10.0)
        grid = np.geomspace(1e-3, 50.0, 40)
        fridge = [maximize_cooling_rate(ThreeLevelMaser(), base.with_x_h(x)).x_c_opt for x in grid]
        engine = [maximize_power(ThreeLevelMaser(), base.with_x_h(x)).x_c_opt for x in grid]
        assert np.all(np.diff(fridge) >= 0)
        assert np.all(np.diff(engine) >= 0)

    def test_rejects_carnot_mode(self):
        with pytest.raises(InvalidParameterError):
            optimize(Linear(), MachineConfig.symmetric(5.0, 10.0), Mode.CARNOT)

    def test_no_positive_objective_is_bracket_failure(self):
        # Engine power underflows to zero everywhere at x_h = 1000.
        config = MachineConfig.symmetric(5.0, 10.0).with_x_h(1e3)
        with pytest.raises(BracketError):
            maximize_power(ThreeLevelMaser(), config)

    def test_multimodal_objective_detected(self):
        class Wiggly:
            def evaluate(self, config, x_c, x_h):
                return (x_h - x_c) * (2 + np.sin(40 * np.pi * x_c / x_h))

        with pytest.raises(BracketError, match="unimodal"):
            maximize_cooling_rate(Wiggly(), MachineConfig.symmetric(5.0, 10.0))


class TestEstimateC1:
    def test_linear_refrigerator(self):
        est = estimate_c1(Linear(), MachineConfig.symmetric(5.0, 10.0), Mode.REFRIGERATOR)
        assert est.c1 == pytest.approx(0.5, rel=1e-9)
        assert abs(est.c2) < 1e-6
        assert len(est.x_h_samples) == 10

    def test_linear_engine(self):
        est = estimate_c1(Linear(), MachineConfig.symmetric(5.0, 10.0), Mode.ENGINE)
        assert est.c1 == pytest.approx(1.5, rel=1e-9)

    def test_powerlaw_refrigerator(self):
        est = estimate_c1(PowerLaw(1.0, 2.0), MachineConfig.symmetric(5.0, 10.0), "refrigerator")
        assert est.c1 == pytest.approx(2 / 3, rel=1e-9)

    def test_maser_bounds(self):
        config = MachineConfig.symmetric(5.0, 10.0, d=2, coupling_ratio=0.01)
        fridge = estimate_c1(ThreeLevelMaser(), config, Mode.REFRIGERATOR)
        engine = estimate_c1(ThreeLevelMaser(), config, Mode.ENGINE)
        assert fridge.c1 <= 1 <= engine.c1
        assert fridge.c1 == pytest.approx(2 / 3, rel=0.01)

    def test_ill_conditioned_flagged(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            est = estimate_c1(Linear(), MachineConfig.symmetric(5.0, 10.0), Mode.REFRIGERATOR,
                              x_h_samples=[1e-3, 1e-3 * (1 + 1e-10)])
        assert est.ill_conditioned
        assert any("ill-conditioned" in str(w.message) for w in caught)

    def test_rejects_bad_samples(self):
        with pytest.raises(InvalidParameterError):
            estimate_c1(Linear(), MachineConfig.symmetric(5.0, 10.0), Mode.REFRIGERATOR, [0.1])
