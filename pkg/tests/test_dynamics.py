import math

import numpy as np
import pytest

from ..core.algebra.parser import parse_polynomial
from ..core.algebra.polynomial import PolynomialMap
from ..core.dynamics.integrators import integrate, iterate_map, reversed_field, step_map, step_rk4
from ..core.dynamics.simulation_service import SimulationDefaults, sample_attractor, write_trajectory_csv
from ..core.geometry.domain import AnnulusDomain, BoxDomain, SemialgebraicSet
from ..models.errors import DivergenceError, TrajectoryExitError
from ..models.models import DynamicalSystem, TimeKind

XY = ["x", "y"]
HENON = ["2/3*(1 + y) - 2.1*x^2", "0.45*x"]
VANDERPOL = ["2*y", "-0.8*x - 10*(x^2 - 0.21)*y"]


def field(expressions, variables) -> PolynomialMap:
    return PolynomialMap([parse_polynomial(e, variables) for e in expressions])


class TestIntegrators:
    def test_exponential_decay(self):
        x = integrate(field(["-x"], ["x"]), [1.0], 1e-3, 1000)
        assert x[0] == pytest.approx(math.exp(-1), abs=1e-6)

    def test_harmonic_oscillator_period(self):
        steps = 6283
        dt = 2 * math.pi / steps
        x = integrate(field(["y", "-x"], XY), [1.0, 0.0], dt, steps)
        np.testing.assert_allclose(x, [1.0, 0.0], atol=1e-6)

    @pytest.mark.slow
    def test_lorenz_stays_bounded(self):
        lorenz = field(["10*(y - x)", "x*(28 - z) - y", "x*y - 8/3*z"], ["x", "y", "z"])
        state = np.array([1.0, 1.0, 1.0])
        for _ in range(100_000):
            state = step_rk4(lorenz, state, 1e-3)
            assert np.max(np.abs(state)) < 60

    def test_step_rejects_non_positive_dt(self):
        with pytest.raises(ValueError):
            step_rk4(field(["-x"], ["x"]), [1.0], 0.0)

    def test_blow_up_is_reported(self):
        with pytest.raises(DivergenceError):
            integrate(field(["x^2"], ["x"]), [1.0], 0.5, 50)

    def test_reversed_field(self):
        f = field(["y", "-x"], XY)
        assert reversed_field(f) == field(["-y", "x"], XY)


class TestIterateMap:
    def test_henon_single_step(self):
        result = step_map(field(HENON, XY), [0.0, 0.0])
        np.testing.assert_allclose(result, [2 / 3, 0.0])

    def test_identity_sequence(self):
        sequence = iterate_map(PolynomialMap.identity(2), [0.3, -0.7], 5)
        assert len(sequence) == 6
        for state in sequence:
            np.testing.assert_array_equal(state, [0.3, -0.7])

    def test_henon_stays_in_unit_box(self):
        X = SemialgebraicSet.from_domain(BoxDomain((-1.0, -1.0), (1.0, 1.0)))
        sequence = iterate_map(field(HENON, XY), [0.1, 0.1], 10_000)
        after_burn_in = np.array(sequence[100:])
        assert after_burn_in.shape == (10_001 - 100, 2)
        assert X.contains_many(after_burn_in).all()

    def test_truncates_at_bounds(self):
        doubling = field(["2*x"], ["x"])
        sequence = iterate_map(doubling, [0.3], 10, bounds=lambda x: abs(x[0]) <= 1.0)
        assert [float(s[0]) for s in sequence] == [0.3, 0.6]

    def test_negative_steps(self):
        with pytest.raises(ValueError):
            iterate_map(PolynomialMap.identity(1), [0.0], -1)


class TestSampleAttractor:
    def test_henon_samples(self):
        system = DynamicalSystem.from_expressions(XY, HENON, TimeKind.DISCRETE, 0.05)
        X = SemialgebraicSet.from_domain(BoxDomain((-1.0, -1.0), (1.0, 1.0)))
        sample = sample_attractor(system, X, (0.1, 0.1), burn_in=1000, count=20_000)
        assert sample.count == 20_000
        assert sample.step == 1.0
        assert sample.times is None
        assert X.contains_many(sample.points).all()

    def test_stable_node_converges(self):
        system = DynamicalSystem.from_expressions(XY, ["-x", "-y"], TimeKind.CONTINUOUS, 1.0)
        X = SemialgebraicSet.from_domain(BoxDomain((-1.0, -1.0), (1.0, 1.0)))
        sample = sample_attractor(system, X, (0.5, 0.5), burn_in=20_000, count=100, dt=1e-3)
        assert np.max(np.abs(sample.points)) < 1e-6
        assert sample.times[0] == pytest.approx(20.001)

    @pytest.mark.slow
    def test_vanderpol_limit_cycle(self):
        system = DynamicalSystem.from_expressions(XY, VANDERPOL, TimeKind.CONTINUOUS, 0.05)
        X = SemialgebraicSet.from_domain(AnnulusDomain((0.0, 0.0), 0.4, 2.0))
        sample = sample_attractor(system, X, (1.5, 0.0), burn_in=50_000, count=10_000, stride=10)
        radius = np.linalg.norm(sample.points, axis=1)
        assert radius.min() > 0.4
        assert sample.times[-1] == pytest.approx(150.0)

    def test_initial_state_outside_X(self):
        system = DynamicalSystem.from_expressions(XY, HENON, TimeKind.DISCRETE, 0.05)
        X = SemialgebraicSet.from_domain(AnnulusDomain((0.0, 0.0), 0.4, 2.0))
        with pytest.raises(TrajectoryExitError):
            sample_attractor(system, X, (0.0, 0.0), burn_in=10, count=10)

    def test_leaving_X_is_an_error(self):
        system = DynamicalSystem.from_expressions(["x"], ["x"], TimeKind.CONTINUOUS, 1.0)
        X = SemialgebraicSet.from_domain(BoxDomain((-1.0,), (1.0,)))
        with pytest.raises(TrajectoryExitError):
            sample_attractor(system, X, (0.5,), burn_in=1, count=2000, dt=1e-3)

    def test_burn_in_defaults(self):
        defaults = SimulationDefaults()
        continuous = DynamicalSystem.from_expressions(["x"], ["-x"], TimeKind.CONTINUOUS, 1.0)
        discrete = DynamicalSystem.from_expressions(["x"], ["0.5*x"], TimeKind.DISCRETE, 0.5)
        assert defaults.burn_in_for(continuous) == 50_000
        assert defaults.burn_in_for(discrete) == 1000

    def test_trajectory_csv(self, tmp_path):
        system = DynamicalSystem.from_expressions(["x"], ["-x"], TimeKind.CONTINUOUS, 1.0)
        X = SemialgebraicSet.from_domain(BoxDomain((-1.0,), (1.0,)))
        sample = sample_attractor(system, X, (0.5,), burn_in=10, count=3, dt=0.1)
        path = write_trajectory_csv(sample, tmp_path / "trajectory.csv", ["x"])
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "t,x"
        assert len(lines) == 4


class TestIntegratorProperties:
    def test_rk4_is_fourth_order(self):
        oscillator = field(["y", "-x"], XY)
        exact = np.array([math.cos(1.0), -math.sin(1.0)])
        step_counts = [10, 20, 40, 80]
        errors = [
            np.linalg.norm(integrate(oscillator, [1.0, 0.0], 1.0 / steps, steps) - exact)
            for steps in step_counts
        ]
        slope = np.polyfit(np.log([1.0 / s for s in step_counts]), np.log(errors), 1)[0]
        assert 3.7 <= slope <= 4.3

    @pytest.mark.parametrize(
        ("expressions", "start"),
        [
            (["y", "-x - 0.1*x^3"], [1.0, 0.5]),
            (["y", "-x + 0.5*(1 - x^2)*y"], [1.5, 0.0]),
        ],
    )
    def test_reversed_flow_returns_to_start(self, expressions, start):
        f = field(expressions, XY)
        ahead = integrate(f, start, 1e-3, 1000)
        back = integrate(reversed_field(f), ahead, 1e-3, 1000)
        np.testing.assert_allclose(back, start, atol=1e-6)

    def test_cubic_overflow_in_one_step(self):
        with pytest.raises(DivergenceError):
            step_rk4(field(["x^3"], ["x"]), [1e120], 1e-3)

    def test_squaring_map_overflow(self):
        with pytest.raises(DivergenceError):
            iterate_map(field(["x^2"], ["x"]), [10.0], 20)

    def test_step_map_overflow(self):
        with pytest.raises(DivergenceError):
            step_map(field(["x^2"], ["x"]), [1e200])
