import math

import numpy as np
import pytest

from ..core.algebra.parser import parse_polynomial
from ..core.algebra.polynomial import (
    Polynomial,
    PolynomialMap,
    basis_index,
    binomial_count,
    compose,
    compose_map,
    lie_derivative,
    monomial_basis,
    poly_arith,
)
from ..core.dynamics.integrators import reversed_field, step_rk4
from ..models.errors import DimensionMismatchError

XY = ["x", "y"]
XYZ = ["x", "y", "z"]
LORENZ = ["10*(y - x)", "x*(28 - z) - y", "x*y - 8/3*z"]
HENON = ["2/3*(1 + y) - 2.1*x^2", "0.45*x"]


def field(expressions, variables) -> PolynomialMap:
    return PolynomialMap([parse_polynomial(e, variables) for e in expressions])


class TestMonomialBasis:
    def test_two_variables_degree_one(self):
        assert monomial_basis(2, 1) == ((0, 0), (1, 0), (0, 1))

    def test_length_is_binomial(self):
        assert len(monomial_basis(3, 4)) == 35
        assert binomial_count(3, 4) == 35

    def test_constants_only(self):
        assert monomial_basis(1, 0) == ((0,),)

    def test_lower_degree_basis_is_prefix(self):
        assert monomial_basis(2, 6)[: binomial_count(2, 4)] == monomial_basis(2, 4)

    def test_graded_order_within_degree(self):
        degree_two = [e for e in monomial_basis(2, 2) if sum(e) == 2]
        assert degree_two == [(2, 0), (1, 1), (0, 2)]

    def test_basis_index_inverts_basis(self):
        basis = monomial_basis(3, 3)
        index = basis_index(3, 3)
        assert all(index[e] == i for i, e in enumerate(basis))

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            monomial_basis(0, 2)
        with pytest.raises(ValueError):
            monomial_basis(2, -1)


class TestArithmetic:
    def test_difference_of_squares(self):
        x = Polynomial.variable(1, 0)
        assert (x + 1) * (x - 1) == parse_polynomial("x^2 - 1", ["x"])

    def test_add_zero_is_identity(self):
        p = parse_polynomial("3*x*y - y^2 + 4", XY)
        assert p + Polynomial.zero(2) == p

    def test_henon_first_component(self):
        lhs = parse_polynomial("2/3*(1 + y)", XY)
        rhs = parse_polynomial("2.1*x^2", XY)
        result = poly_arith(lhs, rhs, "sub")
        assert result.coefficient((2, 0)) == pytest.approx(-2.1)
        assert result.coefficient((0, 1)) == pytest.approx(2 / 3)
        assert result.coefficient((0, 0)) == pytest.approx(2 / 3)
        assert len(result) == 3

    def test_cancellation_drops_terms(self):
        x = Polynomial.variable(2, 0)
        assert (x - x).is_zero
        assert len(x - x) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            Polynomial.variable(1, 0) + Polynomial.variable(2, 1)

    def test_power_and_degree(self):
        p = (Polynomial.variable(2, 0) + Polynomial.variable(2, 1)) ** 3
        assert p.degree == 3
        assert p.coefficient((2, 1)) == 3.0

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            Polynomial.variable(1, 0) ** -1

    def test_zero_polynomial_degree(self):
        assert Polynomial.zero(3).degree == 0


class TestCompose:
    def test_direct_substitution(self):
        v = parse_polynomial("x^2", ["x"])
        f = field(["x + 1"], ["x"])
        assert compose(v, f) == parse_polynomial("x^2 + 2*x + 1", ["x"])

    def test_henon_second_component(self):
        v = parse_polynomial("y", XY)
        result = compose(v, field(HENON, XY))
        assert result.max_abs_difference(parse_polynomial("0.45*x", XY)) < 1e-15

    def test_identity_map(self):
        v = parse_polynomial("x + y", XY)
        assert compose(v, PolynomialMap.identity(2)) == v

    def test_degree_multiplies(self):
        v = parse_polynomial("x^2*y", XY)
        assert compose(v, field(HENON, XY)).degree == 5

    def test_compose_map_with_identity(self):
        f = field(HENON, XY)
        assert compose_map(f, PolynomialMap.identity(2)) == f

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            compose(parse_polynomial("x", ["x"]), field(HENON, XY))


class TestLieDerivative:
    def test_lorenz_third_component(self):
        v = parse_polynomial("z", XYZ)
        result = lie_derivative(v, field(LORENZ, XYZ))
        expected = parse_polynomial("x*y - 8/3*z", XYZ)
        assert result.max_abs_difference(expected) < 1e-15

    def test_constant_has_zero_derivative(self):
        v = Polynomial.constant(3, 7.0)
        assert lie_derivative(v, field(LORENZ, XYZ)).is_zero

    def test_rotation_preserves_radius(self):
        v = parse_polynomial("x^2 + y^2", XY)
        assert lie_derivative(v, field(["y", "-x"], XY)).is_zero


class TestEvaluate:
    def test_root(self):
        assert parse_polynomial("(x+1)^2", ["x"]).evaluate([-1.0]) == 0.0

    def test_lorenz_symmetry(self):
        assert parse_polynomial("10*(y - x)", XYZ).evaluate([1.0, 1.0, 0.0]) == 0.0

    def test_henon_second_component(self):
        p = parse_polynomial("0.45*x", ["x"])
        assert p.evaluate([2 / 3]) == pytest.approx(0.3, abs=1e-15)

    def test_batch_matches_pointwise(self, rng):
        p = parse_polynomial("x^3*y - 2*x*y^2 + 0.5*y^4 - 1", XY)
        points = rng.uniform(-2, 2, size=(50, 2))
        batch = p.evaluate_many(points)
        single = np.array([p.evaluate(point) for point in points])
        np.testing.assert_allclose(batch, single, rtol=1e-12, atol=1e-12)

    def test_point_dimension_checked(self):
        with pytest.raises(DimensionMismatchError):
            parse_polynomial("x + y", XY).evaluate([1.0])

    def test_map_evaluate(self):
        values = field(HENON, XY).evaluate([0.0, 0.0])
        assert values[0] == pytest.approx(2 / 3)
        assert values[1] == 0.0

    def test_derivative(self):
        p = parse_polynomial("x^3*y + y", XY)
        assert p.derivative(0) == parse_polynomial("3*x^2*y", XY)
        assert p.derivative(1).evaluate([2.0, 0.0]) == pytest.approx(9.0)

    def test_unit_disk_integrand(self):
        assert math.isclose(parse_polynomial("x^2 + y^2", XY).evaluate([0.6, 0.8]), 1.0)


def random_polynomial(rng, dim: int, degree: int) -> Polynomial:
    basis = monomial_basis(dim, degree)
    return Polynomial.from_coefficients(dim, basis, rng.uniform(-1.0, 1.0, len(basis)))


def random_map(rng, dim: int, degree: int) -> PolynomialMap:
    return PolynomialMap([random_polynomial(rng, dim, degree) for _ in range(dim)])


def assert_same_polynomial(a: Polynomial, b: Polynomial, rel: float) -> None:
    scale = max((abs(c) for _, c in a), default=1.0)
    assert a.max_abs_difference(b) <= rel * max(scale, 1.0)


class TestRingAxioms:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_addition_is_associative(self, rng, dim):
        for _ in range(20):
            a, b, c = (random_polynomial(rng, dim, 3) for _ in range(3))
            assert_same_polynomial((a + b) + c, a + (b + c), 1e-12)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_multiplication_distributes(self, rng, dim):
        for _ in range(20):
            a, b, c = (random_polynomial(rng, dim, 2) for _ in range(3))
            assert_same_polynomial(a * (b + c), a * b + a * c, 1e-12)

    def test_multiplication_is_associative(self, rng):
        for _ in range(10):
            a, b, c = (random_polynomial(rng, 2, 2) for _ in range(3))
            assert_same_polynomial((a * b) * c, a * (b * c), 1e-12)


class TestCompositionAtPoints:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    @pytest.mark.parametrize("degree", [1, 2, 4])
    def test_compose_matches_nested_evaluation(self, rng, dim, degree):
        v = random_polynomial(rng, dim, degree)
        f = random_map(rng, dim, min(degree, 2))
        composed = compose(v, f)
        for point in rng.uniform(-1.0, 1.0, size=(10, dim)):
            expected = v.evaluate(f.evaluate(point))
            assert composed.evaluate(point) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_compose_map_matches_nested_evaluation(self, rng):
        f = random_map(rng, 2, 2)
        g = random_map(rng, 2, 2)
        composed = compose_map(f, g)
        for point in rng.uniform(-1.0, 1.0, size=(10, 2)):
            np.testing.assert_allclose(
                composed.evaluate(point), f.evaluate(g.evaluate(point)), rtol=1e-9, atol=1e-9
            )


class TestLieDerivativeAlongFlow:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_matches_central_difference(self, rng, dim):
        h = 1e-4
        for _ in range(3):
            v = random_polynomial(rng, dim, 3)
            f = random_map(rng, dim, 2)
            backward = reversed_field(f)
            derivative = lie_derivative(v, f)
            for point in rng.uniform(-0.5, 0.5, size=(5, dim)):
                ahead = v.evaluate(step_rk4(f, point, h))
                behind = v.evaluate(step_rk4(backward, point, h))
                estimate = (ahead - behind) / (2 * h)
                assert derivative.evaluate(point) == pytest.approx(estimate, rel=1e-5, abs=1e-6)

    def test_lorenz_matches_central_difference(self, rng):
        f = field(LORENZ, XYZ)
        v = parse_polynomial("x^2 + y^2 + (z - 38)^2", XYZ)
        derivative = lie_derivative(v, f)
        h = 1e-5
        for point in rng.uniform(-10.0, 10.0, size=(5, 3)):
            ahead = v.evaluate(step_rk4(f, point, h))
            behind = v.evaluate(step_rk4(reversed_field(f), point, h))
            estimate = (ahead - behind) / (2 * h)
            assert derivative.evaluate(point) == pytest.approx(estimate, rel=1e-5, abs=1e-4)


class TestOverflow:
    def test_polynomial_overflow_is_infinite(self):
        assert parse_polynomial("x^3", ["x"]).evaluate([1e120]) == math.inf
        assert parse_polynomial("x^3", ["x"]).evaluate([-1e120]) == -math.inf
        assert parse_polynomial("x^4", ["x"]).evaluate([-1e120]) == math.inf

    def test_map_overflow_is_infinite(self):
        values = field(["x^2", "y^3"], XY).evaluate([1e200, -1e200])
        assert values.tolist() == [math.inf, -math.inf]
