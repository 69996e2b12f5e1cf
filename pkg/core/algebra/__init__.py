from .parser import format_polynomial, parse_polynomial
from .polynomial import (
    Exponent,
    MonomialComposer,
    Polynomial,
    PolynomialMap,
    compose,
    evaluate,
    lie_derivative,
    monomial_basis,
    poly_arith,
)

__all__ = [
    "Exponent",
    "MonomialComposer",
    "Polynomial",
    "PolynomialMap",
    "compose",
    "evaluate",
    "format_polynomial",
    "lie_derivative",
    "monomial_basis",
    "parse_polynomial",
    "poly_arith",
]
