import pytest
import sympy
from hypothesis import given, strategies as st

from feedcanon.exactmat import Matrix, block_diag, make_jordan, mat
from feedcanon.polynomials import (companion, deg, divides, format_poly,
                                   frobenius_decomposition, invariant_factors,
                                   minimal_polynomial, parse_poly, pdivmod, pgcd, pmul, poly)

from helpers import int_matrix, to_sympy

x = sympy.symbols("x")


def to_sym_poly(p):
    return sympy.Poly(list(reversed([sympy.Rational(int(c.re.numerator), int(c.re.denominator))
                                     + sympy.I * sympy.Rational(int(c.im.numerator),
                                                                int(c.im.denominator))
                                     for c in p])), x)


def evaluate(p, A: Matrix) -> Matrix:
    out = Matrix.zeros(A.rows, A.cols)
    power = Matrix.identity(A.rows)
    for c in p:
        out = out + power.scale(c)
        power = power @ A
    return out


def test_division_identity():
    a, b = poly([1, 2, 3, 4]), poly([1, 1])
    q, r = pdivmod(a, b)
    assert pmul(q, b) == poly([ai - ri for ai, ri in zip(a, list(r) + [0] * 4)])


def test_gcd():
    assert pgcd(poly([-1, 0, 1]), poly([1, 1])) == poly([1, 1])


def test_format_parse():
    p = poly(["1/2", "0-1i", 1])
    assert parse_poly(format_poly(p)) == p


def test_companion_of_power_is_nilpotent_jordan():
    assert companion(poly([0, 0, 0, 1])) == make_jordan(3, 0)


def test_companion_charpoly():
    p = poly([6, -5, 1])
    assert evaluate(p, companion(p)).is_zero()


@pytest.mark.parametrize("A, expected", [
    (Matrix.identity(2), [[-1, 1], [-1, 1]]),
    (make_jordan(2, 0), [[0, 0, 1]]),
    (mat([[1, 0], [0, 2]]), [[2, -3, 1]]),
    (Matrix.zeros(2, 2), [[0, 1], [0, 1]]),
])
def test_known_invariant_factors(A, expected):
    assert invariant_factors(A) == [poly(e) for e in expected]


@given(st.integers(0, 5000), st.integers(1, 5))
def test_invariant_factors_against_sympy(seed, k):
    base = int_matrix(k, k, seed, -2, 2)
    A = block_diag(base, base) if seed % 4 == 0 and k <= 3 else base
    factors = invariant_factors(A)
    for f, g in zip(factors, factors[1:]):
        assert divides(f, g)
    product = poly([1])
    for f in factors:
        product = pmul(product, f)
    assert to_sym_poly(product) == to_sympy(A).charpoly(x).as_expr().as_poly(x)
    assert factors[-1] == minimal_polynomial(A)
    assert evaluate(factors[-1], A).is_zero()


@given(st.integers(0, 5000), st.integers(1, 5))
def test_cyclic_decomposition(seed, k):
    A = int_matrix(k, k, seed, -2, 2)
    if seed % 3 == 0:
        A = block_diag(A, Matrix.identity(2), make_jordan(2, 1))
    T, factors = frobenius_decomposition(A)
    assert factors == invariant_factors(A)
    assert T.inv() @ A @ T == block_diag(*[companion(f) for f in factors], field="exact")
    assert sum(deg(f) for f in factors) == A.rows


def test_complex_matrix():
    A = mat([["i", 1], [0, "i"]])
    assert invariant_factors(A) == [poly([-1, "0-2i", 1])]
