from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from abpkit.field import FieldConfig
from abpkit.poly import (
    MINUS_INF,
    ParseError,
    Ring,
    RingMismatch,
    SparsePoly,
    format_poly,
    parse_poly,
    poly_eq,
    probably_equal,
)

F101 = FieldConfig.prime(101)
R = Ring(F101, 3)
RQ = Ring(FieldConfig.rational(), 3)


def polys(ring, max_terms=5, max_deg=3):
    exps = st.tuples(*[st.integers(0, max_deg)] * ring.nvars)
    coeffs = st.integers(-50, 50)
    return st.dictionaries(exps, coeffs, max_size=max_terms).map(lambda d: SparsePoly(ring, d))


def to_sympy(p):
    xs = sympy.symbols(f"x1:{p.nvars + 1}")
    expr = 0
    for e, c in p.items():
        term = sympy.Rational(str(c))
        for x, k in zip(xs, e):
            term *= x**k
        expr += term
    return sympy.Poly(expr, *xs)


def test_zero_and_degree():
    assert R.zero().is_zero
    assert R.zero().total_degree == MINUS_INF
    assert R.one().total_degree == 0
    assert (R.var(1) ** 2 * R.var(3)).total_degree == 3


def test_canonical_drops_zero_coefficients():
    p = SparsePoly(R, {(1, 0, 0): 101, (0, 1, 0): 3})
    assert p == R.var(2) * 3
    assert len(p) == 1


def test_var_bounds():
    with pytest.raises(IndexError):
        R.var(0)
    with pytest.raises(IndexError):
        R.var(4)


def test_ring_mismatch():
    with pytest.raises(RingMismatch):
        R.var(1) + RQ.var(1)


def test_spec_format_example():
    p = parse_poly("3*x1^2*x3 + 2*x2 + 5", R)
    assert p.coeff((2, 0, 1)) == 3
    assert p.constant_term() == 5
    assert parse_poly(format_poly(p), R) == p


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as exc:
        parse_poly("x1 + * x2", R)
    assert exc.value.pos == 5
    with pytest.raises(ParseError):
        parse_poly("x9", R)
    with pytest.raises(ParseError):
        parse_poly("(x1 + 2", R)


def test_parse_unary_minus_and_fraction():
    p = parse_poly("-x1 + 1/2", RQ)
    assert p.coeff((1, 0, 0)) == -1
    assert p.constant_term() == Fraction(1, 2)


def test_split_constant():
    a, p = (R.var(1) + 7).split_constant()
    assert a == 7 and p == R.var(1)


def test_evaluate_and_substitute():
    p = parse_poly("x1^3 + x2^3 + x3^3", Ring(FieldConfig.prime(7), 3))
    assert p.evaluate([1, 2, 3]) == (1 + 8 + 27) % 7
    q = R.var(1) * R.var(2)
    assert q.substitute(2, R.var(3) + 1) == R.var(1) * R.var(3) + R.var(1)


def test_homogeneous_component():
    p = parse_poly("x1^2 + x1*x2 + x3 + 4", R)
    assert p.homogeneous_component(2) == parse_poly("x1^2 + x1*x2", R)
    assert not p.is_homogeneous
    assert p.homogeneous_component(2).is_homogeneous


def test_extend_adds_variable():
    big = R.with_vars(4)
    assert R.var(2).extend(big) == big.var(2)


def test_json_roundtrip():
    p = parse_poly("3*x1^2*x3 + 2*x2 + 5", RQ)
    assert SparsePoly.from_json(RQ, p.to_json()) == p
    with pytest.raises(ParseError):
        SparsePoly.from_json(RQ, [{"exponents": [1, 2], "coeff": "1"}])


def test_probably_equal_is_a_hint():
    p = parse_poly("(x1 + x2)^2", R)
    q = parse_poly("x1^2 + 2*x1*x2 + x2^2", R)
    assert probably_equal(p, q) and poly_eq(p, q)


@given(polys(RQ), polys(RQ), polys(RQ))
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == RQ.zero()


@given(polys(R), polys(R))
def test_multiplication_matches_sympy(a, b):
    got = to_sympy(a * b)
    want = to_sympy(a) * to_sympy(b)
    want = sympy.Poly(want.as_expr(), *want.gens, modulus=101)
    assert sympy.Poly(got.as_expr(), *got.gens, modulus=101) == want


@given(polys(RQ), polys(RQ), st.integers(1, 3))
def test_derivative_linear_and_leibniz(a, b, i):
    assert (a + b).derivative(i) == a.derivative(i) + b.derivative(i)
    assert (a * b).derivative(i) == a.derivative(i) * b + a * b.derivative(i)


@given(polys(RQ))
def test_derivative_matches_sympy(a):
    xs = sympy.symbols("x1:4")
    assert to_sympy(a.derivative(2)).as_expr() == sympy.expand(sympy.diff(to_sympy(a).as_expr(), xs[1]))


@given(polys(RQ))
def test_text_roundtrip(a):
    assert parse_poly(format_poly(a), RQ) == a
