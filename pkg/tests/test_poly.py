import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sosbits.poly import (
    ZERO_DEGREE,
    Polynomial,
    arith,
    coeff_stats,
    evaluate,
    linear_form,
    monomial_basis,
    poly_from_json,
    poly_to_json,
    rational_bits,
    rational_from_json,
    reduce_boolean,
    symmetrize,
    variables,
)

x1, x2, x3 = variables(3)


def v(n, i):
    return Polynomial.var(n, i)


# -- strategies -------------------------------------------------------------------

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polys(draw, nvars=3, max_deg=3, max_terms=5):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        m = tuple(draw(st.lists(st.integers(0, max_deg), min_size=nvars, max_size=nvars)))
        terms[m] = draw(rationals)
    return Polynomial(nvars, terms)


points = st.lists(rationals, min_size=3, max_size=3)


# -- examples ---------------------------------------------------------------------

def test_arith_examples():
    one = Polynomial.const(1, 1)
    y = v(1, 0)
    assert arith(y + one, y - one, "mul") == y ** 2 - 1
    assert arith(x1, Polynomial.zero(3), "add") == x1
    a, b = variables(2)
    assert (a + b) ** 2 == a ** 2 + 2 * a * b + b ** 2


def test_arith_rejects_mismatched_nvars():
    with pytest.raises(ValueError):
        arith(v(1, 0), v(2, 0), "add")
    with pytest.raises(ValueError):
        v(1, 0) + v(2, 1)


def test_no_zero_coefficients_stored():
    p = x1 - x1 + 0 * x2
    assert p.is_zero() and len(p) == 0
    assert Polynomial(2, {(1, 0): 0}).is_zero()


def test_degree_of_zero_is_sentinel():
    assert Polynomial.zero(2).degree() == ZERO_DEGREE
    assert Polynomial.zero(2).degree() < 0
    assert (x1 ** 2 * x2 + 3).degree() == 3


def test_evaluate_examples():
    y = v(1, 0)
    b = y ** 2 - y
    assert evaluate(b, [1]) == 0
    assert evaluate(b, [Fraction(1, 2)]) == Fraction(-1, 4)
    n = 3
    s = linear_form(2 * n, {i: 1 for i in range(2 * n)}, -n)
    assert s.evaluate([1, 0, 1, 0, 1, 0]) == 0
    assert s.evaluate([0, 1, 1, 0, 0, 1]) == 0


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        x1.evaluate([1, 2])


def test_monomial_basis_examples():
    assert monomial_basis(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert monomial_basis(1, 2) == [(0,), (1,), (2,)]
    assert len(monomial_basis(3, 2)) == 10
    assert monomial_basis(2, 2)[3:] == [(2, 0), (1, 1), (0, 2)]


@pytest.mark.parametrize("n,d", [(1, 0), (2, 3), (3, 4), (5, 2)])
def test_monomial_basis_length(n, d):
    basis = monomial_basis(n, d)
    assert len(basis) == math.comb(n + d, d)
    assert len(set(basis)) == len(basis)
    assert [sum(m) for m in basis] == sorted(sum(m) for m in basis)


def test_reduce_boolean_examples():
    y = v(1, 0)
    star, lam = reduce_boolean(y ** 3)
    assert star == y and lam == {0: y + 1}
    p = x1 * x2 + x3 - 2
    star, lam = reduce_boolean(p)
    assert star == p and lam == {}
    a, b = variables(2)
    star, lam = reduce_boolean(a ** 2 * b)
    assert star == a * b and lam == {0: b}


def test_symmetrize_examples():
    a, b = variables(2)
    assert symmetrize(a) == (a + b) / 2
    assert symmetrize(a * b + 3) == a * b + 3
    assert symmetrize(x1 * x2) == (x1 * x2 + x1 * x3 + x2 * x3) / 3


def test_symmetrize_guard():
    with pytest.raises(ValueError):
        symmetrize(v(11, 0))


def test_coeff_stats_examples():
    y = v(1, 0)
    assert coeff_stats(3 * y - 7).max_abs_coeff == 7
    assert coeff_stats(Polynomial.zero(2)).max_abs_coeff == 0
    assert coeff_stats(Polynomial.zero(2)).bit_size == 0
    a = Fraction(2) / (4 * Fraction(1, 4))
    assert coeff_stats(Polynomial.const(1, a ** 3)).max_abs_coeff == 8


def test_rational_bits_definition():
    # ceil(log2(|num|+1)) + ceil(log2(den))
    for q in [Fraction(0), Fraction(1), Fraction(-7, 8), Fraction(8), Fraction(255, 3)]:
        expected = math.ceil(math.log2(abs(q.numerator) + 1)) + math.ceil(math.log2(q.denominator))
        assert rational_bits(q) == expected


def test_json_round_trip_and_format():
    p = Fraction(-3, 7) * x1 ** 2 * x3 + Fraction(10 ** 30, 3) * x2 - 1
    obj = poly_to_json(p)
    assert obj["nvars"] == 3
    assert all(isinstance(t["num"], str) and isinstance(t["den"], str) for t in obj["terms"])
    assert poly_from_json(json.loads(json.dumps(obj))) == p


def test_json_rejects_non_canonical_rationals():
    with pytest.raises(ValueError):
        rational_from_json({"num": "2", "den": "4"})
    with pytest.raises(ValueError):
        rational_from_json({"num": "1", "den": "-3"})


def test_compose_and_permute():
    p = x1 ** 2 + x2
    assert p.permute([1, 0, 2]) == x2 ** 2 + x1
    assert p.compose([x1 + 1, x3, x2]) == (x1 + 1) ** 2 + x3
    assert (x1 ** 3 - x2).negate_variables() == -x1 ** 3 + x2


# -- properties -------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p + q == q + p
    assert p * q == q * p
    assert p * (q + r) == p * q + p * r


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), points)
def test_evaluation_is_a_homomorphism(p, q, pt):
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p + q).evaluate(pt) == p.evaluate(pt) + q.evaluate(pt)


@settings(max_examples=60, deadline=None)
@given(polys(max_deg=4))
def test_reduce_boolean_identity(p):
    star, lam = reduce_boolean(p)
    assert star.is_multilinear()
    total = star
    for i, q in lam.items():
        b = v(3, i) ** 2 - v(3, i)
        assert (q * b).degree() <= p.degree()
        total = total + q * b
    assert total == p


@settings(max_examples=40, deadline=None)
@given(polys(max_deg=3))
def test_symmetrize_idempotent_and_degree(p):
    s = symmetrize(p)
    assert symmetrize(s) == s
    assert s.degree() <= p.degree()
    assert s.permute([2, 0, 1]) == s


@settings(max_examples=40, deadline=None)
@given(polys())
def test_json_round_trip_property(p):
    assert poly_from_json(json.loads(json.dumps(poly_to_json(p)))) == p
