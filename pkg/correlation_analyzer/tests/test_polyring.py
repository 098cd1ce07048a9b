from fractions import Fraction
from pathlib import Path
import sys

import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from correlation_analyzer.modules.polyring import (
    MPoly,
    MissingWeightError,
    NonDivisibleError,
    QPoly,
    RegistryMismatchError,
    mpoly_arith,
    mpoly_coeff_extract,
    mpoly_eval,
    mpoly_exact_div,
    mpoly_sqrt,
    parse_mpoly,
)
from correlation_analyzer.utils.rationals import format_rational, parse_rational, rational_sqrt

REG = ("g", "h")

exponents = st.tuples(
    st.integers(min_value=0, max_value=2),
    st.integers(min_value=0, max_value=2),
    st.integers(min_value=0, max_value=3),
)
polys = st.dictionaries(
    exponents, st.integers(min_value=-5, max_value=5), max_size=5
).map(lambda terms: MPoly(REG, terms))
nonzero_polys = polys.filter(lambda p: not p.is_zero())


def test_k3_polynomial_printing():
    m = parse_mpoly("x_g*q^3 + x_g^2*q^2", ("g",))
    assert str(m) == "x_g*q^3 + x_g^2*q^2"
    assert str(m.substitute_q(1)) == "x_g + x_g^2"


def test_leading_term_is_graded_lex_maximum():
    m = parse_mpoly("x_g*q^3 + x_g^2*q^2 + 5", ("g",))
    exp, coeff = m.leading_term()
    assert exp == (2, 2)
    assert coeff == 1
    assert m.total_degree() == 4
    assert m.min_total_degree() == 0


def test_printing_signs_and_coefficients():
    m = MPoly(REG, {(1, 0, 0): -1, (0, 1, 1): Fraction(3, 2), (0, 0, 0): 2})
    assert str(m) == "2 - x_g + 3/2*x_h*q"
    assert parse_mpoly(str(m), REG) == m
    assert str(MPoly.zero(REG)) == "0"


def test_registry_mismatch():
    a = MPoly.variable(("g",), "g")
    b = MPoly.variable(("h",), "h")
    with pytest.raises(RegistryMismatchError):
        a + b
    with pytest.raises(RegistryMismatchError):
        MPoly.monomial(("g",), {"z": 1})


def test_q_is_reserved():
    with pytest.raises(ValueError):
        MPoly(("q",))


def test_exact_division():
    x = MPoly.variable(REG, "g")
    y = MPoly.variable(REG, "h")
    product = (x + y) * (x - y)
    assert mpoly_exact_div(product, x + y) == x - y
    with pytest.raises(NonDivisibleError) as exc:
        mpoly_exact_div(x * x + 1, x)
    assert not exc.value.remainder.is_zero()
    with pytest.raises(ZeroDivisionError):
        mpoly_exact_div(x, MPoly.zero(REG))


def test_coeff_extract():
    m = parse_mpoly("x_g*x_h*q^2 + 3*x_g*x_h*q + x_g", REG)
    assert mpoly_coeff_extract(m, {"g": 1, "h": 1}) == QPoly([0, 3, 1])
    assert mpoly_coeff_extract(m, (1, 0)) == QPoly([1])
    assert mpoly_coeff_extract(m, (2, 0)).is_zero()


def test_evaluation():
    m = parse_mpoly("x_g*q^3 + x_g^2*q^2", ("g",))
    assert mpoly_eval(m, Fraction(1, 2), {"g": 2}) == Fraction(2, 8) + Fraction(4, 4)
    assert mpoly_eval(m, 1) == parse_mpoly("x_g + x_g^2", ("g",))
    with pytest.raises(MissingWeightError):
        m.evaluate(1, {})


def test_json_schema():
    m = MPoly(REG, {(1, 0, 2): Fraction(-3, 4)})
    data = m.to_json()
    assert data == {"terms": [{"exp": {"g": 1, "q": 2}, "num": "-3", "den": "4"}]}
    assert MPoly.from_json(data, REG) == m


def test_sqrt():
    x = MPoly.variable(REG, "g")
    y = MPoly.variable(REG, "h")
    assert mpoly_sqrt((x * y - y * y) ** 2) == x * y - y * y
    assert mpoly_sqrt(x * x + y) is None
    assert mpoly_sqrt(MPoly.constant(REG, 2)) is None
    assert mpoly_sqrt(MPoly.zero(REG)).is_zero()


def test_parts_and_registry_changes():
    m = parse_mpoly("x_g*q^2 + x_g*x_h*q^2 + x_h*q^3", REG)
    parts = m.q_power_parts()
    assert sorted(parts) == [2, 3]
    assert parts[2].lowest_degree_part() == MPoly.variable(REG, "g")
    only_g = parse_mpoly("x_g*q", REG).drop_variables(["h"])
    assert only_g.registry == ("g",)
    with pytest.raises(RegistryMismatchError):
        m.drop_variables(["h"])


def test_qpoly_ring():
    p = QPoly([1, 1])
    assert p * p == QPoly([1, 2, 1])
    assert (p - p).is_zero()
    assert p(Fraction(1, 2)) == Fraction(3, 2)
    assert QPoly().degree == float("-inf")
    assert QPoly.from_strings(["1/2", "0"]).to_strings() == ["1/2"]


def test_rationals():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("0.25") == Fraction(1, 4)
    assert format_rational(Fraction(6, 8)) == "3/4"
    assert rational_sqrt(Fraction(9, 16)) == Fraction(3, 4)
    assert rational_sqrt(Fraction(2)) is None
    for bad in ("", "a/b", 0.5, "1/0"):
        with pytest.raises(ValueError):
            parse_rational(bad)


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a - a == MPoly.zero(REG)
    assert mpoly_arith("mul", a, b) == a * b


@settings(max_examples=60, deadline=None)
@given(polys, nonzero_polys)
def test_division_undoes_multiplication(a, b):
    assert mpoly_exact_div(a * b, b) == a


@settings(max_examples=60, deadline=None)
@given(nonzero_polys)
def test_sqrt_of_square(a):
    root = mpoly_sqrt(a * a)
    assert root is not None
    assert root * root == a * a
    assert root == a or root == -a


@settings(max_examples=40, deadline=None)
@given(polys)
def test_parse_inverts_printing(a):
    assert parse_mpoly(str(a), REG) == a


rationals = st.fractions(min_value=-4, max_value=4, max_denominator=6)
three_term_polys = polys.filter(lambda p: len(p) >= 3)


@settings(max_examples=60, deadline=None)
@given(three_term_polys, exponents, st.integers(min_value=-5, max_value=5).filter(bool))
def test_sqrt_rejects_perturbed_square(r, exp, coeff):
    # (s - r)(s + r) would be a single monomial, forcing r to have at most two terms
    perturbed = r * r + MPoly(REG, {exp: coeff})
    assert mpoly_sqrt(perturbed) is None


@settings(max_examples=60, deadline=None)
@given(polys, polys, rationals, rationals, rationals)
def test_evaluation_is_multiplicative(a, b, x_g, x_h, q):
    weights = {"g": x_g, "h": x_h}
    assert (a * b).evaluate(q, weights) == a.evaluate(q, weights) * b.evaluate(q, weights)
    assert (a + b).evaluate(q, weights) == a.evaluate(q, weights) + b.evaluate(q, weights)
