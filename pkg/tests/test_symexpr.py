from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathgeom.symexpr import (
    DEFAULT,
    ParseError,
    PoleError,
    Registry,
    UnknownIdentifierError,
    arith,
    differentiate,
    eval_at,
    is_zero,
    parse_expr,
    substitute,
)
from strategies import KERNEL, exprs, nonzero_exprs

P = parse_expr


def test_parse_examples():
    assert parse_expr("0").is_zero()
    assert parse_expr("(v2)^-2 * (v2*1 - v1*0)") == P("1/v2")
    assert is_zero(parse_expr("(y1+1)^2 - y1^2 - 2*y1 - 1"))


def test_rational_literals_and_precedence():
    assert P("3/4").constant_value() == Fraction(3, 4)
    assert P("2/3^2") == P("2/9")
    assert P("y1^2/2") == P("y1^2") / 2
    assert P("-2^2").constant_value() == -4
    assert P("2*3+4") == P("10")
    assert P("1/2/2") == P("1/4")
    assert P("y1^0") == DEFAULT.one


@pytest.mark.parametrize("text", ["", "(y1", "y1 +", "y1 ^ y2", "3 $ 4", "1/0", "2^(1/2)"])
def test_parse_errors(text):
    with pytest.raises(ParseError) as info:
        parse_expr(text)
    assert info.value.position >= 0


def test_unknown_identifier_position():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expr("y1 + foo")
    assert info.value.position == 5
    with pytest.raises(UnknownIdentifierError):
        parse_expr("p + q", allowed=("p",))


def test_arith_examples():
    p, q = DEFAULT.vars("p", "q")
    assert arith(p, -p, "add").is_zero()
    assert arith(1 / q, q, "mul") == DEFAULT.one
    assert arith(arith(p * q, -1, "pow"), p * q, "mul") == DEFAULT.one
    with pytest.raises(PoleError):
        arith(p, DEFAULT.zero, "div")
    with pytest.raises(ValueError):
        arith(p, q, "mod")


def test_differentiate_examples():
    p, q = DEFAULT.vars("p", "q")
    assert differentiate(p * q, "p") == q
    assert differentiate(1 / q, "q") == -1 / q**2
    assert differentiate(DEFAULT.const(7), "y1").is_zero()


def test_substitute_examples():
    p, q = DEFAULT.vars("p", "q")
    chart = {"v1": p * q, "v2": -q}
    assert substitute(P("-v1/v2"), chart) == p
    x = P("y1*t + 1")
    assert substitute(x, {}) == x
    h = P("(v2)^-2*(v2*y2 - v1*y1)")
    assert substitute(h, chart) == P("-(y2 + p*y1)/q")


def test_substitution_to_pole():
    with pytest.raises(PoleError):
        P("1/(y1 - y2)").subs({"y1": DEFAULT.var("y2")})


def test_is_zero_examples():
    assert is_zero(DEFAULT.zero)
    assert not is_zero(P("p/q"))
    assert is_zero(P("(p+q)^2 - p^2 - 2*p*q - q^2"))


def test_eval_examples():
    assert eval_at(P("-(y2 + p*y1)/q"), {"y1": 1, "y2": 1, "p": 1, "q": 2}) == -1
    with pytest.raises(PoleError):
        eval_at(P("1/q"), {"q": 0})
    with pytest.raises(ValueError):
        eval_at(P("p + q"), {"p": 1})


def test_printing_round_trips():
    for text in ["0", "-3/2", "y1^2*t - 1/3*p", "(p^2 - 1)/(q*p)", "-1/q^2", "1/(p + q)"]:
        e = P(text)
        assert P(str(e)) == e


def test_canonical_denominator_is_monic():
    e = P("(2*p)/(4*q + 2)")
    assert str(e) == "1/2*p/(q + 1/2)"
    assert e.denominator() == P("q + 1/2")


def test_registry_validation():
    with pytest.raises(ValueError):
        Registry(("x", "x"))
    with pytest.raises(ValueError):
        Registry(("1x",))


def test_free_vars_of_zero():
    assert DEFAULT.zero.free_vars() == ()
    assert P("y1/t").free_vars() == ("y1", "t")


# -- properties ------------------------------------------------------------

@given(exprs(), exprs(), exprs())
def test_field_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == KERNEL.zero


@given(nonzero_exprs())
def test_multiplicative_inverse(a):
    assert a * a.inverse() == KERNEL.one
    assert (a / a) == KERNEL.one


@given(exprs(), exprs(), st.sampled_from(KERNEL.names))
def test_derivation_laws(a, b, v):
    assert (a + b).diff(v) == a.diff(v) + b.diff(v)
    assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@given(exprs(), nonzero_exprs(), st.sampled_from(KERNEL.names))
def test_quotient_rule(a, b, v):
    assert (a / b).diff(v) == (a.diff(v) * b - a * b.diff(v)) / b**2


@given(exprs(), st.sampled_from(KERNEL.names), st.sampled_from(KERNEL.names))
def test_mixed_partials_commute(a, u, v):
    assert a.diff(u).diff(v) == a.diff(v).diff(u)


@given(exprs(), exprs())
def test_equality_iff_difference_is_zero(a, b):
    assert (a == b) == (a - b).is_zero()
    if a == b:
        assert hash(a) == hash(b)


@given(exprs(), exprs(), st.dictionaries(st.sampled_from(KERNEL.names),
                                         st.fractions(min_value=-3, max_value=3, max_denominator=4),
                                         min_size=4, max_size=4))
def test_evaluation_is_a_homomorphism(a, b, point):
    try:
        ea, eb = a.eval_at(point), b.eval_at(point)
    except PoleError:
        return
    assert (a + b).eval_at(point) == ea + eb
    assert (a * b).eval_at(point) == ea * eb


@given(exprs(), exprs())
def test_substitution_then_evaluation(a, b):
    point = {"x": Fraction(1, 3), "y": Fraction(-2), "z": Fraction(5, 2), "w": Fraction(3)}
    try:
        composed = a.subs({"x": b})
        expected = a.eval_at(dict(point, x=b.eval_at(point)))
    except PoleError:
        return
    try:
        assert composed.eval_at(point) == expected
    except PoleError:
        pass


@given(exprs())
def test_string_round_trip(a):
    assert parse_expr(str(a), KERNEL) == a
