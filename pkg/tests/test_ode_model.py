import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathgeom.exterior import ext_d
from pathgeom.ode_model import (
    build_base_coframe,
    chart_point,
    load_system,
    load_system_file,
    parse_system_text,
    pfaffian_system,
    prolong_point,
    total_derivative,
    transform_system,
)
from pathgeom.symexpr import DEFAULT, ParseError, PoleError, parse_expr
from strategies import random_system_text

P = parse_expr
BASE = ("y1", "y2", "p", "q", "t")


def coframe_rows(system):
    return [[str(e) for e in row] for row in system.coframe.matrix]


def test_trivial_system():
    s = load_system("0", "0")
    assert s.h_chart.is_zero()
    assert coframe_rows(s) == [
        ["1", "0", "0", "0", "0"],
        ["1", "p", "0", "0", "0"],
        ["0", "1", "0", "0", "q"],
        ["0", "0", "1", "0", "0"],
        ["0", "0", "0", "1", "0"],
    ]
    cf = build_base_coframe(s)
    assert cf.forms[3] == s.chart.d("p") and cf.forms[4] == s.chart.d("q")


def test_constant_force():
    s = load_system("1", "0")
    assert s.h_expr == P("1/v2")
    assert s.h_chart == P("-1/q")


def test_swapped_velocities():
    s = load_system("v2", "v1")
    assert s.h_chart == P("1 - p^2")
    rng = random.Random(3)
    for _ in range(5):
        pt = {k: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for k in ("y1", "y2", "v1", "t")}
        pt["v2"] = Fraction(rng.randint(1, 9), rng.randint(1, 5))
        c = chart_point(pt["y1"], pt["y2"], pt["v1"], pt["v2"], pt["t"])
        assert s.h_chart.eval_at(c) == s.h_expr.eval_at(pt)


def test_chart_expressions():
    s = load_system("y2", "y1")
    assert s.p_expr == P("-v1/v2") and s.q_expr == P("-v2")
    assert s.h_chart == P("-(y2 + p*y1)/q")
    assert s.working_set() == [DEFAULT.var("p"), DEFAULT.var("q")]


def test_pfaffian_system_has_four_forms():
    forms = pfaffian_system(load_system("y1", "t"))
    assert len(forms) == 4 and all(f.degree == 1 for f in forms)


def test_inputs_restricted_to_input_variables():
    with pytest.raises(ParseError):
        load_system("p", "0")
    with pytest.raises(ParseError) as info:
        load_system("1/0", "0")
    assert str(info.value).startswith("f:")


def test_system_file_format(tmp_path):
    text = "# comment\n\nf = v1^2  # trailing\ng = -y1*t\n"
    assert parse_system_text(text) == ("v1^2", "-y1*t")
    path = tmp_path / "s.ode"
    path.write_text(text)
    s = load_system_file(path)
    assert s.f == P("v1^2") and s.g == P("-y1*t")


@pytest.mark.parametrize("text", ["f = 1\n", "f = 1\nf = 2\ng = 0\n", "f = 1\ng = 0\nh = 3\n", "f 1\ng = 0\n"])
def test_bad_system_files(text):
    with pytest.raises(ParseError):
        parse_system_text(text)


def test_total_derivative():
    f, g = P("y1"), P("t")
    assert total_derivative(P("v1*y2"), f, g) == P("y1*y2 + v1*v2")


@given(st.integers(0, 10**6))
def test_h_identity(seed):
    f_text, g_text = random_system_text(random.Random(seed))
    s = load_system(f_text, g_text)
    p, q = DEFAULT.vars("p", "q")
    assert (s.h_chart * q * q + q * s.f_chart + p * q * s.g_chart).is_zero()


@given(st.integers(0, 10**6))
def test_determinant_ignores_the_right_hand_side(seed):
    f_text, g_text = random_system_text(random.Random(seed))
    det = load_system(f_text, g_text).coframe.determinant()
    assert det == load_system("0", "0").coframe.determinant() == P("p*q")


@given(st.integers(0, 10**6))
def test_pfaffian_forms_vanish_on_solutions(seed):
    # pull the forms back along the graph of a solution: (y, -v1/v2, -v2, t) with y'' = (f, g)
    f_text, g_text = random_system_text(random.Random(seed))
    s = load_system(f_text, g_text)
    pq = {"v1": DEFAULT.var("p") * DEFAULT.var("q"), "v2": -DEFAULT.var("q")}
    tangent = [pq["v1"], pq["v2"], -s.h_chart, -s.g_chart, DEFAULT.one]
    for form in pfaffian_system(s):
        assert sum((form.coeff(j) * tangent[j] for j in range(5)), DEFAULT.zero).is_zero()


def test_coframe_structure_is_closed_under_d():
    s = load_system("v1^2", "y1*v2")
    for form in s.coframe.forms:
        assert ext_d(ext_d(form)).is_zero()


# -- transformations ----------------------------------------------------------

SHEAR = ((P("y1 + y2^2"), P("y2"), P("t + y1")), (P("y1 - y2^2"), P("y2"), P("t - y1 + y2^2")))


def test_transform_of_trivial_by_shear_is_nontrivial():
    s = transform_system(load_system("0", "0"), *SHEAR)
    assert not (s.f.is_zero() and s.g.is_zero())
    back = transform_system(s, SHEAR[1], SHEAR[0])
    assert back.f.is_zero() and back.g.is_zero()


def test_transform_rejects_wrong_inverse():
    with pytest.raises(ValueError):
        transform_system(load_system("0", "0"), SHEAR[0], SHEAR[0])


def test_transform_by_identity():
    s = load_system("y2*v1", "t")
    ident = tuple(DEFAULT.vars("y1", "y2", "t"))
    out = transform_system(s, ident, ident)
    assert out.f == s.f and out.g == s.g


def test_prolong_point():
    fwd = SHEAR[0]
    pt = {"y1": Fraction(1), "y2": Fraction(2), "v1": Fraction(3), "v2": Fraction(1), "t": Fraction(0)}
    img = prolong_point(fwd, pt)
    # dT = 1 + v1 = 4; dY1 = v1 + 2 y2 v2 = 7; dY2 = v2 = 1
    assert img == {"y1": 5, "y2": 2, "t": 1, "v1": Fraction(7, 4), "v2": Fraction(1, 4)}


def test_chart_point_needs_nonzero_v2():
    with pytest.raises(ZeroDivisionError):
        chart_point(0, 0, 1, 0, 0)
    assert chart_point(0, 0, 2, 1, 0)["p"] == -2
    assert issubclass(PoleError, ZeroDivisionError)
