import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathgeom import load_system, load_system_file
from pathgeom.liegroup import pushforward_trivial, random_map
from pathgeom.reduction import (
    FLAT,
    FLAT_CANDIDATE,
    GENERIC,
    GENERIC_BRANCH,
    UNDETERMINED,
    UNDETERMINED_BRANCH,
    GroupParams,
    StageError,
    TorsionStage2,
    check,
    classify_branch,
    lift_coframe,
    stage1_normalize,
    stage1_torsion,
    stage2_torsion,
)
from pathgeom.reduction.pipeline import apply_matrix, normal_form
from pathgeom.reduction.structure import structure_functions
from pathgeom.symexpr import DEFAULT, parse_expr
from strategies import random_system_text

P = parse_expr
FIXTURES = Path(__file__).parent / "fixtures"
p, q = DEFAULT.vars("p", "q")


def test_lift_identity_is_base_coframe():
    s = load_system("y2", "v1^2")
    cf = lift_coframe(s, GroupParams.identity())
    assert cf.forms == s.coframe.forms


def test_lift_diagonal_scales_first_form():
    s = load_system("y2", "v1^2")
    gp = GroupParams.identity()
    gp.a = DEFAULT.const(2)
    cf = lift_coframe(s, gp)
    assert cf.forms[0] == s.coframe.forms[0] * 2
    assert cf.forms[1:] == s.coframe.forms[1:]


def test_lift_rejects_singular_elements():
    gp = GroupParams.identity()
    gp.c = DEFAULT.zero
    with pytest.raises(StageError):
        lift_coframe(load_system("0", "0"), gp)


def test_lift_with_symbolic_group_parameters():
    s = load_system("0", "0")
    a, b, c = DEFAULT.vars("a", "b", "c")
    gp = GroupParams(a, b, c, DEFAULT.zero, DEFAULT.one, [[DEFAULT.zero] * 2] * 2,
                     [[DEFAULT.one, DEFAULT.zero], [DEFAULT.zero, DEFAULT.one]])
    cf = lift_coframe(s, gp)
    assert cf.forms[0] == s.coframe.forms[0] * a + s.coframe.forms[1] * b


def test_stage1_trivial():
    t1 = stage1_torsion(load_system("0", "0"))
    assert t1.J.is_zero()
    assert t1.A == (1 / p, DEFAULT.zero)
    assert t1.B == (DEFAULT.zero, -1 / (p * q))


def test_stage1_constant_force():
    s = load_system("1", "0")
    assert stage1_torsion(s).J == P("1/(p*q^2)")


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_stage1_parametric_formula(seed):
    s = load_system(*random_system_text(random.Random(seed)))
    t1 = stage1_torsion(s)
    assert (t1.J + s.h_chart / (p * q)).is_zero()
    assert t1.A == (1 / p, DEFAULT.zero)
    assert t1.B == (DEFAULT.zero, -1 / (p * q))


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_section_reaches_normal_form_and_relations_hold(seed):
    s = load_system(*random_system_text(random.Random(seed)))
    red = stage1_normalize(s)
    res = normal_form("stage1").solve(red.structure)
    assert res.torsion == {"J": DEFAULT.zero, "A1": DEFAULT.zero, "A2": DEFAULT.one,
                           "B1": DEFAULT.one, "B2": DEFAULT.zero}
    assert all(v.is_zero() for v in red.relations.values())


def test_stage1_normalized_trivial_slot():
    red = stage1_normalize(load_system("0", "0"))
    # d eta^2 has eta^1 ^ eta^5 with coefficient 1
    assert red.structure[(1, 0, 4)] == DEFAULT.one
    N = red.section.N
    assert N[0][0].is_zero() and N[1][1].is_zero()


def test_section_inverse_consistency():
    # undoing the section recovers the base coframe
    from pathgeom.linalg import inverse_and_det

    s = load_system("y1*v2", "t*v1^2")
    red = stage1_normalize(s)
    inv, _ = inverse_and_det(red.section.matrix())
    back = apply_matrix(inv, red.coframe)
    assert back.forms == s.coframe.forms


def test_stage2_trivial_is_zero():
    t2 = stage2_torsion(stage1_normalize(load_system("0", "0")))
    assert all(v.is_zero() for v in t2.as_dict().values())


def test_stage2_accepts_a_coframe():
    red = stage1_normalize(load_system("v1^3", "v2^3"))
    assert stage2_torsion(red.coframe).as_dict() == stage2_torsion(red).as_dict()


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_stage2_relative_invariants_vanish_on_generated(seed):
    t2 = stage2_torsion(stage1_normalize(pushforward_trivial(random_map(seed))))
    assert t2.C.is_zero() and t2.D.is_zero()


def test_stage2_relative_invariants_vanish_on_non_projective_images():
    from pathgeom.ode_model import transform_system

    fwd = (P("y1 + y2^2"), P("y2"), P("t + y1"))
    inv = (P("y1 - y2^2"), P("y2"), P("t - y1 + y2^2"))
    t2 = stage2_torsion(stage1_normalize(transform_system(load_system("0", "0"), fwd, inv)))
    assert t2.C.is_zero() and t2.D.is_zero()


def test_stage2_gauge_independence_of_d_vanishing():
    # D is a relative invariant: a residual group element rescales it but cannot create or remove zeros
    from pathgeom.reduction.groups import gamma_scaling, translation

    red = stage1_normalize(load_system("v1^3", "v2^3"))
    D0 = stage2_torsion(red).D
    lam = P("2 + p^2")
    moved = apply_matrix(gamma_scaling(lam), apply_matrix(translation(P("y1"), P("q"), P("1/3")), red.coframe))
    D1 = stage2_torsion(moved).D
    assert D1 == D0 / lam


def test_classify_branch():
    z, one = DEFAULT.zero, DEFAULT.one
    assert classify_branch(TorsionStage2(z, z, z, z)) == FLAT_CANDIDATE
    assert classify_branch(TorsionStage2(z, z, one, z)) == UNDETERMINED_BRANCH
    assert classify_branch(TorsionStage2(z, z, z, p)) == GENERIC_BRANCH


def test_check_on_fixtures():
    assert check(load_system_file(FIXTURES / "trivial.ode")).kind == FLAT
    assert check(load_system_file(FIXTURES / "generic_fixture.ode")).kind == GENERIC
    v = check(load_system_file(FIXTURES / "undetermined_fixture.ode"))
    assert v.kind == UNDETERMINED
    assert "D = 0 but C != 0" in v.reason
    assert v.details["branch"] == UNDETERMINED_BRANCH


def test_undetermined_fixture_torsion():
    t2 = stage2_torsion(stage1_normalize(load_system("0", "t*v1^2")))
    assert t2.D.is_zero()
    assert t2.C == P("p/q")


def test_check_is_deterministic():
    a = check(load_system("v1^3", "v2^3")).to_json()
    b = check(load_system("v1^3", "v2^3")).to_json()
    assert a == b


def test_verdict_json_shape():
    out = check(load_system("0", "0")).to_json()
    assert out == {"verdict": "flat", "reason": None, "genericity_conditions": ["p", "q"],
                   "invariants": None, "relations": None}


def test_structure_functions_rebuild_d():
    from pathgeom.exterior import ext_d

    cf = stage1_normalize(load_system("y2", "v1")).coframe
    C = structure_functions(cf)
    for i, form in enumerate(cf.forms):
        rows = {(j, k): v for (r, j, k), v in C.items() if r == i}
        assert cf.expand(rows, 2) == ext_d(form)
