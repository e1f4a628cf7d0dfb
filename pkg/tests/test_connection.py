import pytest

from pathgeom import load_system
from pathgeom.connection import Christoffel, NotQuadratic, curvature, extract_christoffel, is_flat_connection
from pathgeom.reduction import FLAT, check
from pathgeom.symexpr import DEFAULT, parse_expr

P = parse_expr
POLAR = ("y1*v2^2", "-2*v1*v2/y1")
PERTURBED = ("(y1 - y1^3)*v2^2", "-2*v1*v2/y1")


def test_extract_examples():
    G = extract_christoffel(load_system("v1^2", "0")).gamma
    assert G[0][0][0] == P("-1")
    flat = [G[i][j][k] for i in range(2) for j in range(2) for k in range(2)]
    assert sum(not x.is_zero() for x in flat) == 1
    assert all(x.is_zero() for row in extract_christoffel(load_system("0", "0")).gamma for r in row for x in r)


@pytest.mark.parametrize("f,g", [("t*v1^2", "0"), ("v1", "0"), ("v1^3", "0"), ("1/v1", "0")])
def test_not_quadratic(f, g):
    with pytest.raises(NotQuadratic):
        extract_christoffel(load_system(f, g))


def test_polar_symbols():
    G = extract_christoffel(load_system(*POLAR)).gamma
    assert G[0][1][1] == P("-y1")
    assert G[1][0][1] == G[1][1][0] == P("1/y1")


def test_curvature_examples():
    z = Christoffel.from_entries(DEFAULT, {})
    assert curvature(z).nonzero_components() == []
    assert is_flat_connection(z)
    assert is_flat_connection(Christoffel.from_entries(DEFAULT, {(1, 1, 1): -1}))
    polar = Christoffel.from_entries(DEFAULT, {(1, 2, 2): P("-y1"), (2, 1, 2): P("1/y1")})
    assert is_flat_connection(polar)
    bent = Christoffel.from_entries(DEFAULT, {(1, 2, 2): P("-y1 + y1^3"), (2, 1, 2): P("1/y1")})
    R = curvature(bent)
    assert not is_flat_connection(bent)
    assert (1, 2, 1, 2) in R.nonzero_components()
    # brute-force value at y1 = 2
    assert R.R[0][1][0][1].eval_at({"y1": 2}) != 0


def test_curvature_antisymmetry_and_bianchi():
    G = extract_christoffel(load_system("y2*v1^2 + y1*v1*v2", "y1^2*v2^2 - v1*v2")).gamma
    R = curvature(Christoffel(G)).R
    idx = range(2)
    for i in idx:
        for j in idx:
            for k in idx:
                for l in idx:
                    assert R[i][j][k][l] == -R[i][j][l][k]
                    # first Bianchi identity of a torsion-free connection
                    assert (R[i][j][k][l] + R[i][k][l][j] + R[i][l][j][k]).is_zero()
    assert curvature(Christoffel(G)).nonzero_components()


def test_symmetry_enforced():
    z, one = DEFAULT.zero, DEFAULT.one
    with pytest.raises(ValueError):
        Christoffel((((z, one), (z, z)), ((z, z), (z, z))))


@pytest.mark.parametrize("f,g", [("0", "0"), ("v1^2", "0"), POLAR])
def test_flat_connections_give_flat_verdicts(f, g):
    s = load_system(f, g)
    assert is_flat_connection(extract_christoffel(s))
    assert check(s).kind == FLAT


def test_perturbed_polar_is_curved():
    s = load_system(*PERTURBED)
    assert not is_flat_connection(extract_christoffel(s))
