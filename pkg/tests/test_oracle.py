import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathgeom import load_system
from pathgeom.liegroup import FractalLinearMap, inverse, pushforward_trivial, random_map
from pathgeom.oracle import Trajectory, compile_expr, integrate, pfaffian_residual, straightness_residual
from pathgeom.symexpr import PoleError, parse_expr

ID = FractalLinearMap.identity()


def test_free_motion_is_linear():
    traj = integrate(load_system("0", "0"), (0.5, -1.0, 1.0, 2.0, 0.0), 100, 0.01)
    for t, y1, y2, v1, v2 in traj.samples:
        assert abs(y1 - (0.5 + t)) < 1e-12 and abs(y2 - (-1.0 + 2 * t)) < 1e-12


def test_constant_force_is_exact():
    traj = integrate(load_system("1", "0"), (0.0, 0.0, 1.0, 1.0, 0.0), 100, 0.01)
    for t, y1, y2, v1, v2 in traj.samples:
        assert abs(y1 - (t + t * t / 2)) < 1e-12
        assert abs(v1 - (1 + t)) < 1e-12


def test_quadratic_velocity_closed_form():
    traj = integrate(load_system("v1^2", "0"), (0.0, 0.0, 1.0, 1.0, 0.0), 500, 1e-3)
    t, y1 = traj.samples[-1][0], traj.samples[-1][1]
    assert abs(t - 0.5) < 1e-12
    assert abs(y1 + math.log(1 - t)) < 1e-6


def test_blow_up_is_reported():
    with pytest.raises(PoleError):
        integrate(load_system("v1^2", "0"), (0.0, 0.0, 1.0, 1.0, 0.0), 2000, 1e-3)


def test_straightness_examples():
    line = integrate(load_system("0", "0"), (0.0, 0.0, 1.0, 0.5, 0.0), 500, 1e-3)
    assert straightness_residual(line, ID) < 1e-12
    curved = integrate(load_system("1", "0"), (0.0, 0.0, 1.0, 1.0, 0.0), 500, 1e-3)
    assert straightness_residual(curved, ID) > 1e-3
    bent = FractalLinearMap((1, 1, 0), (0, 0, 0), ((0, 1, 0), (0, 0, 1)))
    assert straightness_residual(curved, bent) > 1e-3


@pytest.mark.parametrize("seed", [0, 5])
def test_generated_systems_are_straightened(seed):
    m = random_map(seed)
    s = pushforward_trivial(m)
    traj = integrate(s, (0.1, 0.2, 0.3, 0.4, 0.0), 500, 1e-3)
    assert straightness_residual(traj, m) < 1e-6
    assert straightness_residual(traj, inverse(m)) < 1e-6


def test_straightening_map_of_quadratic_velocity():
    traj = integrate(load_system("v1^2", "0"), (0.0, 0.0, 1.0, 1.0, 0.0), 400, 1e-3)
    identity_exprs = (parse_expr("y1"), parse_expr("y2"), parse_expr("t"))
    assert straightness_residual(traj, lambda y1, y2, t: (-math.exp(-y1), y2, t)) < 1e-9
    assert straightness_residual(traj, ID) > 1e-3
    assert straightness_residual(traj, identity_exprs) > 1e-3


def test_pfaffian_residual_discriminates():
    traj = integrate(load_system("v1^2", "y1"), (0.0, 0.1, 0.5, 0.5, 0.0), 200, 1e-3)
    assert pfaffian_residual(load_system("v1^2", "y1"), traj) < 1e-8
    assert pfaffian_residual(load_system("0", "y1"), traj) > 1e-3


def test_csv_round_trip():
    traj = integrate(load_system("v1^2", "y1*t"), (0.0, 0.1, 0.5, 0.5, 0.0), 20, 0.01)
    text = traj.to_csv()
    assert text.splitlines()[0] == "t,y1,y2,v1,v2"
    back = Trajectory.from_csv(text)
    assert back.samples == traj.samples
    assert back.to_csv() == text


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(((0.0, 0, 0, 0, 0), (0.0, 0, 0, 0, 0)), 0.1)
    with pytest.raises(ValueError):
        Trajectory(((0.0, math.nan, 0, 0, 0),), 0.1)
    with pytest.raises(ValueError):
        Trajectory.from_csv("a,b\n1,2\n")


def test_compile_expr():
    fn = compile_expr(parse_expr("(y1^2 - t)/(v2 + 1)"), ("y1", "y2", "v1", "v2", "t"))
    assert fn(2.0, 0.0, 0.0, 1.0, 1.0) == 1.5
    with pytest.raises(PoleError):
        fn(0.0, 0.0, 0.0, -1.0, 0.0)
    with pytest.raises(ValueError):
        compile_expr(parse_expr("p"), ("y1",))


@given(st.integers(-3, 3), st.integers(1, 3), st.floats(-1, 1), st.floats(-1, 1))
def test_linear_trajectories_are_straight_under_fractal_linear_maps(k, d, v1, v2):
    m = FractalLinearMap((1, 0, 0), (0, 0, 0), ((0, 1, 0), (0, 0, 1)))
    traj = integrate(load_system("0", "0"), (k / d, 0.0, v1, v2, 0.0), 50, 0.01)
    assert straightness_residual(traj, m) < 1e-9
