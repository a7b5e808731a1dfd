import math
import random

import pytest
from hypothesis import assume, given, strategies as st

from oracles import attractive_case, attractive_matches_fd, repulsive_case, repulsive_matches_fd
from schemasim.fields import (
    AttractiveParams, Branch, DomainError, KinematicState, OracleError, RepulsiveParams, attractive_force,
    attractive_potential, braking_distance, fd_gradient, force_grid, relative_approach_speed, repulsive_force,
    repulsive_gradient_force, repulsive_potential, total_force,
)
from schemasim.vec import Vec2, ZERO

ORIGIN = KinematicState(Vec2(0, 0), Vec2(0, 0))
TARGET = KinematicState(Vec2(3, 4), Vec2(1, 0))
ATTR = AttractiveParams(1, 0.5, 2, 2)
REP = RepulsiveParams(eta=1, rho_0=5, a_max=1, f_max=8)

finite = st.floats(-20, 20, allow_nan=False)
vecs = st.builds(Vec2, finite, finite)
states = st.builds(KinematicState, vecs, vecs)


def test_attractive_potential_examples():
    assert attractive_potential(KinematicState(Vec2(3, 4), Vec2(1, 0)), TARGET, ATTR) == 0
    assert attractive_potential(ORIGIN, TARGET, ATTR) == pytest.approx(25.5)


def test_attractive_position_only():
    p = AttractiveParams(1, 0, 2, 2)
    a = attractive_potential(ORIGIN, TARGET, p)
    b = attractive_potential(KinematicState(Vec2(0, 0), Vec2(9, -3)), TARGET, p)
    assert a == b == 25


def test_attractive_force_example():
    assert attractive_force(ORIGIN, TARGET, ATTR) == pytest.approx(Vec2(7, 8))


def test_attractive_force_zero_at_coincidence():
    assert attractive_force(TARGET, TARGET, ATTR) == Vec2(0.0, 0.0)


def test_attractive_singular_exponent_guard():
    with pytest.raises(DomainError):
        attractive_force(TARGET, TARGET, AttractiveParams(1, 0, 1.5, 2))


def test_attractive_force_points_at_target_without_velocity_term():
    f = attractive_force(ORIGIN, TARGET, AttractiveParams(2, 0, 3, 2))
    d = TARGET.p - ORIGIN.p
    assert abs(f.x * d.y - f.y * d.x) < 1e-12 and f.dot(d) > 0


@pytest.mark.parametrize("kw", [dict(alpha_p=0), dict(alpha_v=-1), dict(m=0.5), dict(n=0.9)])
def test_attractive_params_validated(kw):
    with pytest.raises(ValueError):
        AttractiveParams(**kw)


@pytest.mark.parametrize("kw", [dict(eta=0), dict(rho_0=-1), dict(a_max=math.inf), dict(f_max=math.nan)])
def test_repulsive_params_validated(kw):
    with pytest.raises(ValueError):
        RepulsiveParams(**kw)


def test_relative_approach_speed_examples():
    obs = KinematicState(Vec2(5, 0))
    assert relative_approach_speed(KinematicState(Vec2(0, 0), Vec2(2, 0)), obs) == 2
    assert relative_approach_speed(KinematicState(Vec2(0, 0), Vec2(-1, 0)), obs) == -1
    assert relative_approach_speed(KinematicState(Vec2(0, 0), Vec2(1, 1)), KinematicState(Vec2(5, 0), Vec2(1, 1))) == 0
    with pytest.raises(DomainError):
        relative_approach_speed(ORIGIN, ORIGIN)


def test_repulsive_potential_active_example():
    robot = KinematicState(Vec2(0, 0), Vec2(2, 0))
    s = repulsive_potential(robot, KinematicState(Vec2(4, 0)), REP)
    assert s.branch is Branch.ACTIVE
    assert s.potential == pytest.approx(0.3)
    assert braking_distance(2, 1) == 2


def test_repulsive_potential_receding_is_zero():
    s = repulsive_potential(KinematicState(Vec2(0, 0), Vec2(-2, 0)), KinematicState(Vec2(0.5, 0)), REP)
    assert s.branch is Branch.ZERO and s.potential == 0


def test_repulsive_collision_branch():
    robot = KinematicState(Vec2(0, 0), Vec2(2, 0))
    obs = KinematicState(Vec2(1, 0))
    assert repulsive_potential(robot, obs, REP).branch is Branch.UNDEFINED_COLLISION
    f = repulsive_force(robot, obs, REP)
    assert f.potential is None
    assert f.force.norm() == pytest.approx(REP.f_max)
    assert f.force.x < 0  # away from the obstacle


def test_repulsive_coincident_raises():
    with pytest.raises(DomainError):
        repulsive_potential(ORIGIN, ORIGIN, REP)
    with pytest.raises(DomainError):
        repulsive_force(ORIGIN, ORIGIN, REP)


def test_repulsive_force_active_example_matches_fd():
    robot = KinematicState(Vec2(0, 0), Vec2(2, 0))
    obs = KinematicState(Vec2(4, 0))
    assert repulsive_matches_fd(robot, obs, REP)
    f = repulsive_force(robot, obs, REP).force
    assert f.x < 0 and abs(f.y) < 1e-12


def test_repulsive_force_is_clamped():
    robot = KinematicState(Vec2(0, 0), Vec2(2, 0))
    obs = KinematicState(Vec2(2.05, 0))
    raw = repulsive_gradient_force(robot, obs, REP)
    assert raw.norm() > REP.f_max
    assert repulsive_force(robot, obs, REP).force.norm() == pytest.approx(REP.f_max)


def test_total_force_without_obstacles_is_attraction():
    assert total_force(ORIGIN, TARGET, [], ATTR, REP) == attractive_force(ORIGIN, TARGET, ATTR)
    far = KinematicState(Vec2(100, 100))
    assert total_force(ORIGIN, TARGET, [far], ATTR, REP) == attractive_force(ORIGIN, TARGET, ATTR)


def test_total_force_deflects_around_closing_obstacle():
    robot = KinematicState(Vec2(0, 0), Vec2(1.5, 0.3))
    target = KinematicState(Vec2(10, 0))
    obs = KinematicState(Vec2(2, 0.2))
    attr = AttractiveParams(1, 0, 2, 2)
    rep = RepulsiveParams(1, 3, 4, 100)
    f = total_force(robot, target, [obs], attr, rep)
    expected = attractive_force(robot, target, attr) + repulsive_force(robot, obs, rep).force
    assert f == expected
    assert abs(f.y) > 1e-3  # off the robot-target line


def test_fd_gradient_examples():
    gp, gv = fd_gradient(lambda p, v: (3 - p.x) ** 2 + (4 - p.y) ** 2, ORIGIN)
    assert gp.x == pytest.approx(-6, abs=1e-4) and gp.y == pytest.approx(-8, abs=1e-4)
    assert gv == Vec2(0, 0)
    assert fd_gradient(lambda p, v: 7.0, ORIGIN) == (Vec2(0, 0), Vec2(0, 0))
    gp, _ = fd_gradient(lambda p, v: p.x * p.y, KinematicState(Vec2(2, 3)))
    assert gp.x == pytest.approx(3) and gp.y == pytest.approx(2)


def test_fd_gradient_rejects_non_finite():
    with pytest.raises(OracleError):
        fd_gradient(lambda p, v: math.inf, ORIGIN)
    with pytest.raises(OracleError):
        fd_gradient(lambda p, v: None, ORIGIN)
    with pytest.raises(ValueError):
        fd_gradient(lambda p, v: 0.0, ORIGIN, h=0)


def test_force_grid_records():
    recs = force_grid([0.0, 1.0], [5.0], lambda p: Vec2(p.x, -p.y))
    assert recs == [(0.0, 5.0, 0.0, -5.0), (1.0, 5.0, 1.0, -5.0)]


@given(st.integers(0, 2**32 - 1))
def test_attractive_gradient_property(seed):
    assert attractive_matches_fd(*attractive_case(random.Random(seed)))


@given(st.integers(0, 2**32 - 1))
def test_repulsive_gradient_property(seed):
    assert repulsive_matches_fd(*repulsive_case(random.Random(seed)))


@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi))
def test_rotation_equivariance(seed, angle):
    rng = random.Random(seed)
    robot, target, attr = attractive_case(rng)
    _, obstacle, rep = repulsive_case(rng)
    obstacle = KinematicState(robot.p + (obstacle.p - robot.p).unit() * 1.0, obstacle.v)
    rep = RepulsiveParams(rep.eta, rep.rho_0, rep.a_max, 8.0)

    def rot(k):
        return KinematicState(k.p.rotate(angle), k.v.rotate(angle))

    f = total_force(robot, target, [obstacle], attr, rep)
    g = total_force(rot(robot), rot(target), [rot(obstacle)], attr, rep)
    assert (g - f.rotate(angle)).norm() <= 1e-9 * max(1.0, f.norm())


@given(st.integers(0, 2**32 - 1))
def test_potential_monotone_in_closing_speed(seed):
    rng = random.Random(seed)
    rep = RepulsiveParams(rng.uniform(0.1, 3), rng.uniform(0.5, 3), rng.uniform(1, 6), 8)
    rho_s = rng.uniform(0.1, 3)
    obs = KinematicState(Vec2(rho_s, 0))
    speeds = sorted(rng.uniform(0.01, 4) for _ in range(6))
    last = -math.inf
    for s in speeds:
        sample = repulsive_potential(KinematicState(Vec2(0, 0), Vec2(s, 0)), obs, rep)
        if sample.branch is Branch.UNDEFINED_COLLISION:
            break
        assert sample.potential >= last
        last = sample.potential


@given(states, states)
def test_repulsive_branch_rules(robot, obstacle):
    assume(robot.p != obstacle.p)
    s = repulsive_force(robot, obstacle, REP)
    v_ro = relative_approach_speed(robot, obstacle)
    margin = (obstacle.p - robot.p).norm() - braking_distance(v_ro, REP.a_max)
    if v_ro <= 0 or margin >= REP.rho_0:
        assert s.branch is Branch.ZERO and s.force == ZERO and s.potential == 0
    elif margin > 0:
        assert s.branch is Branch.ACTIVE and s.potential > 0 and s.force.norm() <= REP.f_max * (1 + 1e-12)
    else:
        assert s.branch is Branch.UNDEFINED_COLLISION
        assert s.force.norm() == pytest.approx(REP.f_max)
    assert s.force.is_finite()


@pytest.mark.parametrize("eps", [1e-3, 1e-4, 1e-5, 1e-6])
def test_potential_vanishes_at_outer_boundary(eps):
    v = 1.0
    rho_s = REP.rho_0 - eps + braking_distance(v, REP.a_max)
    s = repulsive_potential(KinematicState(Vec2(0, 0), Vec2(v, 0)), KinematicState(Vec2(rho_s, 0)), REP)
    assert s.branch is Branch.ACTIVE
    assert 0 < s.potential <= REP.eta * eps / (REP.rho_0 - eps) ** 2 * (1 + 1e-6)
