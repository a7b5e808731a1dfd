import math

import pytest
from hypothesis import given, strategies as st

from schemasim.fields import KinematicState
from schemasim.fsm import ContractError
from schemasim.geometry import FieldGeometry, ROLE_SECTORS, home_position, sector_of, soccer_geometry
from schemasim.rng import Stream, robot_stream
from schemasim.schemas import (
    ROLES, RobotView, SchemaParams, SensedAttractor, assemblage_for_role, assigned_sectors, behind_ball_point,
    evaluate_releasers, releaser_priority, schema_force, schema_target,
)
from schemasim.vec import Vec2

PARAMS = SchemaParams()
FORAGE = FieldGeometry(20, 20, bins={"red": Vec2(8.5, 10), "blue": Vec2(11.5, 10)})
SOCCER = soccer_geometry(18, 12, 3)


def view(**kw):
    kw.setdefault("me", KinematicState(Vec2(5, 5)))
    kw.setdefault("role", "forager")
    kw.setdefault("geometry", FORAGE)
    return RobotView(**kw)


def test_red_visible_near_unclaimed_attractor():
    v = view(sensed_attractors=(SensedAttractor("red", Vec2(5.2, 5)),))
    assert "red_visible" in evaluate_releasers(v, PARAMS, "WANDER")


def test_claimed_attractor_is_invisible():
    v = view(sensed_attractors=(SensedAttractor("red", Vec2(5.2, 5), claimed=True),))
    rel = evaluate_releasers(v, PARAMS, "WANDER")
    assert "red_visible" not in rel and "not_red_visible" in rel


def test_goal_keeper_ball_close():
    ball = KinematicState(Vec2(0.5, 6))
    v = view(role="goal_keeper", geometry=SOCCER, me=KinematicState(Vec2(2, 6)), ball=ball)
    assert "ball_close" in evaluate_releasers(v, PARAMS, "WANDER")


def test_empty_view_gives_nothing_for_soccer():
    v = view(role="forward", geometry=SOCCER)
    assert evaluate_releasers(v, PARAMS, "WANDER") == []


def test_empty_foraging_view_only_negations():
    # not_*_visible are negations, so they do hold with nothing in sight
    rel = evaluate_releasers(view(), PARAMS, "WANDER")
    assert set(rel) == {"not_red_visible", "not_blue_visible"}


def test_priority_puts_current_alternatives_first():
    fsm = assemblage_for_role("forward")
    order = releaser_priority(fsm, "WANDER")
    assert order[:3] == ("ball_visible", "close_to_ball", "off")
    assert sorted(order) == sorted(fsm.alphabet)


def test_ball_visible_gated_by_sector():
    me = KinematicState(Vec2(14, 6))
    inside = view(role="forward", geometry=SOCCER, me=me, ball=KinematicState(Vec2(15, 6)))
    outside = view(role="forward", geometry=SOCCER, me=me, ball=KinematicState(Vec2(10, 6)))
    assert "ball_visible" in evaluate_releasers(inside, PARAMS, "WANDER")
    assert "ball_visible" not in evaluate_releasers(outside, PARAMS, "WANDER")


def test_defend_target_is_midpoint():
    g = FieldGeometry(12, 8, goals={"red": (Vec2(0, 3), Vec2(0, 5)), "blue": (Vec2(12, 3), Vec2(12, 5))})
    v = view(role="goal_keeper", geometry=g, team="red", ball=KinematicState(Vec2(3.5, 4)),
             me=KinematicState(Vec2(1, 4)))
    # (3.5, 4) lies in the keeper's own cell, so the midpoint rule applies
    assert schema_target("DEFEND", v, PARAMS).p == Vec2(1.75, 4)


def test_defend_midpoint_example():
    assert (Vec2(6, 4) + Vec2(0, 4)) * 0.5 == Vec2(3, 4)


def test_behind_ball_point_example():
    assert behind_ball_point(Vec2(5, 5), Vec2(10, 5), 1) == Vec2(4, 5)


def test_behind_ball_target_when_not_lined_up():
    g = FieldGeometry(12, 10, goals={"red": (Vec2(0, 4), Vec2(0, 6)), "blue": (Vec2(12, 4), Vec2(12, 6))})
    ball = KinematicState(Vec2(9, 5))
    v = view(role="forward", geometry=g, team="red", ball=ball, me=KinematicState(Vec2(10, 7)))
    t = schema_target("BEHIND_BALL", v, SchemaParams(behind_offset=1))
    assert t.p == behind_ball_point(ball.p, Vec2(12, 5), 1) == Vec2(8, 5)


def test_behind_ball_strikes_when_lined_up():
    g = FieldGeometry(12, 10, goals={"red": (Vec2(0, 4), Vec2(0, 6)), "blue": (Vec2(12, 4), Vec2(12, 6))})
    ball = KinematicState(Vec2(9, 5))
    v = view(role="forward", geometry=g, team="red", ball=ball, me=KinematicState(Vec2(8.3, 5.05)))
    t = schema_target("BEHIND_BALL", v, PARAMS)
    assert t.p == ball.p and t.v.x > 0


def test_off_is_zero():
    assert schema_force("OFF", view(), PARAMS) == Vec2(0, 0)


def test_go_to_ball_parallel_to_offset():
    me = KinematicState(Vec2(14, 5))
    ball = KinematicState(Vec2(15.5, 6.5))
    v = view(role="forward", geometry=SOCCER, me=me, ball=ball)
    f = schema_force("GO_TO_BALL", v, PARAMS)
    d = ball.p - me.p
    assert abs(f.x * d.y - f.y * d.x) < 1e-9 and f.dot(d) > 0


def test_wander_needs_stream_and_is_reproducible():
    v = view(tick=123)
    with pytest.raises(ContractError):
        schema_force("WANDER", v, PARAMS)
    a = schema_force("WANDER", v, PARAMS, Stream(9, robot_stream(2)))
    b = schema_force("WANDER", v, PARAMS, Stream(9, robot_stream(2)))
    assert a == b
    assert a.norm() == pytest.approx(PARAMS.wander_gain)


def test_wander_heading_piecewise_constant():
    s = Stream(1, robot_stream(0))
    period = PARAMS.wander_period
    same = {schema_force("WANDER", view(tick=t), PARAMS, s) for t in range(period, 2 * period)}
    assert len(same) == 1
    assert schema_force("WANDER", view(tick=0), PARAMS, s) not in same


def test_unknown_state_raises():
    with pytest.raises(ContractError):
        schema_force("DANCE", view(), PARAMS)


def test_assemblage_for_role():
    assert len(assemblage_for_role("forager").states) == 6
    for role in ("forward", "center_half", "outside_left", "outside_right"):
        assert assemblage_for_role(role) is assemblage_for_role("forward")
    assert assemblage_for_role("goal_keeper").state(2).label == "DEFEND"
    assert assigned_sectors("outside_left") == {(2, 3), (3, 3)}
    with pytest.raises(ContractError):
        assemblage_for_role("striker")


def test_params_validated():
    with pytest.raises(ValueError):
        SchemaParams(sensor_range=0)
    with pytest.raises(ValueError):
        SchemaParams(wander_period=0)


# -- releaser soundness and completeness against an independent oracle ---------

def oracle(name, v, p):
    me = v.me.p
    dist = lambda a, b: math.hypot(a.x - b.x, a.y - b.y)  # noqa: E731
    sensed = v.ball is not None and dist(v.ball.p, me) <= p.sensor_range
    table = {"on": "on" in v.lifecycle, "off": "off" in v.lifecycle, "hit_ball": v.hit_ball}
    for c in ("red", "blue"):
        vis = any(a.color == c and not a.claimed and dist(a.position, me) <= p.sensor_range
                  for a in v.sensed_attractors)
        table[f"{c}_visible"] = vis
        table[f"not_{c}_visible"] = not vis
        table[f"{c}_in_gripper"] = v.gripper == c
        b = v.geometry.bins.get(c)
        table[f"close_to_{c}_bin"] = b is not None and dist(me, b) <= p.bin_radius
    in_zone = sensed and sector_of(v.ball.p, v.geometry, v.team) in ROLE_SECTORS[v.role]
    table["ball_visible"] = in_zone
    table["close_to_ball"] = sensed and dist(me, v.ball.p) <= p.ball_close_radius
    goal = None
    if v.team in v.geometry.goals:
        a, b = v.geometry.goals[v.team]
        goal = Vec2((a.x + b.x) / 2, (a.y + b.y) / 2)
    table["ball_close"] = sensed and goal is not None and dist(v.ball.p, goal) <= p.ball_near_goal_radius
    return table[name]


def point(w, h):
    return st.builds(Vec2, st.floats(0, w), st.floats(0, h))


@st.composite
def views(draw):
    role = draw(st.sampled_from(ROLES))
    if role == "forager":
        geom = FORAGE
        attractors = tuple(draw(st.lists(st.builds(SensedAttractor, st.sampled_from(["red", "blue"]),
                                                   point(20, 20), st.booleans()), max_size=5)))
        ball = None
    else:
        geom = SOCCER
        attractors = ()
        ball = draw(st.none() | st.builds(KinematicState, point(18, 12)))
    return RobotView(
        me=KinematicState(draw(point(geom.width, geom.height))), role=role, geometry=geom,
        team=draw(st.sampled_from(["red", "blue"])), sensed_attractors=attractors,
        gripper=draw(st.none() | st.sampled_from(["red", "blue"])) if role == "forager" else None,
        ball=ball, hit_ball=draw(st.booleans()),
        lifecycle=tuple(draw(st.sets(st.sampled_from(["on", "off"])))),
    )


@given(views(), st.data())
def test_releasers_bi_implication(v, data):
    fsm = assemblage_for_role(v.role)
    state = data.draw(st.sampled_from(fsm.states))
    emitted = evaluate_releasers(v, PARAMS, state)
    expected = [r for r in releaser_priority(fsm, state) if oracle(r, v, PARAMS)]
    assert emitted == expected
    if v.ball is not None and sector_of(v.ball.p, v.geometry, v.team) not in ROLE_SECTORS[v.role]:
        assert "ball_visible" not in emitted


@given(views(), st.data())
def test_schema_force_finite(v, data):
    fsm = assemblage_for_role(v.role)
    state = data.draw(st.sampled_from(fsm.states))
    f = schema_force(state, v, PARAMS, Stream(3, robot_stream(0)))
    assert f.is_finite()


def test_home_positions_lie_in_role_cells():
    for team in ("red", "blue"):
        for role in ("forward", "outside_left", "outside_right", "center_half", "goal_keeper"):
            h = home_position(role, team, SOCCER)
            cells = ROLE_SECTORS[role]
            if len(cells) == 1:
                assert sector_of(h, SOCCER, team) in cells
