"""Motor schemas: perceptual releasers and per-behavior steering forces.

Each robot role is bound to an assemblage (a compiled FSM). On every tick the
world hands a robot a :class:`RobotView`; :func:`evaluate_releasers` turns it
into the ordered list of releasers that hold, and :func:`schema_force` turns
the robot's current behavior into a force built from attractive and repulsive
potential fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import NamedTuple, Optional, Union

from .dsl import compile_source
from .fields import AttractiveParams, KinematicState, RepulsiveParams, attractive_force, repulsive_force, total_force
from .fsm import ContractError, Fsm, StateId
from .geometry import ROLE_SECTORS, Cell, FieldGeometry, home_position, other_team, sector_of
from .rng import Stream
from .vec import ZERO, Vec2, distance

ROLES = ("forager", "forward", "goal_keeper", "center_half", "outside_left", "outside_right")
SOCCER_ROLES = ROLES[1:]
COLORS = ("red", "blue")

_ROLE_SOURCE = {
    "forager": "foraging.asm.txt",
    "forward": "forward.asm.txt",
    "center_half": "forward.asm.txt",
    "outside_left": "forward.asm.txt",
    "outside_right": "forward.asm.txt",
    "goal_keeper": "goal_keeper.asm.txt",
}


@lru_cache(maxsize=None)
def _load(name: str) -> Fsm:
    return compile_source(resources.files("schemasim.scenarios").joinpath(name).read_text("utf-8"))


def assemblage_for_role(role: str) -> Fsm:
    try:
        return _load(_ROLE_SOURCE[role])
    except KeyError:
        raise ContractError(f"unknown role: {role!r}") from None


def assigned_sectors(role: str) -> frozenset[Cell]:
    if role not in ROLE_SECTORS:
        raise ContractError(f"unknown role: {role!r}")
    return ROLE_SECTORS[role]


class SensedAttractor(NamedTuple):
    color: str
    position: Vec2
    claimed: bool = False


@dataclass(frozen=True)
class SchemaParams:
    sensor_range: float = 5.0
    grip_radius: float = 0.3
    bin_radius: float = 0.5
    ball_close_radius: float = 1.0
    ball_near_goal_radius: float = 2.0
    behind_offset: float = 0.8
    strike_speed: float = 2.0
    strike_corridor: float = 0.25
    wander_period: int = 40
    wander_gain: float = 2.0
    attr: AttractiveParams = field(default_factory=AttractiveParams)
    rep: RepulsiveParams = field(default_factory=RepulsiveParams)
    wall_rep: RepulsiveParams = field(default_factory=lambda: RepulsiveParams(1.0, 1.0, 4.0, 8.0))

    def __post_init__(self):
        for name in ("sensor_range", "grip_radius", "bin_radius", "ball_close_radius",
                     "ball_near_goal_radius", "behind_offset", "wander_gain"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.strike_corridor < 0:
            raise ValueError("strike_corridor must be >= 0")
        if self.strike_speed < 0:
            raise ValueError("strike_speed must be >= 0")
        if not (isinstance(self.wander_period, int) and self.wander_period > 0):
            raise ValueError("wander_period must be a positive integer")


@dataclass(frozen=True)
class RobotView:
    """What one robot perceives at the start of a tick.

    Everything sensed (attractors, ball, other robots) is already filtered to
    ``sensor_range`` by whoever builds the view.
    """

    me: KinematicState
    role: str
    geometry: FieldGeometry
    team: str = "red"
    robot_id: int = 0
    tick: int = 0
    sensed_attractors: tuple[SensedAttractor, ...] = ()
    gripper: Optional[str] = None
    ball: Optional[KinematicState] = None
    teammates: tuple[KinematicState, ...] = ()
    opponents: tuple[KinematicState, ...] = ()
    hit_ball: bool = False
    lifecycle: tuple[str, ...] = ()

    @property
    def assigned_sectors(self) -> frozenset[Cell]:
        return assigned_sectors(self.role)


def _visible(view: RobotView, color: str, params: SchemaParams) -> bool:
    return any(
        a.color == color and not a.claimed and distance(a.position, view.me.p) <= params.sensor_range
        for a in view.sensed_attractors
    )


def _ball_sensed(view: RobotView, params: SchemaParams) -> bool:
    return view.ball is not None and distance(view.ball.p, view.me.p) <= params.sensor_range


def _ball_in_zone(view: RobotView) -> bool:
    if view.ball is None or not view.geometry.contains(view.ball.p):
        return False
    return sector_of(view.ball.p, view.geometry, view.team) in view.assigned_sectors


def releaser_holds(name: str, view: RobotView, params: SchemaParams) -> bool:
    """Truth value of one releaser predicate on ``view``."""
    if name in ("on", "off"):
        return name in view.lifecycle
    if name == "hit_ball":
        return view.hit_ball
    for color in COLORS:
        if name == f"{color}_visible":
            return _visible(view, color, params)
        if name == f"not_{color}_visible":
            return not _visible(view, color, params)
        if name == f"{color}_in_gripper":
            return view.gripper == color
        if name == f"close_to_{color}_bin":
            bin_center = view.geometry.bins.get(color)
            return bin_center is not None and distance(view.me.p, bin_center) <= params.bin_radius
    if name == "ball_visible":
        return _ball_sensed(view, params) and _ball_in_zone(view)
    if name == "close_to_ball":
        return _ball_sensed(view, params) and distance(view.me.p, view.ball.p) <= params.ball_close_radius
    if name == "ball_close":
        if not _ball_sensed(view, params) or view.team not in view.geometry.goals:
            return False
        return distance(view.ball.p, view.geometry.goal_center(view.team)) <= params.ball_near_goal_radius
    raise ContractError(f"no predicate for releaser {name!r}")


def releaser_priority(fsm: Fsm, current: Union[int, str, StateId]) -> tuple[str, ...]:
    """Current state's alternatives in source order, then the rest of the alphabet."""
    src = fsm.state(current).index
    first = [t.releaser for t in fsm.alternatives(src)]
    return tuple(first + [r for r in fsm.alphabet if r not in first])


def evaluate_releasers(
    view: RobotView, params: SchemaParams, current_state: Union[int, str, StateId]
) -> list[str]:
    fsm = assemblage_for_role(view.role)
    return [r for r in releaser_priority(fsm, current_state) if releaser_holds(r, view, params)]


def _wander_heading(stream: Stream, tick: int, period: int) -> Vec2:
    theta = 2.0 * math.pi * stream.draw(tick // period)
    return Vec2(math.cos(theta), math.sin(theta))


def _nearest_free(view: RobotView, color: str) -> Optional[Vec2]:
    best, best_d = None, math.inf
    for a in view.sensed_attractors:
        if a.color == color and not a.claimed:
            d = distance(a.position, view.me.p)
            if d < best_d:
                best, best_d = a.position, d
    return best


def behind_ball_point(ball: Vec2, opponent_goal: Vec2, offset: float) -> Vec2:
    """Point ``offset`` behind the ball on the line from the opponent goal through it."""
    u = (ball - opponent_goal).unit()
    return ball + u * offset


def _lined_up(me: Vec2, ball: Vec2, u: Vec2, params: SchemaParams) -> bool:
    """Robot sits behind the ball on the goal line, within the strike corridor."""
    rel = me - ball
    along = rel.dot(u)
    across = abs(rel.x * u.y - rel.y * u.x)
    return 0.0 < along <= 1.5 * params.behind_offset and across <= params.strike_corridor


def schema_target(state: str, view: RobotView, params: SchemaParams) -> Optional[KinematicState]:
    """Attractive target for a behavior, or None when the behavior has none.

    Soccer roles only pursue the ball while it lies in their own sectors and
    otherwise fall back to their home position.
    """
    if state in ("OFF", "WANDER"):
        return None
    if state.startswith("ACQUIRE_"):
        pos = _nearest_free(view, state[len("ACQUIRE_"):].lower())
        return KinematicState(pos) if pos is not None else None
    if state.startswith("DELIVER_"):
        return KinematicState(view.geometry.bins[state[len("DELIVER_"):].lower()])
    if state in ("GO_TO_BALL", "DEFEND", "BEHIND_BALL"):
        ball = view.ball
        if ball is None or (view.role in SOCCER_ROLES and not _ball_in_zone(view)):
            home = home_position(view.role, view.team, view.geometry)
            return KinematicState(home) if home is not None else None
        if state == "GO_TO_BALL":
            return ball
        if state == "DEFEND":
            goal = view.geometry.goal_center(view.team)
            return KinematicState((ball.p + goal) * 0.5, ball.v * 0.5)
        opp_goal = view.geometry.goal_center(other_team(view.team))
        if ball.p == opp_goal:
            return ball
        u = (ball.p - opp_goal).unit()
        behind = ball.p + u * params.behind_offset
        margin = params.strike_corridor
        reachable = margin <= behind.x <= view.geometry.width - margin and margin <= behind.y <= view.geometry.height - margin
        if not reachable or _lined_up(view.me.p, ball.p, u, params):
            # behind the ball (or the ball is pinned to a wall): drive through it
            return KinematicState(ball.p, ball.v - u * params.strike_speed)
        return KinematicState(behind, ball.v)
    raise ContractError(f"unknown behavior state: {state!r}")


def _repulsion(view: RobotView, params: SchemaParams, extra: tuple[KinematicState, ...] = ()) -> Vec2:
    me = view.me
    force = ZERO
    for obs in view.teammates + view.opponents + extra:
        if obs.p != me.p:
            force = force + repulsive_force(me, obs, params.rep).force
    for wall in view.geometry.wall_points(me.p):
        if wall.p != me.p:
            force = force + repulsive_force(me, wall, params.wall_rep).force
    return force


def schema_force(
    state: Union[str, StateId], view: RobotView, params: SchemaParams, stream: Optional[Stream] = None
) -> Vec2:
    """Steering force for the behavior ``state``."""
    label = state.label if isinstance(state, StateId) else state
    if label == "OFF":
        return ZERO
    target = schema_target(label, view, params)
    me = view.me

    extra: tuple[KinematicState, ...] = ()
    if label == "BEHIND_BALL" and view.ball is not None and (view.role not in SOCCER_ROLES or _ball_in_zone(view)):
        # on the goal side of the ball: treat the ball as an obstacle so the robot circles it
        opp_goal = view.geometry.goal_center(other_team(view.team))
        if view.ball.p != me.p and (me.p - view.ball.p).dot(opp_goal - view.ball.p) > 0:
            extra = (view.ball,)

    if label == "WANDER" or (target is None and label.startswith("ACQUIRE_")):
        if stream is None:
            raise ContractError("WANDER needs a random stream")
        force = _wander_heading(stream, view.tick, params.wander_period) * params.wander_gain
        home = home_position(view.role, view.team, view.geometry)
        if home is not None:
            force = force + attractive_force(me, KinematicState(home), params.attr)
        return force + _repulsion(view, params)

    return total_force(me, target, (), params.attr, params.rep) + _repulsion(view, params, extra)
