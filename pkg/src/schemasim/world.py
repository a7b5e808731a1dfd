"""Deterministic discrete-time world for the foraging and soccer scenarios.

One tick of :func:`step_world`:

1. every robot (ascending id) builds its view from the *pre-step* world,
   evaluates releasers, steps its FSM and computes its schema force;
2. all robots integrate synchronously (force -> clamped acceleration ->
   clamped velocity -> position), overlaps are separated and walls resolved;
3. grippers attach and release, the ball is moved, kicked, slowed by friction
   and checked against the goal lines.

Nothing reads the wall clock, and all randomness comes from keyed streams
derived from the master seed, so a run is a pure function of (config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .config import ConfigError, ScenarioConfig
from .fields import KinematicState
from .fsm import StateId, step_fsm
from .geometry import FieldGeometry, other_team, soccer_geometry
from .rng import WORLD_STREAM, Stream, robot_stream
from .schemas import RobotView, SensedAttractor, assemblage_for_role, evaluate_releasers, schema_force
from .vec import ZERO, Vec2, distance


@dataclass(frozen=True)
class Robot:
    id: int
    team: str
    role: str
    kin: KinematicState
    fsm_state: StateId
    stream: Stream
    gripper: Optional[int] = None
    contact_latch: bool = False


@dataclass(frozen=True)
class Attractor:
    id: int
    color: str
    position: Vec2
    status: str = "free"  # free | held | delivered
    holder: Optional[int] = None


@dataclass(frozen=True)
class WorldState:
    config: ScenarioConfig
    seed: int
    geometry: FieldGeometry
    robots: tuple[Robot, ...]
    attractors: tuple[Attractor, ...] = ()
    ball: Optional[KinematicState] = None
    score: dict[str, int] = field(default_factory=dict)
    tick: int = 0
    pending: tuple[str, ...] = ()
    events: tuple[dict[str, Any], ...] = ()

    @property
    def kind(self) -> str:
        return self.config.kind

    def all_delivered(self) -> bool:
        return all(a.status == "delivered" for a in self.attractors)


def build_geometry(config: ScenarioConfig) -> FieldGeometry:
    if config.kind == "soccer":
        return soccer_geometry(config.width, config.height, config.goal_width)
    home = config.home_base
    if home is None:
        home = (config.red_bin + config.blue_bin) * 0.5
    return FieldGeometry(
        config.width, config.height, bins={"red": config.red_bin, "blue": config.blue_bin}, home_base=home
    )


def _place_attractors(config: ScenarioConfig, geometry: FieldGeometry, seed: int) -> tuple[Attractor, ...]:
    rng = Stream(seed, WORLD_STREAM).generator()
    margin = config.attractor_spacing
    colors = ["red"] * config.red_attractors + ["blue"] * config.blue_attractors
    placed: list[Attractor] = []
    keep_out = config.schema.bin_radius + margin
    for i, color in enumerate(colors):
        for _ in range(config.placement_retries):
            p = Vec2(float(rng.uniform(margin, config.width - margin)), float(rng.uniform(margin, config.height - margin)))
            if all(distance(p, b) > keep_out for b in geometry.bins.values()) and all(
                distance(p, a.position) >= margin for a in placed
            ):
                placed.append(Attractor(i, color, p))
                break
        else:
            raise ConfigError(f"could not place attractor {i} after {config.placement_retries} tries")
    return tuple(placed)


def init_world(config: ScenarioConfig, seed: int) -> WorldState:
    """Fresh world; the first step delivers the ``on`` releaser to every robot."""
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    config.validate()
    geometry = build_geometry(config)
    robots = []
    for i, spec in enumerate(config.roster):
        fsm = assemblage_for_role(spec.role)
        robots.append(Robot(
            id=i, team=spec.team, role=spec.role, kin=KinematicState(Vec2(spec.x, spec.y), ZERO),
            fsm_state=fsm.state(fsm.start), stream=Stream(seed, robot_stream(i)),
        ))
    attractors: tuple[Attractor, ...] = ()
    ball = None
    score: dict[str, int] = {}
    if config.kind == "foraging":
        attractors = _place_attractors(config, geometry, seed)
    else:
        ball = KinematicState(Vec2(config.width / 2, config.height / 2), ZERO)
        score = {"red": 0, "blue": 0}
    return WorldState(config, seed, geometry, tuple(robots), attractors, ball, score, 0, ("on",))


def _claimed(world: WorldState, robot: Robot, attractor: Attractor) -> bool:
    """Held by someone, or a sensed empty-handed robot is closer to it (lower id on ties)."""
    if attractor.status == "held":
        return True
    mine = distance(robot.kin.p, attractor.position)
    for other in world.robots:
        if other.id == robot.id or other.gripper is not None:
            continue
        if distance(other.kin.p, robot.kin.p) > world.config.schema.sensor_range:
            continue
        theirs = distance(other.kin.p, attractor.position)
        if theirs < mine or (theirs == mine and other.id < robot.id):
            return True
    return False


def build_view(world: WorldState, robot: Robot) -> RobotView:
    params = world.config.schema
    me = robot.kin
    rng_ = params.sensor_range
    teammates, opponents = [], []
    for other in world.robots:
        if other.id == robot.id or distance(other.kin.p, me.p) > rng_:
            continue
        (teammates if other.team == robot.team else opponents).append(other.kin)
    sensed = tuple(
        SensedAttractor(a.color, a.position, _claimed(world, robot, a))
        for a in world.attractors
        if a.status != "delivered" and distance(a.position, me.p) <= rng_
    )
    ball = world.ball if world.ball is not None and distance(world.ball.p, me.p) <= rng_ else None
    gripper = None
    if robot.gripper is not None:
        gripper = world.attractors[robot.gripper].color
    return RobotView(
        me=me, role=robot.role, geometry=world.geometry, team=robot.team, robot_id=robot.id, tick=world.tick,
        sensed_attractors=sensed, gripper=gripper, ball=ball, teammates=tuple(teammates),
        opponents=tuple(opponents), hit_ball=robot.contact_latch, lifecycle=world.pending,
    )


def _clamp_inside(p: Vec2, v: Vec2, width: float, height: float) -> tuple[Vec2, Vec2]:
    x, y, vx, vy = p.x, p.y, v.x, v.y
    if x < 0.0:
        x, vx = 0.0, 0.0
    elif x > width:
        x, vx = width, 0.0
    if y < 0.0:
        y, vy = 0.0, 0.0
    elif y > height:
        y, vy = height, 0.0
    return Vec2(x, y), Vec2(vx, vy)


def _separate(positions: list[Vec2], min_gap: float) -> None:
    n = len(positions)
    for i in range(n):
        for j in range(i + 1, n):
            d = positions[j] - positions[i]
            r = d.norm()
            if 0.0 < r < min_gap:
                push = d * ((min_gap - r) / (2.0 * r))
                positions[i] = positions[i] - push
                positions[j] = positions[j] + push


def step_world(world: WorldState) -> WorldState:
    cfg = world.config
    params = cfg.schema
    dt = cfg.dt
    events: list[dict[str, Any]] = []

    # sense / decide, all from the pre-step snapshot
    decided = []
    for robot in world.robots:
        fsm = assemblage_for_role(robot.role)
        view = build_view(world, robot)
        releasers = evaluate_releasers(view, params, robot.fsm_state)
        rec = step_fsm(fsm, robot.fsm_state, releasers, world.tick)
        force = schema_force(rec.to_state, view, params, robot.stream)
        decided.append((rec.to_state, force))

    # integrate synchronously
    velocities, positions = [], []
    for robot, (_, force) in zip(world.robots, decided):
        a = force.clamp(cfg.max_accel)
        v = (robot.kin.v + a * dt).clamp(cfg.max_speed)
        velocities.append(v)
        positions.append(robot.kin.p + v * dt)
    _separate(positions, 2.0 * cfg.robot_radius)
    for i in range(len(positions)):
        positions[i], velocities[i] = _clamp_inside(positions[i], velocities[i], cfg.width, cfg.height)

    robots = [
        replace(r, kin=KinematicState(positions[i], velocities[i]), fsm_state=decided[i][0], contact_latch=False)
        for i, r in enumerate(world.robots)
    ]

    attractors = list(world.attractors)
    if attractors:
        _resolve_grippers(robots, attractors, world.geometry, params, events)

    ball, score = world.ball, world.score
    if ball is not None:
        ball, score = _advance_ball(robots, ball, dict(score), world.geometry, cfg, events)

    return replace(
        world, robots=tuple(robots), attractors=tuple(attractors), ball=ball, score=score,
        tick=world.tick + 1, pending=(), events=tuple(events),
    )


def _resolve_grippers(robots, attractors, geometry, params, events) -> None:
    for i, robot in enumerate(robots):
        label = robot.fsm_state.label
        if robot.gripper is None and label.startswith("ACQUIRE_"):
            color = label[len("ACQUIRE_"):].lower()
            best, best_d = None, params.grip_radius
            for a in attractors:
                if a.status == "free" and a.color == color:
                    d = distance(a.position, robot.kin.p)
                    if d <= best_d:
                        best, best_d = a, d
            if best is not None:
                attractors[best.id] = replace(best, status="held", holder=robot.id, position=robot.kin.p)
                robots[i] = robot = replace(robot, gripper=best.id)
                events.append({"type": "grip", "robot": robot.id, "attractor": best.id, "color": color})
        elif robot.gripper is not None:
            held = attractors[robot.gripper]
            bin_center = geometry.bins[held.color]
            if label == f"DELIVER_{held.color.upper()}" and distance(robot.kin.p, bin_center) <= params.bin_radius:
                attractors[held.id] = replace(held, status="delivered", holder=None, position=robot.kin.p)
                robots[i] = replace(robot, gripper=None)
                events.append({"type": "deliver", "robot": robot.id, "attractor": held.id, "color": held.color})
            else:
                attractors[held.id] = replace(held, position=robot.kin.p)


def _advance_ball(robots, ball, score, geometry, cfg, events):
    params_reach = cfg.robot_radius + cfg.ball_radius
    bp = ball.p + ball.v * cfg.dt
    bv = ball.v

    # every robot touching the ball is pushed back to contact distance; only the
    # strongest pusher (lowest id on ties) actually kicks
    kicker, best_push, best_n = None, 0.0, None
    for i, robot in enumerate(robots):
        d = bp - robot.kin.p
        r = d.norm()
        if r == 0.0 or r > params_reach:
            continue
        n = d / r
        push = robot.kin.v.dot(n)
        if push > 0.0 and push > bv.dot(n) and push > best_push:
            kicker, best_push, best_n = i, push, n
        bp = robot.kin.p + n * params_reach
    if kicker is not None:
        before = bv
        bv = (best_n * (cfg.kick_restitution * best_push)).clamp(cfg.max_speed)
        robots[kicker] = replace(robots[kicker], contact_latch=True)
        events.append({
            "type": "hit_ball", "robot": robots[kicker].id, "normal": [best_n.x, best_n.y],
            "before": [before.x, before.y], "after": [bv.x, bv.y],
        })

    bv = bv * (1.0 - cfg.ball_friction * cfg.dt)

    lo, hi = (cfg.height - cfg.goal_width) / 2, (cfg.height + cfg.goal_width) / 2
    x, y, vx, vy = bp.x, bp.y, bv.x, bv.y
    if y < 0.0:
        y, vy = -y, -vy
    elif y > cfg.height:
        y, vy = 2 * cfg.height - y, -vy
    y = min(max(y, 0.0), cfg.height)
    conceded = None
    if x < 0.0 or x > cfg.width:
        if lo <= y <= hi:
            conceded = "red" if x < 0.0 else "blue"
        elif x < 0.0:
            x, vx = -x, -vx
        else:
            x, vx = 2 * cfg.width - x, -vx
    if conceded is not None:
        scorer = other_team(conceded)
        score[scorer] = score.get(scorer, 0) + 1
        events.append({"type": "goal", "team": scorer})
        return KinematicState(Vec2(cfg.width / 2, cfg.height / 2), ZERO), score
    x = min(max(x, 0.0), cfg.width)
    return KinematicState(Vec2(x, y), Vec2(vx, vy)), score


def snapshot_record(world: WorldState, header: bool = False) -> dict[str, Any]:
    """One trace line. The tick-0 record also carries static scenario data."""
    robots = []
    for r in world.robots:
        robots.append({
            "id": r.id, "x": r.kin.p.x, "y": r.kin.p.y, "vx": r.kin.v.x, "vy": r.kin.v.y,
            "state": r.fsm_state.label, "gripper": r.gripper,
        })
    rec: dict[str, Any] = {"tick": world.tick, "robots": robots}
    if world.ball is not None:
        b = world.ball
        rec["ball"] = {"x": b.p.x, "y": b.p.y, "vx": b.v.x, "vy": b.v.y}
        rec["score"] = dict(world.score)
    rec["events"] = list(world.events)
    if header:
        cfg, g = world.config, world.geometry
        rec["header"] = {
            "kind": cfg.kind, "seed": world.seed, "dt": cfg.dt,
            "field": {"width": cfg.width, "height": cfg.height},
            "roster": [{"id": r.id, "team": r.team, "role": r.role} for r in world.robots],
            "bins": {c: [p.x, p.y] for c, p in g.bins.items()},
            "bin_radius": cfg.schema.bin_radius,
            "goals": {t: [[a.x, a.y], [b.x, b.y]] for t, (a, b) in g.goals.items()},
            "attractors": [{"id": a.id, "color": a.color, "x": a.position.x, "y": a.position.y}
                           for a in world.attractors],
        }
    return rec


def is_terminal(world: WorldState) -> bool:
    return world.kind == "foraging" and world.all_delivered()


def run_simulation(config: ScenarioConfig, seed: int):
    """Run to the step limit or task completion; returns ``(trace, metrics)``."""
    from .metrics import compute_metrics

    world = init_world(config, seed)
    trace = [snapshot_record(world, header=True)]
    while world.tick < config.step_limit and not is_terminal(world):
        world = step_world(world)
        trace.append(snapshot_record(world))
    return trace, compute_metrics(trace)
