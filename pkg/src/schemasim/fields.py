"""Dynamic attractive and repulsive potential fields.

Both potentials depend on relative position *and* relative velocity, so they
work for moving targets (a rolling ball) and moving obstacles (other robots).
Forces are the negative gradient taken with respect to both position and
velocity, summed into one 2D steering vector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

from .vec import ZERO, Vec2


class DomainError(ValueError):
    """Input outside the region where a field (or its gradient) is defined."""


class OracleError(ArithmeticError):
    """The finite-difference oracle sampled a non-finite value."""


class KinematicState(NamedTuple):
    p: Vec2
    v: Vec2 = ZERO


@dataclass(frozen=True)
class AttractiveParams:
    alpha_p: float = 1.0
    alpha_v: float = 0.5
    m: float = 2.0
    n: float = 2.0

    def __post_init__(self):
        if not self.alpha_p > 0:
            raise ValueError("alpha_p must be > 0")
        if not self.alpha_v >= 0:
            raise ValueError("alpha_v must be >= 0")
        if not (self.m >= 1 and self.n >= 1):
            raise ValueError("exponents m, n must be >= 1")


@dataclass(frozen=True)
class RepulsiveParams:
    eta: float = 1.0
    rho_0: float = 1.5
    a_max: float = 4.0
    f_max: float = 8.0

    def __post_init__(self):
        for name in ("eta", "rho_0", "a_max", "f_max"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be a finite positive number, got {val!r}")


class Branch(enum.Enum):
    ZERO = "zero"
    ACTIVE = "active"
    UNDEFINED_COLLISION = "undefined-collision"


class FieldSample(NamedTuple):
    potential: Optional[float]  # None on the collision branch
    force: Optional[Vec2]
    branch: Branch


def attractive_potential(robot: KinematicState, target: KinematicState, params: AttractiveParams) -> float:
    dp = (target.p - robot.p).norm()
    dv = (target.v - robot.v).norm()
    return params.alpha_p * dp ** params.m + params.alpha_v * dv ** params.n


def _power_pull(diff: Vec2, gain: float, exponent: float, what: str) -> Vec2:
    # -d/dx of gain*|diff|^e where diff = target - x, written as e*gain*|diff|^(e-2)*diff
    if gain == 0.0:
        return ZERO
    r = diff.norm()
    if r == 0.0:
        if exponent < 2:
            raise DomainError(f"attractive gradient singular at coincident {what} for exponent {exponent}")
        return ZERO
    return diff * (exponent * gain * r ** (exponent - 2))


def attractive_force(robot: KinematicState, target: KinematicState, params: AttractiveParams) -> Vec2:
    """Negative gradient of the attractive potential over position and velocity."""
    return _power_pull(target.p - robot.p, params.alpha_p, params.m, "positions") + _power_pull(
        target.v - robot.v, params.alpha_v, params.n, "velocities"
    )


def _geometry(robot: KinematicState, obstacle: KinematicState) -> tuple[float, Vec2, Vec2, float]:
    r = obstacle.p - robot.p
    rho_s = r.norm()
    if rho_s == 0.0:
        raise DomainError("robot and obstacle positions coincide")
    n_ro = r / rho_s
    w = robot.v - obstacle.v
    return rho_s, n_ro, w, w.dot(n_ro)


def relative_approach_speed(robot: KinematicState, obstacle: KinematicState) -> float:
    """Closing speed of the robot toward the obstacle; positive when closing."""
    return _geometry(robot, obstacle)[3]


def braking_distance(v_ro: float, a_max: float) -> float:
    return v_ro * v_ro / (2.0 * a_max)


def _branch(rho_s: float, v_ro: float, params: RepulsiveParams) -> tuple[Branch, float]:
    margin = rho_s - braking_distance(v_ro, params.a_max)
    if v_ro <= 0.0 or margin >= params.rho_0:
        return Branch.ZERO, margin
    if margin > 0.0:
        return Branch.ACTIVE, margin
    return Branch.UNDEFINED_COLLISION, margin


def repulsive_potential(robot: KinematicState, obstacle: KinematicState, params: RepulsiveParams) -> FieldSample:
    rho_s, _, _, v_ro = _geometry(robot, obstacle)
    branch, margin = _branch(rho_s, v_ro, params)
    if branch is Branch.ZERO:
        return FieldSample(0.0, None, branch)
    if branch is Branch.ACTIVE:
        return FieldSample(params.eta * (1.0 / margin - 1.0 / params.rho_0), None, branch)
    return FieldSample(None, None, branch)


def repulsive_gradient_force(robot: KinematicState, obstacle: KinematicState, params: RepulsiveParams) -> Vec2:
    """Unclamped active-branch force, -dU/dp - dU/dv.

    The braking margin depends on velocity through the approach speed, and the
    approach speed depends on position through the unit line of sight, which
    gives the tangential term below.
    """
    rho_s, n_ro, w, v_ro = _geometry(robot, obstacle)
    margin = rho_s - braking_distance(v_ro, params.a_max)
    k = params.eta / (margin * margin)
    radial = -(1.0 + v_ro / params.a_max)
    tangential = v_ro / (params.a_max * rho_s)
    return (n_ro * radial + (w - n_ro * v_ro) * tangential) * k


def repulsive_force(robot: KinematicState, obstacle: KinematicState, params: RepulsiveParams) -> FieldSample:
    rho_s, n_ro, _, v_ro = _geometry(robot, obstacle)
    branch, margin = _branch(rho_s, v_ro, params)
    if branch is Branch.ZERO:
        return FieldSample(0.0, ZERO, branch)
    if branch is Branch.ACTIVE:
        force = repulsive_gradient_force(robot, obstacle, params).clamp(params.f_max)
        return FieldSample(params.eta * (1.0 / margin - 1.0 / params.rho_0), force, branch)
    # collision unavoidable at max braking: push straight away at full strength
    return FieldSample(None, n_ro * -params.f_max, branch)


def total_force(
    robot: KinematicState,
    target: Optional[KinematicState],
    obstacles: Iterable[KinematicState],
    attr: AttractiveParams,
    rep: RepulsiveParams,
) -> Vec2:
    force = attractive_force(robot, target, attr) if target is not None else ZERO
    for obs in obstacles:
        force = force + repulsive_force(robot, obs, rep).force
    return force


ScalarField = Callable[[Vec2, Vec2], float]


def fd_gradient(field: ScalarField, at: KinematicState, h: float = 1e-6) -> tuple[Vec2, Vec2]:
    """Central-difference gradient of ``field(p, v)`` at ``at``."""
    if not h > 0:
        raise ValueError("step h must be positive")
    p, v = at

    def sample(pp: Vec2, vv: Vec2) -> float:
        val = field(pp, vv)
        if val is None or not math.isfinite(val):
            raise OracleError(f"non-finite field value {val!r} at p={pp}, v={vv}")
        return val

    def central(f_plus: float, f_minus: float) -> float:
        return (f_plus - f_minus) / (2.0 * h)

    gp = Vec2(
        central(sample(Vec2(p.x + h, p.y), v), sample(Vec2(p.x - h, p.y), v)),
        central(sample(Vec2(p.x, p.y + h), v), sample(Vec2(p.x, p.y - h), v)),
    )
    gv = Vec2(
        central(sample(p, Vec2(v.x + h, v.y)), sample(p, Vec2(v.x - h, v.y))),
        central(sample(p, Vec2(v.x, v.y + h)), sample(p, Vec2(v.x, v.y - h))),
    )
    return gp, gv


def force_grid(
    xs: Sequence[float], ys: Sequence[float], force_at: Callable[[Vec2], Vec2]
) -> list[tuple[float, float, float, float]]:
    """Evaluate a force field on a grid as ``(x, y, fx, fy)`` records, row-major in y."""
    records = []
    for y in ys:
        for x in xs:
            f = force_at(Vec2(x, y))
            records.append((x, y, f.x, f.y))
    return records
