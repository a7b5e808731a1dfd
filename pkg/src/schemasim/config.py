"""Scenario configuration files.

Plain INI (``configparser``) with a mandatory ``schema_version`` key::

    [scenario]
    schema_version = 1
    kind = foraging
    width = 20
    height = 20

    [roster]
    robots =
        red forager 9 9
        red forager 11 9

Each roster line is ``team role x y``. Unknown sections or keys are errors so
that typos do not silently fall back to defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .fields import AttractiveParams, RepulsiveParams
from .geometry import TEAMS
from .schemas import ROLES, SOCCER_ROLES, SchemaParams
from .vec import Vec2

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RobotSpec:
    team: str
    role: str
    x: float
    y: float


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    width: float
    height: float
    roster: tuple[RobotSpec, ...]
    dt: float = 0.05
    step_limit: int = 50_000
    max_speed: float = 2.0
    max_accel: float = 4.0
    robot_radius: float = 0.2
    # foraging
    red_attractors: int = 0
    blue_attractors: int = 0
    red_bin: Optional[Vec2] = None
    blue_bin: Optional[Vec2] = None
    home_base: Optional[Vec2] = None
    attractor_spacing: float = 0.5
    placement_retries: int = 1000
    # soccer
    goal_width: float = 3.0
    ball_radius: float = 0.1
    ball_friction: float = 0.8
    kick_restitution: float = 1.2
    schema: SchemaParams = field(default_factory=SchemaParams)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in ("foraging", "soccer"):
            raise ConfigError(f"kind must be 'foraging' or 'soccer', got {self.kind!r}")
        if not (self.width > 0 and self.height > 0):
            raise ConfigError("field dimensions must be positive")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not (self.max_speed > 0 and self.max_accel > 0):
            raise ConfigError("max_speed and max_accel must be positive")
        if self.step_limit < 0:
            raise ConfigError("step_limit must be >= 0")
        if not self.roster:
            raise ConfigError("roster must not be empty")
        for r in self.roster:
            if r.team not in TEAMS:
                raise ConfigError(f"unknown team {r.team!r}")
            if r.role not in ROLES:
                raise ConfigError(f"unknown role {r.role!r}")
            if not (0 <= r.x <= self.width and 0 <= r.y <= self.height):
                raise ConfigError(f"robot start ({r.x}, {r.y}) outside the field")
            if self.kind == "foraging" and r.role != "forager":
                raise ConfigError(f"role {r.role!r} not allowed in a foraging scenario")
            if self.kind == "soccer" and r.role not in SOCCER_ROLES:
                raise ConfigError(f"role {r.role!r} not allowed in a soccer scenario")
        if self.kind == "foraging":
            if self.red_attractors < 0 or self.blue_attractors < 0:
                raise ConfigError("attractor counts must be >= 0")
            if self.red_bin is None or self.blue_bin is None:
                raise ConfigError("foraging needs red_bin and blue_bin")
        if self.kind == "soccer" and not 0 < self.goal_width < self.height:
            raise ConfigError("goal_width must lie in (0, height)")
        if self.kind == "soccer" and not self.schema.behind_offset > self.ball_radius:
            raise ConfigError("behind_offset must exceed ball_radius")
        if not 0 <= self.ball_friction * self.dt < 1:
            raise ConfigError("ball_friction * dt must lie in [0, 1)")


_SCENARIO_KEYS = {
    "schema_version": int, "kind": str, "width": float, "height": float, "dt": float, "step_limit": int,
    "max_speed": float, "max_accel": float, "robot_radius": float,
}
_FORAGING_KEYS = {
    "red_attractors": int, "blue_attractors": int, "red_bin": "vec", "blue_bin": "vec", "home_base": "vec",
    "attractor_spacing": float, "placement_retries": int,
}
_SOCCER_KEYS = {"goal_width": float, "ball_radius": float, "ball_friction": float, "kick_restitution": float}
_PARAM_SECTIONS = {"attractive": AttractiveParams, "repulsive": RepulsiveParams, "wall_repulsive": RepulsiveParams}
_PARAM_FIELD = {"attractive": "attr", "repulsive": "rep", "wall_repulsive": "wall_rep"}


def _convert(section: str, key: str, raw: str, kind) -> object:
    try:
        if kind == "vec":
            x, y = (float(t) for t in raw.replace(",", " ").split())
            return Vec2(x, y)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def _section(cp: configparser.ConfigParser, name: str, spec: dict) -> dict:
    if not cp.has_section(name):
        return {}
    out = {}
    for key, raw in cp.items(name):
        if key not in spec:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        out[key] = _convert(name, key, raw, spec[key])
    return out


def _roster(raw: str) -> tuple[RobotSpec, ...]:
    robots = []
    for line in raw.strip().splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 4:
            raise ConfigError(f"[roster] expected 'team role x y', got {line.strip()!r}")
        try:
            robots.append(RobotSpec(parts[0], parts[1], float(parts[2]), float(parts[3])))
        except ValueError:
            raise ConfigError(f"[roster] bad coordinates in {line.strip()!r}") from None
    return tuple(robots)


def parse_config(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    known = {"scenario", "roster", "foraging", "soccer", "schema", *_PARAM_SECTIONS}
    for name in cp.sections():
        if name not in known:
            raise ConfigError(f"unknown section [{name}]")

    scen = _section(cp, "scenario", _SCENARIO_KEYS)
    version = scen.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    for key in ("kind", "width", "height"):
        if key not in scen:
            raise ConfigError(f"[scenario] missing {key}")
    if not cp.has_option("roster", "robots"):
        raise ConfigError("[roster] robots is required")
    for key in cp.options("roster"):
        if key != "robots":
            raise ConfigError(f"[roster] unknown key {key!r}")

    schema_spec = {
        f.name: (int if f.name == "wander_period" else float)
        for f in fields(SchemaParams)
        if f.name not in ("attr", "rep", "wall_rep")
    }
    schema_kwargs = _section(cp, "schema", schema_spec)
    for section, cls in _PARAM_SECTIONS.items():
        kw = _section(cp, section, {f.name: float for f in fields(cls)})
        if kw:
            base = getattr(SchemaParams(), _PARAM_FIELD[section])
            try:
                schema_kwargs[_PARAM_FIELD[section]] = replace(base, **kw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {exc}") from None
    try:
        schema = SchemaParams(**schema_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[schema] {exc}") from None

    return ScenarioConfig(
        roster=_roster(cp.get("roster", "robots")),
        schema=schema,
        **scen,
        **_section(cp, "foraging", _FORAGING_KEYS),
        **_section(cp, "soccer", _SOCCER_KEYS),
    )


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


def demo_config(kind: str) -> ScenarioConfig:
    """The bundled default scenario for ``kind`` ('foraging' or 'soccer')."""
    return parse_config(demo_config_text(kind))


def demo_config_text(kind: str) -> str:
    return resources.files("schemasim.scenarios").joinpath(f"{kind}.ini").read_text("utf-8")
