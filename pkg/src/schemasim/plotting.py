"""SVG renders: force-field quivers and robot trajectories.

Both renderers write plain SVG through ``xml.etree``. World coordinates are
kept on every drawn primitive as ``data-*`` attributes so that the geometry
can be checked without rasterising anything.
"""

from __future__ import annotations

import configparser
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from .config import SCHEMA_VERSION, ConfigError
from .fields import AttractiveParams, DomainError, KinematicState, RepulsiveParams, force_grid, total_force
from .schemas import behind_ball_point
from .vec import Vec2

SCALE = 40.0  # pixels per metre
MARGIN = 30.0

STATE_COLORS = {
    "OFF": "#7f7f7f",
    "WANDER": "#1f77b4",
    "ACQUIRE_RED": "#ff7f0e",
    "ACQUIRE_BLUE": "#17becf",
    "DELIVER_RED": "#d62728",
    "DELIVER_BLUE": "#2ca02c",
    "GO_TO_BALL": "#9467bd",
    "BEHIND_BALL": "#8c564b",
    "DEFEND": "#e377c2",
}
_FALLBACK_COLOR = "#000000"


def _fmt(x: float) -> str:
    return repr(float(x))


class _Canvas:
    def __init__(self, width: float, height: float, title: str):
        self.width, self.height = width, height
        self.root = ET.Element(
            "svg",
            xmlns="http://www.w3.org/2000/svg",
            width=_fmt(width * SCALE + 2 * MARGIN),
            height=_fmt(height * SCALE + 2 * MARGIN),
        )
        ET.SubElement(self.root, "title").text = title
        self._axes()

    def sx(self, x: float) -> float:
        return MARGIN + x * SCALE

    def sy(self, y: float) -> float:
        return MARGIN + (self.height - y) * SCALE

    def _axes(self) -> None:
        g = ET.SubElement(self.root, "g", id="axes", stroke="#000000", fill="none")
        ET.SubElement(g, "rect", x=_fmt(self.sx(0)), y=_fmt(self.sy(self.height)),
                      width=_fmt(self.width * SCALE), height=_fmt(self.height * SCALE))
        labels = ET.SubElement(self.root, "g", id="axis-labels", fill="#000000")
        labels.set("font-size", "9")
        for axis, extent in (("x", self.width), ("y", self.height)):
            for k in range(int(math.floor(extent)) + 1):
                if axis == "x":
                    x1, y1, x2, y2 = self.sx(k), self.sy(0), self.sx(k), self.sy(0) + 4
                    tx, ty = x1 - 3, y2 + 10
                else:
                    x1, y1, x2, y2 = self.sx(0) - 4, self.sy(k), self.sx(0), self.sy(k)
                    tx, ty = x1 - 14, y1 + 3
                ET.SubElement(g, "line", x1=_fmt(x1), y1=_fmt(y1), x2=_fmt(x2), y2=_fmt(y2))
                ET.SubElement(labels, "text", x=_fmt(tx), y=_fmt(ty)).text = str(k)

    def circle(self, parent, p: Vec2, r: float, **attrs) -> ET.Element:
        el = ET.SubElement(parent, "circle", cx=_fmt(self.sx(p.x)), cy=_fmt(self.sy(p.y)), r=_fmt(r * SCALE))
        el.set("data-x", _fmt(p.x))
        el.set("data-y", _fmt(p.y))
        for k, v in attrs.items():
            el.set(k.replace("_", "-"), v)
        return el

    def write(self, path: Union[str, Path]) -> None:
        tree = ET.ElementTree(self.root)
        ET.indent(tree)
        tree.write(path, encoding="utf-8", xml_declaration=True)

    def tostring(self) -> bytes:
        ET.indent(self.root)
        return ET.tostring(self.root, encoding="utf-8", xml_declaration=True)


# -- force field ---------------------------------------------------------------


@dataclass(frozen=True)
class ForceSnapshot:
    """A frozen scene for a force-field render: one robot attacking the ball."""

    width: float
    height: float
    goal_width: float
    team: str
    robot: KinematicState
    ball: KinematicState
    obstacles: tuple[KinematicState, ...] = ()
    behind_offset: float = 0.8
    grid: tuple[int, int] = (19, 13)
    attr: AttractiveParams = AttractiveParams()
    rep: RepulsiveParams = RepulsiveParams()

    @property
    def opponent_goal(self) -> Vec2:
        x = self.width if self.team == "red" else 0.0
        return Vec2(x, self.height / 2)

    @property
    def target(self) -> KinematicState:
        return KinematicState(behind_ball_point(self.ball.p, self.opponent_goal, self.behind_offset), self.ball.v)

    def force_at(self, p: Vec2, v: Optional[Vec2] = None) -> Vec2:
        """Total force on a robot at ``p`` (with the snapshot's velocity unless given)."""
        me = KinematicState(p, self.robot.v if v is None else v)
        return total_force(me, self.target, (self.ball,) + self.obstacles, self.attr, self.rep)


def _kinematic(raw: str, where: str) -> KinematicState:
    try:
        vals = [float(t) for t in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw.strip()!r}") from None
    if len(vals) not in (2, 4):
        raise ConfigError(f"{where}: expected 'x y' or 'x y vx vy'")
    v = Vec2(vals[2], vals[3]) if len(vals) == 4 else Vec2(0.0, 0.0)
    return KinematicState(Vec2(vals[0], vals[1]), v)


def parse_snapshot(text: str) -> ForceSnapshot:
    """Parse an INI snapshot spec.

    ``[snapshot]`` holds the scene (``robot``/``ball`` as ``x y vx vy``,
    optional multiline ``obstacles``, ``grid = nx ny``); optional
    ``[attractive]`` and ``[repulsive]`` sections override field parameters.
    """
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed snapshot: {exc}") from None
    for name in cp.sections():
        if name not in ("snapshot", "attractive", "repulsive"):
            raise ConfigError(f"unknown section [{name}]")
    if not cp.has_section("snapshot"):
        raise ConfigError("missing [snapshot] section")
    sec = dict(cp.items("snapshot"))
    allowed = {"schema_version", "team", "width", "height", "goal_width", "robot", "ball", "obstacles",
               "behind_offset", "grid"}
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"[snapshot] unknown key {key!r}")
    if sec.get("schema_version", "").strip() != str(SCHEMA_VERSION):
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    for key in ("width", "height", "robot", "ball"):
        if key not in sec:
            raise ConfigError(f"[snapshot] missing {key}")
    try:
        width, height = float(sec["width"]), float(sec["height"])
        goal_width = float(sec.get("goal_width", "3"))
        offset = float(sec.get("behind_offset", "0.8"))
        nx, ny = (int(t) for t in sec.get("grid", "19 13").split())
    except ValueError as exc:
        raise ConfigError(f"[snapshot] {exc}") from None
    team = sec.get("team", "red")
    if team not in ("red", "blue"):
        raise ConfigError(f"unknown team {team!r}")
    if not (width > 0 and height > 0 and offset > 0 and nx >= 1 and ny >= 1):
        raise ConfigError("[snapshot] dimensions, offset and grid must be positive")
    obstacles = tuple(
        _kinematic(line, "[snapshot] obstacles") for line in sec.get("obstacles", "").splitlines() if line.strip()
    )
    params: dict[str, Any] = {}
    for name, key, cls in (("attractive", "attr", AttractiveParams), ("repulsive", "rep", RepulsiveParams)):
        if cp.has_section(name):
            try:
                params[key] = cls(
                    **{k: float(v) for k, v in cp.items(name)}
                )
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{name}] {exc}") from None
    snap = ForceSnapshot(
        width=width, height=height, goal_width=goal_width, team=team,
        robot=_kinematic(sec["robot"], "[snapshot] robot"), ball=_kinematic(sec["ball"], "[snapshot] ball"),
        obstacles=obstacles, behind_offset=offset, grid=(nx, ny), **params,
    )
    if snap.robot.p == snap.ball.p or any(o.p == snap.robot.p for o in obstacles):
        raise ConfigError("robot coincides with the ball or an obstacle")
    return snap


def load_snapshot(path: Union[str, Path]) -> ForceSnapshot:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_snapshot(text)


def _grid_axis(extent: float, n: int) -> list[float]:
    step = extent / n
    return [(i + 0.5) * step for i in range(n)]


def forcefield_records(snap: ForceSnapshot, grid: Optional[tuple[int, int]] = None) -> list[tuple[float, float, float, float]]:
    nx, ny = grid or snap.grid
    xs, ys = _grid_axis(snap.width, nx), _grid_axis(snap.height, ny)
    blocked = {snap.ball.p, *(o.p for o in snap.obstacles)}

    def at(p: Vec2) -> Vec2:
        if p in blocked:
            return Vec2(0.0, 0.0)
        try:
            return snap.force_at(p)
        except DomainError:
            return Vec2(0.0, 0.0)

    return force_grid(xs, ys, at)


def _arrow(canvas: _Canvas, parent, p: Vec2, f: Vec2, length: float, cls: str, color: str) -> None:
    mag = f.norm()
    tip = p + (f * (length / mag) if mag > 0 else Vec2(0.0, 0.0))
    el = ET.SubElement(
        parent, "line", x1=_fmt(canvas.sx(p.x)), y1=_fmt(canvas.sy(p.y)), x2=_fmt(canvas.sx(tip.x)),
        y2=_fmt(canvas.sy(tip.y)), stroke=color,
    )
    el.set("class", cls)
    el.set("marker-end", "url(#head)")
    for k, v in (("x", p.x), ("y", p.y), ("fx", f.x), ("fy", f.y)):
        el.set(f"data-{k}", _fmt(v))


def render_forcefield(snap: ForceSnapshot, grid: Optional[tuple[int, int]] = None) -> _Canvas:
    """One arrow per grid cell (length scaled to the largest force) plus the robot's own."""
    nx, ny = grid or snap.grid
    canvas = _Canvas(snap.width, snap.height, "total force field")
    defs = ET.SubElement(canvas.root, "defs")
    marker = ET.SubElement(defs, "marker", id="head", markerWidth="6", markerHeight="6", refX="5", refY="3",
                           orient="auto")
    ET.SubElement(marker, "path", d="M0,0 L6,3 L0,6 z", fill="context-stroke")

    records = forcefield_records(snap, (nx, ny))
    cell = min(snap.width / nx, snap.height / ny)
    peak = max((math.hypot(fx, fy) for _, _, fx, fy in records), default=0.0)
    arrows = ET.SubElement(canvas.root, "g", id="field")
    for x, y, fx, fy in records:
        f = Vec2(fx, fy)
        length = 0.9 * cell * (f.norm() / peak) if peak > 0 else 0.0
        _arrow(canvas, arrows, Vec2(x, y), f, length, "arrow", "#555555")

    scene = ET.SubElement(canvas.root, "g", id="scene")
    gx = snap.opponent_goal.x
    lo, hi = (snap.height - snap.goal_width) / 2, (snap.height + snap.goal_width) / 2
    goal = ET.SubElement(scene, "line", x1=_fmt(canvas.sx(gx)), y1=_fmt(canvas.sy(lo)), x2=_fmt(canvas.sx(gx)),
                         y2=_fmt(canvas.sy(hi)), stroke="#000000")
    goal.set("stroke-width", "4")
    goal.set("class", "goal")
    canvas.circle(scene, snap.ball.p, 0.1, fill="#ffffff", stroke="#000000", **{"class": "ball"})
    canvas.circle(scene, snap.target.p, 0.08, fill="none", stroke="#2ca02c", **{"class": "target"})
    for o in snap.obstacles:
        canvas.circle(scene, o.p, 0.2, fill="#1f77b4", **{"class": "obstacle"})
    canvas.circle(scene, snap.robot.p, 0.2, fill="#d62728", **{"class": "robot"})
    f = snap.force_at(snap.robot.p)
    _arrow(canvas, scene, snap.robot.p, f, 1.5 * cell, "arrow robot", "#d62728")
    return canvas


# -- trajectories ----------------------------------------------------------------


def _runs(points: list[tuple[float, float, str]]) -> list[tuple[str, list[tuple[float, float]]]]:
    """Split a track into maximal same-state runs; consecutive runs share their joining point."""
    runs: list[tuple[str, list[tuple[float, float]]]] = []
    for x, y, state in points:
        if runs and runs[-1][0] == state:
            runs[-1][1].append((x, y))
        else:
            if runs:
                runs[-1][1].append((x, y))
            runs.append((state, [(x, y)]))
    return runs


def render_trajectory(trace: Sequence[dict[str, Any]]) -> _Canvas:
    """Per-robot polylines coloured by FSM state; an empty trace gives bare axes."""
    if not trace:
        return _Canvas(10.0, 10.0, "trajectories")
    header = trace[0].get("header", {})
    fld = header.get("field", {})
    canvas = _Canvas(float(fld.get("width", 10.0)), float(fld.get("height", 10.0)), "trajectories")

    static = ET.SubElement(canvas.root, "g", id="static")
    for color, (bx, by) in sorted(header.get("bins", {}).items()):
        canvas.circle(static, Vec2(bx, by), float(header.get("bin_radius", 0.5)), fill="none", stroke=color,
                      **{"class": "bin", "data-color": color})
    for team, (a, b) in sorted(header.get("goals", {}).items()):
        el = ET.SubElement(static, "line", x1=_fmt(canvas.sx(a[0])), y1=_fmt(canvas.sy(a[1])),
                           x2=_fmt(canvas.sx(b[0])), y2=_fmt(canvas.sy(b[1])), stroke=team)
        el.set("stroke-width", "4")
        el.set("class", "goal")

    tracks: dict[int, list[tuple[float, float, str]]] = {}
    for rec in trace:
        for r in rec["robots"]:
            tracks.setdefault(r["id"], []).append((r["x"], r["y"], r["state"]))
    paths = ET.SubElement(canvas.root, "g", id="tracks", fill="none")
    for rid in sorted(tracks):
        for state, pts in _runs(tracks[rid]):
            el = ET.SubElement(paths, "polyline", stroke=STATE_COLORS.get(state, _FALLBACK_COLOR),
                               points=" ".join(f"{_fmt(canvas.sx(x))},{_fmt(canvas.sy(y))}" for x, y in pts))
            el.set("class", "track")
            el.set("data-robot", str(rid))
            el.set("data-state", state)
            el.set("data-points", " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts))

    legend = ET.SubElement(canvas.root, "g", id="legend")
    legend.set("font-size", "9")
    used = sorted({s for pts in tracks.values() for _, _, s in pts})
    for i, state in enumerate(used):
        t = ET.SubElement(legend, "text", x=_fmt(MARGIN + 110 * i), y=_fmt(MARGIN / 2),
                          fill=STATE_COLORS.get(state, _FALLBACK_COLOR))
        t.text = state
    return canvas
