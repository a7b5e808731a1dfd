"""Field geometry: bins, goals, walls and the 3x3 soccer sector grid.

Sector convention. Teams are ``red`` (own goal on the line x = 0, attacking
+x) and ``blue`` (own goal on x = width, attacking -x). Cells are ``(row, col)``
with rows and columns in 1..3, always from the team's own perspective:

* row 1 is the opponent-goal third, row 3 the own-goal third;
* column 1 is the team's right flank, column 3 its left flank, so the
  ``outside_left`` role lives in column 3.

For red, column 3 is the high-y band; for blue it is the low-y band.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .fields import DomainError, KinematicState
from .vec import Vec2

TEAMS = ("red", "blue")

Cell = tuple[int, int]

ROLE_SECTORS: dict[str, frozenset[Cell]] = {
    "forward": frozenset({(1, 1), (1, 2), (1, 3)}),
    "outside_left": frozenset({(2, 3), (3, 3)}),
    "outside_right": frozenset({(2, 1), (3, 1)}),
    "center_half": frozenset({(2, 2)}),
    "goal_keeper": frozenset({(3, 2)}),
    "forager": frozenset(),
}


def other_team(team: str) -> str:
    return "blue" if team == "red" else "red"


@dataclass(frozen=True)
class FieldGeometry:
    width: float
    height: float
    bins: dict[str, Vec2] = field(default_factory=dict)
    goals: dict[str, tuple[Vec2, Vec2]] = field(default_factory=dict)
    home_base: Optional[Vec2] = None

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("field dimensions must be positive")
        points = list(self.bins.values()) + [p for seg in self.goals.values() for p in seg]
        for p in points:
            if not self.contains(p):
                raise ValueError(f"{p} lies outside the field")

    def contains(self, p: Vec2) -> bool:
        return 0.0 <= p.x <= self.width and 0.0 <= p.y <= self.height

    def goal_center(self, team: str) -> Vec2:
        a, b = self.goals[team]
        return Vec2((a.x + b.x) / 2, (a.y + b.y) / 2)

    def wall_points(self, p: Vec2) -> tuple[KinematicState, ...]:
        """Nearest point on each of the four walls, as static obstacles."""
        return (
            KinematicState(Vec2(0.0, p.y)),
            KinematicState(Vec2(self.width, p.y)),
            KinematicState(Vec2(p.x, 0.0)),
            KinematicState(Vec2(p.x, self.height)),
        )


def soccer_geometry(width: float, height: float, goal_width: float) -> FieldGeometry:
    lo, hi = (height - goal_width) / 2, (height + goal_width) / 2
    return FieldGeometry(
        width,
        height,
        goals={"red": (Vec2(0.0, lo), Vec2(0.0, hi)), "blue": (Vec2(width, lo), Vec2(width, hi))},
    )


def _band(value: float, extent: float) -> int:
    return min(int(3 * value / extent), 2)


def sector_of(p: Vec2, geometry: FieldGeometry, team: str = "red") -> Cell:
    if not geometry.contains(p):
        raise DomainError(f"point {p} outside field bounds")
    bx, by = _band(p.x, geometry.width), _band(p.y, geometry.height)
    if team == "red":
        return 3 - bx, 1 + by
    if team == "blue":
        return 1 + bx, 3 - by
    raise ValueError(f"unknown team {team!r}")


def cell_center(cell: Cell, geometry: FieldGeometry, team: str = "red") -> Vec2:
    row, col = cell
    if team == "red":
        bx, by = 3 - row, col - 1
    else:
        bx, by = row - 1, 3 - col
    return Vec2((bx + 0.5) * geometry.width / 3, (by + 0.5) * geometry.height / 3)


def home_position(role: str, team: str, geometry: FieldGeometry) -> Optional[Vec2]:
    cells = ROLE_SECTORS.get(role)
    if not cells:
        return None
    centers = [cell_center(c, geometry, team) for c in sorted(cells)]
    return Vec2(sum(c.x for c in centers) / len(centers), sum(c.y for c in centers) / len(centers))
