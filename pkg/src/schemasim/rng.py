"""Seeded, splittable random streams.

Every draw is a pure function of ``(master seed, stream key, counter)``, hashed
through :class:`numpy.random.SeedSequence`. The split rule is:

* stream ``(0,)`` is the world stream (attractor placement);
* stream ``(1, robot_id)`` belongs to one robot.

Because streams are addressed by key rather than consumed in sequence, adding
a robot never perturbs the draws seen by existing robots.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

WORLD_STREAM = (0,)


def robot_stream(robot_id: int) -> tuple[int, ...]:
    return (1, robot_id)


@lru_cache(maxsize=4096)
def _uniform(seed: int, key: tuple[int, ...], counter: int) -> float:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=key + (counter,))
    word = int(ss.generate_state(1, dtype=np.uint64)[0])
    return (word >> 11) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class Stream:
    """Handle on one keyed stream; ``draw(i)`` is the i-th uniform in [0, 1)."""

    seed: int
    key: tuple[int, ...]

    def draw(self, counter: int) -> float:
        return _uniform(self.seed, self.key, counter)

    def generator(self) -> np.random.Generator:
        """A sequential generator for bulk work such as placement."""
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)))
