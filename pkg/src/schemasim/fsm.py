"""Releaser-driven finite state machines for behavior sequencing.

A machine is the usual 5-tuple: states, an alphabet of releasers (perceptual
triggers), a partial transition map, a start state and a set of final states.
Missing ``(state, releaser)`` entries are implicit self-loops, so a robot stays
in its current behavior until some releaser with a defined transition fires.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

RELEASER_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
STATE_LABEL_RE = re.compile(r"[A-Z][A-Z0-9_]*\Z")


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


@dataclass(frozen=True)
class StateId:
    index: int
    label: str

    def __str__(self) -> str:
        return f"{self.index}={self.label}"


@dataclass(frozen=True)
class Transition:
    source: int
    releaser: str
    target: int


@dataclass(frozen=True)
class Fsm:
    """Flat sequential machine.

    ``transitions`` is kept as an ordered tuple rather than a dict: the order
    is the priority order of alternatives (definition order in source text),
    and a tuple can also represent a malformed machine with duplicate keys,
    which :func:`validate_fsm` reports instead of silently dropping.
    """

    states: tuple[StateId, ...]
    alphabet: tuple[str, ...]
    transitions: tuple[Transition, ...]
    start: int
    finals: frozenset[int] = field(default_factory=frozenset)

    @cached_property
    def _by_index(self) -> dict[int, StateId]:
        return {s.index: s for s in self.states}

    @cached_property
    def _by_label(self) -> dict[str, StateId]:
        return {s.label: s for s in self.states}

    @cached_property
    def _delta(self) -> dict[tuple[int, str], int]:
        delta: dict[tuple[int, str], int] = {}
        for t in self.transitions:
            delta.setdefault((t.source, t.releaser), t.target)
        return delta

    @cached_property
    def _alphabet_set(self) -> frozenset[str]:
        return frozenset(self.alphabet)

    def state(self, key: Union[int, str, StateId]) -> StateId:
        """Look a state up by index, label or StateId."""
        if isinstance(key, StateId):
            key = key.index
        table = self._by_label if isinstance(key, str) else self._by_index
        try:
            return table[key]
        except KeyError:
            raise ContractError(f"unknown state: {key!r}") from None

    def target(self, source: int, releaser: str) -> Optional[int]:
        return self._delta.get((source, releaser))

    def alternatives(self, source: int) -> tuple[Transition, ...]:
        """Outgoing transitions of ``source`` in priority order."""
        return tuple(t for t in self.transitions if t.source == source)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.states)


@dataclass(frozen=True)
class StepRecord:
    from_state: StateId
    fired: Optional[str]
    to_state: StateId
    tick: int = 0


@dataclass(frozen=True)
class Finding:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def validate_fsm(fsm: Fsm) -> list[Finding]:
    """Return every well-formedness problem found in ``fsm``.

    An empty list means the machine satisfies all structural invariants and
    every state is reachable from the start state.
    """
    findings: list[Finding] = []
    indices = [s.index for s in fsm.states]
    labels = [s.label for s in fsm.states]
    for idx in sorted({i for i in indices if indices.count(i) > 1}):
        findings.append(Finding("duplicate index", str(idx)))
    for lab in sorted({x for x in labels if labels.count(x) > 1}):
        findings.append(Finding("duplicate label", lab))
    for s in fsm.states:
        if s.index < 0:
            findings.append(Finding("negative index", str(s)))
        if not STATE_LABEL_RE.match(s.label):
            findings.append(Finding("bad state label", s.label))
    for r in fsm.alphabet:
        if not RELEASER_RE.match(r):
            findings.append(Finding("bad releaser", r))

    known = set(indices)
    label_of = {s.index: s.label for s in fsm.states}
    if fsm.start not in known:
        findings.append(Finding("start not a state", str(fsm.start)))
    for f in sorted(fsm.finals - known):
        findings.append(Finding("final not a state", str(f)))

    seen: dict[tuple[int, str], int] = {}
    alphabet = set(fsm.alphabet)
    for t in fsm.transitions:
        for end in (t.source, t.target):
            if end not in known:
                findings.append(Finding("unknown state", f"{end} in {t.source} {t.releaser} {t.target}"))
        if t.releaser not in alphabet:
            findings.append(Finding("dangling releaser", t.releaser))
        key = (t.source, t.releaser)
        if key in seen:
            findings.append(
                Finding("nondeterministic", f"({label_of.get(t.source, t.source)}, {t.releaser})")
            )
        seen[key] = t.target

    if fsm.start in known:
        reached = {fsm.start}
        queue = deque([fsm.start])
        while queue:
            cur = queue.popleft()
            for t in fsm.transitions:
                if t.source == cur and t.target in known and t.target not in reached:
                    reached.add(t.target)
                    queue.append(t.target)
        for s in fsm.states:
            if s.index not in reached:
                findings.append(Finding("unreachable", s.label))
    return findings


def step_fsm(
    fsm: Fsm,
    current: Union[int, str, StateId],
    active: Sequence[str],
    tick: int = 0,
) -> StepRecord:
    """Advance one tick.

    The first releaser in ``active`` with a defined transition out of
    ``current`` fires. If none does, the record is a self-loop with
    ``fired=None``.
    """
    src = fsm.state(current)
    for r in active:
        if r not in fsm._alphabet_set:
            raise ContractError(f"unknown releaser: {r!r}")
    for r in active:
        dst = fsm.target(src.index, r)
        if dst is not None:
            return StepRecord(src, r, fsm.state(dst), tick)
    return StepRecord(src, None, src, tick)


def run_sequence(fsm: Fsm, stimuli: Iterable[Sequence[str]]) -> list[StepRecord]:
    records: list[StepRecord] = []
    current = fsm.state(fsm.start)
    for tick, active in enumerate(stimuli):
        rec = step_fsm(fsm, current, active, tick)
        records.append(rec)
        current = rec.to_state
    return records


def to_table(fsm: Fsm) -> str:
    """Canonical transition-table text: ``<from> <releaser> <to>`` per line."""
    rows = sorted((t.source, t.releaser, t.target) for t in fsm.transitions)
    return "".join(f"{s} {r} {d}\n" for s, r, d in rows)


def from_table(text: str, labels: dict[int, str], start: int = 0) -> Fsm:
    """Rebuild a machine from table text plus an index-to-label map."""
    transitions = []
    alphabet: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected '<from> <releaser> <to>'")
        src, rel, dst = int(parts[0]), parts[1], int(parts[2])
        if rel not in alphabet:
            alphabet.append(rel)
        transitions.append(Transition(src, rel, dst))
    states = tuple(StateId(i, labels[i]) for i in sorted(labels))
    return Fsm(states, tuple(alphabet), tuple(transitions), start, frozenset({start}))
