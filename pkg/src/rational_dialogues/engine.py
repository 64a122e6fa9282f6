"""Forward simulation of Bayesian dialogues.

A dialogue alternates announcements: the speaker states the conditional
probability of the event given their current cell, and the listener splits
each of their cells by the level sets of that opinion function.  Refinement is
monotone, so the partitions reach a fixed point after finitely many steps.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    Framework,
    FrameworkError,
    Partition,
    join_partitions,
    other,
    require_valid,
)


class DialogueError(RuntimeError):
    """The simulation broke an invariant that holds for every valid framework."""


@dataclass(frozen=True)
class OpinionFunction:
    """An agent's opinion of the event, one value per cell of their partition."""

    partition: Partition
    values: tuple[Fraction, ...]
    # per cell, an integer naming the cell's level set; equal ids iff equal values
    levels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.levels is None:
            ids: dict[Fraction, int] = {}
            object.__setattr__(self, "levels", tuple(ids.setdefault(v, len(ids)) for v in self.values))

    def at(self, omega: int) -> Fraction:
        return self.values[self.partition.cell_of[omega]]

    def is_constant(self) -> bool:
        return len(set(self.values)) <= 1


def opinion_function(fw: Framework, agent: str) -> OpinionFunction:
    part = fw.partition(agent)
    mass, event = fw.mass, fw.event
    memo, ids = fw.cell_values.values, fw.cell_values.ids
    values, levels = [], []
    for cell in part.cells:
        hit = memo.get(cell)
        if hit is None:
            total = sum(mass[s] for s in cell)
            v = Fraction(sum(mass[s] for s in cell if s in event)) / total
            hit = memo[cell] = (v, ids.setdefault(v, len(ids)))
        values.append(hit[0])
        levels.append(hit[1])
    return OpinionFunction(part, tuple(values), tuple(levels))


def opinion(fw: Framework, agent: str, omega: int) -> Fraction:
    """Conditional probability of the event given ``agent``'s cell at ``omega``."""
    cell = fw.partition(agent).cell_at(omega)
    return fw.event_mass_of(cell) / fw.mass_of(cell)


def refine_by_announcement(listener: Partition, announced: OpinionFunction) -> Partition:
    """Split each listener cell by the level sets of the announced opinion.

    Cell order is preserved and split pieces appear in order of their first
    state, so an uninformative announcement returns an identical partition.
    """
    if listener.size != announced.partition.size:
        raise FrameworkError("listener and speaker partitions cover different state spaces")
    speaker_cell = announced.partition.cell_of
    levels = announced.levels
    cells: list[tuple[int, ...]] = []
    for cell in listener.cells:
        groups: dict[int, list[int]] = {}
        for s in cell:
            groups.setdefault(levels[speaker_cell[s]], []).append(s)
        cells.extend(tuple(g) for g in groups.values())
    return Partition(tuple(cells), listener.size)


def _announce(fw: Framework) -> tuple[OpinionFunction, Framework]:
    speaker = fw.opener
    said = opinion_function(fw, speaker)
    if speaker == "p":
        nxt = fw.with_partitions(fw.partition_p, refine_by_announcement(fw.partition_q, said), "q")
    else:
        nxt = fw.with_partitions(refine_by_announcement(fw.partition_p, said), fw.partition_q, "p")
    return said, nxt


def dialogue_step(fw: Framework) -> Framework:
    """The successor framework: listener refined by the opener's opinion, turn passes."""
    return _announce(fw)[1]


@dataclass(frozen=True)
class TraceStep:
    t: int
    speaker: str
    opinion: Fraction
    partition_p: Partition
    partition_q: Partition


@dataclass(frozen=True)
class Frame:
    """One announcement, independent of the true state."""

    t: int
    speaker: str
    announced: OpinionFunction
    after: Framework


@dataclass(frozen=True)
class Unfolding:
    """All announcements up to and including the first full silent round.

    ``fixed_point_step`` is the first step ``k`` such that steps ``k`` and
    ``k+1`` leave both partitions unchanged; ``frames`` holds steps 1..k+1.
    """

    initial: Framework
    frames: tuple[Frame, ...]
    fixed_point_step: int

    def opinion_at(self, t: int, omega: int) -> Fraction:
        """Announcement at step ``t`` (1-based, any ``t >= 1``) for true state ``omega``."""
        if t < 1:
            raise ValueError("steps are numbered from 1")
        k = self.fixed_point_step
        if t > k + 1:
            # the two fixed-point announcements repeat forever
            t = k + (t - k) % 2
        return self.frames[t - 1].announced.at(omega)

    def opinions_at(self, omega: int) -> tuple[Fraction, ...]:
        return tuple(f.announced.at(omega) for f in self.frames)


def unfold(fw: Framework, max_steps: int = 10_000) -> Unfolding:
    """Iterate :func:`dialogue_step` until a two-step round changes nothing."""
    require_valid(fw)
    frames: list[Frame] = []
    cur = fw
    quiet_before = False
    for t in range(1, max_steps + 1):
        said, nxt = _announce(cur)
        listener = "q" if cur.opener == "p" else "p"
        quiet = len(nxt.partition(listener)) == len(cur.partition(listener))
        frames.append(Frame(t, cur.opener, said, nxt))
        cur = nxt
        if quiet and quiet_before:
            return Unfolding(fw, tuple(frames), t - 1)
        quiet_before = quiet
    raise DialogueError(f"no partition fixed point within {max_steps} steps")


@dataclass(frozen=True)
class DialogueTrace:
    omega_star: int
    steps: tuple[TraceStep, ...]
    fixed_point_step: int
    termination_step: int
    consensus_value: Fraction

    @property
    def opinions(self) -> tuple[Fraction, ...]:
        """Every recorded announcement, through the partition fixed point."""
        return tuple(s.opinion for s in self.steps)

    @property
    def transcript(self) -> tuple[Fraction, ...]:
        """Announcements up to consensus, plus the reply that confirms it."""
        return self.opinions[: self.termination_step + 1]

    def opinion_at(self, t: int) -> Fraction:
        if t < 1:
            raise ValueError("steps are numbered from 1")
        if t > len(self.steps):
            return self.consensus_value
        return self.steps[t - 1].opinion


def trace_at(u: Unfolding, omega_star: int) -> DialogueTrace:
    k = u.fixed_point_step
    said = u.opinions_at(omega_star)
    value, term = consensus_of(said, k)
    if value is None:
        raise DialogueError(
            f"no consensus at the fixed point for state {omega_star}: {said[k - 1]} vs {said[k]}")
    steps = tuple(
        TraceStep(f.t, f.speaker, r, f.after.partition_p, f.after.partition_q)
        for f, r in zip(u.frames, said)
    )
    return DialogueTrace(omega_star, steps, k, term, value)


def consensus_of(said: tuple[Fraction, ...], k: int) -> tuple[Fraction | None, int]:
    """Consensus value and the step it is first reached, given the fixed-point step ``k``.

    ``said`` holds announcements 1..k+1; the value is ``None`` when the two
    fixed-point announcements disagree.
    """
    if said[k - 1] != said[k]:
        return None, k
    term = k
    while term > 1 and said[term - 2] == said[k]:
        term -= 1
    return said[k], term


def first_divergence(trace: DialogueTrace, opinions) -> int | None:
    """First step where the trace leaves ``opinions`` or its constant tail, else ``None``."""
    horizon = max(len(opinions), len(trace.steps)) + 1
    for t in range(1, horizon + 1):
        want = opinions[t - 1] if t <= len(opinions) else opinions[-1]
        if trace.opinion_at(t) != want:
            return t
    return None


def run_dialogue(fw: Framework, omega_star: int, max_steps: int = 10_000) -> DialogueTrace:
    """Simulate the dialogue at a fixed true state.

    ``termination_step`` is the first step from which every announcement equals
    the consensus value; ``fixed_point_step`` is where the partitions settle.
    """
    if not 0 <= omega_star < fw.size:
        raise FrameworkError(f"state {omega_star} outside the state space")
    return trace_at(unfold(fw, max_steps), omega_star)


def reachable_closure(fw: Framework, omega_star: int) -> frozenset[int]:
    """Smallest event containing ``omega_star`` that is common knowledge there."""
    cp, cq = fw.partition_p, fw.partition_q
    seen = {omega_star}
    todo = deque([omega_star])
    while todo:
        w = todo.popleft()
        for s in cp.cell_at(w) + cq.cell_at(w):
            if s not in seen:
                seen.add(s)
                todo.append(s)
    return frozenset(seen)


def is_common_knowledge(fw: Framework, e, omega_star: int) -> bool:
    e = frozenset(e)
    if omega_star not in e:
        return False
    return all(
        set(fw.partition_p.cell_at(w)) <= e and set(fw.partition_q.cell_at(w)) <= e
        for w in e
    )


def is_expert(fw: Framework, agent: str, omega_star: int, scope: str = "cell") -> bool:
    """Would any information in the join change ``agent``'s opinion at ``omega_star``?

    ``scope="cell"`` looks only at join cells inside the agent's own cell at
    ``omega_star``; ``scope="closure"`` looks at every join cell inside the
    common-knowledge closure of ``omega_star``.
    """
    if scope == "cell":
        region = set(fw.partition(agent).cell_at(omega_star))
    elif scope == "closure":
        region = reachable_closure(fw, omega_star)
    else:
        raise ValueError(f"unknown scope {scope!r}")
    target = opinion(fw, agent, omega_star)
    joined = join_partitions(fw.partition_p, fw.partition_q)
    for cell in joined.cells:
        if cell[0] in region and fw.event_mass_of(cell) / fw.mass_of(cell) != target:
            return False
    return True
