"""Exact-arithmetic domain objects: partitions, frameworks and their validation.

All probabilities are :class:`fractions.Fraction`; nothing in here touches floats.
Measures are stored unnormalized because every opinion is a ratio of masses.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

AGENTS = ("p", "q")


class FrameworkError(ValueError):
    """Raised when a framework (or something that should become one) is invalid."""


def other(agent: str) -> str:
    if agent not in AGENTS:
        raise ValueError(f"unknown agent {agent!r}")
    return "q" if agent == "p" else "p"


@dataclass(frozen=True, eq=False)
class Partition:
    """Cells over the states ``0..size-1``.

    Cell order is kept (it drives emission order) but equality ignores it:
    two partitions are equal when they have the same cells.
    """

    cells: tuple[tuple[int, ...], ...]
    size: int

    @classmethod
    def of(cls, cells: Iterable[Iterable[int]], size: int) -> "Partition":
        return cls(tuple(tuple(sorted(c)) for c in cells), size)

    @classmethod
    def trivial(cls, size: int) -> "Partition":
        return cls((tuple(range(size)),), size)

    @classmethod
    def discrete(cls, size: int) -> "Partition":
        return cls(tuple((i,) for i in range(size)), size)

    @classmethod
    def from_labels(cls, labels: Sequence[object]) -> "Partition":
        """Group states by label, cells ordered by first occurrence."""
        groups: dict[object, list[int]] = {}
        for i, lab in enumerate(labels):
            groups.setdefault(lab, []).append(i)
        return cls(tuple(tuple(g) for g in groups.values()), len(labels))

    def violations(self) -> list[str]:
        out = []
        seen: dict[int, int] = {}
        for ci, cell in enumerate(self.cells):
            if not cell:
                out.append(f"cell {ci} is empty")
            for s in cell:
                if not 0 <= s < self.size:
                    out.append(f"cell {ci} contains state {s} outside the state space")
                elif s in seen:
                    out.append(f"state {s} appears in cells {seen[s]} and {ci}")
                else:
                    seen[s] = ci
        missing = [s for s in range(self.size) if s not in seen]
        if missing:
            out.append(f"cells do not cover the state space (missing states {missing})")
        return out

    @cached_property
    def cell_of(self) -> tuple[int, ...]:
        owner = [-1] * self.size
        for ci, cell in enumerate(self.cells):
            for s in cell:
                owner[s] = ci
        if -1 in owner:
            raise FrameworkError(f"partition does not cover state {owner.index(-1)}")
        return tuple(owner)

    def cell_at(self, omega: int) -> tuple[int, ...]:
        return self.cells[self.cell_of[omega]]

    def __len__(self) -> int:
        return len(self.cells)

    @cached_property
    def _key(self) -> frozenset:
        return frozenset(frozenset(c) for c in self.cells)

    def __eq__(self, o: object) -> bool:
        if not isinstance(o, Partition):
            return NotImplemented
        return self.size == o.size and self._key == o._key

    def __hash__(self) -> int:
        return hash((self.size, self._key))

    def refines(self, coarser: "Partition") -> bool:
        """True when every cell of ``self`` sits inside one cell of ``coarser``."""
        owner = coarser.cell_of
        return all(len({owner[s] for s in cell}) == 1 for cell in self.cells)


class CellValueMemo:
    """Per-cell opinion cache, plus a small integer id for each distinct value."""

    __slots__ = ("values", "ids")

    def __init__(self):
        self.values: dict[tuple[int, ...], tuple[Fraction, int]] = {}
        self.ids: dict[Fraction, int] = {}


@dataclass(frozen=True)
class Framework:
    """A Bayesian opinion framework: states, prior, event, two partitions, opener."""

    labels: tuple[str, ...]
    mass: tuple[Fraction, ...]
    event: frozenset[int]
    partition_p: Partition
    partition_q: Partition
    opener: str = "p"
    # opinion memo; only valid for this mass/event, so it travels with them
    cell_values: "CellValueMemo" = field(default_factory=lambda: CellValueMemo(),
                                         compare=False, repr=False, hash=False)

    @property
    def size(self) -> int:
        return len(self.labels)

    def partition(self, agent: str) -> Partition:
        if agent == "p":
            return self.partition_p
        if agent == "q":
            return self.partition_q
        raise ValueError(f"unknown agent {agent!r}")

    def mass_of(self, states: Iterable[int]) -> Fraction:
        return sum((self.mass[s] for s in states), Fraction(0))

    def event_mass_of(self, states: Iterable[int]) -> Fraction:
        return sum((self.mass[s] for s in states if s in self.event), Fraction(0))

    def with_partitions(self, p: Partition, q: Partition, opener: str) -> "Framework":
        return Framework(self.labels, self.mass, self.event, p, q, opener, self.cell_values)

    def normalized(self) -> "Framework":
        return Framework(self.labels, normalize_measure(self.mass), self.event,
                         self.partition_p, self.partition_q, self.opener)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_framework(fw: Framework) -> ValidationReport:
    """Check every framework invariant; never raises."""
    v: list[str] = []
    n = len(fw.labels)
    if n < 1:
        v.append("state space is empty")
    if len(fw.mass) != n:
        v.append(f"prior has {len(fw.mass)} entries for {n} states")
    for i, m in enumerate(fw.mass):
        if not isinstance(m, (Fraction, int)) or isinstance(m, bool):
            v.append(f"mass of state {i} is not an exact rational: {m!r}")
        elif m <= 0:
            v.append(f"prior not strictly positive at state {i} ({fw.labels[i] if i < n else '?'})")
    bad = sorted(s for s in fw.event if not (isinstance(s, int) and 0 <= s < n))
    if bad:
        v.append(f"event contains states outside the state space: {bad}")
    for agent in AGENTS:
        part = fw.partition(agent)
        if part.size != n:
            v.append(f"partition {agent} is over {part.size} states, expected {n}")
        v.extend(f"partition {agent}: {msg}" for msg in part.violations())
    if fw.opener not in AGENTS:
        v.append(f"opener must be 'p' or 'q', got {fw.opener!r}")
    if len(set(fw.labels)) != n:
        v.append("state labels are not unique")
    return ValidationReport(v)


def require_valid(fw: Framework) -> Framework:
    report = validate_framework(fw)
    if not report.ok:
        raise FrameworkError("; ".join(report.violations))
    return fw


def join_partitions(a: Partition, b: Partition) -> Partition:
    """Coarsest common refinement: states share a cell iff they do in both."""
    if a.size != b.size:
        raise FrameworkError(f"partitions over different state spaces ({a.size} vs {b.size})")
    bo = b.cell_of
    cells: list[tuple[int, ...]] = []
    for cell in a.cells:
        groups: dict[int, list[int]] = {}
        for s in cell:
            groups.setdefault(bo[s], []).append(s)
        cells.extend(tuple(g) for g in groups.values())
    return Partition(tuple(cells), a.size)


def normalize_measure(mass: Sequence[Fraction]) -> tuple[Fraction, ...]:
    total = sum(mass, Fraction(0))
    if total <= 0:
        raise FrameworkError("total mass must be positive")
    return tuple(Fraction(m) / total for m in mass)


def drop_null_states(
    labels: Sequence[str],
    mass: Sequence[Fraction],
    event: Iterable[int],
    partitions: tuple[Partition, Partition],
    opener: str = "p",
) -> Framework:
    """Remove zero-mass states and reindex the survivors in their original order.

    Raises :class:`FrameworkError` if the total mass is zero or a partition cell
    would be left without any state.
    """
    if sum(mass, Fraction(0)) <= 0:
        raise FrameworkError("total mass is zero")
    kept = [i for i, m in enumerate(mass) if m > 0]
    new_index = {old: new for new, old in enumerate(kept)}
    parts = []
    for agent, part in zip(AGENTS, partitions):
        cells = []
        for ci, cell in enumerate(part.cells):
            survivors = tuple(new_index[s] for s in cell if s in new_index)
            if not survivors:
                raise FrameworkError(f"empty cell after drop: partition {agent}, cell {ci}")
            cells.append(survivors)
        parts.append(Partition(tuple(cells), len(kept)))
    fw = Framework(
        labels=tuple(labels[i] for i in kept),
        mass=tuple(Fraction(mass[i]) for i in kept),
        event=frozenset(new_index[s] for s in event if s in new_index),
        partition_p=parts[0],
        partition_q=parts[1],
        opener=opener,
    )
    return require_valid(fw)
