"""Build a framework whose dialogue reproduces a given belief sequence.

Works by backward induction on the dialogue.  A one-element dialogue gets a
two-state (or one-state) base framework; a longer one rationalizes its tail
with the other agent opening, then prepends an announcement that carries no
information by padding every opener cell with one state inside the event and
one outside it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .engine import opinion_function, run_dialogue
from .model import Framework, Partition, other, require_valid

SILENCE = None


class RationalizationError(ValueError):
    pass


@dataclass(frozen=True)
class CertaintyViolation:
    """``b[index]`` is 0 or 1 but ``b[index + 1]`` differs (0-based)."""

    index: int

    def __str__(self) -> str:
        return f"certainty acquiescence violated at t={self.index + 1}"


class AcquiescenceError(RationalizationError):
    def __init__(self, violation: CertaintyViolation):
        super().__init__(str(violation))
        self.violation = violation


@dataclass(frozen=True)
class Dialogue:
    opinions: tuple[Fraction, ...]
    opener: str = "p"

    def __post_init__(self):
        if not self.opinions:
            raise RationalizationError("a dialogue needs at least one opinion")
        for i, b in enumerate(self.opinions):
            if not 0 <= b <= 1:
                raise RationalizationError(f"opinion {b} at position {i + 1} is outside [0, 1]")
        other(self.opener)

    def __len__(self) -> int:
        return len(self.opinions)


@dataclass(frozen=True)
class AddedMasses:
    y_mass: Fraction
    n_mass: Fraction


@dataclass(frozen=True)
class LevelRecord:
    prefix_length: int
    opener: str
    states_before: int
    states_added: int
    opener_cells: int
    added: tuple[AddedMasses, ...] = ()


@dataclass(frozen=True)
class RationalizationResult:
    framework: Framework
    omega_star: int
    construction_log: tuple[LevelRecord, ...] = field(default=())


def check_certainty_acquiescence(opinions: Sequence[Fraction]) -> CertaintyViolation | None:
    """First index whose certain opinion is not echoed, or ``None``."""
    for t in range(len(opinions) - 1):
        if opinions[t] in (0, 1) and opinions[t + 1] != opinions[t]:
            return CertaintyViolation(t)
    return None


def rationalize_base(b: Fraction, opener: str = "p") -> RationalizationResult:
    b = Fraction(b)
    if not 0 <= b <= 1:
        raise RationalizationError(f"opinion {b} outside [0, 1]")
    if b == 1:
        fw = Framework(("y",), (Fraction(1),), frozenset({0}),
                       Partition.trivial(1), Partition.trivial(1), opener)
        omega = 0
    elif b == 0:
        half = Fraction(1, 2)
        fw = Framework(("y", "n"), (half, half), frozenset({0}),
                       Partition.discrete(2), Partition.discrete(2), opener)
        omega = 1
    else:
        fw = Framework(("y", "n"), (b, 1 - b), frozenset({0}),
                       Partition.trivial(2), Partition.trivial(2), opener)
        omega = 0
    log = (LevelRecord(1, opener, 0, fw.size, 1 if b != 0 else 2),)
    return RationalizationResult(fw, omega, log)


def choose_added_masses(b1: Fraction, a: Fraction, p: Fraction) -> AddedMasses:
    """Masses for the padding pair so that ``(a + y) / (p + y + n) == b1``.

    ``a`` is the event mass of the cell and ``p`` its total mass.
    """
    b1, a, p = Fraction(b1), Fraction(a), Fraction(p)
    if not 0 < b1 < 1:
        raise RationalizationError(f"padding needs 0 < b1 < 1, got {b1}")
    if p <= 0 or not 0 <= a <= p:
        raise RationalizationError(f"need 0 <= a <= p and p > 0, got a={a}, p={p}")
    s = a / b1 + (p - a) / (1 - b1)
    y = b1 * (p + s) - a
    n = s - y
    assert y > 0 and n > 0, (y, n)
    assert (a + y) / (p + y + n) == b1
    return AddedMasses(y, n)


def extend_with_opening_opinion(inner: RationalizationResult, b1: Fraction) -> RationalizationResult:
    """Prepend an uninformative opening announcement ``b1`` to ``inner``'s dialogue."""
    b1 = Fraction(b1)
    fw = inner.framework
    speaker = other(fw.opener)
    own = fw.partition(speaker)
    listener = fw.partition(fw.opener)
    level = len(inner.construction_log) + 1

    labels = list(fw.labels)
    mass = list(fw.mass)
    event = set(fw.event)
    own_cells, ys, ns, added = [], [], [], []
    for c, cell in enumerate(own.cells):
        pad = choose_added_masses(b1, fw.event_mass_of(cell), fw.mass_of(cell))
        yi, ni = len(labels), len(labels) + 1
        labels += [f"y{level}.{c + 1}", f"n{level}.{c + 1}"]
        mass += [pad.y_mass, pad.n_mass]
        event.add(yi)
        ys.append(yi)
        ns.append(ni)
        own_cells.append(cell + (yi, ni))
        added.append(pad)
    size = len(labels)
    new_own = Partition(tuple(own_cells), size)
    new_listener = Partition(listener.cells + (tuple(ys), tuple(ns)), size)
    parts = {speaker: new_own, fw.opener: new_listener}
    out = Framework(tuple(labels), tuple(mass), frozenset(event),
                    parts["p"], parts["q"], speaker)

    assert size == fw.size + 2 * len(own)
    assert opinion_function(out, speaker).is_constant()
    prefix = inner.construction_log[-1].prefix_length + 1 if inner.construction_log else 2
    record = LevelRecord(prefix, speaker, fw.size, 2 * len(own), len(own), tuple(added))
    return RationalizationResult(out, inner.omega_star, inner.construction_log + (record,))


def _as_dialogue(d) -> Dialogue:
    if isinstance(d, Dialogue):
        return d
    return Dialogue(tuple(Fraction(b) for b in d))


def rationalize(d: Dialogue | Iterable, opener: str | None = None, verify: bool = True) -> RationalizationResult:
    """Construct a framework and true state whose dialogue starts with ``d``.

    With ``verify`` the result is re-simulated and checked before returning.
    """
    d = _as_dialogue(d)
    if opener is not None:
        d = Dialogue(d.opinions, opener)
    bad = check_certainty_acquiescence(d.opinions)
    if bad is not None:
        raise AcquiescenceError(bad)

    b = d.opinions
    # a certain entry forces a constant tail, so the base case starts at the first one
    start = next((t for t, x in enumerate(b) if x in (0, 1)), len(b) - 1)
    speaker = d.opener if start % 2 == 0 else other(d.opener)
    result = rationalize_base(b[start], speaker)
    result = replace(result, construction_log=(
        replace(result.construction_log[0], prefix_length=len(b) - start),))
    for t in range(start - 1, -1, -1):
        result = extend_with_opening_opinion(result, b[t])
    require_valid(result.framework)

    if verify:
        trace = run_dialogue(result.framework, result.omega_star)
        for t, want in enumerate(b, start=1):
            if trace.opinion_at(t) != want:
                raise AssertionError(f"construction diverges at step {t}: {trace.opinion_at(t)} != {want}")
        if trace.termination_step > len(b):
            raise AssertionError(f"consensus only at step {trace.termination_step}")
    return result


def expand_silence(tape: Sequence) -> Dialogue:
    """Read a silent turn as a repeat of the speaker's previous opinion (two steps back)."""
    out: list[Fraction] = []
    for t, x in enumerate(tape):
        if x is SILENCE:
            if t < 2:
                raise RationalizationError(f"silence at position {t + 1} has no earlier opinion to repeat")
            out.append(out[t - 2])
        else:
            out.append(Fraction(x))
    return Dialogue(tuple(out))


def make_didactic_dialogue(expert_value: Fraction, student_values: Sequence[Fraction]) -> Dialogue:
    """Interleave a constant expert opinion (odd steps) with the student's replies."""
    expert_value = Fraction(expert_value)
    if not 0 <= expert_value <= 1:
        raise RationalizationError(f"expert opinion {expert_value} outside [0, 1]")
    out = [expert_value]
    for s in map(Fraction, student_values):
        if expert_value in (0, 1):
            if s != expert_value:
                raise RationalizationError(
                    f"student opinion {s} cannot follow a certain expert at {expert_value}")
        elif not 0 < s < 1:
            raise RationalizationError(f"student opinion {s} must lie strictly between 0 and 1")
        out += [s, expert_value]
    return Dialogue(tuple(out))
