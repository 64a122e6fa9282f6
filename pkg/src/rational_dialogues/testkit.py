"""Seeded generators and independent checks used by the property suites.

The random source is SplitMix64 so that a (seed, config) pair names the same
case on every platform and in every language that implements the same mixer.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .engine import consensus_of, first_divergence, reachable_closure, run_dialogue, unfold
from .model import AGENTS, CellValueMemo, Framework, Partition, require_valid
from .rationalizer import AcquiescenceError, Dialogue, check_certainty_acquiescence, rationalize

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection, no modulo bias."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def between(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)

    def chance(self, num: int, den: int) -> bool:
        return self.below(den) < num


@dataclass(frozen=True)
class GeneratorConfig:
    max_states: int = 8
    max_denominator: int = 12
    max_dialogue_length: int = 8
    seed: int = 0

    def __post_init__(self):
        for name in ("max_states", "max_denominator", "max_dialogue_length"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def with_seed(self, seed: int) -> "GeneratorConfig":
        return GeneratorConfig(self.max_states, self.max_denominator, self.max_dialogue_length, seed)


def _random_partition(rng: SplitMix64, n: int) -> Partition:
    return Partition.from_labels([rng.below(n) for _ in range(n)])


def gen_random_framework(cfg: GeneratorConfig) -> Framework:
    rng = SplitMix64(cfg.seed)
    n = rng.between(1, cfg.max_states)
    mass = tuple(
        Fraction(rng.between(1, cfg.max_denominator), rng.between(1, cfg.max_denominator))
        for _ in range(n)
    )
    event = frozenset(i for i in range(n) if rng.chance(1, 2))
    fw = Framework(
        labels=tuple(f"s{i}" for i in range(n)),
        mass=mass,
        event=event,
        partition_p=_random_partition(rng, n),
        partition_q=_random_partition(rng, n),
        opener=AGENTS[rng.below(2)],
    )
    return require_valid(fw)


def _random_opinion(rng: SplitMix64, max_den: int, interior: bool = False) -> Fraction:
    den = rng.between(2 if interior else 1, max(max_den, 2) if interior else max_den)
    num = rng.between(1, den - 1) if interior else rng.between(0, den)
    return Fraction(num, den)


def alternating(c: Fraction, d: Fraction, n: int) -> tuple[Fraction, ...]:
    """``n`` alternating opinions starting from ``c``, then consensus ``c, c``."""
    return tuple(c if i % 2 == 0 else d for i in range(n)) + (c, c)


def gen_random_dialogue(cfg: GeneratorConfig) -> Dialogue:
    rng = SplitMix64(cfg.seed ^ 0xD1A1_0605)
    length = rng.between(1, cfg.max_dialogue_length)
    den = cfg.max_denominator
    if rng.chance(1, 5):
        family = rng.below(3)
        if family == 0:
            ops = (_random_opinion(rng, den),) * length
        elif family == 1:
            c, d = _random_opinion(rng, den, True), _random_opinion(rng, den, True)
            ops = alternating(c, d, max(length - 2, 0))
        else:
            top = Fraction(max(den, 2) - 1, max(den, 2))
            ops = tuple(top if i % 2 == 0 else 1 - top for i in range(length))
    else:
        out: list[Fraction] = []
        while len(out) < length:
            b = _random_opinion(rng, den)
            out.append(b)
            if b in (0, 1):
                out += [b] * (length - len(out))
        ops = tuple(out)
    return Dialogue(ops)


@dataclass(frozen=True)
class RoundTripReport:
    passed: bool
    mismatch_step: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def roundtrip_check(d: Dialogue | Sequence[Fraction]) -> RoundTripReport:
    """Rationalize ``d``, re-simulate it, and compare announcement by announcement.

    Raises :class:`AcquiescenceError` for inputs outside the construction's domain.
    """
    ops = d.opinions if isinstance(d, Dialogue) else tuple(Fraction(x) for x in d)
    bad = check_certainty_acquiescence(ops)
    if bad is not None:
        raise AcquiescenceError(bad)
    res = rationalize(ops, verify=False)
    trace = run_dialogue(res.framework, res.omega_star)
    t = first_divergence(trace, ops)
    if t is not None:
        want = ops[min(t, len(ops)) - 1]
        return RoundTripReport(False, t, f"step {t}: simulated {trace.opinion_at(t)}, expected {want}")
    if trace.consensus_value != ops[-1]:
        return RoundTripReport(False, None, f"consensus {trace.consensus_value} != {ops[-1]}")
    if trace.termination_step > len(ops):
        return RoundTripReport(False, trace.termination_step,
                               f"consensus reached at step {trace.termination_step} > {len(ops)}")
    return RoundTripReport(True)


def perturb_outside_closure(fw: Framework, omega_star: int, seed: int) -> Framework:
    """Re-randomize masses and cells of every state outside the closure of ``omega_star``."""
    inside = reachable_closure(fw, omega_star)
    outside = [s for s in range(fw.size) if s not in inside]
    if not outside:
        return fw
    rng = SplitMix64(seed)
    mass = list(fw.mass)
    for s in outside:
        mass[s] = Fraction(rng.between(1, 12), rng.between(1, 12))
    parts = []
    for agent in AGENTS:
        kept = [c for c in fw.partition(agent).cells if c[0] in inside]
        regrouped: dict[int, list[int]] = {}
        for s in outside:
            regrouped.setdefault(rng.below(len(outside)), []).append(s)
        parts.append(Partition(tuple(kept) + tuple(tuple(g) for g in regrouped.values()), fw.size))
    out = Framework(fw.labels, tuple(mass), fw.event, parts[0], parts[1], fw.opener)
    return require_valid(out)


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    """Every partition of ``items`` (Bell-number many)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]
        yield [[first]] + sub


def small_mass_values(max_den: int) -> list[Fraction]:
    return sorted({Fraction(k, d) for d in range(1, max_den + 1) for k in range(1, d + 1)})


def enumerate_small_frameworks(max_states: int, max_den: int) -> Iterator[Framework]:
    """All frameworks up to ``max_states`` states with masses ``k/d`` in ``(0, 1]``."""
    values = small_mass_values(max_den)
    for n in range(1, max_states + 1):
        labels = tuple(f"s{i}" for i in range(n))
        parts = [Partition.of(c, n) for c in set_partitions(list(range(n)))]
        events = [frozenset(i for i in range(n) if bits >> i & 1) for bits in range(1 << n)]
        for mass in itertools.product(values, repeat=n):
            for ev in events:
                memo = CellValueMemo()
                for pp, qq, opener in itertools.product(parts, parts, AGENTS):
                    yield Framework(labels, mass, ev, pp, qq, opener, memo)


def check_consensus_everywhere(fw: Framework) -> str | None:
    """Run the dialogue once and inspect it at every true state; ``None`` if all is well."""
    u = unfold(fw)
    if u.fixed_point_step > 2 * fw.size:
        return f"fixed point at step {u.fixed_point_step} > 2*|states|"
    k = u.fixed_point_step
    for w in range(fw.size):
        said = u.opinions_at(w)
        if consensus_of(said, k)[0] is None:
            return f"no consensus at state {w}: {said[k - 1]} vs {said[k]}"
        if check_certainty_acquiescence(said) is not None:
            return f"transcript at state {w} violates certainty acquiescence"
    return None


def run_harness(cfg: GeneratorConfig, cases: int) -> dict:
    failures = []
    for i in range(cases):
        d = gen_random_dialogue(cfg.with_seed(cfg.seed + i))
        rep = roundtrip_check(d)
        if not rep:
            failures.append({"seed": cfg.seed + i, "dialogue": [str(b) for b in d.opinions],
                             "detail": rep.detail})
        fw = gen_random_framework(cfg.with_seed(cfg.seed + i))
        problem = check_consensus_everywhere(fw)
        if problem:
            failures.append({"seed": cfg.seed + i, "framework": True, "detail": problem})
    return {
        "config": asdict(cfg),
        "cases": cases,
        "passed": not failures,
        "failures": failures,
    }


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ap = argparse.ArgumentParser(description="seeded round-trip and consensus checks")
    ap.add_argument("--max-states", type=int, default=8)
    ap.add_argument("--max-denominator", type=int, default=12)
    ap.add_argument("--max-dialogue-length", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cases", type=int, default=200)
    ap.add_argument("--stats", action="store_true", help="include wall-clock time in the summary")
    args = ap.parse_args(argv)
    cfg = GeneratorConfig(args.max_states, args.max_denominator, args.max_dialogue_length, args.seed)
    t0 = time.perf_counter()
    summary = run_harness(cfg, args.cases)
    if args.stats:
        summary["seconds"] = round(time.perf_counter() - t0, 3)
    json.dump(summary, out, indent=2)
    out.write("\n")
    return 0 if summary["passed"] else 2


if __name__ == "__main__":
    raise SystemExit(main())
