import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import all_partitions, brute_join, refines
from rational_dialogues.engine import opinion, run_dialogue
from rational_dialogues.model import (
    Framework,
    FrameworkError,
    Partition,
    drop_null_states,
    join_partitions,
    normalize_measure,
    validate_framework,
)
from rational_dialogues.matrix_io import load_fixture, matrix_to_framework
from rational_dialogues.testkit import GeneratorConfig, gen_random_framework


def two_state(mass=(F(1, 2), F(1, 2)), p=None, q=None):
    return Framework(("y", "n"), mass, frozenset({0}),
                     p or Partition.trivial(2), q or Partition.trivial(2))


def test_minimal_framework_is_valid():
    assert validate_framework(two_state()).ok


def test_zero_mass_state_reported():
    report = validate_framework(two_state(mass=(F(1), F(0))))
    assert not report.ok
    assert any("prior not strictly positive" in v for v in report.violations)


def test_uncovered_state_reported():
    report = validate_framework(two_state(p=Partition(((0,),), 2)))
    assert any("cells do not cover" in v for v in report.violations)


def test_overlapping_cells_and_float_masses_reported():
    fw = Framework(("a", "b"), (0.5, F(1, 2)), frozenset(), Partition(((0, 1), (1,)), 2),
                   Partition.trivial(2))
    text = " ".join(validate_framework(fw).violations)
    assert "not an exact rational" in text
    assert "appears in cells" in text


def test_partition_equality_ignores_order():
    a = Partition(((0, 1), (2,)), 3)
    b = Partition(((2,), (0, 1)), 3)
    assert a == b and hash(a) == hash(b)
    assert a != Partition.discrete(3)


@pytest.mark.parametrize("n", range(1, 5))
def test_join_idempotent_and_trivial_identity(n):
    for cells in all_partitions(n):
        x = Partition.of(cells, n)
        assert join_partitions(x, x) == x
        assert join_partitions(Partition.trivial(n), x) == x
        assert join_partitions(x, Partition.trivial(n)) == x


def test_join_rejects_mismatched_spaces():
    with pytest.raises(FrameworkError):
        join_partitions(Partition.trivial(2), Partition.trivial(3))


@pytest.mark.parametrize("n", range(1, 6))
def test_join_is_coarsest_common_refinement_exhaustive(n):
    parts = all_partitions(n)
    rng = random.Random(n)
    pairs = [(a, b) for a in parts for b in parts]
    if len(pairs) > 400:
        pairs = rng.sample(pairs, 400)
    for a, b in pairs:
        j = join_partitions(Partition.of(a, n), Partition.of(b, n))
        assert {frozenset(c) for c in j.cells} == brute_join(a, b, n)
        assert refines(j.cells, a) and refines(j.cells, b)
        for r in parts:
            if refines(r, a) and refines(r, b):
                assert refines(r, j.cells)


def test_join_is_coarsest_common_refinement_six_states():
    n = 6
    parts = all_partitions(n)
    rng = random.Random(6)
    for _ in range(40):
        a, b = rng.choice(parts), rng.choice(parts)
        j = join_partitions(Partition.of(a, n), Partition.of(b, n))
        assert refines(j.cells, a) and refines(j.cells, b)
        for r in parts:
            if refines(r, a) and refines(r, b):
                assert refines(r, j.cells)


def test_example_join_top_left_cell_is_the_only_pair():
    fw, star = matrix_to_framework(load_fixture("example-5x5"))
    j = join_partitions(fw.partition_p, fw.partition_q)
    big = [c for c in j.cells if len(c) > 1]
    assert len(big) == 1
    assert star in big[0] and len(big[0]) == 2
    # every other positive entry of the grid is a join cell of its own
    assert len(j) == fw.size - 1


def test_drop_null_states_unchanged_when_all_positive():
    fw = two_state(mass=(F(1, 3), F(2, 3)))
    out = drop_null_states(fw.labels, fw.mass, fw.event, (fw.partition_p, fw.partition_q))
    assert out == fw


def test_drop_null_states_reindexes():
    labels = ("a", "b", "c")
    mass = (F(1), F(0), F(2))
    p = Partition(((0, 1), (2,)), 3)
    q = Partition.trivial(3)
    out = drop_null_states(labels, mass, {1, 2}, (p, q))
    assert out.labels == ("a", "c")
    assert out.event == frozenset({1})
    assert out.partition_p == Partition(((0,), (1,)), 2)


def test_drop_null_states_example_grid_has_twelve_states():
    doc = load_fixture("example-5x5")
    positive = sum(1 for row in doc.rows for cell in row for e in cell if e.mass > 0)
    assert positive == 12
    fw, _ = matrix_to_framework(doc)
    assert fw.size == 12 and validate_framework(fw).ok


def test_drop_null_states_all_zero_row_raises():
    labels = ("a", "b", "c")
    mass = (F(1), F(0), F(0))
    rows = Partition(((0,), (1, 2)), 3)
    with pytest.raises(FrameworkError, match="empty cell after drop"):
        drop_null_states(labels, mass, set(), (rows, Partition.trivial(3)))


def test_drop_null_states_zero_total():
    with pytest.raises(FrameworkError):
        drop_null_states(("a",), (F(0),), set(), (Partition.trivial(1), Partition.trivial(1)))


def test_normalize_measure_examples():
    assert normalize_measure((F(1), F(1))) == (F(1, 2), F(1, 2))
    assert normalize_measure((F(3, 4), F(1, 4), F(2))) == (F(1, 4), F(1, 12), F(2, 3))
    with pytest.raises(FrameworkError):
        normalize_measure((F(0), F(0)))


def test_example_total_mass_is_44_over_3():
    doc = load_fixture("example-5x5")
    total = sum(e.mass for row in doc.rows for cell in row for e in cell)
    assert total == F(44, 3)
    fw, _ = matrix_to_framework(doc)
    assert sum(normalize_measure(fw.mass)) == 1
    assert normalize_measure(fw.mass)[0] == F(3, 4) / F(44, 3)


def test_normalization_never_changes_opinions():
    for seed in range(500):
        fw = gen_random_framework(GeneratorConfig(max_states=8, seed=seed))
        norm = fw.normalized()
        for w in range(fw.size):
            for agent in "pq":
                assert opinion(norm, agent, w) == opinion(fw, agent, w)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 50), st.integers(1, 50), st.integers(0, 10_000))
def test_scaling_mass_leaves_traces_identical(num, den, seed):
    fw = gen_random_framework(GeneratorConfig(max_states=7, seed=seed))
    k = F(num, den)
    scaled = Framework(fw.labels, tuple(m * k for m in fw.mass), fw.event,
                       fw.partition_p, fw.partition_q, fw.opener)
    for w in range(fw.size):
        assert run_dialogue(scaled, w).opinions == run_dialogue(fw, w).opinions
