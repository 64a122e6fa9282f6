from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from conftest import frameworks
from oracles import history_transcript
from rational_dialogues.engine import (
    OpinionFunction,
    dialogue_step,
    is_common_knowledge,
    is_expert,
    opinion,
    opinion_function,
    reachable_closure,
    refine_by_announcement,
    run_dialogue,
    unfold,
)
from rational_dialogues.model import Framework, FrameworkError, Partition
from rational_dialogues.rationalizer import check_certainty_acquiescence, rationalize_base
from rational_dialogues.testkit import GeneratorConfig, gen_random_framework, perturb_outside_closure


def label_index(fw, label):
    return fw.labels.index(label)


def test_example_opening_opinion(example):
    fw, star = example
    assert opinion(fw, "p", star) == F(1, 4)
    assert opinion(fw, "p", star) == F(3, 4) / (F(3, 4) + F(1, 4) + 2)


def test_didactic_opening_opinion(didactic):
    fw, star = didactic
    assert opinion(fw, "p", star) == F(3, 4)


def test_whole_space_event_gives_certainty():
    fw = gen_random_framework(GeneratorConfig(max_states=6, seed=3))
    full = Framework(fw.labels, fw.mass, frozenset(range(fw.size)), fw.partition_p, fw.partition_q)
    assert all(opinion(full, a, w) == 1 for a in "pq" for w in range(full.size))


def test_every_row_of_example_opens_at_one_quarter(example):
    fw, _ = example
    assert set(opinion_function(fw, "p").values) == {F(1, 4)}


def test_constant_announcement_leaves_listener_unchanged(example):
    fw, _ = example
    said = opinion_function(fw, "p")
    assert refine_by_announcement(fw.partition_q, said) == fw.partition_q


def test_refine_rejects_mismatched_spaces():
    said = OpinionFunction(Partition.trivial(2), (F(1, 2),))
    with pytest.raises(FrameworkError):
        refine_by_announcement(Partition.trivial(3), said)


def test_refine_by_discrete_speaker_three_states():
    # a speaker who knows the state can only announce 0 or 1
    fw = Framework(("a", "b", "c"), (F(1), F(2), F(3)), frozenset({0}),
                   Partition.discrete(3), Partition.trivial(3))
    said = opinion_function(fw, "p")
    assert said.values == (F(1), F(0), F(0))
    # brute force: listener can separate exactly the states with different opinions
    expected = {frozenset(s for s in range(3) if said.at(s) == said.at(w)) for w in range(3)}
    got = refine_by_announcement(fw.partition_q, said)
    assert {frozenset(c) for c in got.cells} == expected
    fw2 = Framework(fw.labels, (F(1), F(1), F(1)), frozenset({0}), Partition.discrete(3),
                    Partition.trivial(3))
    assert refine_by_announcement(fw2.partition_q, opinion_function(fw2, "p")) == \
        Partition(((0,), (1, 2)), 3)
    event_b = Framework(fw.labels, fw.mass, frozenset({1}), Partition(((0, 1), (2,)), 3),
                        Partition.trivial(3))
    # speaker cells {a,b}: 2/3, {c}: 0 -> listener splits into {a,b},{c}
    assert refine_by_announcement(event_b.partition_q, opinion_function(event_b, "p")) == \
        Partition(((0, 1), (2,)), 3)


def test_refine_listener_becomes_discrete():
    speaker = Partition.discrete(3)
    said = OpinionFunction(speaker, (F(1, 4), F(1, 2), F(3, 4)))
    out = refine_by_announcement(Partition.trivial(3), said)
    # brute force: two states stay together iff the announced values agree
    expected = {frozenset(v for v in range(3) if said.at(v) == said.at(w)) for w in range(3)}
    assert {frozenset(c) for c in out.cells} == expected
    assert out == Partition.discrete(3)


def test_refine_lumped_speaker_splits_listener_completely():
    lumped = Framework(("a", "b", "c", "d", "e", "f"),
                       (F(1), F(1), F(1), F(2), F(1), F(3)), frozenset({0, 2, 4}),
                       Partition(((0, 1), (2, 3), (4, 5)), 6), Partition(((0, 2, 4), (1, 3, 5)), 6))
    said = opinion_function(lumped, "p")
    assert said.values == (F(1, 2), F(1, 3), F(1, 4))
    out = refine_by_announcement(lumped.partition_q, said)
    assert out == Partition.discrete(6)
    assert out.refines(lumped.partition_q)


def test_step_of_trivial_framework_flips_opener_only():
    fw = rationalize_base(F(1, 3)).framework
    nxt = dialogue_step(fw)
    assert nxt.partition_p == fw.partition_p and nxt.partition_q == fw.partition_q
    assert nxt.opener == "q"
    assert dialogue_step(fw) == nxt


def test_example_two_steps_exclude_columns_then_rows(example):
    fw, star = example
    s1 = dialogue_step(fw)            # p: 1/4 on every row, nothing revealed
    assert s1.partition_q == fw.partition_q
    s2 = dialogue_step(s1)            # q: 1/4 in column 1; columns 4, 5 would have said 1, 0
    assert opinion(s1, "q", star) == F(1, 4)
    for lab in ("y5.4", "n4.5"):
        assert len(s2.partition_p.cell_at(label_index(fw, lab))) == 1
    assert opinion(s2, "p", star) == F(1, 4)
    s3 = dialogue_step(s2)            # p: still 1/4; rows 4 and 5 would have said 1 or 0
    for lab in ("y4.3", "n5.2", "n5.3"):
        assert star not in s3.partition_q.cell_at(label_index(fw, lab))
    first_column = set(s3.partition_q.cell_at(star))
    assert first_column == {label_index(fw, x) for x in ("y1.1a", "n1.1b", "n3.1")}
    assert opinion(s3, "q", star) == F(1, 4)


def test_example_row_split_after_first_column_announcement(example):
    fw, star = example
    s2 = dialogue_step(dialogue_step(fw))
    top = {fw.labels[s] for s in s2.partition_p.cell_at(star)}
    # columns 4 and 5 hold no positive state in the top row; column 3's n[2] stays
    assert top == {"y1.1a", "n1.1b", "n1.3"}


def test_run_dialogue_example(example):
    fw, star = example
    tr = run_dialogue(fw, star)
    assert tr.transcript == (F(1, 4),) * 4 + (F(3, 4),) * 2
    assert tr.consensus_value == F(3, 4)
    assert tr.termination_step == 5
    assert tr.fixed_point_step <= 2 * fw.size


def test_run_dialogue_didactic(didactic):
    fw, star = didactic
    tr = run_dialogue(fw, star)
    assert tr.transcript == (F(3, 4), F(1, 4), F(3, 4), F(1, 4), F(3, 4), F(3, 4))
    assert tr.consensus_value == F(3, 4)


def test_trivial_partitions_agree_immediately():
    fw = Framework(("a", "b", "c"), (F(1), F(2), F(3)), frozenset({1}),
                   Partition.trivial(3), Partition.trivial(3))
    tr = run_dialogue(fw, 2)
    assert tr.termination_step == 1
    assert tr.consensus_value == F(2, 6)
    assert tr.transcript == (F(1, 3), F(1, 3))


def test_run_dialogue_rejects_bad_state(example):
    fw, _ = example
    with pytest.raises(FrameworkError):
        run_dialogue(fw, fw.size)


@settings(max_examples=200, deadline=None)
@given(frameworks())
def test_engine_matches_history_oracle(fw):
    u = unfold(fw)
    for w in range(fw.size):
        want = history_transcript(fw.mass, fw.event, fw.partition_p.cells, fw.partition_q.cells,
                                  fw.opener, w, len(u.frames) + 3)
        got = [u.opinion_at(t, w) for t in range(1, len(want) + 1)]
        assert got == want


def test_monotone_termination_consensus_on_random_frameworks():
    for seed in range(1000):
        fw = gen_random_framework(GeneratorConfig(max_states=12, seed=seed))
        u = unfold(fw)
        assert u.fixed_point_step <= 2 * fw.size
        prev_p, prev_q = fw.partition_p, fw.partition_q
        for frame in u.frames:
            p, q = frame.after.partition_p, frame.after.partition_q
            assert p.refines(prev_p) and q.refines(prev_q)
            assert len(p) <= fw.size and len(q) <= fw.size
            prev_p, prev_q = p, q
        for w in range(fw.size):
            tr = run_dialogue(fw, w)
            last = tr.steps[tr.fixed_point_step - 1:]
            at_fixed = fw.with_partitions(last[0].partition_p, last[0].partition_q, "p")
            assert opinion(at_fixed, "p", w) == opinion(at_fixed, "q", w) == tr.consensus_value
            assert check_certainty_acquiescence(tr.opinions) is None


def test_closure_trivial_partitions_is_everything():
    fw = rationalize_base(F(1, 2)).framework
    assert reachable_closure(fw, 0) == frozenset({0, 1})


def test_closure_of_certain_base_is_singleton():
    res = rationalize_base(F(0))
    assert reachable_closure(res.framework, res.omega_star) == frozenset({res.omega_star})


def test_closure_of_example_is_all_positive_states(example):
    fw, star = example
    closure = reachable_closure(fw, star)
    assert closure == frozenset(range(fw.size))
    assert is_common_knowledge(fw, closure, star)


def test_common_knowledge_checks(example):
    fw, star = example
    assert is_common_knowledge(fw, range(fw.size), star)
    pair = {label_index(fw, "y1.1a"), label_index(fw, "n1.1b")}
    assert not is_common_knowledge(fw, pair, star)
    assert not is_common_knowledge(fw, {1}, 0)


def test_closure_is_smallest_common_knowledge_event():
    for seed in range(200):
        fw = gen_random_framework(GeneratorConfig(max_states=6, seed=seed))
        for w in range(fw.size):
            closure = reachable_closure(fw, w)
            assert is_common_knowledge(fw, closure, w)
            for drop in closure - {w}:
                assert not is_common_knowledge(fw, closure - {drop}, w)


def test_expert_didactic_p(didactic):
    fw, star = didactic
    assert is_expert(fw, "p", star)


def test_expert_example_p_is_not(example):
    fw, star = example
    assert not is_expert(fw, "p", star)


def test_expert_singleton_cell():
    res = rationalize_base(F(0))
    assert is_expert(res.framework, "p", res.omega_star)
    assert is_expert(res.framework, "q", res.omega_star)


def test_expert_scopes_differ():
    # p's own cell is pure, but elsewhere in the closure the join holds other values
    fw = Framework(("a", "b", "c"), (F(1), F(1), F(1)), frozenset({0, 2}),
                   Partition(((0,), (1, 2)), 3), Partition(((0, 1), (2,)), 3))
    assert is_expert(fw, "p", 0, scope="cell")
    assert not is_expert(fw, "p", 0, scope="closure")
    with pytest.raises(ValueError):
        is_expert(fw, "p", 0, scope="everywhere")


def test_closure_independence_perturbations():
    checked = 0
    seed = 0
    while checked < 100:
        fw = gen_random_framework(GeneratorConfig(max_states=10, seed=seed))
        seed += 1
        for w in range(fw.size):
            if len(reachable_closure(fw, w)) < fw.size:
                moved = perturb_outside_closure(fw, w, seed)
                assert moved != fw
                a, b = run_dialogue(fw, w), run_dialogue(moved, w)
                assert a.transcript == b.transcript
                assert a.consensus_value == b.consensus_value
                checked += 1
                break
