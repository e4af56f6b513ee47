"""Execution log: rank edits, point queries, journals, and the flat/tree
switch, checked against the structure-free linear twin."""

import random

import pytest

from dyngibbs.errors import (
    RankOutOfRange,
    UnknownVertex,
    VertexHasTransitions,
)
from dyngibbs.execlog import ExecutionLog
from helpers import LinearLog


def small_log():
    log = ExecutionLog({0: 0, 1: 1, 2: 0})
    for t, (v, c) in enumerate([(0, 1), (1, 0), (0, 0), (2, 1)], 1):
        log.insert(t, v, c)
    return log


class TestBasics:
    def test_initial_and_final(self):
        log = small_log()
        assert log.length == 4
        assert log.initial_config() == {0: 0, 1: 1, 2: 0}
        assert log.final_config() == {0: 0, 1: 0, 2: 1}

    def test_evaluate_walks_prefix(self):
        log = small_log()
        assert log.evaluate(0, 0) == 0
        assert log.evaluate(1, 0) == 1
        assert log.evaluate(3, 0) == 0
        assert log.evaluate(4, 1) == 0

    def test_at_and_successor(self):
        log = small_log()
        assert (log.at(1).vertex, log.at(1).spin) == (0, 1)
        assert log.successor(0, 0) == 1
        assert log.successor(1, 0) == 3
        assert log.successor(3, 0) is None

    def test_steps_of(self):
        assert small_log().steps_of(0) == (1, 3)
        assert small_log().steps_of(1) == (2,)

    def test_rank_bounds(self):
        log = small_log()
        with pytest.raises(RankOutOfRange):
            log.at(0)
        with pytest.raises(RankOutOfRange):
            log.at(5)
        with pytest.raises(RankOutOfRange):
            log.insert(6, 0, 0)
        with pytest.raises(RankOutOfRange):
            log.remove(0)

    def test_unknown_vertex(self):
        log = small_log()
        with pytest.raises(UnknownVertex):
            log.evaluate(2, 9)
        with pytest.raises(UnknownVertex):
            log.insert(1, 9, 0)


class TestEdits:
    def test_insert_shifts_ranks(self):
        log = small_log()
        log.insert(2, 2, 0)
        assert log.length == 5
        assert (log.at(2).vertex, log.at(2).spin) == (2, 0)
        assert log.at(3).vertex == 1

    def test_remove_shifts_back(self):
        log = small_log()
        log.remove(2)
        assert log.length == 3
        assert log.at(2).vertex == 0
        assert log.final_config()[1] == 1, "vertex 1 falls back to initial"

    def test_change_keeps_rank(self):
        log = small_log()
        log.change(1, 0)
        assert (log.at(1).vertex, log.at(1).spin) == (0, 0)
        assert log.evaluate(2, 0) == 0

    def test_vertex_add_remove(self):
        log = small_log()
        log.add_vertex_initial(7, 1)
        assert log.evaluate(4, 7) == 1
        log.remove_vertex(7)
        with pytest.raises(UnknownVertex):
            log.evaluate(0, 7)

    def test_remove_vertex_with_transitions_refused(self):
        log = small_log()
        with pytest.raises(VertexHasTransitions):
            log.remove_vertex(0)


class TestJournal:
    """The journal maps each touched vertex to its pre-journal final spin
    (None when it was absent); new values are read back from the log."""

    def test_tracks_final_spin_changes(self):
        log = small_log()
        log.begin_final_journal()
        log.change(4, 0)     # vertex 2 final: 1 -> 0
        log.change(1, 0)     # vertex 0 final unchanged (rank 3 shadows rank 1)
        journal = log.take_final_journal()
        assert journal == {2: 1}
        assert log.final_config()[2] == 0

    def test_records_vertex_membership(self):
        log = small_log()
        log.begin_final_journal()
        log.add_vertex_initial(7, 1)
        journal = log.take_final_journal()
        assert journal == {7: None}

    def test_remove_records_old_spin(self):
        log = ExecutionLog({0: 0, 7: 1})
        log.begin_final_journal()
        log.remove_vertex(7)
        assert log.take_final_journal() == {7: 1}


class TestModeSwitch:
    def test_flat_until_first_rank_edit_burst(self):
        log = ExecutionLog.from_run({0: 0, 1: 0}, [0, 1] * 50, [1, 1] * 50)
        assert log.is_flat
        log.insert(3, 0, 0)
        log.remove(3)
        log.compact()
        assert log.is_flat
        assert log.final_config() == {0: 1, 1: 1}

    def test_queries_agree_across_modes(self):
        rng = random.Random(11)
        verts = [rng.randrange(4) for _ in range(200)]
        spins = [rng.randrange(3) for _ in range(200)]
        initial = {v: 0 for v in range(4)}
        log = ExecutionLog.from_run(initial, verts, spins)
        flat_answers = [(log.evaluate(t, v), log.successor(t, v))
                        for t in range(0, 201, 7) for v in range(4)]
        log.insert(1, 0, 2)    # force tree mode
        log.remove(1)
        tree_answers = [(log.evaluate(t, v), log.successor(t, v))
                        for t in range(0, 201, 7) for v in range(4)]
        assert flat_answers == tree_answers


class TestFuzzAgainstLinear:
    def test_mixed_operations(self):
        rng = random.Random(77)
        initial = {v: rng.randrange(3) for v in range(5)}
        log = ExecutionLog(initial)
        twin = LinearLog(initial)
        for step in range(3000):
            L = twin.length
            r = rng.random()
            if r < 0.40 or L == 0:
                t, v, c = rng.randrange(1, L + 2), rng.randrange(5), rng.randrange(3)
                log.insert(t, v, c)
                twin.insert(t, v, c)
            elif r < 0.55:
                t = rng.randrange(1, L + 1)
                log.remove(t)
                twin.remove(t)
            elif r < 0.70:
                t, c = rng.randrange(1, L + 1), rng.randrange(3)
                log.change(t, c)
                twin.change(t, c)
            elif r < 0.80:
                t, v = rng.randrange(0, L + 1), rng.randrange(5)
                assert log.evaluate(t, v) == twin.evaluate(t, v), f"step {step}"
            elif r < 0.90:
                t = rng.randrange(1, L + 1)
                tr = log.at(t)
                assert (tr.vertex, tr.spin) == twin.at(t)
            else:
                t, v = rng.randrange(0, L + 1), rng.randrange(5)
                assert log.successor(t, v) == twin.successor(t, v)
        assert log.final_config() == twin.final_config()
        for v in range(5):
            assert log.steps_of(v) == twin.steps_of(v)

    def test_fuzz_with_periodic_compact(self):
        rng = random.Random(78)
        initial = {v: 0 for v in range(3)}
        log = ExecutionLog(initial)
        twin = LinearLog(initial)
        for step in range(1500):
            L = twin.length
            if rng.random() < 0.5 or L == 0:
                t, v, c = rng.randrange(1, L + 2), rng.randrange(3), rng.randrange(2)
                log.insert(t, v, c)
                twin.insert(t, v, c)
            else:
                t = rng.randrange(1, L + 1)
                log.remove(t)
                twin.remove(t)
            if step % 400 == 399:
                log.compact()
                assert log.is_flat
        assert log.final_config() == twin.final_config()


class TestLoadRun:
    def test_replaces_content_in_place(self):
        log = small_log()
        log.load_run({0: 1, 5: 0}, [5, 0], [1, 0])
        assert log.length == 2
        assert set(log.vertex_ids()) == {0, 5}
        assert log.final_config() == {0: 0, 5: 1}

    def test_journal_spans_reload(self):
        # old finals {0:0, 1:0, 2:1}; reload drops 2, keeps 0 at 0, flips 1
        log = small_log()
        log.begin_final_journal()
        log.load_run({0: 1, 1: 0}, [0, 1], [0, 1])
        journal = log.take_final_journal()
        assert journal[2] == 1
        assert journal.get(1) == 0
        assert log.final_config() == {0: 0, 1: 1}
