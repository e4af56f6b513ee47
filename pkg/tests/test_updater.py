"""Reconciliation pipeline: law preservation against exact step laws,
work accounting, validation, and the chain pool."""

import math

import numpy as np
import pytest

from dyngibbs.engine import ChainParams, run_chain
from dyngibbs.errors import (
    GraphMismatch,
    NotIsolated,
    SharedPotentialMismatch,
    VertexSetMismatch,
)
from dyngibbs.inference import PowerLogFn, ScheduleFns, sample_diff
from dyngibbs.models import hardcore_instance, ising_instance
from dyngibbs.mrf import (
    AddEdge,
    AddVertex,
    DeleteEdge,
    DeleteVertex,
    EdgePotential,
    SetEdgePotential,
    SetVertexPotential,
    UpdateBatch,
    VertexPotential,
)
from dyngibbs.rng import make_stream, update_stream
from dyngibbs.updater import (
    add_vertices,
    apply_update,
    apply_update_multi,
    build_filter,
    execute_update,
    new_chain_set,
    plan_update,
    update_edge,
    update_hamiltonian,
)
from helpers import exact_final_law
from dyngibbs.oracle import encode_config


def params(T, seed=0, delta=0.5):
    return ChainParams(delta=delta, eps_fn=lambda n: 0.1, seed=seed,
                       length_override=T)


def updated_law_tv(old, batch, T, reps, seed=0):
    """TV between the empirical law of dynamically updated finals and the
    exact T-step law of the new instance."""
    p = params(T, seed=seed)
    plan = plan_update(old, batch, p)
    ids = plan.final.vertex_ids()
    q = plan.final.q
    K = q ** len(ids)
    counts = np.zeros(K)
    for i in range(reps):
        log = run_chain(old, p, stream=i)
        execute_update(plan, log, make_stream(seed, update_stream(1, i)))
        assert log.length == T
        counts[encode_config(ids, q, log.final_config())] += 1
    want = exact_final_law(plan.final, T)
    return 0.5 * float(np.abs(counts / reps - want).sum())


class TestLawPreservation:
    REPS = 6000

    def test_potential_change(self):
        old = ising_instance(3, [(0, 1), (1, 2)], 0.3, field=0.1)
        batch = UpdateBatch([
            SetVertexPotential(1, VertexPotential((-0.5, 0.5))),
            SetEdgePotential(0, 1, EdgePotential(((0.7, -0.7), (-0.7, 0.7)))),
        ])
        assert updated_law_tv(old, batch, 15, self.REPS) < 0.05

    def test_edge_add_and_delete(self):
        old = ising_instance(4, [(0, 1), (1, 2), (2, 3)], 0.25)
        batch = UpdateBatch([
            DeleteEdge(1, 2),
            AddEdge(0, 3, EdgePotential(((0.4, -0.4), (-0.4, 0.4)))),
        ])
        assert updated_law_tv(old, batch, 16, self.REPS) < 0.05

    def test_vertex_add_and_delete(self):
        old = hardcore_instance(3, [(0, 1), (1, 2)], 1.2)
        batch = UpdateBatch([
            AddVertex(7, VertexPotential((0.0, math.log(1.2)))),
            AddEdge(7, 0, hardcore_instance(2, [(0, 1)], 1.2).edge_potential(0, 1)),
            DeleteEdge(1, 2),
            DeleteVertex(2),
        ])
        assert updated_law_tv(old, batch, 14, self.REPS) < 0.05

    def test_regeneration_fallback(self):
        # flipping a weight to -inf makes the smooth path unsound; the plan
        # must regenerate, and the law must still come out right
        old = ising_instance(3, [(0, 1), (1, 2)], 0.2)
        batch = UpdateBatch([
            SetVertexPotential(2, VertexPotential((0.0, float("-inf")))),
        ])
        plan = plan_update(old, batch, params(12))
        assert plan.regenerate
        assert updated_law_tv(old, batch, 12, self.REPS) < 0.05


class TestDeterminism:
    def test_same_seeds_same_result(self):
        old = ising_instance(5, [(0, 1), (1, 2), (2, 3), (3, 4)], 0.3)
        batch = UpdateBatch([SetVertexPotential(2, VertexPotential((0.3, -0.3)))])
        finals = []
        for _ in range(2):
            log = run_chain(old, params(400, seed=21), stream=5)
            _, met = apply_update(old, batch, log, params(400, seed=21),
                                  make_stream(21, update_stream(1, 5)))
            finals.append((log.final_config(),
                           [log.at(t) for t in range(1, 401, 37)], met.r_ham))
        assert finals[0] == finals[1]


class TestValidation:
    def test_hamiltonian_step_rejects_graph_changes(self):
        a = ising_instance(3, [(0, 1)], 0.2)
        b = a.apply_batch(UpdateBatch([AddEdge(1, 2, EdgePotential(((0.2, -0.2), (-0.2, 0.2))))]))
        log = run_chain(a, params(50), stream=0)
        filt = build_filter(log, {}, make_stream(0, 1))
        with pytest.raises(GraphMismatch):
            update_hamiltonian(a, b, log, filt, make_stream(0, 2))

    def test_edge_step_rejects_vertex_changes(self):
        a = ising_instance(3, [(0, 1)], 0.2)
        b = ising_instance(4, [(0, 1)], 0.2)
        log = run_chain(a, params(50), stream=0)
        with pytest.raises(VertexSetMismatch):
            update_edge(a, b, log, make_stream(0, 2))

    def test_edge_step_rejects_potential_changes(self):
        a = ising_instance(3, [(0, 1), (1, 2)], 0.2)
        b = a.apply_batch(UpdateBatch([
            DeleteEdge(1, 2),
            SetVertexPotential(0, VertexPotential((0.4, -0.4))),
        ]))
        log = run_chain(a, params(50), stream=0)
        with pytest.raises(SharedPotentialMismatch):
            update_edge(a, b, log, make_stream(0, 2))

    def test_vertex_splice_requires_isolation(self):
        a = ising_instance(3, [(0, 1)], 0.2)
        b = a.apply_batch(UpdateBatch([
            AddVertex(9, VertexPotential((0.0, 0.0))),
            AddEdge(9, 0, EdgePotential(((0.2, -0.2), (-0.2, 0.2)))),
        ]))
        log = run_chain(a, params(50), stream=0)
        with pytest.raises(NotIsolated):
            add_vertices(a, b, log, make_stream(0, 2))


class TestWorkAccounting:
    def test_localized_change_touches_few_steps(self):
        n, T = 40, 4000
        edges = [(i, i + 1) for i in range(n - 1)]
        old = ising_instance(n, edges, 0.15)
        batch = UpdateBatch([SetVertexPotential(7, VertexPotential((0.05, -0.05)))])
        log = run_chain(old, params(T, seed=3), stream=0)
        _, met = apply_update(old, batch, log, params(T, seed=3),
                              make_stream(3, update_stream(1, 0)))
        assert not met.regenerated
        assert met.r_graph == 0
        assert met.r_ham < T * 0.1, f"visited {met.r_ham} of {T}"

    def test_empty_batch_is_free(self):
        old = ising_instance(4, [(0, 1), (2, 3)], 0.2)
        log = run_chain(old, params(200, seed=4), stream=0)
        before = log.final_config()
        new, met = apply_update(old, UpdateBatch([]), log, params(200, seed=4),
                                make_stream(4, update_stream(1, 0)))
        assert new is not old or new == old
        assert log.final_config() == before
        assert met.r_ham == 0 and met.r_graph == 0 and met.filter_size == 0

    def test_filter_marks_only_changed_vertices(self):
        old = ising_instance(6, [(i, i + 1) for i in range(5)], 0.2)
        log = run_chain(old, params(600, seed=5), stream=0)
        filt = build_filter(log, {2: 0.5}, make_stream(5, 77))
        marks = set(filt.steps)
        assert marks <= set(log.steps_of(2))
        # roughly half of vertex 2's steps, binomial slack
        occ = len(log.steps_of(2))
        assert 0.2 * occ < len(marks) < 0.8 * occ

    def test_metrics_wall_time_populated(self):
        old = ising_instance(4, [(0, 1), (1, 2)], 0.2)
        batch = UpdateBatch([SetVertexPotential(0, VertexPotential((0.1, -0.1)))])
        log = run_chain(old, params(100, seed=6), stream=0)
        _, met = apply_update(old, batch, log, params(100, seed=6),
                              make_stream(6, update_stream(1, 0)))
        assert met.wall_time > 0


class TestChainPool:
    def schedule(self, count):
        return ScheduleFns(n_samples=PowerLogFn(float(count), 0.0, 0.0),
                           eps=PowerLogFn(0.2, 0.0, 0.0))

    def test_pool_size_follows_schedule(self):
        inst = ising_instance(4, [(0, 1), (1, 2)], 0.2)
        cs = new_chain_set(inst, params(80), self.schedule(5))
        assert len(cs.logs) == 5
        assert set(cs.samples()) == {0, 1, 2, 3, 4}

    def test_multi_update_diff_matches_brute_force(self):
        inst = ising_instance(5, [(0, 1), (1, 2), (2, 3), (3, 4)], 0.25)
        cs = new_chain_set(inst, params(300, seed=11), self.schedule(6))
        before = cs.samples()
        batch = UpdateBatch([
            SetVertexPotential(1, VertexPotential((0.3, -0.3))),
            DeleteEdge(2, 3),
        ])
        diff, metrics = apply_update_multi(cs, batch)
        after = cs.samples()
        want = sample_diff(before, after)
        got = {(e.chain, e.vertex): (e.old, e.new) for e in diff.entries}
        expect = {(e.chain, e.vertex): (e.old, e.new) for e in want.entries}
        assert got == expect
        assert diff.added_chains == want.added_chains
        assert diff.removed_chains == want.removed_chains
        assert len(metrics) == 6
        assert cs.epoch == 1

    def test_resize_on_vertex_growth(self):
        # sample count follows n; adding vertices appends fresh tail chains
        inst = ising_instance(4, [(0, 1), (1, 2)], 0.2)
        sched = ScheduleFns(n_samples=PowerLogFn(1.0, 1.0, 0.0),
                            eps=PowerLogFn(0.2, 0.0, 0.0))
        cs = new_chain_set(inst, params(120, seed=12), sched)
        assert len(cs.logs) == 4
        grow = UpdateBatch([AddVertex(9, VertexPotential((0.0, 0.0))),
                            AddVertex(10, VertexPotential((0.0, 0.0)))])
        diff, _ = apply_update_multi(cs, grow)
        assert len(cs.logs) == 6
        assert diff.added_chains == (4, 5)
        shrink = UpdateBatch([DeleteVertex(9), DeleteVertex(10)])
        diff, _ = apply_update_multi(cs, shrink)
        assert len(cs.logs) == 4
        assert diff.removed_chains == (4, 5)

    def test_threads_do_not_change_output(self):
        inst = ising_instance(6, [(i, i + 1) for i in range(5)], 0.2)
        batch = UpdateBatch([SetEdgePotential(2, 3, EdgePotential(((0.5, -0.5), (-0.5, 0.5))))])
        results = []
        for threads in (1, 3):
            cs = new_chain_set(inst, params(250, seed=13), self.schedule(5))
            diff, _ = apply_update_multi(cs, batch, threads=threads)
            results.append((cs.samples(), tuple(diff.entries)))
        assert results[0] == results[1]
