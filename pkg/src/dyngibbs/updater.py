"""Dynamic updates: transform an execution log for one instance into a log
for a modified instance, touching only the transitions that can tell the two
apart.

The log is rewritten in place through a sequence of phases, each taking the
chain law from one instance to the next:

    potentials -> added vertices -> deleted edges -> added edges
               -> deleted vertices -> length correction

The potential and edge phases are coupled replays: the recorded chain (X) and
the target chain (Y) are advanced through a maximal coupling, and only ranks
where they can disagree are visited. Disagreements are tracked in a set D;
a rank needs a visit iff it is a pre-sampled correction step, its vertex's
boundary intersects D, or its vertex itself sits in D. Everything else is
provably identical on both chains and is skipped.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Mapping, Optional

from .coupling import correction_kernel, maximal_couple_conditional, p_up
from .engine import (
    ChainParams,
    _advance,
    _greedy_initial_dense,
    length_fix,
    mixing_length,
    run_chain,
)
from .errors import (
    GraphMismatch,
    InfeasibleInstance,
    NotIsolated,
    SharedPotentialMismatch,
    VertexSetMismatch,
)
from .execlog import ExecutionLog
from .inference import DiffEntry, SampleDiff, ScheduleFns
from .mrf import (
    NEG_INF,
    AddEdge,
    AddVertex,
    DeleteEdge,
    LocalView,
    MrfInstance,
    SetEdgePotential,
    SetVertexPotential,
    UpdateBatch,
    instance_diff,
    local_restriction,
)
from .rng import (
    BASELINE_STREAM_OFFSET,
    categorical,
    geometric_skip,
    make_stream,
    uniform_index,
    update_stream,
)


# ---------------------------------------------------------------------------
# Correction filter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterSet:
    """Pre-sampled correction ranks plus the per-vertex probability bounds
    they were thinned with."""

    steps: tuple[int, ...]
    pbar: Mapping[int, float]

    def __len__(self) -> int:
        return len(self.steps)


def build_filter(
    log: ExecutionLog, pbar: Mapping[int, float], rng
) -> FilterSet:
    """Mark each transition of vertex v independently with probability
    pbar[v], by skip-sampling over its rank list. Vertices ascending, so the
    draw order is reproducible."""
    log.compact()
    steps: list[int] = []
    for v in sorted(pbar):
        p = pbar[v]
        if p <= 0.0:
            continue
        rs = log.steps_of(v)
        if p >= 1.0:
            steps.extend(rs)
            continue
        i = -1
        while True:
            i += geometric_skip(p, rng.random())
            if i >= len(rs):
                break
            steps.append(rs[i])
    steps.sort()
    return FilterSet(steps=tuple(steps), pbar=dict(pbar))


# ---------------------------------------------------------------------------
# Coupled replay
# ---------------------------------------------------------------------------

class _Replay:
    """Disagreement set and event queue for one coupled replay pass.

    d_x / d_y hold both chains' values wherever they differ; everywhere else
    the log itself is correct for both. The heap holds candidate ranks, one
    chain of entries per watched vertex: an entry at or behind the frontier
    re-arms to the vertex's next transition when popped, and an entry for a
    vertex that is no longer watched is dropped. Duplicate entries are
    harmless, so joins arm unconditionally.
    """

    __slots__ = ("log", "adj", "extra", "d_x", "d_y", "heap", "frontier")

    def __init__(self, log: ExecutionLog, adj: Mapping[int, tuple[int, ...]],
                 extra=()):
        self.log = log
        self.adj = adj
        self.extra = frozenset(extra)
        self.d_x: dict[int, int] = {}
        self.d_y: dict[int, int] = {}
        self.heap: list[tuple[int, int]] = []
        self.frontier = 0
        for u in sorted(self.extra):
            self.arm(u, 0)

    def watched(self, u: int) -> bool:
        if u in self.extra or u in self.d_x:
            return True
        d_x = self.d_x
        for w in self.adj[u]:
            if w in d_x:
                return True
        return False

    def arm(self, u: int, t: int) -> None:
        s = self.log.successor(t, u)
        if s is not None:
            heappush(self.heap, (s, u))

    def next_event(self) -> Optional[int]:
        heap = self.heap
        while heap:
            t, u = heap[0]
            if not self.watched(u):
                heappop(heap)
            elif t <= self.frontier:
                heappop(heap)
                self.arm(u, self.frontier)
            else:
                return t
        return None

    def xval(self, t: int, u: int) -> int:
        if u in self.d_x:
            return self.d_x[u]
        return self.log.evaluate(t, u)

    def yval(self, t: int, u: int) -> int:
        if u in self.d_y:
            return self.d_y[u]
        return self.log.evaluate(t, u)

    def record(self, v: int, x: int, y: int) -> None:
        # Call with frontier already at the visited rank: join arms start there.
        if x != y:
            joined = v not in self.d_x
            self.d_x[v] = x
            self.d_y[v] = y
            if joined:
                self.arm(v, self.frontier)
                for u in self.adj[v]:
                    self.arm(u, self.frontier)
        else:
            self.d_x.pop(v, None)
            self.d_y.pop(v, None)


def update_hamiltonian(
    old_inst: MrfInstance,
    new_inst: MrfInstance,
    log: ExecutionLog,
    filt: FilterSet,
    rng,
) -> int:
    """Replay the log from old_inst's law to new_inst's; same graph, changed
    potentials. Returns the number of ranks visited.

    At a visited rank the recorded draw is coupled maximally with a draw from
    the old law under the Y boundary; at a filter rank a correction coin
    (always one uniform) decides whether Y is redrawn from the kernel that
    maps the old conditional onto the new one.
    """
    if set(old_inst.vertex_ids()) != set(new_inst.vertex_ids()) or set(
        old_inst.edge_keys()
    ) != set(new_inst.edge_keys()):
        raise GraphMismatch("potential phase requires identical graphs")
    adj = {v: old_inst.neighbors(v) for v in old_inst.vertex_ids()}
    rp = _Replay(log, adj)
    fsteps = filt.steps
    nf = len(fsteps)
    fi = 0
    pbar = filt.pbar
    old_views: dict[int, LocalView] = {}
    new_views: dict[int, LocalView] = {}
    visits = 0
    rand = rng.random
    while True:
        while fi < nf and fsteps[fi] <= rp.frontier:
            fi += 1
        fe = fsteps[fi] if fi < nf else None
        he = rp.next_event()
        if fe is None:
            t = he
        elif he is None or fe < he:
            t = fe
        else:
            t = he
        if t is None:
            break
        tr = log.at(t)
        v = tr.vertex
        x_new = tr.spin
        nbrs = adj[v]
        view_o = old_views.get(v)
        if view_o is None:
            view_o = local_restriction(old_inst, v)
            old_views[v] = view_o
        tau = None
        d_x = rp.d_x
        if any(u in d_x for u in nbrs):
            tp = t - 1
            sigma = {u: rp.xval(tp, u) for u in nbrs}
            tau = {u: rp.yval(tp, u) for u in nbrs}
            mu_x = view_o.conditional(sigma)
            mu_y = view_o.conditional(tau)
            y = maximal_couple_conditional(mu_x, mu_y, x_new, rng)
        else:
            # Boundaries agree, so the maximal coupling is the identity.
            y = x_new
        if fe == t:
            if tau is None:
                tp = t - 1
                tau = {u: rp.yval(tp, u) for u in nbrs}
            view_n = new_views.get(v)
            if view_n is None:
                view_n = local_restriction(new_inst, v)
                new_views[v] = view_n
            kern = correction_kernel(view_o, view_n, tau)
            coin = rand()
            if kern.nu is not None and coin * pbar[v] < kern.p[y]:
                y = categorical(kern.nu, rand())
        rp.frontier = t
        rp.record(v, x_new, y)
        if y != x_new:
            log.change(t, y)
        visits += 1
    return visits


def update_edge(
    old_inst: MrfInstance,
    new_inst: MrfInstance,
    log: ExecutionLog,
    rng,
) -> int:
    """Replay the log across an edge-set change; same vertices and vertex
    potentials, shared edges unchanged. Returns the number of ranks visited.

    Endpoints of changed edges are redrawn fresh from the new conditional at
    every one of their transitions (always one uniform: the product
    coupling). Other vertices only react to disagreement reaching their
    boundary, through the maximal coupling of two old-law conditionals, which
    is sound because no edge incident to them changed.
    """
    if set(old_inst.vertex_ids()) != set(new_inst.vertex_ids()):
        raise VertexSetMismatch("edge phase cannot change the vertex set")
    for v in old_inst.vertex_ids():
        if old_inst.vertex_potential(v) != new_inst.vertex_potential(v):
            raise SharedPotentialMismatch(f"vertex {v} potential differs")
    e_old = set(old_inst.edge_keys())
    e_new = set(new_inst.edge_keys())
    for e in e_old & e_new:
        if old_inst.edge_potential(*e) != new_inst.edge_potential(*e):
            raise SharedPotentialMismatch(f"edge {e} potential differs")
    changed = e_old ^ e_new
    if not changed:
        return 0
    touched = set()
    for u, w in changed:
        touched.add(u)
        touched.add(w)
    adj = {v: old_inst.neighbors(v) for v in old_inst.vertex_ids()}
    rp = _Replay(log, adj, extra=touched)
    old_views: dict[int, LocalView] = {}
    new_views: dict[int, LocalView] = {}
    visits = 0
    rand = rng.random
    while True:
        t = rp.next_event()
        if t is None:
            break
        tr = log.at(t)
        v = tr.vertex
        x_new = tr.spin
        if v in touched:
            view_n = new_views.get(v)
            if view_n is None:
                view_n = local_restriction(new_inst, v)
                new_views[v] = view_n
            tp = t - 1
            tau = {u: rp.yval(tp, u) for u in view_n.neighbors}
            y = categorical(view_n.conditional(tau), rand())
        else:
            nbrs = adj[v]
            d_x = rp.d_x
            if any(u in d_x for u in nbrs):
                view_o = old_views.get(v)
                if view_o is None:
                    view_o = local_restriction(old_inst, v)
                    old_views[v] = view_o
                tp = t - 1
                sigma = {u: rp.xval(tp, u) for u in nbrs}
                tau = {u: rp.yval(tp, u) for u in nbrs}
                y = maximal_couple_conditional(
                    view_o.conditional(sigma), view_o.conditional(tau), x_new, rng
                )
            else:
                y = x_new
        rp.frontier = t
        rp.record(v, x_new, y)
        if y != x_new:
            log.change(t, y)
        visits += 1
    return visits


# ---------------------------------------------------------------------------
# Vertex-set phases
# ---------------------------------------------------------------------------

def _check_shared(before: MrfInstance, after: MrfInstance, vertices) -> None:
    for v in vertices:
        if before.vertex_potential(v) != after.vertex_potential(v):
            raise SharedPotentialMismatch(f"vertex {v} potential differs")
    e_b = set(before.edge_keys())
    if e_b != set(after.edge_keys()):
        raise GraphMismatch("edge set must not change in a vertex phase")
    for e in e_b:
        if before.edge_potential(*e) != after.edge_potential(*e):
            raise SharedPotentialMismatch(f"edge {e} potential differs")


def _isolated_initial(inst: MrfInstance, v: int) -> int:
    for c, w in enumerate(inst.vertex_potential(v).weights):
        if w > NEG_INF:
            return c
    raise InfeasibleInstance(f"vertex {v}: every spin excluded")


def add_vertices(
    before: MrfInstance, after: MrfInstance, log: ExecutionLog, rng
) -> None:
    """Splice isolated new vertices into the log without changing its length.

    The sites going to new vertices are chosen Bernoulli(s / (s + n)) per
    rank; the tail of the old run is dropped to make room, then each chosen
    site gets a uniform new vertex and a spin from its own potential. The
    result is distributed as a fresh run of the enlarged instance.
    """
    v_b = set(before.vertex_ids())
    v_a = set(after.vertex_ids())
    if v_b - v_a:
        raise GraphMismatch("additions only: vertices missing from the target")
    added = sorted(v_a - v_b)
    for a in added:
        if after.degree(a):
            raise NotIsolated(f"vertex {a} must be added isolated")
    _check_shared(before, after, sorted(v_b))
    if not added:
        return
    T = log.length
    s = len(added)
    p = s / (s + before.n)
    marks: list[int] = []
    pos = 0
    while True:
        pos += geometric_skip(p, rng.random())
        if pos > T:
            break
        marks.append(pos)
    length_fix(before, log, T - len(marks), rng)
    for a in added:
        log.add_vertex_initial(a, _isolated_initial(after, a))
    exp = math.exp
    weights: dict[int, list[float]] = {}
    for r in marks:
        u = added[uniform_index(s, rng.random())]
        w = weights.get(u)
        if w is None:
            phi = after.vertex_potential(u).weights
            m = max(phi)
            w = [exp(x - m) for x in phi]
            weights[u] = w
        log.insert(r, u, categorical(w, rng.random()))


def delete_vertices(
    before: MrfInstance, after: MrfInstance, log: ExecutionLog, rng
) -> None:
    """Remove isolated vertices and every transition touching them, then
    extend the tail back to the original length under the shrunk instance."""
    v_b = set(before.vertex_ids())
    v_a = set(after.vertex_ids())
    if v_a - v_b:
        raise GraphMismatch("deletions only: unexpected new vertices")
    removed = sorted(v_b - v_a)
    for v in removed:
        if before.degree(v):
            raise NotIsolated(f"vertex {v} must be isolated before deletion")
    _check_shared(before, after, sorted(v_a))
    if not removed:
        return
    T = log.length
    ranks: list[int] = []
    for v in removed:
        ranks.extend(log.steps_of(v))
    for r in sorted(ranks, reverse=True):
        log.remove(r)
    for v in removed:
        log.remove_vertex(v)
    length_fix(after, log, T, rng)


# ---------------------------------------------------------------------------
# Full update pipeline
# ---------------------------------------------------------------------------

@dataclass
class UpdateMetrics:
    """Work accounting for one chain's update."""

    r_ham: int = 0
    r_graph: int = 0
    filter_size: int = 0
    regenerated: bool = False
    wall_time: float = 0.0
    phase_wall: dict = field(default_factory=dict)


@dataclass(frozen=True)
class _UpdatePlan:
    # Instance pipeline shared by every chain; drawing stays per chain.
    final: MrfInstance
    target: int
    regenerate: bool
    pbar: Mapping[int, float]
    phases: tuple  # (name, before_inst, after_inst) triples, in order


def _shared_potential_records(old: MrfInstance, target: MrfInstance) -> list:
    recs = []
    for v in old.vertex_ids():
        if target.has_vertex(v):
            pv = target.vertex_potential(v)
            if pv != old.vertex_potential(v):
                recs.append(SetVertexPotential(v, pv))
    for u, w in old.edge_keys():
        if target.has_edge(u, w):
            pe = target.edge_potential(u, w)
            if pe != old.edge_potential(u, w):
                recs.append(SetEdgePotential(u, w, pe))
    return recs


def plan_update(
    inst: MrfInstance, batch: UpdateBatch, params: ChainParams
) -> _UpdatePlan:
    """Resolve the batch into the phase pipeline; no randomness involved, so
    one plan serves every chain."""
    final = inst.apply_batch(batch)
    target = mixing_length(final.n, params)
    recs = _shared_potential_records(inst, final)
    mid = inst.apply_batch(UpdateBatch(recs)) if recs else inst
    if math.isinf(instance_diff(inst, mid).d_ham):
        # A shared potential flipped between finite and -inf: the correction
        # bound is useless, regenerate the whole run instead.
        return _UpdatePlan(final, target, True, {}, ())
    phases = []
    pbar: dict[int, float] = {}
    if recs:
        affected = set()
        for r in recs:
            if isinstance(r, SetVertexPotential):
                affected.add(r.vertex)
            else:
                affected.add(r.u)
                affected.add(r.v)
        for v in sorted(affected):
            pv = p_up(local_restriction(inst, v), local_restriction(mid, v))
            if pv > 0.0:
                pbar[v] = pv
        phases.append(("potentials", inst, mid))
    cur = mid
    added = sorted(set(final.vertex_ids()) - set(inst.vertex_ids()))
    if added:
        plus = cur.apply_batch(
            UpdateBatch([AddVertex(a, final.vertex_potential(a)) for a in added])
        )
        phases.append(("add_vertices", cur, plus))
        cur = plus
    e_old = set(inst.edge_keys())
    e_new = set(final.edge_keys())
    dels = sorted(e_old - e_new)
    if dels:
        nxt = cur.apply_batch(UpdateBatch([DeleteEdge(u, w) for u, w in dels]))
        phases.append(("delete_edges", cur, nxt))
        cur = nxt
    adds = sorted(e_new - e_old)
    if adds:
        nxt = cur.apply_batch(
            UpdateBatch(
                [AddEdge(u, w, final.edge_potential(u, w)) for u, w in adds]
            )
        )
        phases.append(("add_edges", cur, nxt))
        cur = nxt
    doomed = sorted(set(inst.vertex_ids()) - set(final.vertex_ids()))
    if doomed:
        phases.append(("delete_vertices", cur, final))
    return _UpdatePlan(final, target, False, pbar, tuple(phases))


def _regenerate(final: MrfInstance, target: int, log: ExecutionLog, rng) -> None:
    comp = final.compiled()
    cfg = _greedy_initial_dense(comp)
    initial = dict(zip(comp.ids, cfg))
    verts: list[int] = []
    spins: list[int] = []
    _advance(comp, cfg, target, rng, verts, spins)
    log.load_run(initial, verts, spins)


def execute_update(plan: _UpdatePlan, log: ExecutionLog, rng) -> UpdateMetrics:
    """Run the planned phases against one chain's log, in place."""
    t0 = time.perf_counter()
    m = UpdateMetrics()
    if plan.regenerate:
        _regenerate(plan.final, plan.target, log, rng)
        m.regenerated = True
        m.wall_time = time.perf_counter() - t0
        return m
    for name, before, after in plan.phases:
        p0 = time.perf_counter()
        if name == "potentials":
            filt = build_filter(log, plan.pbar, rng)
            m.filter_size = len(filt)
            m.r_ham = update_hamiltonian(before, after, log, filt, rng)
        elif name == "add_vertices":
            add_vertices(before, after, log, rng)
            log.compact()
        elif name in ("delete_edges", "add_edges"):
            m.r_graph += update_edge(before, after, log, rng)
        else:
            delete_vertices(before, after, log, rng)
            log.compact()
        m.phase_wall[name] = time.perf_counter() - p0
    if log.length != plan.target:
        length_fix(plan.final, log, plan.target, rng)
    log.compact()
    m.wall_time = time.perf_counter() - t0
    return m


def apply_update(
    inst: MrfInstance,
    batch: UpdateBatch,
    log: ExecutionLog,
    params: ChainParams,
    rng,
) -> tuple[MrfInstance, UpdateMetrics]:
    """Update one chain's log from inst to inst.apply_batch(batch)."""
    plan = plan_update(inst, batch, params)
    return plan.final, execute_update(plan, log, rng)


# ---------------------------------------------------------------------------
# Chain pools
# ---------------------------------------------------------------------------

@dataclass
class ChainSet:
    """The maintained pool of independent chains for one evolving instance.

    Chain identity is positional: resizing only ever pops from or appends to
    the tail, so surviving chains keep their indices across updates. Stream
    ids never repeat: fresh chains take consecutive baseline streams, update
    draws take (epoch, chain)-keyed streams from a disjoint range.
    """

    inst: MrfInstance
    logs: list[ExecutionLog]
    params: ChainParams
    schedule: ScheduleFns
    next_stream: int
    epoch: int = 0

    def samples(self) -> dict[int, dict[int, int]]:
        return {i: log.final_config() for i, log in enumerate(self.logs)}


def new_chain_set(
    inst: MrfInstance, params: ChainParams, schedule: ScheduleFns
) -> ChainSet:
    count = schedule.sample_count(inst.n)
    logs = [
        run_chain(inst, params, BASELINE_STREAM_OFFSET + i) for i in range(count)
    ]
    return ChainSet(
        inst=inst,
        logs=logs,
        params=params,
        schedule=schedule,
        next_stream=BASELINE_STREAM_OFFSET + count,
    )


def _update_one_chain(plan, log, seed, epoch, i):
    rng = make_stream(seed, update_stream(epoch, i))
    log.begin_final_journal()
    met = execute_update(plan, log, rng)
    journal = log.take_final_journal()
    T = log.length
    entries = []
    for v in sorted(journal):
        old = journal[v]
        new = log.evaluate(T, v) if log.has_vertex(v) else None
        if old != new:
            entries.append(DiffEntry(i, v, old, new))
    return entries, met


def apply_update_multi(
    cs: ChainSet, batch: UpdateBatch, threads: int = 1
) -> tuple[SampleDiff, list[UpdateMetrics]]:
    """Update every chain in the pool and resize it to the new sample count.

    Returns the exact diff of the pool's sample set, assembled from each
    log's final-config journal, so downstream estimators never rescan whole
    configurations. Chains are independent; threads > 1 updates them in a
    pool, with results merged in chain order so output is schedule-invariant.
    """
    plan = plan_update(cs.inst, batch, cs.params)
    entries: list[DiffEntry] = []
    metrics: list[UpdateMetrics] = []
    seed, epoch = cs.params.seed, cs.epoch
    if threads > 1 and len(cs.logs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    lambda iv: _update_one_chain(plan, iv[1], seed, epoch, iv[0]),
                    enumerate(cs.logs),
                )
            )
    else:
        results = [
            _update_one_chain(plan, log, seed, epoch, i)
            for i, log in enumerate(cs.logs)
        ]
    for chain_entries, met in results:
        entries.extend(chain_entries)
        metrics.append(met)
    cs.inst = plan.final
    cs.epoch += 1
    count = cs.schedule.sample_count(plan.final.n)
    removed: list[int] = []
    added: list[int] = []
    while len(cs.logs) > count:
        dead = cs.logs.pop()
        i = len(cs.logs)
        removed.append(i)
        for v, c in sorted(dead.final_config().items()):
            entries.append(DiffEntry(i, v, c, None))
    while len(cs.logs) < count:
        i = len(cs.logs)
        fresh = run_chain(plan.final, cs.params, cs.next_stream)
        cs.next_stream += 1
        cs.logs.append(fresh)
        added.append(i)
        for v, c in sorted(fresh.final_config().items()):
            entries.append(DiffEntry(i, v, None, c))
    return (
        SampleDiff(
            entries=tuple(entries),
            added_chains=tuple(added),
            removed_chains=tuple(sorted(removed)),
        ),
        metrics,
    )
