"""Estimators over the maintained sample set, updated incrementally from
sample diffs, plus the admissible schedule-function family.

All estimator state is exact integer counts; probabilities are materialized
only when a query is answered, so incremental and rebuilt states can be
compared for strict equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import DiffInconsistent, EmptyPosteriorCondition, TooLarge

A_CAP_HARD = 8
DIM_CAP = 65536
BOUNDED_DIFF_LIMIT = 8.0

MARGINAL = "marginal"
POSTERIOR = "posterior"
MAP = "map"


@dataclass(frozen=True)
class PowerLogFn:
    """The schedule family a * n**b * (ln n + 1)**c."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError(f"need a > 0, got {self.a}")

    def __call__(self, n: int) -> float:
        return self.a * n**self.b * (math.log(n) + 1.0) ** self.c


@dataclass(frozen=True)
class ScheduleFns:
    """Sample-count function N(n) and accuracy function eps(n)."""

    n_samples: PowerLogFn
    eps: PowerLogFn

    def sample_count(self, n: int) -> int:
        return max(1, math.ceil(self.n_samples(n)))

    def eps_value(self, n: int) -> float:
        return self.eps(n)


@dataclass(frozen=True)
class ScheduleReport:
    """Witnessed bounded-difference constants over the checked range."""

    c1: float
    c2: float
    eps_in_range: bool
    n_lo: int
    n_hi: int
    bound: float = BOUNDED_DIFF_LIMIT

    @property
    def ok(self) -> bool:
        return self.eps_in_range and self.c1 <= self.bound and self.c2 <= self.bound


def schedule_check(fns: ScheduleFns, n_lo: int, n_hi: int) -> ScheduleReport:
    """Evaluate |f(n+1)-f(n)| <= C*f(n)/n for both schedule functions over
    [n_lo, n_hi] and report the worst witnessed C."""
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError(f"bad range [{n_lo}, {n_hi}]")
    c1 = 0.0
    c2 = 0.0
    eps_ok = True
    for n in range(n_lo, n_hi + 1):
        if not 0.0 < fns.eps_value(n) < 1.0:
            eps_ok = False
        if n == n_hi:
            break
        # bounded difference is a property of the family members themselves;
        # integer rounding of the sample count adds unit jumps it must not see
        N, N1 = fns.n_samples(n), fns.n_samples(n + 1)
        c1 = max(c1, abs(N1 - N) * n / N)
        e, e1 = fns.eps_value(n), fns.eps_value(n + 1)
        if e > 0:
            c2 = max(c2, abs(e1 - e) * n / e)
    return ScheduleReport(c1=c1, c2=c2, eps_in_range=eps_ok, n_lo=n_lo, n_hi=n_hi)


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Query:
    """A marginal, posterior, or MAP question about a small vertex set.

    Vertex sets are normalized to ascending id order at construction; the
    answer vector is indexed base-q over the sorted target set A, least
    significant digit first. tau_b is permuted alongside b.
    """

    kind: str
    a: tuple[int, ...]
    b: tuple[int, ...] = ()
    tau_b: Optional[tuple[int, ...]] = None
    cap: int = 3

    def __init__(self, kind, a, b=(), tau_b=None, cap=3):
        if kind not in (MARGINAL, POSTERIOR, MAP):
            raise ValueError(f"unknown query kind {kind!r}")
        a = tuple(a)
        b = tuple(b)
        if not a or len(set(a)) != len(a):
            raise ValueError("A must be nonempty without duplicates")
        if len(set(b)) != len(b):
            raise ValueError("B must not contain duplicates")
        if set(a) & set(b):
            raise ValueError("A and B must be disjoint")
        if not 1 <= cap <= A_CAP_HARD:
            raise ValueError(f"cap must lie in 1..{A_CAP_HARD}")
        if len(a) > cap:
            raise ValueError(f"|A| = {len(a)} exceeds cap {cap}")
        if kind == MARGINAL:
            if b or tau_b is not None:
                raise ValueError("marginal query takes no condition set")
        else:
            if not b:
                raise ValueError(f"{kind} query needs a nonempty B")
        if kind == POSTERIOR:
            if tau_b is None or len(tau_b) != len(b):
                raise ValueError("posterior query needs tau_b matching B")
        tau = None
        if tau_b is not None:
            pairs = sorted(zip(b, tau_b))
            tau = tuple(t for _, t in pairs)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "a", tuple(sorted(a)))
        object.__setattr__(self, "b", tuple(sorted(b)))
        object.__setattr__(self, "tau_b", tau)
        object.__setattr__(self, "cap", cap)


def _encode(spins: Sequence[int], q: int) -> int:
    code = 0
    for j, c in enumerate(spins):
        code += c * q**j
    return code


# ---------------------------------------------------------------------------
# Sample diffs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffEntry:
    """One changed coordinate of one chain's sample; None marks unassigned."""

    chain: int
    vertex: int
    old: Optional[int]
    new: Optional[int]


@dataclass(frozen=True)
class SampleDiff:
    entries: tuple[DiffEntry, ...]
    added_chains: tuple[int, ...] = ()
    removed_chains: tuple[int, ...] = ()

    @property
    def d(self) -> int:
        """Total coordinate disagreement count; unassigned differs from any spin."""
        return len(self.entries)


def sample_diff(
    old_samples: Mapping[int, Mapping[int, int]],
    new_samples: Mapping[int, Mapping[int, int]],
) -> SampleDiff:
    """Brute-force diff of two indexed sample sets (the reference form; the
    updater emits the same stream incrementally from its journals)."""
    entries: list[DiffEntry] = []
    for i in sorted(old_samples.keys() | new_samples.keys()):
        old = old_samples.get(i, {})
        new = new_samples.get(i, {})
        for v in sorted(old.keys() | new.keys()):
            ov, nv = old.get(v), new.get(v)
            if ov != nv:
                entries.append(DiffEntry(i, v, ov, nv))
    return SampleDiff(
        entries=tuple(entries),
        added_chains=tuple(sorted(new_samples.keys() - old_samples.keys())),
        removed_chains=tuple(sorted(old_samples.keys() - new_samples.keys())),
    )


# ---------------------------------------------------------------------------
# Estimator state
# ---------------------------------------------------------------------------

@dataclass
class EstimatorState:
    """Exact counts backing one query, plus each chain's A∪B restriction."""

    query: Query
    q: int
    counts: dict = field(default_factory=dict)
    total: int = 0
    chain_cache: dict = field(default_factory=dict)

    def _key(self, cache: dict):
        # Count-bucket key of one chain, or None while incomplete.
        a_vals = []
        for v in self.query.a:
            s = cache.get(v)
            if s is None:
                return None
            a_vals.append(s)
        a_code = _encode(a_vals, self.q)
        if self.query.kind == MARGINAL:
            return a_code
        b_vals = []
        for v in self.query.b:
            s = cache.get(v)
            if s is None:
                return None
            b_vals.append(s)
        return (a_code, _encode(b_vals, self.q))


def rebuild(
    samples: Mapping[int, Mapping[int, int]], query: Query, q: int
) -> EstimatorState:
    """Count every chain's restriction from scratch; chains missing any
    queried vertex are excluded from the total."""
    if q ** len(query.a) > DIM_CAP:
        raise TooLarge(f"q^|A| = {q ** len(query.a)} exceeds {DIM_CAP}")
    state = EstimatorState(query=query, q=q)
    relevant = set(query.a) | set(query.b)
    for i, cfg in samples.items():
        cache = {v: cfg.get(v) for v in relevant}
        state.chain_cache[i] = cache
        key = state._key(cache)
        if key is not None:
            state.counts[key] = state.counts.get(key, 0) + 1
            state.total += 1
    return state


def incremental_apply(state: EstimatorState, diff: SampleDiff) -> None:
    """Fold a sample diff into the counts; cost scales with the number of
    entries that touch the queried vertices."""
    relevant = set(state.query.a) | set(state.query.b)
    dirty: dict[int, object] = {}
    for e in diff.entries:
        if e.vertex not in relevant:
            continue
        cache = state.chain_cache.get(e.chain)
        if cache is None:
            cache = {v: None for v in relevant}
            state.chain_cache[e.chain] = cache
        if cache.get(e.vertex) != e.old:
            raise DiffInconsistent(
                f"chain {e.chain} vertex {e.vertex}: held {cache.get(e.vertex)}, "
                f"diff claims {e.old}"
            )
        if e.chain not in dirty:
            dirty[e.chain] = state._key(cache)
        cache[e.vertex] = e.new
    for i, old_key in dirty.items():
        new_key = state._key(state.chain_cache[i])
        if new_key == old_key:
            continue
        if old_key is not None:
            left = state.counts[old_key] - 1
            if left:
                state.counts[old_key] = left
            else:
                del state.counts[old_key]
            state.total -= 1
        if new_key is not None:
            state.counts[new_key] = state.counts.get(new_key, 0) + 1
            state.total += 1
    for i in diff.removed_chains:
        state.chain_cache.pop(i, None)


def estimate(state: EstimatorState, query: Optional[Query] = None) -> list[float]:
    """Answer the query from the counts; a q^|A| vector.

    Marginal: plain frequencies. Posterior: frequencies among chains matching
    tau_b. MAP: per sigma_A, the best observed joint frequency with any tau_b.
    """
    query = state.query if query is None else query
    if query is not state.query and query != state.query:
        raise ValueError("state was built for a different query")
    q = state.q
    dim = q ** len(query.a)
    out = [0.0] * dim
    if query.kind == MARGINAL:
        if state.total < 1:
            raise ValueError("no complete samples to estimate from")
        for a_code, cnt in state.counts.items():
            out[a_code] = cnt / state.total
        return out
    if query.kind == POSTERIOR:
        want_b = _encode(query.tau_b, q)
        denom = sum(
            cnt for (a_code, b_code), cnt in state.counts.items() if b_code == want_b
        )
        if denom == 0:
            raise EmptyPosteriorCondition(
                f"condition {query.tau_b} on {query.b} never observed"
            )
        for (a_code, b_code), cnt in state.counts.items():
            if b_code == want_b:
                out[a_code] = cnt / denom
        return out
    if state.total < 1:
        raise ValueError("no complete samples to estimate from")
    for (a_code, _b_code), cnt in state.counts.items():
        frac = cnt / state.total
        if frac > out[a_code]:
            out[a_code] = frac
    return out
