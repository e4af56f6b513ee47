"""Standard model families (two-spin ferromagnet, occupancy with fugacity,
proper coloring) and their closed-form uniqueness-regime gaps.

The regime gap is the largest constant for which the family's closed-form
condition holds at the instance's maximum degree and worst parameter; a
nonpositive gap means the instance is outside the regime. The closed forms
are sufficient conditions, generally stricter than the enumerated influence
check in mrf.dobrushin_check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ModelMismatch, RegimeViolation
from .mrf import NEG_INF, EdgePotential, MrfInstance, SpinDomain, VertexPotential

ISING = "ising"
HARDCORE = "hardcore"
COLORING = "coloring"
MODEL_KINDS = (ISING, HARDCORE, COLORING)


# -- potential builders -------------------------------------------------------

def ising_vertex(field: float = 0.0) -> VertexPotential:
    return VertexPotential((field, -field))


def ising_edge(beta: float) -> EdgePotential:
    return EdgePotential(((beta, -beta), (-beta, beta)))


def hardcore_vertex(fugacity: float) -> VertexPotential:
    if fugacity <= 0:
        raise ValueError(f"fugacity must be positive, got {fugacity}")
    return VertexPotential((0.0, math.log(fugacity)))


def hardcore_edge() -> EdgePotential:
    return EdgePotential(((0.0, 0.0), (0.0, NEG_INF)))


def coloring_vertex(q: int) -> VertexPotential:
    return VertexPotential((0.0,) * q)


def coloring_edge(q: int) -> EdgePotential:
    return EdgePotential(
        tuple(
            tuple(NEG_INF if a == b else 0.0 for b in range(q)) for a in range(q)
        )
    )


# -- instance builders --------------------------------------------------------

def ising_instance(n: int, edges, beta: float, field: float = 0.0) -> MrfInstance:
    """Ferromagnet/antiferromagnet on vertices 0..n-1 with one coupling."""
    vp = {v: ising_vertex(field) for v in range(n)}
    ep = ising_edge(beta)
    return MrfInstance(SpinDomain(2), vp, {tuple(e): ep for e in edges})


def hardcore_instance(n: int, edges, fugacity: float) -> MrfInstance:
    vp = {v: hardcore_vertex(fugacity) for v in range(n)}
    ep = hardcore_edge()
    return MrfInstance(SpinDomain(2), vp, {tuple(e): ep for e in edges})


def coloring_instance(n: int, edges, q: int) -> MrfInstance:
    vp = {v: coloring_vertex(q) for v in range(n)}
    ep = coloring_edge(q)
    return MrfInstance(SpinDomain(q), vp, {tuple(e): ep for e in edges})


# -- family recognition -------------------------------------------------------

@dataclass(frozen=True)
class ModelInfo:
    """Recognized family plus the worst-case parameter used by its regime."""

    kind: str
    max_degree: int
    parameter: float  # max |beta|, max fugacity, or q


def _ising_params(inst: MrfInstance) -> float:
    # Arbitrary local fields are allowed; only the edge form is constrained.
    if inst.q != 2:
        raise ModelMismatch("two spins required")
    worst = 0.0
    for u, v in inst.edge_keys():
        w = inst.edge_potential(u, v).weights
        beta = w[0][0]
        if w != ((beta, -beta), (-beta, beta)) or math.isinf(beta):
            raise ModelMismatch(f"edge ({u},{v}) is not a coupling matrix")
        worst = max(worst, abs(beta))
    return worst


def _hardcore_params(inst: MrfInstance) -> float:
    if inst.q != 2:
        raise ModelMismatch("two spins required")
    worst = 0.0
    for v in inst.vertex_ids():
        w = inst.vertex_potential(v).weights
        if w[0] != 0.0 or w[1] == NEG_INF:
            raise ModelMismatch(f"vertex {v} is not a fugacity weight")
        worst = max(worst, math.exp(w[1]))
    blocked = ((0.0, 0.0), (0.0, NEG_INF))
    for u, v in inst.edge_keys():
        if inst.edge_potential(u, v).weights != blocked:
            raise ModelMismatch(f"edge ({u},{v}) is not an occupancy exclusion")
    return worst


def _coloring_params(inst: MrfInstance) -> float:
    q = inst.q
    zero = (0.0,) * q
    for v in inst.vertex_ids():
        if inst.vertex_potential(v).weights != zero:
            raise ModelMismatch(f"vertex {v} carries a field")
    want = coloring_edge(q).weights
    for u, v in inst.edge_keys():
        if inst.edge_potential(u, v).weights != want:
            raise ModelMismatch(f"edge ({u},{v}) is not a disagreement constraint")
    return float(q)


def classify(inst: MrfInstance, kind: str) -> ModelInfo:
    """Verify the instance belongs to the named family; extract its regime
    parameter."""
    if kind == ISING:
        par = _ising_params(inst)
    elif kind == HARDCORE:
        par = _hardcore_params(inst)
    elif kind == COLORING:
        par = _coloring_params(inst)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return ModelInfo(kind=kind, max_degree=inst.max_degree(), parameter=par)


# -- regime gaps --------------------------------------------------------------

def ising_regime_delta(max_degree: int, beta: float) -> float:
    return 2.0 - (max_degree + 1) * (1.0 - math.exp(-2.0 * abs(beta)))


def hardcore_regime_delta(max_degree: int, fugacity: float) -> float:
    if max_degree <= 2:
        return 2.0
    return 2.0 - fugacity * (max_degree - 2)


def coloring_regime_delta(max_degree: int, q: int) -> float:
    if max_degree == 0:
        return 2.0
    return q / max_degree - 2.0


def regime_delta(info: ModelInfo) -> float:
    """Raw closed-form gap; positive iff inside the family's regime."""
    if info.kind == ISING:
        return ising_regime_delta(info.max_degree, info.parameter)
    if info.kind == HARDCORE:
        return hardcore_regime_delta(info.max_degree, info.parameter)
    return coloring_regime_delta(info.max_degree, int(info.parameter))


def model_delta(inst: MrfInstance, kind: str) -> float:
    """The usable chain gap for an in-regime instance, clamped to (0, 1]."""
    raw = regime_delta(classify(inst, kind))
    if raw <= 0.0:
        raise RegimeViolation(f"{kind} regime violated: gap {raw:.6g} <= 0")
    return min(raw, 1.0)
