"""Maximal couplings of spin distributions and the resample-correction kernel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NeighborMismatch, NotNormalized, ZeroProbabilityCondition
from .mrf import LocalView, _l1, _l1_matrix
from .rng import categorical

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class CouplingOutcome:
    x: int
    y: int


@dataclass(frozen=True)
class CorrectionKernel:
    """Per-spin redraw probabilities p and the redraw law nu (None when absent)."""

    p: tuple[float, ...]
    nu: tuple[float, ...] | None


def _check_prob_vector(name: str, vec: Sequence[float]) -> None:
    total = 0.0
    for w in vec:
        if w < 0.0:
            raise NotNormalized(f"{name} has a negative entry: {w}")
        total += w
    if abs(total - 1.0) > _SUM_TOL:
        raise NotNormalized(f"{name} sums to {total!r}")


def maximal_couple(
    mu: Sequence[float], nu: Sequence[float], rng: np.random.Generator
) -> CouplingOutcome:
    """Draw (x, y) with exact marginals mu, nu and Pr[x = y] = 1 - TV(mu, nu).

    Overlap/residual construction. Draw order is fixed: one uniform for the
    overlap coin, then one uniform for the coupled draw, or one each for the
    two residual draws.
    """
    if len(mu) != len(nu):
        raise NotNormalized(f"length mismatch: {len(mu)} vs {len(nu)}")
    _check_prob_vector("mu", mu)
    _check_prob_vector("nu", nu)
    overlap = [a if a < b else b for a, b in zip(mu, nu)]
    mass = sum(overlap)
    coupled = rng.random() < mass
    if not coupled:
        res_x = [a - o for a, o in zip(mu, overlap)]
        res_y = [b - o for b, o in zip(nu, overlap)]
        # Round-off can leave an empty residual when mu == nu; recouple then.
        if sum(res_x) <= 0.0 or sum(res_y) <= 0.0:
            coupled = True
        else:
            x = categorical(res_x, rng.random())
            y = categorical(res_y, rng.random())
            return CouplingOutcome(x, y)
    c = categorical(overlap, rng.random())
    return CouplingOutcome(c, c)


def maximal_couple_conditional(
    mu: Sequence[float], nu: Sequence[float], x: int, rng: np.random.Generator
) -> int:
    """Second coordinate of the maximal coupling given that the first drew x.

    Keeps y = x with probability min(mu[x], nu[x]) / mu[x]; otherwise redraws
    y from the residual of nu. One uniform for the keep coin, one more only on
    the redraw path.
    """
    if len(mu) != len(nu):
        raise NotNormalized(f"length mismatch: {len(mu)} vs {len(nu)}")
    _check_prob_vector("mu", mu)
    _check_prob_vector("nu", nu)
    if mu[x] <= 0.0:
        raise ZeroProbabilityCondition(f"mu[{x}] = {mu[x]}")
    keep = min(mu[x], nu[x]) / mu[x]
    if rng.random() < keep:
        return x
    residual = [max(b - a, 0.0) if b > a else 0.0 for a, b in zip(mu, nu)]
    if sum(residual) <= 0.0:
        return x
    return categorical(residual, rng.random())


def _require_same_site(old: LocalView, new: LocalView) -> None:
    if old.vertex != new.vertex:
        raise NeighborMismatch(f"vertex {old.vertex} vs {new.vertex}")
    if old.neighbors != new.neighbors:
        raise NeighborMismatch(
            f"vertex {old.vertex}: neighbor sets {old.neighbors} vs {new.neighbors}"
        )


def correction_kernel(old: LocalView, new: LocalView, tau) -> CorrectionKernel:
    """Redraw kernel turning a draw from the old conditional into the new one.

    p[c] is the probability of discarding spin c drawn under the old law; nu
    is the law of the replacement. Sample-then-correct reproduces the new
    conditional exactly.
    """
    _require_same_site(old, new)
    mu = old.conditional(tau)
    mu2 = new.conditional(tau)
    q = len(mu)
    gain = [max(mu2[c] - mu[c], 0.0) for c in range(q)]
    gain_mass = sum(gain)
    if gain_mass == 0.0:
        return CorrectionKernel(p=(0.0,) * q, nu=None)
    p = tuple(
        max(0.0, (mu[c] - mu2[c]) / mu[c]) if mu[c] > 0.0 else 0.0 for c in range(q)
    )
    nu = tuple(g / gain_mass for g in gain)
    return CorrectionKernel(p=p, nu=nu)


def p_up(old: LocalView, new: LocalView) -> float:
    """Uniform upper bound on the correction probability over all boundaries.

    min(1, 2 * (L1 distance of the vertex potential plus the L1 distances of
    every incident edge potential)). Infinite distance clamps to 1.
    """
    _require_same_site(old, new)
    total = _l1(old.phi, new.phi)
    for u in old.neighbors:
        total += _l1_matrix(old.edge_phi[u], new.edge_phi[u])
    return min(1.0, 2.0 * total)
