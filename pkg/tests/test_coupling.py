"""Maximal couplings and the correction kernel.

The kernel checks are analytic: integrate the transition over the old
conditional and compare with the new conditional, no sampling noise.
"""

import random

import pytest

from dyngibbs.coupling import (
    correction_kernel,
    maximal_couple,
    maximal_couple_conditional,
    p_up,
)
from dyngibbs.errors import NeighborMismatch, NotNormalized, ZeroProbabilityCondition
from dyngibbs.mrf import LocalView
from dyngibbs.rng import make_stream
from helpers import all_boundaries, random_local_pair


def corrected_law(mu, kern):
    """Law of y when x ~ mu, kept with 1 - p[x], else redrawn from nu."""
    q = len(mu)
    out = [mu[c] * (1.0 - kern.p[c]) for c in range(q)]
    if kern.nu is not None:
        fired = sum(mu[c] * kern.p[c] for c in range(q))
        for c in range(q):
            out[c] += fired * kern.nu[c]
    return out


class TestMaximalCouple:
    def test_meet_probability_matches_overlap(self):
        mu = [0.5, 0.3, 0.2]
        nu = [0.2, 0.3, 0.5]
        rng = make_stream(5, 0)
        n = 40_000
        meets = sum(
            1 for _ in range(n) if (o := maximal_couple(mu, nu, rng)).x == o.y
        )
        overlap = sum(min(a, b) for a, b in zip(mu, nu))
        assert meets / n == pytest.approx(overlap, abs=0.01)

    def test_marginals_exact(self):
        mu = [0.7, 0.3]
        nu = [0.1, 0.9]
        rng = make_stream(6, 0)
        n = 40_000
        cx = [0, 0]
        cy = [0, 0]
        for _ in range(n):
            o = maximal_couple(mu, nu, rng)
            cx[o.x] += 1
            cy[o.y] += 1
        assert cx[0] / n == pytest.approx(0.7, abs=0.01)
        assert cy[1] / n == pytest.approx(0.9, abs=0.01)

    def test_identical_laws_always_meet(self):
        mu = [0.25, 0.75]
        rng = make_stream(7, 0)
        for _ in range(500):
            o = maximal_couple(mu, mu, rng)
            assert o.x == o.y

    def test_rejects_unnormalized(self):
        rng = make_stream(8, 0)
        with pytest.raises(NotNormalized):
            maximal_couple([0.5, 0.6], [0.5, 0.5], rng)
        with pytest.raises(NotNormalized):
            maximal_couple([0.5, 0.5], [1.0], rng)


class TestConditionalCouple:
    def test_composite_law_is_nu(self):
        # y | x integrated over x ~ mu must reproduce nu exactly; check the
        # kept mass analytically and the redraw mass statistically.
        mu = [0.6, 0.4]
        nu = [0.2, 0.8]
        rng = make_stream(9, 0)
        n = 60_000
        counts = [0, 0]
        for _ in range(n):
            x = 0 if rng.random() < mu[0] else 1
            counts[maximal_couple_conditional(mu, nu, x, rng)] += 1
        assert counts[0] / n == pytest.approx(nu[0], abs=0.01)

    def test_zero_condition_rejected(self):
        with pytest.raises(ZeroProbabilityCondition):
            maximal_couple_conditional([0.0, 1.0], [0.5, 0.5], 0, make_stream(1, 0))


class TestCorrectionKernel:
    def test_exact_on_random_locals(self):
        rng = random.Random(31)
        worst = 0.0
        for _ in range(150):
            old, new = random_local_pair(rng)
            bound = p_up(old, new)
            for tau in all_boundaries(old.q, old.neighbors):
                mu = old.conditional(tau)
                target = new.conditional(tau)
                kern = correction_kernel(old, new, tau)
                assert max(kern.p) <= bound + 1e-12
                law = corrected_law(mu, kern)
                worst = max(worst, max(abs(a - b) for a, b in zip(law, target)))
        assert worst <= 1e-12

    def test_identity_update_never_fires(self):
        rng = random.Random(32)
        old, _ = random_local_pair(rng, q=3, deg=2, hardcore_bias=0.0)
        for tau in all_boundaries(3, old.neighbors):
            kern = correction_kernel(old, old, tau)
            assert kern.nu is None
            assert max(kern.p) == 0.0

    def test_requires_same_site(self):
        rng = random.Random(33)
        old, _ = random_local_pair(rng, q=2, deg=1)
        other = LocalView(1, 2, old.phi, old.neighbors, old.edge_phi)
        with pytest.raises(NeighborMismatch):
            correction_kernel(old, other, {1: 0})

    def test_p_up_scales_with_change(self):
        rng = random.Random(34)
        base, _ = random_local_pair(rng, q=2, deg=1, hardcore_bias=0.0)
        nudged = LocalView(
            base.vertex, 2, (base.phi[0] + 1e-4, base.phi[1]),
            base.neighbors, base.edge_phi,
        )
        assert p_up(base, nudged) <= 4e-4
        assert p_up(base, base) == 0.0
