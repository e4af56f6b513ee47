"""Model families: builders, classification, closed-form regime gaps."""

import math

import pytest

from dyngibbs.errors import ModelMismatch, RegimeViolation
from dyngibbs.models import (
    classify,
    coloring_instance,
    coloring_regime_delta,
    hardcore_instance,
    hardcore_regime_delta,
    ising_instance,
    ising_regime_delta,
    model_delta,
)
from dyngibbs.mrf import NEG_INF, dobrushin_check


class TestBuilders:
    def test_ising_shape(self):
        inst = ising_instance(4, [(0, 1), (2, 3)], 0.5, field=0.2)
        assert inst.q == 2
        assert inst.vertex_potential(0).weights == (0.2, -0.2)
        assert inst.edge_potential(0, 1).weights == ((0.5, -0.5), (-0.5, 0.5))

    def test_hardcore_shape(self):
        inst = hardcore_instance(3, [(0, 1)], 2.0)
        assert inst.vertex_potential(0).weights == (0.0, pytest.approx(math.log(2.0)))
        assert inst.edge_potential(0, 1).weights[1][1] == NEG_INF

    def test_coloring_shape(self):
        inst = coloring_instance(3, [(0, 1), (1, 2)], 4)
        assert inst.q == 4
        m = inst.edge_potential(0, 1).weights
        assert all(m[c][c] == NEG_INF for c in range(4))
        assert m[0][1] == 0.0


class TestClassify:
    def test_recovers_parameters(self):
        info = classify(ising_instance(5, [(0, 1), (1, 2)], -0.7), "ising")
        assert info.kind == "ising"
        assert info.max_degree == 2
        assert info.parameter == pytest.approx(0.7)

        info = classify(hardcore_instance(4, [(0, 1), (1, 2), (2, 3)], 1.5), "hardcore")
        assert info.parameter == pytest.approx(1.5)

        info = classify(coloring_instance(4, [(0, 1)], 5), "coloring")
        assert info.parameter == 5

    def test_rejects_foreign_potentials(self):
        with pytest.raises(ModelMismatch):
            classify(ising_instance(2, [(0, 1)], 0.3), "hardcore")
        with pytest.raises(ModelMismatch):
            classify(hardcore_instance(2, [(0, 1)], 1.0), "coloring")
        with pytest.raises(ModelMismatch):
            classify(coloring_instance(2, [(0, 1)], 3), "ising")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            classify(ising_instance(2, [(0, 1)], 0.1), "potts")


class TestRegimeFormulas:
    def test_ising_gap(self):
        # gap = 2 - (max_degree + 1)(1 - e^{-2|beta|})
        assert ising_regime_delta(3, 0.1) == pytest.approx(
            2 - 4 * (1 - math.exp(-0.2)), rel=1e-12)
        assert ising_regime_delta(3, -0.1) == ising_regime_delta(3, 0.1)

    def test_ising_boundary(self):
        beta_star = 0.5 * math.log(2.0)  # degree 3: e^{-2b} = 1/2
        assert ising_regime_delta(3, beta_star) == pytest.approx(0.0, abs=1e-12)

    def test_hardcore_gap(self):
        assert hardcore_regime_delta(4, 0.5) == pytest.approx(2 - 0.5 * 2)
        assert hardcore_regime_delta(2, 100.0) == 2.0, "degree <= 2 never binds"

    def test_coloring_gap(self):
        assert coloring_regime_delta(3, 8) == pytest.approx(8 / 3 - 2)
        assert coloring_regime_delta(0, 3) == 2.0

    def test_model_delta_clamps_to_one(self):
        inst = ising_instance(4, [(0, 1), (1, 2), (2, 3)], 0.01)
        assert model_delta(inst, "ising") == 1.0

    def test_model_delta_raises_out_of_regime(self):
        hot = ising_instance(4, [(0, 1), (1, 2), (2, 3), (3, 0)], 1.5)
        with pytest.raises(RegimeViolation):
            model_delta(hot, "ising")


class TestRegimeVsInfluence:
    """For zero-field odd-degree-regular instances the closed form and the
    exact influence check share the same boundary; spot-check both sides."""

    K4 = [(u, v) for u in range(4) for v in range(u + 1, 4)]

    def test_agreement_just_inside(self):
        beta = 0.5 * math.log(2.0) - 1e-6
        inst = ising_instance(4, self.K4, beta)
        assert ising_regime_delta(3, beta) > 0
        assert dobrushin_check(inst).satisfied

    def test_agreement_just_outside(self):
        beta = 0.5 * math.log(2.0) + 1e-6
        inst = ising_instance(4, self.K4, beta)
        assert ising_regime_delta(3, beta) < 0
        assert not dobrushin_check(inst).satisfied
