"""
Tests for ensembles, optimal success probability and Helstrom families
"""
import math

import numpy as np
import pytest

from controllers.helstrom import Ensemble, HelstromController
from controllers.info import InfoController
from helpers.exceptions import DegenerateConjugate, InfeasibleFamily, InvalidEnsemble, PointOutsideModel
from models.gp_model import StateVec, random_model


@pytest.fixture
def classical_pair(bit):
    # a point mass and the fair coin, equal priors
    return Ensemble([bit.vertex(0), StateVec.from_affine([0.5])], [0.5, 0.5])


def test_ensemble_validation(bit):
    with pytest.raises(InvalidEnsemble):
        Ensemble([], [])
    with pytest.raises(InvalidEnsemble):
        Ensemble([bit.vertex(0)], [0.5, 0.5])
    with pytest.raises(InvalidEnsemble):
        Ensemble([bit.vertex(0), bit.vertex(1)], [1.5, -0.5])
    with pytest.raises(InvalidEnsemble):
        Ensemble([StateVec([2.0, 1.0])], [1.0])


def test_success_probability_needs_a_prior(bit):
    ensemble = Ensemble([bit.vertex(0), bit.vertex(1)], [0.5, 0.6])
    with pytest.raises(InvalidEnsemble):
        HelstromController.success_prob(ensemble, bit)


def test_states_must_belong_to_the_model(bit):
    ensemble = Ensemble([StateVec.from_affine([1.5])], [1.0])
    with pytest.raises(PointOutsideModel):
        HelstromController.success_prob(ensemble, bit)


def test_classical_pair_success_probability(bit, classical_pair):
    value, measurement = HelstromController.success_prob(classical_pair, bit)
    assert value == pytest.approx(0.75, abs=1e-12)
    assert measurement.labels[-1] == "fail"
    assert measurement.total.coeffs == pytest.approx(bit.unit.coeffs, abs=1e-9)


def test_classical_pair_family(bit, classical_pair):
    family = HelstromController.helstrom_family(classical_pair, bit)
    assert family.ratio == pytest.approx(0.75, abs=1e-12)
    assert family.tilde_weights == pytest.approx([2.0 / 3.0, 2.0 / 3.0])
    verdict = HelstromController.verify_family(family, classical_pair, bit)
    assert verdict.passed
    assert verdict.deviations["condition_i"] <= 1e-9
    assert verdict.deviations["condition_ii"] <= 1e-9


def test_perfectly_distinguishable_pair(bit):
    ensemble = Ensemble.from_vertices(bit, [0, 1], [0.5, 0.5])
    family = HelstromController.helstrom_family(ensemble, bit)
    assert family.ratio == pytest.approx(1.0, abs=1e-9)
    # each conjugate is the other member
    assert family.conjugates[0].distance(bit.vertex(1)) <= 1e-9
    assert family.conjugates[1].distance(bit.vertex(0)) <= 1e-9


def test_single_state_gives_a_degenerate_family(pentagon):
    ensemble = Ensemble([pentagon.vertex(1)], [1.0])
    family = HelstromController.helstrom_family(ensemble, pentagon)
    assert family.ratio == pytest.approx(1.0, abs=1e-9)
    assert family.degenerate == (True,)
    assert HelstromController.verify_family(family, ensemble, pentagon).passed


def test_weak_family(bit, classical_pair):
    _, xi = HelstromController.weighted_n(classical_pair.states, classical_pair.weights, bit)
    family = HelstromController.build_family(classical_pair, xi.lifted * 1.1, bit)
    assert family.ratio == pytest.approx(0.825, abs=1e-9)
    weak = HelstromController.verify_family(family, classical_pair, bit, strict=False)
    assert weak.passed
    assert weak.optimal is None
    assert not HelstromController.verify_family(family, classical_pair, bit, strict=True).passed


def test_ratio_below_a_prior_weight(bit, classical_pair):
    _, xi = HelstromController.weighted_n(classical_pair.states, classical_pair.weights, bit)
    with pytest.raises(InfeasibleFamily):
        HelstromController.build_family(classical_pair, xi.lifted * 0.5, bit)


def test_degenerate_conjugate_with_a_different_common_state(bit):
    ensemble = Ensemble.from_vertices(bit, [0, 1], [0.5, 0.5])
    with pytest.raises(DegenerateConjugate):
        HelstromController.build_family(ensemble, [0.5, 0.25], bit)


def test_unit_weights_reduce_to_storable_information(pentagon):
    value, _ = HelstromController.weighted_n(pentagon.states, np.ones(5), pentagon)
    assert value == pytest.approx(math.sqrt(5.0), abs=1e-9)
    assert value == pytest.approx(InfoController.storable_info_dual(pentagon.states, pentagon).value, abs=1e-12)


@pytest.mark.parametrize("seed", range(12))
def test_random_ensembles(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 5))
    model = random_model(dim, int(rng.integers(dim + 2, dim + 8)), 1000 + seed)
    size = int(rng.integers(1, 7))
    states = [model.mixture(rng.dirichlet(np.ones(model.n_vertices))) for _ in range(size)]
    ensemble = Ensemble(states, rng.dirichlet(np.ones(size)))
    family = HelstromController.helstrom_family(ensemble, model)
    success, _ = HelstromController.success_prob(ensemble, model)
    assert family.ratio == pytest.approx(success, abs=1e-7)
    verdict = HelstromController.verify_family(family, ensemble, model)
    assert verdict.passed
    assert verdict.deviations["condition_i"] <= 1e-9
    assert verdict.deviations["condition_ii"] <= 1e-9 * max(1.0, np.abs(family.common_state.lifted).max())
