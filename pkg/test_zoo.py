"""
Tests for the model zoo: generators, symmetry averaging and reference cards
"""
import numpy as np
import pytest

from controllers.geometry import GeometryController
from controllers.info import InfoController
from controllers.zoo import ZooController
from helpers.exceptions import DegenerateModel, NoSymmetryRecorded, NotTransitive, UnknownModel
from models.gp_model import StateVec, random_model, validate_model
from models.schemas import ReferenceCard


@pytest.mark.parametrize("name", [f"simplex-{d}" for d in range(2, 7)]
                         + [f"polygon-{k}" for k in range(3, 11)]
                         + [f"hypercube-{dim}" for dim in range(1, 5)])
def test_maximally_mixed_state_is_critical(name):
    model = ZooController.build(name)
    state = ZooController.maximally_mixed(model)
    assert state.is_normalized()
    assert GeometryController.is_critical(state, model, tol=1e-7)


def test_maximally_mixed_simplex_is_uniform():
    state = ZooController.maximally_mixed(ZooController.simplex(4))
    assert state.affine == pytest.approx([0.25, 0.25, 0.25], abs=1e-12)
    assert ZooController.maximally_mixed(ZooController.simplex(4), start=2).affine == pytest.approx(state.affine)


def test_maximally_mixed_needs_a_transitive_group():
    kite = validate_model([[0.0, 1.0], [-1.0, 0.0], [1.0, 0.0]], name="isosceles", symmetry=[(0, 2, 1)])
    with pytest.raises(NotTransitive):
        ZooController.maximally_mixed(kite)
    with pytest.raises(NoSymmetryRecorded):
        ZooController.maximally_mixed(random_model(2, 7, seed=1))


def test_generator_sizes():
    assert ZooController.simplex(5).n_vertices == 5
    assert ZooController.regular_polygon(7).n_vertices == 7
    assert ZooController.hypercube(3).n_vertices == 8
    assert ZooController.hypercube(1).symmetry == ((1, 0),)
    with pytest.raises(DegenerateModel):
        ZooController.simplex(1)
    with pytest.raises(DegenerateModel):
        ZooController.regular_polygon(2)


@pytest.mark.parametrize("frequency", [1, 2, 3])
def test_icosphere_counts(frequency):
    points = ZooController.icosphere(frequency)
    assert points.shape == (10 * frequency ** 2 + 2, 3)
    assert np.linalg.norm(points, axis=1) == pytest.approx(np.ones(len(points)))


def test_ball_constructions():
    assert ZooController.ball_approx(3, 42).metadata["construction"] == "icosphere-2"
    fibonacci = ZooController.ball_approx(3, 20)
    assert fibonacci.metadata["construction"] == "fibonacci"
    assert fibonacci.n_vertices == 20
    assert ZooController.ball_approx(2, 9).n_vertices == 9
    high = ZooController.ball_approx(4, 12, seed=5)
    assert high.dim == 4
    assert np.array_equal(high.vertices, ZooController.ball_approx(4, 12, seed=5).vertices)
    with pytest.raises(DegenerateModel):
        ZooController.ball_approx(3, 3)


def test_prism():
    prism = ZooController.prism(ZooController.regular_polygon(3), height=1.0)
    assert prism.name == "triangle-prism"
    assert prism.dim == 3
    assert prism.n_vertices == 6
    assert prism.affine_vertices[:3, 2] == pytest.approx([-0.5] * 3)
    assert ZooController.build("pentagon-prism").name == "pentagon-prism"
    assert ZooController.build("square-prism").name == "square-prism"
    assert ZooController.build("polygon-30-prism").name == "polygon-30-prism"
    assert ZooController.build("polygon-31-prism").n_vertices == 62
    with pytest.raises(DegenerateModel):
        ZooController.prism(ZooController.regular_polygon(4), height=0.0)
    with pytest.raises(DegenerateModel):
        ZooController.prism(ZooController.hypercube(3))


@pytest.mark.parametrize("alias, name", [("bit", "simplex-2"), ("pentagon", "polygon-5"), ("square", "hypercube-2"),
                                         ("gbit", "hypercube-2"), ("cube", "hypercube-3")])
def test_aliases(alias, name):
    assert ZooController.build(alias).name == name


def test_parametric_names():
    assert ZooController.build("ball-3-42").name == "ball-3-42"
    assert ZooController.build("random-3-10-7").name == "random-3-10-7"
    assert ZooController.build("square-prism").n_vertices == 8


@pytest.mark.parametrize("name", ["hexagon", "simplex", "polygon-x", ""])
def test_unknown_names(name):
    with pytest.raises(UnknownModel):
        ZooController.build(name)


def test_reference_card_consistency():
    with pytest.raises(ValueError):
        ReferenceCard(name="broken", m=1.0, n=3.0, d=2, critical_state=[0.0], source="derived")
    with pytest.raises(UnknownModel):
        ZooController.reference_values("ball-4-42")


@pytest.mark.parametrize("name", ["ball-3-42", "ball-3-162", "ball-3-100-7"])
def test_qubit_reference_card(name):
    card = ZooController.reference_values(name)
    assert (card.m, card.n, card.d) == (1.0, 2.0, 2)
    assert card.source == "published"
    assert card.critical_state == [0.0, 0.0, 0.0]


def test_icosphere_storable_information_approaches_the_qubit_value():
    card = ZooController.reference_values("ball-3-92")
    model = ZooController.build("ball-3-92")
    n = InfoController.storable_info_dual(model.states, model).value
    assert card.n - 1e-9 <= n <= card.n + 0.05
    assert InfoController.distinguishable_number(model.states, model).count == card.d


@pytest.mark.parametrize("name", ["simplex-2", "simplex-3", "simplex-5", "polygon-3", "polygon-4", "polygon-5",
                                  "polygon-7", "polygon-8", "hypercube-1", "hypercube-2", "hypercube-3",
                                  "triangle-prism", "pentagon-prism", "square-prism"])
def test_reference_cards_match_the_pipeline(name):
    card = ZooController.reference_values(name)
    model = ZooController.build(name)
    storable = InfoController.storable_info_dual(model.states, model)
    assert storable.value == pytest.approx(card.n, abs=1e-9)
    assert GeometryController.minkowski_measure(model).measure == pytest.approx(card.m, abs=1e-9)
    assert InfoController.distinguishable_number(model.states, model).count == card.d
    assert GeometryController.is_critical(StateVec.from_affine(card.critical_state), model, tol=1e-7)


def test_known_models_all_build():
    for name in ZooController.known_models():
        assert ZooController.build(name).name == name
