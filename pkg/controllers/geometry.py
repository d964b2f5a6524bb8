"""
Geometry controller: mixing weights, antipodal points, boundariness,
maximal distortion, Minkowski measure and critical states
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from config.settings import settings
from controllers.info import InfoController, StorableInfoResult, dominating_element
from helpers.exceptions import (
    BoundaryBasePoint,
    CoincidentPoints,
    NumericalFailure,
    PointOutsideModel,
    SingularMap,
)
from helpers.lp import LinearProgram, LpStatus, Sense, solve_lp
from models.gp_model import GpModel, StateVec, as_lifted, base_norm, require_state

logger = logging.getLogger(__name__)


@dataclass
class DistortionReport:
    base_point: StateVec
    value: float
    witness_index: int
    witness_vertex: StateVec
    antipode: StateVec
    boundariness: float
    norm_ratio: float


@dataclass
class MinkowskiResult:
    measure: float
    critical_state: StateVec
    critical_samples: List[StateVec] = field(default_factory=list)
    storable: Optional[StorableInfoResult] = None


def _require_normalized(s_star: StateVec, model: GpModel, tol: float = None):
    as_lifted(s_star, model)
    if not s_star.is_normalized(settings.LP_TOL if tol is None else tol):
        raise PointOutsideModel(f"Base point has unit pairing {s_star.pairing}, expected 1")


def _weight(lifted_s: np.ndarray, lifted_v: np.ndarray, model: GpModel, tol: float = None) -> float:
    # max t s.t. s* - t v = sum mu_i v_i, mu >= 0
    k = model.n_vertices
    objective = np.zeros(k + 1)
    objective[0] = 1.0
    a_eq = np.hstack([lifted_v.reshape(-1, 1), model.vertices.T])
    solution = solve_lp(LinearProgram(objective=objective, sense=Sense.maximize, a_eq=a_eq, b_eq=lifted_s), tol)
    if solution.status == LpStatus.infeasible:
        raise PointOutsideModel(f"Base point lies outside {model.name}")
    if not solution.is_optimal:
        raise NumericalFailure(f"Weight program returned {solution.status.value}")
    return min(1.0, max(0.0, solution.value))


def _ray_exit(lifted_s: np.ndarray, direction: np.ndarray, model: GpModel, tol: float = None) -> float:
    # max tau s.t. s* + tau d = sum mu_i v_i, mu >= 0
    k = model.n_vertices
    objective = np.zeros(k + 1)
    objective[0] = 1.0
    a_eq = np.hstack([-direction.reshape(-1, 1), model.vertices.T])
    solution = solve_lp(LinearProgram(objective=objective, sense=Sense.maximize, a_eq=a_eq, b_eq=lifted_s), tol)
    if solution.status == LpStatus.infeasible:
        raise PointOutsideModel(f"Ray origin lies outside {model.name}")
    if solution.status == LpStatus.unbounded:
        raise NumericalFailure("Ray never leaves the state space")
    return solution.value


class GeometryController:

    @staticmethod
    def weight_t(s_star: StateVec, v: StateVec, model: GpModel, tol: float = None) -> float:
        """Largest t with (s* - t v)/(1 - t) in S."""
        _require_normalized(s_star, model, tol)
        require_state(v, model, "v", tol)
        return _weight(s_star.lifted, v.lifted, model, tol)

    @staticmethod
    def vertex_weights(s_star: StateVec, model: GpModel, tol: float = None) -> np.ndarray:
        _require_normalized(s_star, model, tol)
        return np.array([_weight(s_star.lifted, v, model, tol) for v in model.vertices])

    @staticmethod
    def ray_exit(s_star: StateVec, direction, model: GpModel, tol: float = None) -> float:
        """Largest tau with s* + tau d still in S; d must have zero unit pairing."""
        _require_normalized(s_star, model, tol)
        direction = as_lifted(direction, model)
        if np.linalg.norm(direction) <= settings.DEDUP_TOL:
            raise CoincidentPoints("Ray direction vanishes")
        if abs(direction[0]) > settings.LP_TOL:
            raise PointOutsideModel("Ray direction must have zero unit pairing")
        return _ray_exit(s_star.lifted, direction, model, tol)

    @staticmethod
    def antipodal(s_star: StateVec, v: StateVec, model: GpModel, tol: float = None) -> StateVec:
        """Boundary point where the ray from v through s* leaves S."""
        _require_normalized(s_star, model, tol)
        require_state(v, model, "v", tol)
        direction = s_star.lifted - v.lifted
        if np.linalg.norm(direction) <= settings.DEDUP_TOL:
            raise CoincidentPoints("Base point and v coincide")
        tau = _ray_exit(s_star.lifted, direction, model, tol)
        return StateVec(s_star.lifted + tau * direction)

    @staticmethod
    def boundariness(s_star: StateVec, model: GpModel, tol: float = None) -> float:
        """b = min over vertices of weight_t."""
        return float(np.min(GeometryController.vertex_weights(s_star, model, tol)))

    @staticmethod
    def max_distortion(s_star: StateVec, model: GpModel, tol: float = None) -> DistortionReport:
        """m_{s*} = 1/b - 1, cross-checked against the base-norm ratio at the witness vertex."""
        weights = GeometryController.vertex_weights(s_star, model, tol)
        witness = int(np.argmin(weights))
        b = float(weights[witness])
        if b <= settings.INTERIOR_TOL:
            raise BoundaryBasePoint(f"Boundariness {b:.3e} at the base point; it is not interior")
        value = 1.0 / b - 1.0
        vertex = model.vertex(witness)
        antipode = GeometryController.antipodal(s_star, vertex, model, tol)
        ratio = base_norm(vertex - s_star, model, tol) / base_norm(antipode - s_star, model, tol)
        if abs(ratio - value) > settings.CROSS_CHECK_TOL * max(1.0, value):
            raise NumericalFailure(f"Distortion {value:.12f} disagrees with norm ratio {ratio:.12f}")
        return DistortionReport(base_point=s_star, value=value, witness_index=witness, witness_vertex=vertex,
                                antipode=antipode, boundariness=b, norm_ratio=ratio)

    @staticmethod
    def antipodal_ratios(s_star: StateVec, model: GpModel, tol: float = None) -> np.ndarray:
        """||v - s*||_1 / ||v° - s*||_1 for every vertex v."""
        ratios = []
        for vertex in model.states:
            antipode = GeometryController.antipodal(s_star, vertex, model, tol)
            ratios.append(base_norm(vertex - s_star, model, tol) / base_norm(antipode - s_star, model, tol))
        return np.array(ratios)

    @staticmethod
    def minkowski_measure(model: GpModel, samples: int = 0, seed: int = 0, tol: float = None) -> MinkowskiResult:
        """m = n - 1, with the critical state read off the dual optimiser."""
        storable = InfoController.storable_info_dual(model.states, model, tol)
        measure = storable.value - 1.0
        critical = storable.dual_state
        check = GeometryController.max_distortion(critical, model, tol)
        if abs(check.value - measure) > settings.IDENTITY_TOL:
            raise NumericalFailure(
                f"Critical state has distortion {check.value:.10f} but the measure is {measure:.10f}")
        logger.info("%s: Minkowski measure %.10f", model.name, measure)
        found = []
        if samples:
            found = GeometryController.critical_samples(model, samples, seed, tol, storable=storable)
        return MinkowskiResult(measure=measure, critical_state=critical, critical_samples=found, storable=storable)

    @staticmethod
    def is_critical(s_star: StateVec, model: GpModel, tol: float = None, measure: float = None) -> bool:
        tol = settings.CRITICAL_TOL if tol is None else tol
        if measure is None:
            measure = GeometryController.minkowski_measure(model).measure
        try:
            value = GeometryController.max_distortion(s_star, model).value
        except BoundaryBasePoint:
            return False
        return value <= measure + tol

    @staticmethod
    def critical_samples(model: GpModel, n_samples: int, seed: int, tol: float = None,
                         storable: StorableInfoResult = None) -> List[StateVec]:
        """Critical states from the optimal face of the dual program under random objectives."""
        if storable is None:
            storable = InfoController.storable_info_dual(model.states, model, tol)
        n = storable.value
        measure = n - 1.0
        cap = n + 10 * settings.LP_TOL * max(1.0, n)
        rng = np.random.default_rng(seed)

        optima = [storable.dual_state]
        for _ in range(n_samples):
            direction = np.concatenate([[0.0], rng.standard_normal(model.dim)])
            for sign in (1.0, -1.0):
                xi = dominating_element(model.vertices, model, direction=sign * direction, cap=cap, tol=tol)
                optima.append(StateVec(xi / xi[0]))
        optima = _dedup_states(optima)
        candidates = optima + [(a + b) * 0.5 for a, b in itertools.combinations(optima, 2)]

        critical = [s for s in _dedup_states(candidates)
                    if GeometryController.is_critical(s, model, measure=measure)]
        critical.sort(key=lambda s: tuple(np.round(s.affine, 9)))
        logger.info("%s: %d distinct critical samples", model.name, len(critical))
        return critical

    @staticmethod
    def affine_image(model: GpModel, matrix, offset) -> GpModel:
        """Vertex-wise image under x -> A x + b."""
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        offset = np.asarray(offset, dtype=float).ravel()
        if matrix.shape != (model.dim, model.dim) or offset.shape != (model.dim,):
            raise SingularMap(f"Map must be {model.dim}x{model.dim} with a matching offset")
        if np.linalg.matrix_rank(matrix) < model.dim:
            raise SingularMap("Affine map is not invertible")
        points = model.affine_vertices @ matrix.T + offset
        lifted = np.hstack([np.ones((model.n_vertices, 1)), points])
        return GpModel(dim=model.dim, vertices=lifted, name=f"{model.name}-affine", symmetry=model.symmetry,
                       metadata=dict(model.metadata))

    @staticmethod
    def boundary_sampling_distortion(s_star: StateVec, model: GpModel, n_samples: int, seed: int,
                                     tol: float = None) -> float:
        """Largest exit-distance ratio over random rays through s*, an estimate from below of m_{s*}."""
        _require_normalized(s_star, model, tol)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_samples):
            direction = np.concatenate([[0.0], rng.standard_normal(model.dim)])
            forward = _ray_exit(s_star.lifted, direction, model, tol)
            backward = _ray_exit(s_star.lifted, -direction, model, tol)
            if min(forward, backward) <= settings.INTERIOR_TOL:
                raise BoundaryBasePoint("Base point lies on the boundary")
            worst = max(worst, forward / backward, backward / forward)
        return worst

    @staticmethod
    def grid_search_measure(model: GpModel, resolution: int = 9, tol: float = None) -> Tuple[float, StateVec]:
        """Direct minimisation of m_{s*} over a grid spanning the bounding box; dim <= 3 only."""
        if model.dim > 3:
            raise ValueError("Grid search is limited to models of dimension 3 or less")
        lo, hi = model.affine_vertices.min(axis=0), model.affine_vertices.max(axis=0)
        axes = [np.linspace(a, b, resolution) for a, b in zip(lo, hi)]
        best_value, best_point = np.inf, None
        for coords in itertools.product(*axes):
            point = StateVec.from_affine(coords)
            try:
                value = GeometryController.max_distortion(point, model, tol).value
            except (BoundaryBasePoint, PointOutsideModel):
                continue
            if value < best_value:
                best_value, best_point = value, point
        return best_value, best_point


def _dedup_states(states: List[StateVec]) -> List[StateVec]:
    kept: List[StateVec] = []
    for s in states:
        if all(s.distance(t) > settings.SAMPLE_DEDUP_TOL for t in kept):
            kept.append(s)
    return kept
