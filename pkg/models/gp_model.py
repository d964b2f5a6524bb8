"""
GP model data model: lifted states, effects, measurements, the probability rule and the two norms.

A state x in the affine chart is stored as the lifted vector (1, x), so the
order unit is u = (1, 0, ..., 0), the positive cone is the conic hull of the
lifted vertices and an effect is any functional with values in [0, 1] at the
vertices.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from config.settings import settings
from helpers.exceptions import (
    DegenerateModel,
    InvalidEffect,
    InvalidMeasurement,
    InvalidSymmetry,
    NoSymmetryRecorded,
    NumericalFailure,
    OutsideSpan,
    PointOutsideModel,
)
from helpers.lp import LinearProgram, LpStatus, Sense, feasible, solve_lp

logger = logging.getLogger(__name__)

# singular values below this (relative) fraction count as a collapsed direction
_RANK_TOL = 1e-9


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).ravel()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class StateVec:
    """Lifted vector: coordinate 0 is the unit pairing, the rest are affine coordinates."""

    lifted: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lifted", _frozen(self.lifted))

    @classmethod
    def from_affine(cls, coords) -> "StateVec":
        return cls(np.concatenate([[1.0], np.asarray(coords, dtype=float).ravel()]))

    @property
    def dim(self) -> int:
        return self.lifted.size - 1

    @property
    def pairing(self) -> float:
        return float(self.lifted[0])

    @property
    def affine(self) -> np.ndarray:
        return self.lifted[1:] / self.lifted[0]

    def is_normalized(self, tol: float = None) -> bool:
        tol = settings.LP_TOL if tol is None else tol
        return abs(self.pairing - 1.0) <= tol

    def normalized(self) -> "StateVec":
        if self.pairing <= 0:
            raise PointOutsideModel("Only cone elements with positive unit pairing can be normalised")
        return StateVec(self.lifted / self.pairing)

    def distance(self, other: "StateVec") -> float:
        return float(np.linalg.norm(self.lifted - other.lifted))

    def __add__(self, other: "StateVec") -> "StateVec":
        return StateVec(self.lifted + other.lifted)

    def __sub__(self, other: "StateVec") -> "StateVec":
        return StateVec(self.lifted - other.lifted)

    def __mul__(self, scalar: float) -> "StateVec":
        return StateVec(self.lifted * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "StateVec":
        return StateVec(self.lifted / scalar)

    def __repr__(self):
        return f"StateVec({np.array2string(self.lifted, precision=6)})"


@dataclass(frozen=True, eq=False)
class EffectFunc:
    """Functional on lifted vectors; acts on a state by the dot product."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen(self.coeffs))

    @classmethod
    def unit(cls, dim: int) -> "EffectFunc":
        coeffs = np.zeros(dim + 1)
        coeffs[0] = 1.0
        return cls(coeffs)

    @classmethod
    def zero(cls, dim: int) -> "EffectFunc":
        return cls(np.zeros(dim + 1))

    @property
    def dim(self) -> int:
        return self.coeffs.size - 1

    def complement(self) -> "EffectFunc":
        return EffectFunc.unit(self.dim) - self

    def __call__(self, state: Union[StateVec, np.ndarray]) -> float:
        lifted = state.lifted if isinstance(state, StateVec) else np.asarray(state, dtype=float)
        return float(self.coeffs @ lifted)

    def __add__(self, other: "EffectFunc") -> "EffectFunc":
        return EffectFunc(self.coeffs + other.coeffs)

    def __sub__(self, other: "EffectFunc") -> "EffectFunc":
        return EffectFunc(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "EffectFunc":
        return EffectFunc(self.coeffs * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"EffectFunc({np.array2string(self.coeffs, precision=6)})"


@dataclass(frozen=True)
class Measurement:
    effects: Tuple[EffectFunc, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        effects = tuple(self.effects)
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(len(effects)))
        if not effects:
            raise InvalidMeasurement("A measurement needs at least one effect")
        if len(labels) != len(effects):
            raise InvalidMeasurement("One label per effect is required")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.effects)

    @property
    def total(self) -> EffectFunc:
        return EffectFunc(np.sum([e.coeffs for e in self.effects], axis=0))


@dataclass(frozen=True, eq=False)
class GpModel:
    """Polytope state space given by its lifted extreme points (one row per vertex)."""

    dim: int
    vertices: np.ndarray
    name: str = "model"
    # generators of the recorded symmetry group, as vertex permutations
    symmetry: Tuple[Tuple[int, ...], ...] = ()
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float)
        vertices.flags.writeable = False
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "symmetry", tuple(tuple(int(i) for i in g) for g in self.symmetry))

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def affine_vertices(self) -> np.ndarray:
        return self.vertices[:, 1:]

    @property
    def states(self) -> List[StateVec]:
        return [StateVec(v) for v in self.vertices]

    @property
    def unit(self) -> EffectFunc:
        return EffectFunc.unit(self.dim)

    def vertex(self, index: int) -> StateVec:
        return StateVec(self.vertices[index])

    def vertex_index(self, state: StateVec) -> Optional[int]:
        """Index of the vertex stored bit-for-bit equal to ``state``, if any."""
        return self._vertex_lookup.get(np.asarray(state.lifted, dtype=float).tobytes())

    @cached_property
    def _vertex_lookup(self) -> Dict[bytes, int]:
        return {row.tobytes(): i for i, row in enumerate(self.vertices)}

    def mixture(self, weights) -> StateVec:
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.shape != (self.n_vertices,) or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise PointOutsideModel("Mixture weights must be a probability vector over the vertices")
        return StateVec(weights @ self.vertices)

    @property
    def centroid(self) -> StateVec:
        return StateVec(self.vertices.mean(axis=0))

    @cached_property
    def facets(self) -> np.ndarray:
        """Facet effects: one row per facet, zero on the facet and peaking at 1 on S."""
        return _facet_functionals(self)

    def cone_route(self, n_members: int) -> str:
        """How cone-order constraints for ``n_members`` dominated vectors are encoded."""
        route = settings.CONE_ROUTE
        if route == "auto":
            return "facet" if self.n_vertices * n_members > settings.VERTEX_ROUTE_LIMIT else "vertex"
        return route


def _facet_functionals(model: GpModel) -> np.ndarray:
    dim = model.dim
    points = model.affine_vertices
    if dim == 1:
        lo, hi = float(points.min()), float(points.max())
        raw = np.array([[-lo, 1.0], [hi, -1.0]])
    else:
        try:
            hull = ConvexHull(points)
        except QhullError as exc:
            raise NumericalFailure(f"Facet enumeration failed for {model.name}: {exc}") from exc
        # equations: normal·x + offset <= 0 on the hull
        equations = hull.equations
        raw = -np.hstack([equations[:, dim:], equations[:, :dim]])
    peaks = (model.vertices @ raw.T).max(axis=0)
    raw = raw / peaks[:, None]
    # triangulated facets repeat their hyperplane
    _, first = np.unique(np.round(raw, 9), axis=0, return_index=True)
    facets = raw[np.sort(first)]
    facets.flags.writeable = False
    logger.debug("%s: %d facets", model.name, facets.shape[0])
    return facets


def _lift(points: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((points.shape[0], 1)), points])


def as_lifted(vector, model: GpModel) -> np.ndarray:
    lifted = vector.lifted if isinstance(vector, StateVec) else np.asarray(vector, dtype=float).ravel()
    if lifted.shape != (model.dim + 1,):
        raise PointOutsideModel(f"Vector has {lifted.size} lifted coordinates, model {model.name} needs {model.dim + 1}")
    return lifted


def _conic_weights(generators: np.ndarray, target: np.ndarray, tol: float = None):
    prob = LinearProgram(objective=np.zeros(generators.shape[0]), a_eq=generators.T, b_eq=target)
    return feasible(prob, tol)


def _dedup(points: np.ndarray, tol: float) -> Tuple[np.ndarray, List[int]]:
    """Distinct points, and for every input row the index of its representative among them."""
    kept, owner = [], []
    for p in points:
        for j, q in enumerate(kept):
            if np.linalg.norm(p - q) <= tol:
                owner.append(j)
                break
        else:
            owner.append(len(kept))
            kept.append(p)
    return np.array(kept), owner


def _affine_chart(points: np.ndarray) -> Tuple[int, np.ndarray]:
    """Affine-hull dimension and the points expressed in an orthonormal chart of that hull."""
    centered = points - points[0]
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(1.0, float(singular[0])) if singular.size else 1.0
    rank = int(np.sum(singular > _RANK_TOL * scale))
    if rank == points.shape[1]:
        return rank, points
    return rank, centered @ vt[:rank].T


def extreme_points(points, tol: float = None) -> np.ndarray:
    """Drop every point that is a convex combination of the remaining ones (one LP per point)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return points[_extreme_indices(points, tol)]


def _extreme_indices(points: np.ndarray, tol: float = None) -> List[int]:
    lifted = _lift(points)
    keep = list(range(points.shape[0]))
    for i in range(points.shape[0]):
        others = [j for j in keep if j != i]
        if not others:
            continue
        inside, _ = _conic_weights(lifted[others], lifted[i], tol)
        if inside:
            logger.debug("Point %d lies in the hull of the others; dropped", i)
            keep.remove(i)
    return keep


def _remap_symmetry(generators, owner: List[int], keep: List[int]) -> Tuple[Tuple[int, ...], ...]:
    """Carry permutations of the input points over to the surviving extreme points."""
    n_input = len(owner)
    position = {d: new for new, d in enumerate(keep)}
    first: Dict[int, int] = {}
    for i, d in enumerate(owner):
        first.setdefault(d, i)
    remapped = []
    for perm in generators:
        if sorted(perm) != list(range(n_input)):
            raise InvalidSymmetry(f"{list(perm)} is not a permutation of the {n_input} input points")
        images = []
        for d in keep:
            source = first[d]
            target = owner[perm[source]]
            if target not in position:
                raise InvalidSymmetry(f"Permutation {list(perm)} sends extreme point {source} to "
                                      f"point {perm[source]}, which is not extreme")
            images.append(position[target])
        remapped.append(tuple(images))
    return tuple(remapped)


def validate_model(
    raw_vertices,
    tol: float = None,
    name: str = "model",
    symmetry: Optional[Sequence[Sequence[int]]] = None,
    metadata: Optional[Dict[str, str]] = None,
) -> GpModel:
    """Build a GpModel from affine points: dedup, chart the affine hull, reduce to extreme points.

    ``symmetry`` permutes the input points; it is carried over to the extreme points kept.
    """
    points = np.asarray(raw_vertices, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2 or points.shape[0] < 2 or points.shape[1] < 1:
        raise DegenerateModel("A model needs at least two points with one or more coordinates")
    if not np.all(np.isfinite(points)):
        raise DegenerateModel("Coordinates must be finite")

    points, owner = _dedup(points, settings.DEDUP_TOL)
    if points.shape[0] < 2:
        raise DegenerateModel("All points coincide; a singleton state space is excluded")
    rank, charted = _affine_chart(points)
    if rank == 0:
        raise DegenerateModel("All points coincide; a singleton state space is excluded")
    if rank < points.shape[1]:
        logger.info("%s: affine hull has dimension %d < %d; re-charted", name, rank, points.shape[1])
        points = charted

    keep = _extreme_indices(points, tol)
    if len(keep) < points.shape[0]:
        logger.info("%s: %d of %d points are extreme", name, len(keep), points.shape[0])
    points = points[keep]

    generators = _remap_symmetry([[int(i) for i in g] for g in (symmetry or ())], owner, keep)
    for perm in generators:
        fit_affine_map(points, perm)
    return GpModel(dim=rank, vertices=_lift(points), name=name, symmetry=generators, metadata=dict(metadata or {}))


def random_model(dim: int, k: int, seed: int) -> GpModel:
    """``k`` seeded points on the unit sphere of R^dim, reduced to their extreme points."""
    if dim < 1 or k < dim + 1:
        raise DegenerateModel(f"random_model needs dim >= 1 and k >= dim + 1, got dim={dim}, k={k}")
    rng = np.random.default_rng(seed)
    for attempt in range(settings.RANDOM_MODEL_RETRIES):
        raw = rng.standard_normal((k, dim))
        norms = np.linalg.norm(raw, axis=1)
        if np.any(norms < 1e-12):
            continue
        try:
            model = validate_model(raw / norms[:, None], name=f"random-{dim}-{k}-{seed}",
                                   metadata={"seed": str(seed), "attempt": str(attempt)})
        except DegenerateModel:
            continue
        if model.dim == dim:
            return model
        logger.debug("random_model seed %s attempt %d collapsed to dimension %d", seed, attempt, model.dim)
    raise DegenerateModel(f"No full-dimensional sample after {settings.RANDOM_MODEL_RETRIES} attempts (seed {seed})")


def prob(state: StateVec, effect: EffectFunc, model: GpModel, tol: float = None) -> float:
    """Probability rule <s, e>, clamped to [0, 1]."""
    tol = settings.LP_TOL if tol is None else tol
    if not is_effect(effect, model, tol):
        raise InvalidEffect("Functional takes values outside [0, 1] on the state space")
    as_lifted(state, model)
    if not state.is_normalized(tol):
        raise PointOutsideModel(f"State has unit pairing {state.pairing}, expected 1")
    return min(1.0, max(0.0, effect(state)))


def measure(measurement: Measurement, state: StateVec, model: GpModel, tol: float = None) -> np.ndarray:
    """Outcome distribution of ``measurement`` on ``state``."""
    tol = settings.LP_TOL if tol is None else tol
    for label, effect in zip(measurement.labels, measurement.effects):
        if not is_effect(effect, model, tol):
            raise InvalidMeasurement(f"Outcome {label} is not an effect")
    gap = np.max(np.abs(measurement.total.coeffs - model.unit.coeffs))
    if gap > tol * len(measurement):
        raise InvalidMeasurement(f"Effects do not sum to the unit (deviation {gap:.3e})")
    return np.array([prob(state, effect, model, tol) for effect in measurement.effects])


def is_effect(effect: EffectFunc, model: GpModel, tol: float = None) -> bool:
    tol = settings.LP_TOL if tol is None else tol
    if effect.coeffs.shape != (model.dim + 1,):
        return False
    values = model.vertices @ effect.coeffs
    return bool(np.all(values >= -tol) and np.all(values <= 1.0 + tol))


def in_cone(vector, model: GpModel, tol: float = None) -> Tuple[bool, Optional[np.ndarray]]:
    """Whether ``vector`` is a nonnegative combination of the lifted vertices, with the weights."""
    lifted = as_lifted(vector, model)
    index = model.vertex_index(StateVec(lifted))
    if index is not None:
        weights = np.zeros(model.n_vertices)
        weights[index] = 1.0
        return True, weights
    return _conic_weights(model.vertices, lifted, tol)


def is_state(vector, model: GpModel, tol: float = None) -> bool:
    tol = settings.LP_TOL if tol is None else tol
    lifted = as_lifted(vector, model)
    return abs(lifted[0] - 1.0) <= tol and in_cone(lifted, model, tol)[0]


def require_state(state: StateVec, model: GpModel, label: str = "state", tol: float = None):
    if not is_state(state, model, tol):
        raise PointOutsideModel(f"{label} is not a normalised state of {model.name}")


def order_norm(effect: EffectFunc, model: GpModel) -> float:
    """||f|| = inf{l : -l u <= f <= l u}, i.e. the largest |f(v)| over vertices."""
    return float(np.max(np.abs(model.vertices @ effect.coeffs)))


def base_norm(vector, model: GpModel, tol: float = None) -> float:
    """||v||_1 = sup{<v, f> : ||f|| <= 1}."""
    lifted = as_lifted(vector, model)
    if not np.any(lifted):
        return 0.0
    rows = np.vstack([model.vertices, -model.vertices])
    program = LinearProgram(objective=lifted, sense=Sense.maximize, a_ub=rows, b_ub=np.ones(rows.shape[0]),
                            lower=np.full(model.dim + 1, -np.inf))
    solution = solve_lp(program, tol)
    if solution.status == LpStatus.unbounded:
        raise OutsideSpan("Vector leaves the span of the lifted vertices")
    return solution.value


def fit_affine_map(points, perm: Sequence[int], tol: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """Affine (A, b) with A x_i + b = x_perm[i] for every point; InvalidSymmetry when none fits."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k, dim = points.shape
    perm = [int(i) for i in perm]
    if sorted(perm) != list(range(k)):
        raise InvalidSymmetry(f"{perm} is not a permutation of {k} vertices")
    design = np.hstack([points, np.ones((k, 1))])
    target = points[perm]
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.max(np.abs(design @ solution - target)))
    if residual > tol * max(1.0, float(np.max(np.abs(points)))):
        raise InvalidSymmetry(f"Permutation {perm} is not induced by an affine map (residual {residual:.3e})")
    return solution[:dim].T, solution[dim]


def symmetry_group(model: GpModel) -> List[Tuple[int, ...]]:
    """All permutations generated by the recorded generators, identity first."""
    if not model.symmetry:
        raise NoSymmetryRecorded(f"{model.name} carries no symmetry record")
    identity = tuple(range(model.n_vertices))
    seen = {identity}
    group = [identity]
    frontier = deque([identity])
    while frontier:
        g = frontier.popleft()
        for h in model.symmetry:
            composed = tuple(h[i] for i in g)
            if composed not in seen:
                seen.add(composed)
                group.append(composed)
                frontier.append(composed)
                if len(group) > settings.MAX_GROUP_ORDER:
                    raise InvalidSymmetry(f"Symmetry group exceeds {settings.MAX_GROUP_ORDER} elements")
    return group
