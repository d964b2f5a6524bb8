"""
Information controller: storable information, max-relative entropy,
distinguishable number, capacity lower bound and the inequality chain
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import settings
from helpers.channel import blahut_arimoto
from helpers.exceptions import ConvergenceFailure, NumericalFailure, PointOutsideModel
from helpers.lp import LinearProgram, LpStatus, Sense, feasible, solve_lp
from models.gp_model import (
    EffectFunc,
    GpModel,
    Measurement,
    StateVec,
    _extreme_indices,
    as_lifted,
    require_state,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FiniteDmax:
    ratio: float
    finite = True

    @property
    def bits(self) -> float:
        return math.log2(self.ratio)

    def to_json(self):
        return self.bits


@dataclass(frozen=True)
class InfiniteDmax:
    """s1 is not dominated by any multiple of s2."""
    finite = False

    def to_json(self):
        return "inf"


DmaxValue = Union[FiniteDmax, InfiniteDmax]


@dataclass
class StorableInfoResult:
    value: float
    encoding: List[StateVec]
    dual_xi: Optional[StateVec] = None
    dual_state: Optional[StateVec] = None
    primal_value: Optional[float] = None
    primal_measurement: Optional[Measurement] = None

    @property
    def gap(self) -> Optional[float]:
        if self.primal_value is None or self.dual_xi is None:
            return None
        return abs(self.primal_value - self.dual_xi.pairing)

    @property
    def failure_effect(self) -> Optional[EffectFunc]:
        if self.primal_measurement is None:
            return None
        return self.primal_measurement.effects[-1]


@dataclass
class DistinguishabilityResult:
    count: int
    states: List[StateVec]
    measurement: Measurement
    indices: Tuple[int, ...] = ()


@dataclass
class CapacityEstimate:
    lower_bound: float
    best_encoding: Tuple[int, ...]
    best_measurement: Measurement
    ba_iterations: int
    converged: bool
    candidates: int = 0
    mode: str = "exhaustive"


@dataclass
class InequalityReport:
    d: int
    two_c: float
    n: float
    dim_bound: int
    verdicts: Dict[str, bool]
    saturated: bool
    storable: StorableInfoResult = None
    distinguishable: DistinguishabilityResult = None
    capacity: CapacityEstimate = None

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


def _distinct(states: Sequence[StateVec]) -> List[StateVec]:
    kept: List[StateVec] = []
    for s in states:
        if all(s.distance(t) > settings.DEDUP_TOL for t in kept):
            kept.append(s)
    return kept


def _targets(states: Sequence[StateVec], model: GpModel) -> np.ndarray:
    return np.array([as_lifted(s, model) for s in states])


def dominating_program(targets: np.ndarray, model: GpModel, direction: np.ndarray = None, cap: float = None):
    """
    min direction·xi over cone elements xi with xi - t in the cone for every row t.

    Returns the program and a function mapping its solution point to xi.
    """
    dim1 = model.dim + 1
    direction = model.unit.coeffs if direction is None else np.asarray(direction, dtype=float)
    route = model.cone_route(targets.shape[0])
    if route == "facet":
        facets = model.facets
        bounds = np.maximum(0.0, (targets @ facets.T).max(axis=0))
        a_ub, b_ub = -facets, -bounds
        if cap is not None:
            a_ub = np.vstack([a_ub, model.unit.coeffs])
            b_ub = np.append(b_ub, cap)
        program = LinearProgram(objective=direction, a_ub=a_ub, b_ub=b_ub, lower=np.full(dim1, -np.inf))
        return program, lambda x: x

    vertices = model.vertices
    k, m = model.n_vertices, targets.shape[0]
    a_eq = np.zeros((m * dim1, k + m * k))
    for j in range(m):
        rows = slice(j * dim1, (j + 1) * dim1)
        a_eq[rows, :k] = vertices.T
        a_eq[rows, k + j * k:k + (j + 1) * k] = -vertices.T
    objective = np.zeros(k + m * k)
    objective[:k] = vertices @ direction
    a_ub = b_ub = None
    if cap is not None:
        a_ub = np.zeros((1, k + m * k))
        a_ub[0, :k] = 1.0
        b_ub = np.array([cap])
    program = LinearProgram(objective=objective, a_eq=a_eq, b_eq=targets.reshape(-1), a_ub=a_ub, b_ub=b_ub)
    return program, lambda x: vertices.T @ x[:k]


def dominating_element(targets: np.ndarray, model: GpModel, direction=None, cap: float = None,
                       tol: float = None) -> np.ndarray:
    program, extract = dominating_program(targets, model, direction, cap)
    solution = solve_lp(program, tol)
    if not solution.is_optimal:
        raise NumericalFailure(f"Dominating-cone program returned {solution.status.value}")
    return extract(solution.point)


def discrimination_program(targets: np.ndarray, weights: np.ndarray, model: GpModel):
    """
    max sum_j weights_j e_j(t_j) over effects e_j >= 0 on S with u - sum_j e_j >= 0 on S.

    Returns the program and a function mapping its solution point to (effects, failure effect).
    """
    dim1 = model.dim + 1
    m = targets.shape[0]
    if model.cone_route(m + 1) == "facet":
        facets = model.facets
        nf = facets.shape[0]
        values = targets @ facets.T
        objective = np.concatenate([(weights[:, None] * values).reshape(-1), np.zeros(nf)])
        a_eq = np.tile(facets.T, (1, m + 1))
        program = LinearProgram(objective=objective, sense=Sense.maximize, a_eq=a_eq, b_eq=model.unit.coeffs)

        def extract(x):
            blocks = x.reshape(m + 1, nf)
            effects = [EffectFunc(facets.T @ blocks[j]) for j in range(m)]
            return effects, EffectFunc(facets.T @ blocks[m])
        return program, extract

    vertices = model.vertices
    k = model.n_vertices
    objective = (weights[:, None] * targets).reshape(-1)
    a_ub = np.zeros((m * k + k, m * dim1))
    for j in range(m):
        a_ub[j * k:(j + 1) * k, j * dim1:(j + 1) * dim1] = -vertices
        a_ub[m * k:, j * dim1:(j + 1) * dim1] = vertices
    b_ub = np.concatenate([np.zeros(m * k), np.ones(k)])
    program = LinearProgram(objective=objective, sense=Sense.maximize, a_ub=a_ub, b_ub=b_ub,
                            lower=np.full(m * dim1, -np.inf))

    def extract(x):
        effects = [EffectFunc(x[j * dim1:(j + 1) * dim1]) for j in range(m)]
        failure = model.unit - EffectFunc(np.sum([e.coeffs for e in effects], axis=0))
        return effects, failure
    return program, extract


def optimal_discrimination(targets: np.ndarray, weights: np.ndarray, model: GpModel, tol: float = None):
    program, extract = discrimination_program(targets, np.asarray(weights, dtype=float), model)
    solution = solve_lp(program, tol)
    if not solution.is_optimal:
        raise NumericalFailure(f"Discrimination program returned {solution.status.value}")
    effects, failure = extract(solution.point)
    return solution.value, effects, failure


def _perfect_discrimination(targets: np.ndarray, model: GpModel, tol: float = None) -> Optional[List[EffectFunc]]:
    """Effects with e_x(t_x') = delta, e_x >= 0 and sum e_x <= u on S; None when infeasible."""
    dim1 = model.dim + 1
    r = targets.shape[0]
    a_eq = np.zeros((r * r, r * dim1))
    b_eq = np.zeros(r * r)
    for x in range(r):
        for y in range(r):
            a_eq[x * r + y, x * dim1:(x + 1) * dim1] = targets[y]
            b_eq[x * r + y] = 1.0 if x == y else 0.0

    if model.cone_route(r + 1) == "facet":
        facets = model.facets
        nf = facets.shape[0]
        # e_x = facets.T @ alpha_x, failure = facets.T @ beta
        lift = np.zeros((r * r + dim1, (r + 1) * nf))
        for x in range(r):
            lift[x * r:(x + 1) * r, x * nf:(x + 1) * nf] = targets @ facets.T
        lift[r * r:, :] = np.tile(facets.T, (1, r + 1))
        program = LinearProgram(objective=np.zeros((r + 1) * nf), a_eq=lift,
                                b_eq=np.concatenate([b_eq, model.unit.coeffs]))
        ok, point = feasible(program, tol)
        if not ok:
            return None
        return [EffectFunc(facets.T @ point[x * nf:(x + 1) * nf]) for x in range(r)]

    vertices = model.vertices
    k = model.n_vertices
    a_ub = np.zeros((r * k + k, r * dim1))
    for x in range(r):
        a_ub[x * k:(x + 1) * k, x * dim1:(x + 1) * dim1] = -vertices
        a_ub[r * k:, x * dim1:(x + 1) * dim1] = vertices
    b_ub = np.concatenate([np.zeros(r * k), np.ones(k)])
    program = LinearProgram(objective=np.zeros(r * dim1), a_eq=a_eq, b_eq=b_eq, a_ub=a_ub, b_ub=b_ub,
                            lower=np.full(r * dim1, -np.inf))
    ok, point = feasible(program, tol)
    if not ok:
        return None
    return [EffectFunc(point[x * dim1:(x + 1) * dim1]) for x in range(r)]


def _cliques(adjacency: np.ndarray, size: int):
    """Cliques of the given size in lexicographic order of their sorted index tuples."""
    n = adjacency.shape[0]

    def extend(clique, start):
        if len(clique) == size:
            yield tuple(clique)
            return
        for j in range(start, n):
            if all(adjacency[i, j] for i in clique):
                yield from extend(clique + [j], j + 1)

    yield from extend([], 0)


def _channel(states: Sequence[StateVec], measurement: Measurement) -> np.ndarray:
    return np.array([[min(1.0, max(0.0, e(s))) for e in measurement.effects] for s in states])


def capacity_subsets(k: int, subset_cap: int, budget: int, seeds: Sequence[int]) -> Tuple[str, List[Tuple[int, ...]]]:
    """
    Vertex subsets tried as capacity encodings, with the search mode.

    Every subset of size 2..min(k, subset_cap) when their number fits ``budget``
    ("exhaustive"); otherwise ``budget`` seeded draws split over ``seeds``, plus
    the full vertex set when k <= subset_cap ("sampled").
    """
    top = min(k, subset_cap)
    total = sum(math.comb(k, size) for size in range(2, top + 1))
    if total <= budget:
        subsets = [s for size in range(2, top + 1) for s in itertools.combinations(range(k), size)]
        return "exhaustive", subsets

    subsets: List[Tuple[int, ...]] = []
    if k <= subset_cap:
        subsets.append(tuple(range(k)))
    seeds = tuple(seeds) or (0,)
    per_seed = max(1, budget // len(seeds))
    for seed in seeds:
        rng = np.random.default_rng(seed)
        for _ in range(per_seed):
            size = int(rng.integers(2, top + 1))
            subsets.append(tuple(sorted(int(i) for i in rng.choice(k, size=size, replace=False))))
    return "sampled", list(dict.fromkeys(subsets))


class InfoController:

    @staticmethod
    def dmax(s1: StateVec, s2: StateVec, model: GpModel, tol: float = None) -> DmaxValue:
        """D_max(s1||s2) = log2 min{c : c s2 - s1 in the cone}."""
        require_state(s1, model, "s1", tol)
        require_state(s2, model, "s2", tol)
        return InfoController._dmax_ratio(s1.lifted, s2.lifted, model, tol)

    @staticmethod
    def _dmax_ratio(lifted1: np.ndarray, lifted2: np.ndarray, model: GpModel, tol: float = None) -> DmaxValue:
        k = model.n_vertices
        a_eq = np.hstack([lifted2.reshape(-1, 1), -model.vertices.T])
        objective = np.zeros(k + 1)
        objective[0] = 1.0
        solution = solve_lp(LinearProgram(objective=objective, a_eq=a_eq, b_eq=lifted1), tol)
        if solution.status == LpStatus.infeasible:
            return InfiniteDmax()
        if not solution.is_optimal:
            raise NumericalFailure(f"D_max program returned {solution.status.value}")
        return FiniteDmax(max(1.0, solution.value))

    @staticmethod
    def n_at(s_star: StateVec, family: Sequence[StateVec], model: GpModel, tol: float = None) -> float:
        """max over the family of 2^{D_max(s||s_star)}; +inf when some member is not dominated."""
        require_state(s_star, model, "s_star", tol)
        worst = 1.0
        for s in _distinct(family):
            require_state(s, model, "family member", tol)
            value = InfoController._dmax_ratio(s.lifted, s_star.lifted, model, tol)
            if not value.finite:
                return math.inf
            worst = max(worst, value.ratio)
        return worst

    @staticmethod
    def storable_info_dual(family: Sequence[StateVec], model: GpModel, tol: float = None) -> StorableInfoResult:
        """n(F) = min{<xi, u> : xi >= s for every s in F}."""
        states = _distinct(family)
        if not states:
            raise PointOutsideModel("The family must not be empty")
        for s in states:
            require_state(s, model, "family member", tol)
        xi = dominating_element(_targets(states, model), model, tol=tol)
        value = float(xi[0])
        logger.info("%s: dual storable information %.10f over %d states", model.name, value, len(states))
        return StorableInfoResult(value=value, encoding=states, dual_xi=StateVec(xi), dual_state=StateVec(xi / value))

    @staticmethod
    def storable_info_primal(family: Sequence[StateVec], model: GpModel, tol: float = None) -> StorableInfoResult:
        """max sum_x e_x(s_x) over decoding effects with a nonnegative failure effect."""
        states = _distinct(family)
        if not states:
            raise PointOutsideModel("The family must not be empty")
        for s in states:
            require_state(s, model, "family member", tol)
        value, effects, failure = optimal_discrimination(_targets(states, model), np.ones(len(states)), model, tol)
        labels = tuple(str(i) for i in range(len(effects))) + ("fail",)
        measurement = Measurement(tuple(effects) + (failure,), labels)
        logger.info("%s: primal storable information %.10f", model.name, value)
        return StorableInfoResult(value=value, encoding=states, primal_value=value, primal_measurement=measurement)

    @staticmethod
    def storable_info(family: Sequence[StateVec], model: GpModel, tol: float = None) -> StorableInfoResult:
        """Both programs; ``gap`` is |primal - dual|."""
        dual = InfoController.storable_info_dual(family, model, tol)
        primal = InfoController.storable_info_primal(family, model, tol)
        dual.primal_value = primal.primal_value
        dual.primal_measurement = primal.primal_measurement
        if dual.gap > settings.IDENTITY_TOL:
            logger.warning("%s: storable information duality gap %.3e", model.name, dual.gap)
        return dual

    @staticmethod
    def pairwise_distinguishable(states: Sequence[StateVec], model: GpModel, tol: float = None) -> np.ndarray:
        targets = _targets(states, model)
        n = len(states)
        adjacency = np.zeros((n, n), dtype=bool)
        for i, j in itertools.combinations(range(n), 2):
            ok = _perfect_discrimination(targets[[i, j]], model, tol) is not None
            adjacency[i, j] = adjacency[j, i] = ok
        return adjacency

    @staticmethod
    def distinguishable_number(family: Sequence[StateVec], model: GpModel, tol: float = None,
                               n_value: float = None) -> DistinguishabilityResult:
        """Largest perfectly distinguishable subset of the extreme points of conv(F)."""
        states = _distinct(family)
        if not states:
            raise PointOutsideModel("The family must not be empty")
        for s in states:
            require_state(s, model, "family member", tol)
        if any(model.vertex_index(s) is None for s in states):
            keep = _extreme_indices(np.array([s.lifted[1:] for s in states]), tol)
            states = [states[i] for i in keep]

        targets = _targets(states, model)
        if len(states) == 1:
            return DistinguishabilityResult(count=1, states=states, measurement=Measurement((model.unit,)),
                                            indices=(0,))
        if n_value is None:
            n_value = InfoController.storable_info_dual(states, model, tol).value
        upper = min(len(states), int(math.floor(n_value + 1e-9)))

        adjacency = None
        for size in range(upper, 1, -1):
            if size == 2 and adjacency is None:
                combos = itertools.combinations(range(len(states)), 2)
            else:
                if adjacency is None:
                    adjacency = InfoController.pairwise_distinguishable(states, model, tol)
                combos = _cliques(adjacency, size)
            for subset in combos:
                effects = _perfect_discrimination(targets[list(subset)], model, tol)
                if effects is None:
                    continue
                failure = model.unit - EffectFunc(np.sum([e.coeffs for e in effects], axis=0))
                labels = tuple(str(i) for i in subset) + ("fail",)
                logger.info("%s: distinguishable number %d", model.name, size)
                return DistinguishabilityResult(count=size, states=[states[i] for i in subset],
                                                measurement=Measurement(tuple(effects) + (failure,), labels),
                                                indices=tuple(subset))
        logger.warning("%s: no distinguishable pair found", model.name)
        return DistinguishabilityResult(count=1, states=states[:1], measurement=Measurement((model.unit,)), indices=(0,))

    @staticmethod
    def capacity_lower_bound(model: GpModel, subset_cap: int = None, ba_tol: float = None, ba_max_iter: int = None,
                             seeds: Sequence[int] = None, strict: bool = False, tol: float = None,
                             distinguishable: DistinguishabilityResult = None,
                             budget: int = None) -> CapacityEstimate:
        """Best Blahut-Arimoto capacity over vertex-subset encodings and their decoding measurements."""
        subset_cap = settings.SUBSET_CAP if subset_cap is None else subset_cap
        seeds = settings.CAPACITY_SEEDS if seeds is None else seeds
        budget = settings.CAPACITY_SUBSET_BUDGET if budget is None else budget
        k = model.n_vertices
        states = model.states

        if distinguishable is None:
            distinguishable = InfoController.distinguishable_number(states, model, tol)
        encodings: List[Tuple[Tuple[int, ...], List[Measurement]]] = [
            (tuple(model.vertex_index(s) for s in distinguishable.states), [distinguishable.measurement])
        ]
        mode, subsets = capacity_subsets(k, subset_cap, budget, seeds)
        logger.info("%s: capacity search is %s over %d vertex subsets of size <= %d",
                    model.name, mode, len(subsets), min(k, subset_cap))

        full = InfoController.storable_info_primal(states, model, tol).primal_measurement
        for subset in subsets:
            _, effects, failure = optimal_discrimination(model.vertices[list(subset)], np.ones(len(subset)), model, tol)
            own = Measurement(tuple(effects) + (failure,), tuple(str(i) for i in subset) + ("fail",))
            encodings.append((subset, [own, full]))

        best: Optional[CapacityEstimate] = None
        evaluated = 0
        for subset, measurements in encodings:
            for measurement in measurements:
                channel = _channel([states[i] for i in subset], measurement)
                try:
                    result = blahut_arimoto(channel, ba_tol, ba_max_iter, strict=strict)
                except ConvergenceFailure as exc:
                    if strict:
                        raise
                    logger.warning("%s: skipping encoding %s (%s)", model.name, subset, exc.detail)
                    continue
                evaluated += 1
                if not math.isfinite(result.bits):
                    continue
                if best is None or result.bits > best.lower_bound + 1e-12:
                    best = CapacityEstimate(lower_bound=result.bits, best_encoding=subset,
                                            best_measurement=measurement, ba_iterations=result.iterations,
                                            converged=result.converged)
        if best is None:
            raise ConvergenceFailure(f"{model.name}: no capacity candidate produced a finite value")
        best.candidates = evaluated
        best.mode = mode
        logger.info("%s: capacity lower bound %.10f bits over %d candidates", model.name, best.lower_bound, evaluated)
        return best

    @staticmethod
    def inequality_report(model: GpModel, tol: float = None) -> InequalityReport:
        """The chain 2 <= d <= 2^C <= n <= D + 1 with C replaced by its lower bound."""
        storable = InfoController.storable_info(model.states, model, tol)
        distinguishable = InfoController.distinguishable_number(model.states, model, tol, n_value=storable.value)
        capacity = InfoController.capacity_lower_bound(model, tol=tol, distinguishable=distinguishable)
        n, d, two_c = storable.value, distinguishable.count, 2.0 ** capacity.lower_bound
        bound = model.dim + 1
        verdicts = {
            "d_at_least_two": d >= 2,
            "d_below_capacity": d <= two_c + settings.IDENTITY_TOL,
            "capacity_below_n": two_c <= n + settings.IDENTITY_TOL,
            "n_below_dimension": n <= bound + 1e-9,
        }
        for name, ok in verdicts.items():
            if not ok:
                logger.warning("%s: chain verdict %s failed (d=%d, 2^C=%.10f, n=%.10f)", model.name, name, d, two_c, n)
        return InequalityReport(d=d, two_c=two_c, n=n, dim_bound=bound, verdicts=verdicts,
                                saturated=abs(n - bound) <= settings.IDENTITY_TOL, storable=storable,
                                distinguishable=distinguishable, capacity=capacity)
