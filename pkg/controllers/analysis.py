"""
Analysis controller: reports, parameter sweeps and the verification suites
"""
import csv
import io
import logging
import time
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from controllers.geometry import GeometryController
from controllers.helstrom import Ensemble, HelstromController
from controllers.info import InfoController
from controllers.zoo import ZooController
from helpers.exceptions import GpException, PointOutsideModel, UnknownModel
from models.gp_model import EffectFunc, GpModel, StateVec, base_norm, order_norm, random_model
from models.schemas import (
    AnalysisReport,
    CheckResult,
    DmaxReport,
    HelstromReport,
    MinkowskiReport,
    ModelIdentity,
    StorableReport,
    VerifySummary,
)
from models.storage import ModelStore

logger = logging.getLogger(__name__)

SUITES = ("duality", "theorem1", "chain", "helstrom", "continuity")
SWEEP_FAMILIES = ("polygon", "simplex", "hypercube", "ball")
SWEEP_HEADER = ("parameter", "m", "n", "d", "c_lb")
CONTINUITY_TUPLES = 10


def _affine(state: StateVec) -> List[float]:
    return state.affine.tolist()


def _random_effect(model: GpModel, rng: np.random.Generator) -> EffectFunc:
    direction = np.concatenate([[0.0], rng.standard_normal(model.dim)])
    values = model.vertices @ direction
    lo, hi = float(values.min()), float(values.max())
    coeffs = direction / (hi - lo)
    coeffs[0] -= lo / (hi - lo)
    return EffectFunc(coeffs)


def _random_state(model: GpModel, rng: np.random.Generator) -> StateVec:
    return model.mixture(rng.dirichlet(np.ones(model.n_vertices)))


class AnalysisController:

    @staticmethod
    def identity(model: GpModel) -> ModelIdentity:
        return ModelIdentity(name=model.name, hash=ModelStore.model_hash(model), dim=model.dim,
                             n_vertices=model.n_vertices)

    @staticmethod
    def tolerances() -> Dict[str, float]:
        return {
            "lp": settings.LP_TOL,
            "identity": settings.IDENTITY_TOL,
            "cross_check": settings.CROSS_CHECK_TOL,
            "interior": settings.INTERIOR_TOL,
            "blahut_arimoto": settings.BA_TOL,
        }

    @staticmethod
    def analyze(model: GpModel, timing: bool = False, tol: float = None) -> AnalysisReport:
        """m, n (both programs), d, the capacity lower bound and every verdict for one model."""
        started = time.perf_counter()
        chain = InfoController.inequality_report(model, tol)
        storable = chain.storable
        m = storable.value - 1.0
        distortion = GeometryController.max_distortion(storable.dual_state, model, tol)

        deviation = abs(distortion.value - m)
        checks = [
            CheckResult(name="minkowski_identity", passed=deviation <= settings.IDENTITY_TOL, value=deviation,
                        tolerance=settings.IDENTITY_TOL, detail="max distortion at the critical state equals n - 1"),
            CheckResult(name="strong_duality", passed=storable.gap <= settings.IDENTITY_TOL, value=storable.gap,
                        tolerance=settings.IDENTITY_TOL, detail="|primal - dual| storable information"),
        ]
        for name, ok in chain.verdicts.items():
            checks.append(CheckResult(name=name, passed=ok))
        passed = all(c.passed for c in checks)
        if not passed:
            logger.warning("%s: %s failed", model.name, [c.name for c in checks if not c.passed])

        return AnalysisReport(
            tool=settings.APP_NAME,
            version=settings.APP_VERSION,
            model=AnalysisController.identity(model),
            tolerances=AnalysisController.tolerances(),
            m=m,
            n=storable.value,
            n_primal=storable.primal_value,
            n_dual=storable.value,
            gap=storable.gap,
            d=chain.d,
            capacity_lb=chain.capacity.lower_bound,
            capacity_converged=chain.capacity.converged,
            point_symmetric=abs(m - 1.0) <= settings.IDENTITY_TOL,
            critical_state=_affine(storable.dual_state),
            checks=checks,
            passed=passed,
            wall_clock=round(time.perf_counter() - started, 6) if timing else None,
        )

    @staticmethod
    def storable(model: GpModel, family: Optional[Sequence[int]] = None, tol: float = None) -> StorableReport:
        indices = list(range(model.n_vertices)) if not family else [int(i) for i in family]
        for i in indices:
            if not 0 <= i < model.n_vertices:
                raise PointOutsideModel(f"Vertex index {i} out of range for {model.name}")
        result = InfoController.storable_info([model.vertex(i) for i in indices], model, tol)
        return StorableReport(model=AnalysisController.identity(model), family=indices, n=result.value,
                              n_primal=result.primal_value, gap=result.gap,
                              critical_state=_affine(result.dual_state),
                              dominating_element=result.dual_xi.lifted.tolist())

    @staticmethod
    def minkowski(model: GpModel, samples: int = 0, seed: int = 0, tol: float = None) -> MinkowskiReport:
        result = GeometryController.minkowski_measure(model, samples, seed, tol)
        distortion = GeometryController.max_distortion(result.critical_state, model, tol)
        return MinkowskiReport(model=AnalysisController.identity(model), m=result.measure,
                               critical_state=_affine(result.critical_state),
                               boundariness=distortion.boundariness, witness_index=distortion.witness_index,
                               antipode=_affine(distortion.antipode),
                               point_symmetric=abs(result.measure - 1.0) <= settings.IDENTITY_TOL,
                               critical_samples=[_affine(s) for s in result.critical_samples])

    @staticmethod
    def dmax(model: GpModel, s1: StateVec, s2: StateVec, tol: float = None) -> DmaxReport:
        value = InfoController.dmax(s1, s2, model, tol)
        return DmaxReport(model=AnalysisController.identity(model), s1=_affine(s1), s2=_affine(s2),
                          finite=value.finite, ratio=value.ratio if value.finite else None, bits=value.to_json())

    @staticmethod
    def helstrom(model: GpModel, ensemble: Ensemble, tol: float = None) -> HelstromReport:
        family = HelstromController.helstrom_family(ensemble, model, tol)
        verdict = HelstromController.verify_family(family, ensemble, model, strict=True, tol=tol)
        checks = [
            CheckResult(name="condition_i", passed=verdict.condition_i,
                        value=verdict.deviations["condition_i"], tolerance=settings.FAMILY_TOL),
            CheckResult(name="condition_ii", passed=verdict.condition_ii,
                        value=verdict.deviations["condition_ii"], tolerance=settings.FAMILY_TOL),
            CheckResult(name="conjugates_in_model", passed=verdict.conjugates_in_model),
            CheckResult(name="weak_bound", passed=verdict.weak_bound),
            CheckResult(name="ratio_is_success_probability", passed=bool(verdict.optimal),
                        value=verdict.deviations["ratio"], tolerance=settings.HELSTROM_TOL),
        ]
        return HelstromReport(tool=settings.APP_NAME, version=settings.APP_VERSION,
                              model=AnalysisController.identity(model), weights=ensemble.weights.tolist(),
                              ratio=family.ratio, success_prob=verdict.success_prob,
                              common_state=_affine(family.common_state),
                              conjugates=[_affine(t) for t in family.conjugates],
                              tilde_weights=np.asarray(family.tilde_weights).tolist(),
                              degenerate=list(family.degenerate), checks=checks, passed=verdict.passed)

    # Sweeps

    @staticmethod
    def sweep_model(family: str, parameter: int, dim: int = 3, seed: int = 0) -> GpModel:
        if family == "polygon":
            return ZooController.regular_polygon(parameter)
        if family == "simplex":
            return ZooController.simplex(parameter)
        if family == "hypercube":
            return ZooController.hypercube(parameter)
        if family == "ball":
            return ZooController.ball_approx(dim, parameter, seed)
        raise UnknownModel(f"Unknown sweep family '{family}'")

    @staticmethod
    def sweep(family: str, start: int, stop: int, dim: int = 3, seed: int = 0, tol: float = None) -> List[dict]:
        """One row (parameter, m, n, d, c_lb) per parameter in [start, stop]."""
        if family not in SWEEP_FAMILIES:
            raise UnknownModel(f"Unknown sweep family '{family}'")
        if stop < start:
            raise ValueError("sweep range is empty")
        rows = []
        for parameter in range(start, stop + 1):
            model = AnalysisController.sweep_model(family, parameter, dim, seed)
            chain = InfoController.inequality_report(model, tol)
            rows.append({"parameter": parameter, "m": chain.n - 1.0, "n": chain.n, "d": chain.d,
                         "c_lb": chain.capacity.lower_bound})
            logger.info("sweep %s %d: m=%.10f", family, parameter, chain.n - 1.0)
        return rows

    @staticmethod
    def sweep_csv(rows: List[dict]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow([row["parameter"], f"{row['m']:.12f}", f"{row['n']:.12f}", row["d"],
                             f"{row['c_lb']:.12f}"])
        return buffer.getvalue()

    # Verification suites

    @staticmethod
    def random_instances(count: int, seed: int) -> Iterator[GpModel]:
        """Seeded random models with 2 <= D <= 4 and at most 30 vertices."""
        rng = np.random.default_rng(seed)
        for _ in range(count):
            dim = int(rng.integers(2, 5))
            k = int(rng.integers(dim + 2, min(dim + 9, 30) + 1))
            yield random_model(dim, k, int(rng.integers(2 ** 31)))

    @staticmethod
    def verify(suite: str, count: int = 20, seed: int = 0, zoo: bool = False,
               tol: float = None) -> List[VerifySummary]:
        """Run one suite (or "all") over seeded random models or over the zoo."""
        names = SUITES if suite == "all" else (suite,)
        for name in names:
            if name not in SUITES:
                raise UnknownModel(f"Unknown verification suite '{suite}'")
        summaries = []
        for name in names:
            models = ([ZooController.build(n) for n in ZooController.known_models()] if zoo
                      else list(AnalysisController.random_instances(count, seed)))
            summaries.append(AnalysisController._run_suite(name, models, seed, count, tol))
        return summaries

    @staticmethod
    def _run_suite(suite: str, models: List[GpModel], seed: int, count: int, tol: float = None) -> VerifySummary:
        check: Callable[[GpModel, np.random.Generator, float], Tuple[bool, float]] = _SUITE_CHECKS[suite]
        rng = np.random.default_rng(seed)
        checks, worst = [], 0.0
        for model in models:
            try:
                ok, deviation = check(model, rng, tol)
                detail = ""
            except GpException as exc:
                ok, deviation, detail = False, float("inf"), exc.detail
            worst = max(worst, deviation)
            checks.append(CheckResult(name=model.name, passed=ok, value=deviation, detail=detail))
        passed = all(c.passed for c in checks)
        if not passed:
            logger.warning("verify %s: %d of %d instances failed", suite, sum(not c.passed for c in checks),
                           len(checks))
        return VerifySummary(suite=suite, seed=seed, count=count, instances=len(checks), max_deviation=worst,
                             checks=checks, passed=passed)


def _check_duality(model: GpModel, rng: np.random.Generator, tol: float = None) -> Tuple[bool, float]:
    result = InfoController.storable_info(model.states, model, tol)
    return result.gap <= settings.IDENTITY_TOL, result.gap


def _check_measure_identity(model: GpModel, rng: np.random.Generator, tol: float = None) -> Tuple[bool, float]:
    result = InfoController.storable_info_dual(model.states, model, tol)
    distortion = GeometryController.max_distortion(result.dual_state, model, tol)
    deviation = abs(distortion.value - (result.value - 1.0))
    return deviation <= settings.IDENTITY_TOL, deviation


def _check_chain(model: GpModel, rng: np.random.Generator, tol: float = None) -> Tuple[bool, float]:
    report = InfoController.inequality_report(model, tol)
    excess = max(0.0, report.d - report.two_c, report.two_c - report.n, report.n - report.dim_bound)
    return report.passed, excess


def _check_helstrom(model: GpModel, rng: np.random.Generator, tol: float = None) -> Tuple[bool, float]:
    size = int(rng.integers(1, 7))
    states = [_random_state(model, rng) for _ in range(size)]
    ensemble = Ensemble(states, rng.dirichlet(np.ones(size)))
    family = HelstromController.helstrom_family(ensemble, model, tol)
    verdict = HelstromController.verify_family(family, ensemble, model, strict=True, tol=tol)
    return verdict.passed, verdict.deviations["ratio"]


def _check_continuity(model: GpModel, rng: np.random.Generator, tol: float = None) -> Tuple[bool, float]:
    """|e'(s') - e(s)| <= ||s' - s||_1 + ||e' - e|| for perturbations that stay states and effects."""
    slack = 10 * (settings.LP_TOL if tol is None else tol)
    worst = 0.0
    for _ in range(CONTINUITY_TUPLES):
        s, e = _random_state(model, rng), _random_effect(model, rng)
        eps, delta = rng.uniform(0.0, 0.5, size=2)
        s_moved = s * (1.0 - eps) + _random_state(model, rng) * eps
        e_moved = e * (1.0 - delta) + _random_effect(model, rng) * delta
        lhs = abs(e_moved(s_moved) - e(s))
        rhs = base_norm(s_moved - s, model, tol) + order_norm(e_moved - e, model)
        worst = max(worst, lhs - rhs)
    return worst <= slack, max(0.0, worst)


_SUITE_CHECKS = {
    "duality": _check_duality,
    "theorem1": _check_measure_identity,
    "chain": _check_chain,
    "helstrom": _check_helstrom,
    "continuity": _check_continuity,
}
