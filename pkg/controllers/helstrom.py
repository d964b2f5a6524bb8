"""
Helstrom controller: weighted storable information, optimal success
probability and the equivalent-ensemble (Helstrom family) certificate
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from controllers.info import dominating_element, optimal_discrimination
from helpers.exceptions import DegenerateConjugate, InfeasibleFamily, InvalidEnsemble
from models.gp_model import GpModel, Measurement, StateVec, as_lifted, is_state, require_state

logger = logging.getLogger(__name__)


@dataclass
class Ensemble:
    states: List[StateVec]
    weights: np.ndarray

    def __post_init__(self):
        self.states = list(self.states)
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if len(self.states) == 0:
            raise InvalidEnsemble("An ensemble needs at least one state")
        if self.weights.shape != (len(self.states),):
            raise InvalidEnsemble(f"{len(self.states)} states but {self.weights.size} weights")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise InvalidEnsemble("Weights must be finite and nonnegative")
        for s in self.states:
            if not s.is_normalized():
                raise InvalidEnsemble(f"Ensemble state has unit pairing {s.pairing}")

    @classmethod
    def from_vertices(cls, model: GpModel, indices: Sequence[int], weights) -> "Ensemble":
        return cls([model.vertex(i) for i in indices], weights)

    @property
    def is_probability(self) -> bool:
        return abs(self.weights.sum() - 1.0) <= 1e-9

    def __len__(self):
        return len(self.states)


@dataclass
class HelstromFamily:
    ratio: float
    common_state: StateVec
    conjugates: List[StateVec]
    tilde_weights: np.ndarray
    degenerate: Tuple[bool, ...] = ()


@dataclass
class FamilyVerdict:
    condition_i: bool
    condition_ii: bool
    conjugates_in_model: bool
    success_prob: float
    ratio: float
    weak_bound: bool
    optimal: Optional[bool] = None
    strict: bool = True
    deviations: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        checks = [self.condition_i, self.condition_ii, self.conjugates_in_model, self.weak_bound]
        if self.strict:
            checks.append(bool(self.optimal))
        return all(checks)


def _require_probability(ensemble: Ensemble):
    if not ensemble.is_probability:
        raise InvalidEnsemble(f"Weights sum to {ensemble.weights.sum()}, a probability distribution is required")


class HelstromController:

    @staticmethod
    def weighted_n(states: Sequence[StateVec], weights, model: GpModel, tol: float = None) -> Tuple[float, StateVec]:
        """min <xi, u> over cone elements with xi >= q_s s for every member."""
        ensemble = Ensemble(states, weights)
        for s in ensemble.states:
            require_state(s, model, "ensemble state", tol)
        targets = np.array([q * s.lifted for s, q in zip(ensemble.states, ensemble.weights)])
        xi = dominating_element(targets, model, tol=tol)
        return float(xi[0]), StateVec(xi)

    @staticmethod
    def success_prob(ensemble: Ensemble, model: GpModel, tol: float = None) -> Tuple[float, Measurement]:
        """Optimal success probability P_S and the decoding measurement (last outcome is failure)."""
        _require_probability(ensemble)
        for s in ensemble.states:
            require_state(s, model, "ensemble state", tol)
        targets = np.array([s.lifted for s in ensemble.states])
        value, effects, failure = optimal_discrimination(targets, ensemble.weights, model, tol)
        labels = tuple(str(i) for i in range(len(effects))) + ("fail",)
        return value, Measurement(tuple(effects) + (failure,), labels)

    @staticmethod
    def build_family(ensemble: Ensemble, xi, model: GpModel, tol: float = None) -> HelstromFamily:
        """Family from any xi dominating every p_i s_i: s_0 = xi/p, t_i = (xi - p_i s_i)/(p - p_i)."""
        tol = settings.LP_TOL if tol is None else tol
        xi = as_lifted(xi, model)
        p = float(xi[0])
        if p <= 0:
            raise InfeasibleFamily("Dominating element has non-positive unit pairing")
        common = StateVec(xi / p)
        conjugates, degenerate = [], []
        for s, weight in zip(ensemble.states, ensemble.weights):
            gap = p - weight
            if gap < -tol:
                raise InfeasibleFamily(f"Ratio {p} lies below the prior weight {weight}")
            if gap <= tol:
                if common.distance(s) > settings.IDENTITY_TOL:
                    raise DegenerateConjugate("Ratio equals a prior weight but the common state differs from it")
                conjugates.append(common)
                degenerate.append(True)
                continue
            conjugates.append(StateVec((xi - weight * s.lifted) / gap))
            degenerate.append(False)
        return HelstromFamily(ratio=p, common_state=common, conjugates=conjugates,
                              tilde_weights=ensemble.weights / p, degenerate=tuple(degenerate))

    @staticmethod
    def helstrom_family(ensemble: Ensemble, model: GpModel, tol: float = None) -> HelstromFamily:
        """Family whose ratio is the optimal success probability."""
        _require_probability(ensemble)
        value, xi = HelstromController.weighted_n(ensemble.states, ensemble.weights, model, tol)
        family = HelstromController.build_family(ensemble, xi, model, tol)
        if any(family.degenerate):
            logger.info("Helstrom family has degenerate conjugates at %s",
                        [i for i, flag in enumerate(family.degenerate) if flag])
        ok_i, ok_ii, in_model, _ = HelstromController._conditions(family, ensemble, model, tol)
        if not (ok_i and ok_ii and in_model):
            raise InfeasibleFamily("Constructed family violates the equivalent-ensemble conditions")
        logger.info("Helstrom ratio %.10f", value)
        return family

    @staticmethod
    def _conditions(family: HelstromFamily, ensemble: Ensemble, model: GpModel, tol: float = None):
        tol_family = settings.FAMILY_TOL
        tilde = np.asarray(family.tilde_weights, dtype=float)
        scale = max(1.0, float(np.max(np.abs(family.common_state.lifted))))
        ratio_dev = float(np.max(np.abs(ensemble.weights - family.ratio * tilde)))
        ok_i = ratio_dev <= tol_family and bool(np.all(tilde >= -tol_family)) and bool(np.all(tilde <= 1 + tol_family))
        mix_dev = 0.0
        for s, t, w in zip(ensemble.states, family.conjugates, tilde):
            mixed = w * s.lifted + (1.0 - w) * t.lifted
            mix_dev = max(mix_dev, float(np.max(np.abs(mixed - family.common_state.lifted))))
        ok_ii = mix_dev <= tol_family * scale
        in_model = all(is_state(t, model, tol) for t in family.conjugates)
        return ok_i, ok_ii, in_model, {"condition_i": ratio_dev, "condition_ii": mix_dev}

    @staticmethod
    def verify_family(family: HelstromFamily, ensemble: Ensemble, model: GpModel, strict: bool = True,
                      tol: float = None) -> FamilyVerdict:
        """Conditions (i)-(ii), conjugate membership, and the ratio against P_S.

        ``strict`` demands ratio = P_S; otherwise only the weak bound P_S <= ratio is checked.
        """
        ok_i, ok_ii, in_model, deviations = HelstromController._conditions(family, ensemble, model, tol)
        success, _ = HelstromController.success_prob(ensemble, model, tol)
        weak = success <= family.ratio + settings.HELSTROM_TOL
        optimal = abs(family.ratio - success) <= settings.HELSTROM_TOL if strict else None
        deviations["ratio"] = abs(family.ratio - success)
        verdict = FamilyVerdict(condition_i=ok_i, condition_ii=ok_ii, conjugates_in_model=in_model,
                                success_prob=success, ratio=family.ratio, weak_bound=weak, optimal=optimal,
                                strict=strict, deviations=deviations)
        if not verdict.passed:
            logger.warning("Helstrom family failed verification: %s", deviations)
        return verdict
