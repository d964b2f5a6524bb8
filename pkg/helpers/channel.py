"""
Classical channel helpers: divergences in bits and Blahut-Arimoto capacity
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

from config.settings import settings
from helpers.exceptions import ConvergenceFailure

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)
# smallest input mass kept between Blahut-Arimoto updates
_MASS_FLOOR = 1e-300


@dataclass
class ChannelCapacity:
    bits: float
    distribution: np.ndarray
    iterations: int
    converged: bool
    upper_bits: float


def _distribution(values, label: str) -> np.ndarray:
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0 or np.any(values < -1e-12) or abs(values.sum() - 1.0) > 1e-9:
        raise ValueError(f"{label} must be a probability vector")
    return np.clip(values, 0.0, None)


def kl_divergence(p, q) -> float:
    """D(p||q) in bits; +inf when p puts mass where q has none."""
    p, q = _distribution(p, "p"), _distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q should have the same length")
    return float(np.sum(rel_entr(p, q)) / _LN2)


def distribution_dmax(p, q) -> float:
    """D_max(p||q) = log2 max_i p_i/q_i in bits."""
    p, q = _distribution(p, "p"), _distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q should have the same length")
    support = p > 0
    if np.any(q[support] == 0):
        return math.inf
    return float(np.log2(np.max(p[support] / q[support])))


def channel_matrix(rows) -> np.ndarray:
    """Row-stochastic W[x, y] = P(y|x); round-off negatives are clipped and rows renormalised."""
    w = np.atleast_2d(np.asarray(rows, dtype=float))
    if w.ndim != 2 or w.size == 0:
        raise ValueError("Channel must be a non-empty matrix")
    if np.any(w < -1e-7) or np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-7):
        raise ValueError("Channel rows must be probability vectors")
    w = np.clip(w, 0.0, None)
    return w / w.sum(axis=1, keepdims=True)


def _row_divergences(w: np.ndarray, output: np.ndarray) -> np.ndarray:
    """D(W_x||q) per row over the outputs q reaches; 0·log 0 = 0 and rows reaching a dead output get +inf."""
    live = output > 0
    divergences = np.sum(rel_entr(w[:, live], output[None, live]), axis=1) / _LN2
    dead = np.any(w[:, ~live] > 0, axis=1)
    divergences[dead] = np.inf
    return divergences


def blahut_arimoto(channel, tol: float = None, max_iter: int = None, strict: bool = False) -> ChannelCapacity:
    """
    Capacity of a discrete memoryless channel in bits.

    Starts from the uniform input law and stops once the gap between
    max_x D(W_x||q) and I(p) drops below ``tol``; the returned value is I(p),
    a lower bound on the capacity at every iterate. Input masses are floored
    at ``_MASS_FLOOR`` so that every output a row reaches keeps positive
    probability. A non-finite iterate raises ConvergenceFailure; when the cap
    is hit the best iterate seen is reported.
    """
    tol = settings.BA_TOL if tol is None else tol
    max_iter = settings.BA_MAX_ITER if max_iter is None else max_iter
    w = channel_matrix(channel)
    p = np.full(w.shape[0], 1.0 / w.shape[0])
    best = None

    for iteration in range(max_iter + 1):
        output = p @ w
        divergences = _row_divergences(w, output)
        if not np.all(np.isfinite(divergences)):
            raise ConvergenceFailure(f"Blahut-Arimoto produced a non-finite divergence at iteration {iteration}")
        information = float(p @ divergences)
        upper = float(np.max(divergences))
        if not (math.isfinite(information) and math.isfinite(upper)):
            raise ConvergenceFailure(f"Blahut-Arimoto produced a non-finite iterate at iteration {iteration}")
        if best is None or information > best[0]:
            best = (information, p.copy(), upper)
        if upper - information < tol:
            return ChannelCapacity(bits=max(information, 0.0), distribution=p, iterations=iteration,
                                   converged=True, upper_bits=upper)
        if iteration == max_iter:
            break
        p = np.maximum(p * np.exp2(divergences - upper), _MASS_FLOOR)
        p /= p.sum()

    information, p, upper = best
    message = f"Blahut-Arimoto did not reach tolerance {tol} in {max_iter} iterations (gap {upper - information:.3e})"
    if strict:
        raise ConvergenceFailure(message)
    logger.warning(message)
    return ChannelCapacity(bits=max(information, 0.0), distribution=p, iterations=max_iter,
                           converged=False, upper_bits=upper)
