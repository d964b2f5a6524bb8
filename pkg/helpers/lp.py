"""
Dense two-phase simplex kernel.

Every quantity in the package is an LP value or an LP feasibility question at
desk scale (tens to a few hundred rows), so the kernel keeps a full dense
tableau. Programs are brought to standard form (``A y = b, y >= 0``) with one
artificial column per row that has no ready slack, phase I drives the
artificials out, and phase II optimises the real objective with artificial
columns barred from re-entering. Float runs then refactorise the final basis,
repair any basic value that drifted below zero with dual simplex pivots, and
read the dual certificate from a fresh solve of ``B^T y = c_B``.

The same code runs over ``float`` arrays and over ``fractions.Fraction`` object
arrays; the latter is the exact re-solve path.
"""
import itertools
import logging
import os
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from config.settings import settings
from helpers.exceptions import MalformedProgram, NumericalFailure

logger = logging.getLogger(__name__)

# tableau entries below this magnitude are flushed to zero after a float pivot
_FLUSH = 1e-13
# lcm(1..16): data whose denominators divide it count as rational input
_RATIONAL_BASE = 720720
# refactorise / repair / re-optimise passes after float phase II
_REFINE_ROUNDS = 3

_dump_counter = itertools.count(1)


class Sense(str, Enum):
    minimize = "minimize"
    maximize = "maximize"


class LpStatus(str, Enum):
    optimal = "Optimal"
    infeasible = "Infeasible"
    unbounded = "Unbounded"


@dataclass
class LinearProgram:
    """min/max objective·x s.t. a_eq x = b_eq, a_ub x <= b_ub, lower <= x <= upper.

    ``lower`` defaults to 0 and ``upper`` to +inf; pass ``-np.inf`` for free variables.
    """

    objective: np.ndarray
    sense: Sense = Sense.minimize
    a_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    a_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        self.a_eq, self.b_eq = _as_rows(self.a_eq, self.b_eq, n)
        self.a_ub, self.b_ub = _as_rows(self.a_ub, self.b_ub, n)
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        self.sense = Sense(self.sense)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    def validate(self):
        """Raise MalformedProgram on dimension mismatch or inconsistent bounds."""
        n = self.n_vars
        if n == 0:
            raise MalformedProgram("Program has no variables")
        for label, a, b in (("equality", self.a_eq, self.b_eq), ("inequality", self.a_ub, self.b_ub)):
            if a.ndim != 2 or a.shape[1] != n:
                raise MalformedProgram(f"{label} rows must have width {n}, got shape {a.shape}")
            if b.shape != (a.shape[0],):
                raise MalformedProgram(f"{label} right-hand side has shape {b.shape}, expected ({a.shape[0]},)")
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise MalformedProgram(f"{label} data must be finite")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise MalformedProgram("Bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            bad = int(np.flatnonzero(self.lower > self.upper)[0])
            raise MalformedProgram(f"Variable {bad} has lower bound above upper bound")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise MalformedProgram("Bounds must not exclude every real value")
        if not np.all(np.isfinite(self.objective)):
            raise MalformedProgram("Objective must be finite")


@dataclass
class LpSolution:
    status: LpStatus
    value: Optional[float] = None
    point: Optional[np.ndarray] = None
    # multipliers for [equality rows, inequality rows, finite upper bounds]:
    # b·dual_point plus the bound offset reproduces ``value``
    dual_point: Optional[np.ndarray] = None
    dual_value: Optional[float] = None
    iterations: int = 0
    exact: bool = False
    # scaled phase-I leftover, set on Infeasible
    residual: Optional[float] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.optimal


def _as_rows(a, b, n):
    if a is None or (b is not None and np.size(b) == 0 and np.size(a) == 0):
        return np.zeros((0, n)), np.zeros(0)
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
    return a, b


def _is_rational(values: np.ndarray) -> bool:
    """Every entry is p/q with q dividing the common base (within float rounding)."""
    scaled = np.asarray(values, dtype=float) * _RATIONAL_BASE
    return bool(np.all(np.abs(scaled - np.round(scaled)) <= 1e-6))


def _exact_array(values: np.ndarray) -> np.ndarray:
    """Fraction object array; rational data are recovered exactly, other floats converted bit-for-bit."""
    values = np.asarray(values, dtype=float)
    rational = _is_rational(values)
    out = np.empty(values.shape, dtype=object)
    flat = out.reshape(-1)
    for i, x in enumerate(values.reshape(-1)):
        flat[i] = Fraction(int(round(x * _RATIONAL_BASE)), _RATIONAL_BASE) if rational else Fraction(float(x))
    return out


def is_rational_program(prob: LinearProgram) -> bool:
    arrays = (prob.objective, prob.a_eq, prob.b_eq, prob.a_ub, prob.b_ub,
              prob.lower[np.isfinite(prob.lower)], prob.upper[np.isfinite(prob.upper)])
    return all(_is_rational(a) for a in arrays)


@dataclass
class _StandardForm:
    a: np.ndarray          # (m, N) structural columns
    b: np.ndarray          # (m,)
    c: np.ndarray          # (N,) minimisation costs
    c0: object             # objective constant from bound shifts
    n_eq: int
    n_rows_ub: int         # inequality rows of the program
    transform: np.ndarray  # x = shift + transform @ y
    shift: np.ndarray


def _standardize(prob: LinearProgram, exact: bool) -> _StandardForm:
    n = prob.n_vars
    columns = []
    shift = [0.0] * n
    bound_rows = []
    for j in range(n):
        lo, hi = prob.lower[j], prob.upper[j]
        if np.isfinite(lo):
            shift[j] = lo
            columns.append((j, 1))
            if np.isfinite(hi):
                bound_rows.append((len(columns) - 1, lo, hi))
        elif np.isfinite(hi):
            shift[j] = hi
            columns.append((j, -1))
        else:
            columns.append((j, 1))
            columns.append((j, -1))

    conv = _exact_array if exact else (lambda v: np.asarray(v, dtype=float))
    dtype = object if exact else float
    big_n = len(columns)
    transform = np.zeros((n, big_n), dtype=dtype)
    for k, (j, coef) in enumerate(columns):
        transform[j, k] = coef
    shift_arr = conv(np.asarray(shift, dtype=float))

    objective = conv(prob.objective)
    a_eq, b_eq = conv(prob.a_eq), conv(prob.b_eq)
    a_ub, b_ub = conv(prob.a_ub), conv(prob.b_ub)

    c = objective @ transform
    c0 = objective @ shift_arr
    if prob.sense == Sense.maximize:
        c, c0 = -c, -c0

    rows_a = [a_eq @ transform, a_ub @ transform]
    rows_b = [b_eq - a_eq @ shift_arr, b_ub - a_ub @ shift_arr]
    if bound_rows:
        bound_a = np.zeros((len(bound_rows), big_n), dtype=dtype)
        bound_b = (conv(np.asarray([hi for _, _, hi in bound_rows], dtype=float))
                   - conv(np.asarray([lo for _, lo, _ in bound_rows], dtype=float)))
        for i, (k, _, _) in enumerate(bound_rows):
            bound_a[i, k] = 1
        rows_a.append(bound_a)
        rows_b.append(bound_b)

    a = np.vstack([r.reshape(-1, big_n) for r in rows_a]) if rows_a else np.zeros((0, big_n), dtype=dtype)
    b = np.concatenate(rows_b)
    return _StandardForm(a=a, b=b, c=c, c0=c0, n_eq=prob.a_eq.shape[0],
                         n_rows_ub=prob.a_ub.shape[0], transform=transform, shift=shift_arr)


def _pivot(tableau: np.ndarray, row: int, col: int, exact: bool):
    tableau[row, :] = tableau[row, :] / tableau[row, col]
    column = tableau[:, col].copy()
    column[row] = 0
    tableau -= np.outer(column, tableau[row, :])
    if not exact:
        tableau[np.abs(tableau) < _FLUSH] = 0.0


def _leaving_row(column, rhs, basis, tol, exact, bland) -> Optional[int]:
    """Ratio test over the rows of ``column``; None when the column is unbounded.

    Exact and Bland steps take the minimum ratio with ties broken by the lowest
    basic index. Float steps use the Harris two-pass rule: every row bound is
    loosened by ``tol``, and among the rows inside the loosened step the largest
    pivot wins.
    """
    if exact:
        rows = np.flatnonzero(column > 0)
        if rows.size == 0:
            return None
        ratios = [rhs[r] / column[r] for r in rows]
        best = min(ratios)
        return int(min((r for r, q in zip(rows, ratios) if q == best), key=lambda r: basis[r]))

    pivot_tol = tol * max(1.0, float(np.max(np.abs(column), initial=0.0)))
    rows = np.flatnonzero(column > pivot_tol)
    if rows.size == 0:
        return None
    ratios = rhs[rows] / column[rows]
    if bland:
        ratios = np.maximum(ratios, 0.0)
        ties = rows[ratios <= ratios.min() + tol]
        return int(min(ties, key=lambda r: basis[r]))
    bound = np.min((rhs[rows] + tol) / column[rows])
    within = rows[ratios <= bound]
    return int(within[np.argmax(column[within])])


def _run_simplex(tableau, basis, allowed, tol, max_iter, exact, phase, iterations):
    """Pivot until optimal or unbounded; returns (status, iterations used so far)."""
    m = tableau.shape[0] - 1
    streak = 0
    while True:
        if iterations >= max_iter:
            raise NumericalFailure(
                f"Simplex exceeded the iteration cap ({max_iter}) in phase {phase}; "
                "retry with a perturbation or the exact path")
        reduced = tableau[-1, :-1]
        candidates = np.flatnonzero(allowed & (reduced < -tol))
        if candidates.size == 0:
            return "optimal", iterations
        bland = streak >= settings.LP_DEGENERATE_STREAK
        if bland:
            entering = int(candidates[0])
        else:
            entering = int(min(candidates, key=lambda j: (reduced[j], j)))
        column = tableau[:m, entering]
        leaving = _leaving_row(column, tableau[:m, -1], basis, tol, exact, bland)
        if leaving is None:
            return "unbounded", iterations
        step = tableau[leaving, -1] / column[leaving]
        streak = streak + 1 if step <= tol else 0
        _pivot(tableau, leaving, entering, exact)
        basis[leaving] = entering
        iterations += 1


def _refactor(tableau, original, costs, basis) -> bool:
    """Rebuild the float tableau from the original rows and a fresh factorisation of the basis."""
    m = tableau.shape[0] - 1
    if m == 0:
        return True
    try:
        rows = np.linalg.solve(original[:, basis], original)
    except np.linalg.LinAlgError:
        logger.debug("Basis matrix is singular; keeping the updated tableau")
        return False
    if not np.all(np.isfinite(rows)):
        return False
    rows[:, basis] = np.eye(m)
    rows[np.abs(rows) < _FLUSH] = 0.0
    tableau[:m, :] = rows
    tableau[-1, :] = costs - costs[basis] @ rows
    tableau[-1, basis] = 0.0
    return True


def _restore_feasibility(tableau, basis, allowed, tol, max_iter, iterations) -> int:
    """Dual simplex pivots until every basic value is >= -tol; reduced costs stay nonnegative."""
    m = tableau.shape[0] - 1
    while m:
        rhs = tableau[:m, -1]
        row = int(np.argmin(rhs))
        if rhs[row] >= -tol:
            break
        if iterations >= max_iter:
            raise NumericalFailure(f"Simplex exceeded the iteration cap ({max_iter}) restoring feasibility")
        entries = tableau[row, :-1]
        candidates = np.flatnonzero(allowed & (entries < -tol))
        if candidates.size == 0:
            raise NumericalFailure(f"Basic value {rhs[row]:.3e} cannot be restored to feasibility")
        ratios = np.maximum(tableau[-1, candidates], 0.0) / -entries[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + tol]
        entering = int(ties[np.argmin(entries[ties])])
        _pivot(tableau, row, entering, False)
        basis[row] = entering
        iterations += 1
    return iterations


def _solve(prob: LinearProgram, tol: float, exact: bool) -> LpSolution:
    std = _standardize(prob, exact)
    dtype = object if exact else float
    m, big_n = std.a.shape
    n_ub_all = m - std.n_eq
    zero = Fraction(0) if exact else 0.0
    tol_cmp = zero if exact else tol

    sign = np.array([-1 if x < 0 else 1 for x in std.b], dtype=int)
    slack = np.zeros((m, n_ub_all), dtype=dtype)
    for i in range(n_ub_all):
        slack[std.n_eq + i, i] = 1
    body = np.hstack([std.a, slack]) * sign[:, None]
    rhs = std.b * sign

    needs_artificial = [r for r in range(m) if r < std.n_eq or sign[r] < 0]
    n_art = len(needs_artificial)
    art_start = big_n + n_ub_all
    width = art_start + n_art

    tableau = np.zeros((m + 1, width + 1), dtype=dtype)
    tableau[:m, :art_start] = body
    tableau[:m, -1] = rhs
    initial_basis = []
    art_of_row = {r: art_start + i for i, r in enumerate(needs_artificial)}
    for r in range(m):
        if r in art_of_row:
            tableau[r, art_of_row[r]] = 1
            initial_basis.append(art_of_row[r])
        else:
            initial_basis.append(big_n + (r - std.n_eq))
    basis = list(initial_basis)
    original = None if exact else tableau[:m, :].copy()

    max_iter = settings.LP_ITERATION_FACTOR * (m + width)
    iterations = 0

    # phase I
    if n_art:
        tableau[-1, :] = 0
        tableau[-1, art_start:width] = 1
        for r in needs_artificial:
            tableau[-1, :] -= tableau[r, :]
        allowed = np.ones(width, dtype=bool)
        _, iterations = _run_simplex(tableau, basis, allowed, tol_cmp, max_iter, exact, 1, iterations)
        infeasibility = -tableau[-1, -1]
        scale = max(1.0, float(max((abs(x) for x in rhs), default=0)))
        if infeasibility > tol_cmp * scale:
            logger.debug("Phase I ended with infeasibility %s", infeasibility)
            return LpSolution(status=LpStatus.infeasible, iterations=iterations, exact=exact,
                              residual=float(infeasibility) / scale)
        for r in range(m):
            if basis[r] >= art_start:
                row = tableau[r, :art_start]
                nonzero = np.flatnonzero(np.abs(row) > tol_cmp)
                if nonzero.size:
                    _pivot(tableau, r, int(nonzero[0]), exact)
                    basis[r] = int(nonzero[0])

    # phase II
    costs = np.zeros(width + 1, dtype=dtype)
    costs[:big_n] = std.c
    tableau[-1, :] = costs
    for r in range(m):
        cb = costs[basis[r]]
        if cb != 0:
            tableau[-1, :] -= cb * tableau[r, :]
    allowed = np.zeros(width, dtype=bool)
    allowed[:art_start] = True
    status, iterations = _run_simplex(tableau, basis, allowed, tol_cmp, max_iter, exact, 2, iterations)
    if status == "unbounded":
        return LpSolution(status=LpStatus.unbounded, iterations=iterations, exact=exact)

    if not exact:
        for _ in range(_REFINE_ROUNDS):
            start = iterations
            if not _refactor(tableau, original, costs, basis):
                break
            iterations = _restore_feasibility(tableau, basis, allowed, tol, max_iter, iterations)
            status, iterations = _run_simplex(tableau, basis, allowed, tol, max_iter, exact, 2, iterations)
            if status == "unbounded":
                return LpSolution(status=LpStatus.unbounded, iterations=iterations, exact=exact)
            if iterations == start:
                break
        else:
            _refactor(tableau, original, costs, basis)

    y_full = np.zeros(width, dtype=dtype)
    for r in range(m):
        y_full[basis[r]] = tableau[r, -1]
    y = y_full[:big_n]
    if not exact:
        y = np.maximum(y, 0.0)
    x = std.shift + std.transform @ y

    cost_basis = np.array([costs[j] for j in basis], dtype=dtype)
    if not m:
        multipliers = np.zeros(0, dtype=dtype)
    elif exact:
        multipliers = (cost_basis @ tableau[:m, initial_basis]) * sign
    else:
        # B^T y = c_B on the final basis
        try:
            multipliers = np.linalg.solve(original[:, basis].T, cost_basis) * sign
        except np.linalg.LinAlgError:
            multipliers = (cost_basis @ tableau[:m, initial_basis]) * sign

    primal = std.c @ y + std.c0
    dual = (multipliers @ std.b if m else zero) + std.c0
    if prob.sense == Sense.maximize:
        primal, dual, multipliers = -primal, -dual, -multipliers

    solution = LpSolution(
        status=LpStatus.optimal,
        value=float(primal),
        point=np.array([float(v) for v in x]),
        dual_point=np.array([float(v) for v in multipliers]),
        dual_value=float(dual),
        iterations=iterations,
        exact=exact,
    )
    _check_certificate(prob, solution, tol)
    return solution


def _violation(prob: LinearProgram, x: np.ndarray) -> float:
    parts = [0.0]
    if prob.a_eq.shape[0]:
        parts.append(float(np.max(np.abs(prob.a_eq @ x - prob.b_eq))))
    if prob.a_ub.shape[0]:
        parts.append(float(np.max(prob.a_ub @ x - prob.b_ub)))
    parts.append(float(np.max(prob.lower - x)))
    parts.append(float(np.max(x - prob.upper)))
    return max(parts)


def _check_certificate(prob: LinearProgram, solution: LpSolution, tol: float):
    scale = max(1.0, float(np.max(np.abs(prob.objective))),
                float(np.max(np.abs(prob.b_eq), initial=0.0)),
                float(np.max(np.abs(prob.b_ub), initial=0.0)))
    violation = _violation(prob, solution.point)
    if violation > tol * scale:
        raise NumericalFailure(f"Returned point violates a constraint by {violation:.3e}")
    gap = abs(solution.value - solution.dual_value)
    if gap > tol * scale * max(1.0, abs(solution.value)):
        raise NumericalFailure(f"Primal and dual objective disagree by {gap:.3e}")


def perturbed_program(prob: LinearProgram, tol: float, seed: int = 0) -> LinearProgram:
    """Copy of ``prob`` with every inequality and finite bound relaxed by at most tol·(1 + |b|)."""
    rng = np.random.default_rng(seed)

    def relax(values):
        return tol * (1.0 + np.abs(values)) * rng.uniform(0.5, 1.0, size=values.shape)

    lower, upper = prob.lower.copy(), prob.upper.copy()
    finite_lo, finite_hi = np.isfinite(lower), np.isfinite(upper)
    lower[finite_lo] -= relax(lower[finite_lo])
    upper[finite_hi] += relax(upper[finite_hi])
    return LinearProgram(objective=prob.objective, sense=prob.sense, a_eq=prob.a_eq, b_eq=prob.b_eq,
                         a_ub=prob.a_ub, b_ub=prob.b_ub + relax(prob.b_ub), lower=lower, upper=upper)


def _solve_perturbed(prob: LinearProgram, tol: float) -> Optional[LpSolution]:
    """Optimal solution of the relaxed program, accepted when it certifies the original within 10·tol."""
    try:
        solution = _solve(perturbed_program(prob, tol), tol, exact=False)
    except NumericalFailure as exc:
        logger.debug("Relaxed re-solve failed too (%s)", exc.detail)
        return None
    if not solution.is_optimal:
        return None
    try:
        _check_certificate(prob, solution, 10 * tol)
    except NumericalFailure as exc:
        logger.debug("Relaxed solution rejected (%s)", exc.detail)
        return None
    return solution


def solve_lp(prob: LinearProgram, tol: Optional[float] = None, exact: bool = False) -> LpSolution:
    """Solve ``prob``; Optimal solutions carry a dual certificate.

    Raises MalformedProgram on dimension mismatch and NumericalFailure when the
    iteration cap is hit or the certificate does not check out. With
    ``settings.LP_EXACT_FALLBACK`` a float failure, or a phase-I residual within
    10·tol of the feasibility threshold, is re-solved over rationals when the
    input data are rational. Irrational data get one re-solve with relaxed
    inequalities instead, kept only if it certifies the original program.
    """
    tol = settings.LP_TOL if tol is None else tol
    if tol <= 0:
        raise MalformedProgram("Tolerance must be positive")
    prob.validate()
    if settings.LP_DUMP_DIR:
        dump_program(prob, settings.LP_DUMP_DIR)

    if exact:
        return _solve(prob, tol, exact=True)
    try:
        solution = _solve(prob, tol, exact=False)
    except NumericalFailure as exc:
        if settings.LP_EXACT_FALLBACK and is_rational_program(prob):
            logger.warning("Float simplex failed (%s); re-solving over rationals", exc.detail)
            return _solve(prob, tol, exact=True)
        logger.warning("Float simplex failed (%s); re-solving with relaxed bounds", exc.detail)
        solution = _solve_perturbed(prob, tol)
        if solution is None:
            raise
        return solution
    if (solution.status == LpStatus.infeasible and settings.LP_EXACT_FALLBACK
            and solution.residual is not None and solution.residual <= 10 * tol
            and is_rational_program(prob)):
        logger.info("Infeasibility verdict near the tolerance boundary; adjudicating exactly")
        return _solve(prob, tol, exact=True)
    return solution


def feasible(prob: LinearProgram, tol: Optional[float] = None) -> Tuple[bool, Optional[np.ndarray]]:
    """Whether the constraint set of ``prob`` is nonempty, with a witness point."""
    zero_objective = LinearProgram(objective=np.zeros(prob.n_vars), a_eq=prob.a_eq, b_eq=prob.b_eq,
                                   a_ub=prob.a_ub, b_ub=prob.b_ub, lower=prob.lower, upper=prob.upper)
    solution = solve_lp(zero_objective, tol)
    if solution.is_optimal:
        return True, solution.point
    return False, None


def format_program(prob: LinearProgram) -> str:
    """Plain-text tableau dump: one constraint per line, coefficients in column order."""
    fmt = lambda row: " ".join(f"{v:.17g}" for v in row)
    lines = [
        f"# {settings.APP_NAME} linear program",
        f"sense {prob.sense.value}",
        f"vars {prob.n_vars}",
        f"objective {fmt(prob.objective)}",
    ]
    for row, rhs in zip(prob.a_eq, prob.b_eq):
        lines.append(f"eq {fmt(row)} = {rhs:.17g}")
    for row, rhs in zip(prob.a_ub, prob.b_ub):
        lines.append(f"ub {fmt(row)} <= {rhs:.17g}")
    for j, (lo, hi) in enumerate(zip(prob.lower, prob.upper)):
        if lo != 0.0 or np.isfinite(hi):
            lines.append(f"bound {j} {lo:.17g} {hi:.17g}")
    return "\n".join(lines) + "\n"


def dump_program(prob: LinearProgram, directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"lp_{next(_dump_counter):05d}.txt")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_program(prob))
    logger.debug("LP written to %s", path)
    return path
