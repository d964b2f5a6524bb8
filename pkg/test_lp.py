"""
Tests for the dense simplex kernel, with scipy's HiGHS solver as the oracle
"""
import numpy as np
import pytest
from scipy.optimize import linprog

import helpers.lp as lp_module
from controllers.zoo import ZooController
from helpers.exceptions import MalformedProgram, NumericalFailure
from helpers.lp import (
    LinearProgram,
    LpStatus,
    Sense,
    dump_program,
    feasible,
    format_program,
    is_rational_program,
    perturbed_program,
    solve_lp,
)


def textbook_program():
    # max 3x + 2y  s.t.  x + y <= 4, x + 3y <= 6, x <= 3
    return LinearProgram(objective=[3, 2], sense=Sense.maximize,
                         a_ub=[[1, 1], [1, 3], [1, 0]], b_ub=[4, 6, 3])


def test_textbook_optimum():
    solution = solve_lp(textbook_program())
    assert solution.status == LpStatus.optimal
    assert solution.value == pytest.approx(11.0, abs=1e-9)
    assert solution.point == pytest.approx([3.0, 1.0], abs=1e-9)


def test_dual_certificate_matches_value():
    solution = solve_lp(textbook_program())
    assert solution.dual_value == pytest.approx(solution.value, abs=1e-9)
    assert np.dot([4, 6, 3], solution.dual_point) == pytest.approx(11.0, abs=1e-9)


def test_exact_path_is_exact():
    solution = solve_lp(textbook_program(), exact=True)
    assert solution.exact
    assert solution.value == 11.0


def test_free_variable_and_equality():
    # min x  s.t.  x + y = 1, y <= 3, x free
    prob = LinearProgram(objective=[1, 0], a_eq=[[1, 1]], b_eq=[1], a_ub=[[0, 1]], b_ub=[3],
                         lower=[-np.inf, 0])
    solution = solve_lp(prob)
    assert solution.value == pytest.approx(-2.0, abs=1e-9)


def test_upper_bounds():
    prob = LinearProgram(objective=[1, 1], sense=Sense.maximize, upper=[2, 5])
    solution = solve_lp(prob)
    assert solution.value == pytest.approx(7.0, abs=1e-9)


def test_infeasible():
    prob = LinearProgram(objective=[1, 1], a_eq=[[1, 1]], b_eq=[-1])
    solution = solve_lp(prob)
    assert solution.status == LpStatus.infeasible
    assert solution.residual > 0
    assert feasible(prob) == (False, None)


def test_unbounded():
    prob = LinearProgram(objective=[1, 0], sense=Sense.maximize, a_ub=[[1, -1]], b_ub=[1])
    assert solve_lp(prob).status == LpStatus.unbounded


def test_degenerate_cycling_example():
    # Beale's example cycles under the textbook rule without anti-cycling
    prob = LinearProgram(
        objective=[-0.75, 20, -0.5, 6],
        a_ub=[[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]],
        b_ub=[0, 0, 1],
    )
    solution = solve_lp(prob)
    assert solution.value == pytest.approx(-1.25, abs=1e-9)


def test_feasible_returns_witness():
    prob = LinearProgram(objective=[0, 0, 0], a_eq=[[1, 1, 1]], b_eq=[1], a_ub=[[1, -1, 0]], b_ub=[-0.2])
    ok, point = feasible(prob)
    assert ok
    assert point.sum() == pytest.approx(1.0, abs=1e-9)
    assert point[0] - point[1] <= -0.2 + 1e-9
    assert np.all(point >= -1e-12)


def test_malformed_program():
    prob = LinearProgram(objective=[1, 2], a_eq=[[1, 2, 3]], b_eq=[1])
    with pytest.raises(MalformedProgram):
        solve_lp(prob)


def test_bad_tolerance():
    with pytest.raises(MalformedProgram):
        solve_lp(textbook_program(), tol=0.0)


def test_rationality_check():
    assert is_rational_program(textbook_program())
    prob = LinearProgram(objective=[np.sqrt(2.0), 1.0], a_ub=[[1, 1]], b_ub=[1])
    assert not is_rational_program(prob)


def test_format_and_dump(tmp_path):
    text = format_program(textbook_program())
    assert "sense maximize" in text
    assert text.count("\nub ") == 3
    path = dump_program(textbook_program(), str(tmp_path))
    with open(path) as handle:
        assert handle.read() == text


def test_dump_dir_setting(tmp_path, restore_settings):
    restore_settings.LP_DUMP_DIR = str(tmp_path)
    solve_lp(textbook_program())
    assert len(list(tmp_path.iterdir())) == 1


@pytest.mark.parametrize("seed", range(25))
def test_random_programs_against_highs(seed):
    rng = np.random.default_rng(seed)
    n, m_ub, m_eq = int(rng.integers(2, 8)), int(rng.integers(1, 6)), int(rng.integers(0, 3))
    c = rng.standard_normal(n)
    a_ub = rng.standard_normal((m_ub, n))
    b_ub = rng.uniform(0.5, 2.0, m_ub)
    # equality rows through a known feasible point keep the program feasible
    x0 = rng.uniform(0.0, 0.2, n)
    a_eq = rng.standard_normal((m_eq, n))
    b_eq = a_eq @ x0
    ours = solve_lp(LinearProgram(objective=c, a_ub=a_ub, b_ub=b_ub + a_ub @ x0,
                                  a_eq=a_eq if m_eq else None, b_eq=b_eq if m_eq else None,
                                  upper=np.full(n, 10.0)))
    oracle = linprog(c, A_ub=a_ub, b_ub=b_ub + a_ub @ x0, A_eq=a_eq if m_eq else None,
                     b_eq=b_eq if m_eq else None, bounds=[(0, 10)] * n, method="highs")
    assert oracle.status == 0
    assert ours.status == LpStatus.optimal
    assert ours.value == pytest.approx(oracle.fun, abs=1e-7)
    assert ours.dual_value == pytest.approx(ours.value, abs=1e-7)


@pytest.mark.parametrize("k", [92, 162])
def test_degenerate_facet_programs(k):
    # min <xi, u> over xi dominating every vertex of an icosphere: many facets tie at the optimum
    model = ZooController.ball_approx(3, k)
    facets = model.facets
    bounds = (model.vertices @ facets.T).max(axis=0)
    objective = model.unit.coeffs
    prob = LinearProgram(objective=objective, a_ub=-facets, b_ub=-bounds, lower=np.full(4, -np.inf))
    ours = solve_lp(prob)
    oracle = linprog(objective, A_ub=-facets, b_ub=-bounds, bounds=[(None, None)] * 4, method="highs")
    assert oracle.status == 0
    assert ours.status == LpStatus.optimal
    assert ours.value == pytest.approx(oracle.fun, abs=1e-8)
    assert abs(ours.value - ours.dual_value) <= 1e-9 * max(1.0, abs(ours.value))
    assert np.max(-facets @ ours.point + bounds) <= 1e-8


def test_relaxed_program_stays_close():
    prob = LinearProgram(objective=[np.sqrt(2.0), 1.0], a_ub=[[1, 1], [-1, 0]], b_ub=[1, -0.25], upper=[3, 3])
    relaxed = perturbed_program(prob, 1e-9)
    assert np.all(relaxed.b_ub > prob.b_ub)
    assert np.all(relaxed.b_ub - prob.b_ub <= 1e-9 * (1 + np.abs(prob.b_ub)))
    assert np.all(relaxed.upper > prob.upper)
    assert np.all(relaxed.lower < prob.lower)


def test_float_failure_retries_with_relaxed_bounds(monkeypatch):
    # irrational data rule out the exact path
    prob = LinearProgram(objective=[-np.sqrt(2.0), -1.0], a_ub=[[1, 1]], b_ub=[np.sqrt(3.0)])
    real_solve = lp_module._solve
    calls = []

    def flaky(program, tol, exact):
        calls.append(program)
        if len(calls) == 1:
            raise NumericalFailure("Primal and dual objective disagree by 1.000e-05")
        return real_solve(program, tol, exact)

    monkeypatch.setattr(lp_module, "_solve", flaky)
    solution = solve_lp(prob)
    assert len(calls) == 2
    assert solution.value == pytest.approx(-np.sqrt(6.0), abs=1e-7)


def test_float_failure_without_a_rescue_raises(monkeypatch):
    prob = LinearProgram(objective=[-np.sqrt(2.0), -1.0], a_ub=[[1, 1]], b_ub=[np.sqrt(3.0)])

    def broken(program, tol, exact):
        raise NumericalFailure("Returned point violates a constraint by 4.415e-01")

    monkeypatch.setattr(lp_module, "_solve", broken)
    with pytest.raises(NumericalFailure):
        solve_lp(prob)
