import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import random_dist, vertex_enumeration_optimum
from wmstat.dist import DiscreteDist
from wmstat.robust import PerturbationGraph, robust_lp_build
from wmstat.simplex import LpProblem, LpSolution, simplex_solve


def test_single_variable():
    p = LpProblem(objective=(1.0,), constraints=(((1.0,), 1.0),), bounds=((0.0, 1.0),))
    s = simplex_solve(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(1.0, abs=1e-12)


def test_two_variables_shared_budget():
    p = LpProblem(
        objective=(1.0, 1.0),
        constraints=(((1.0, 1.0), 0.4),),
        bounds=((0.0, 1.0), (0.0, 1.0)),
    )
    assert simplex_solve(p).objective == pytest.approx(0.4, abs=1e-12)


def test_infeasible():
    p = LpProblem(objective=(1.0,), constraints=(((1.0,), -1.0),), bounds=((0.0, 1.0),))
    assert simplex_solve(p).status == "infeasible"


def test_unbounded():
    p = LpProblem(objective=(1.0,), constraints=(), bounds=((0.0, math.inf),))
    assert simplex_solve(p).status == "unbounded"


def test_equality_via_row_pair():
    p = LpProblem(
        objective=(1.0, 0.0),
        constraints=(((1.0, 1.0), 1.0), ((-1.0, -1.0), -1.0)),
        bounds=((0.0, 1.0), (0.0, 1.0)),
    )
    s = simplex_solve(p)
    assert s.objective == pytest.approx(1.0, abs=1e-12)
    assert sum(s.x) == pytest.approx(1.0, abs=1e-9)


def test_nonzero_lower_bounds():
    p = LpProblem(
        objective=(1.0, -1.0),
        constraints=(((1.0, 1.0), 1.5),),
        bounds=((0.5, 2.0), (0.25, 2.0)),
    )
    s = simplex_solve(p)
    assert s.x == pytest.approx((1.25, 0.25), abs=1e-9)


def test_exact_mode_returns_fractions():
    p = LpProblem(
        objective=(2, 3),
        constraints=(((1, 2), 3), ((3, 1), 4)),
        bounds=((0, 10), (0, 10)),
    )
    s = simplex_solve(p, exact=True)
    assert s.status == "optimal"
    assert s.x == (Fraction(1), Fraction(1))
    assert s.objective == Fraction(5)


def test_exact_matches_float_on_robust_lp():
    rho = DiscreteDist(probs=(Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    graph = PerturbationGraph.from_edges(3, [(0, 1), (1, 2)])
    p = robust_lp_build(rho, 0.25, graph)
    exact = simplex_solve(
        LpProblem(
            objective=tuple(Fraction(c).limit_denominator(10**9) for c in p.objective),
            constraints=tuple(
                (tuple(Fraction(c).limit_denominator(10**9) for c in row), Fraction(b).limit_denominator(10**9))
                for row, b in p.constraints
            ),
            bounds=((0, 1),) * 3,
        ),
        exact=True,
    )
    approx = simplex_solve(p)
    assert float(exact.objective) == pytest.approx(approx.objective, abs=1e-12)


class TestAgainstVertexOracle:
    def test_random_robust_lps(self):
        rng = np.random.default_rng(42)
        for trial in range(100):
            k = int(rng.integers(2, 7))
            rho = DiscreteDist(probs=random_dist(rng, k))
            alpha = float(rng.uniform(0.05, 0.6))
            edges = [
                (int(u), int(v))
                for u in range(k)
                for v in range(k)
                if u != v and rng.random() < 0.4
            ]
            graph = PerturbationGraph.from_edges(k, edges)
            problem = robust_lp_build(rho, alpha, graph, include_sum_row=bool(trial % 2))
            mine = simplex_solve(problem)
            want = vertex_enumeration_optimum(problem)
            assert mine.status == "optimal"
            assert want is not None
            assert mine.objective == pytest.approx(want, abs=1e-8)

    def test_random_general_boxes(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 5))
            a = rng.normal(size=(m, n)).round(3)
            b = rng.normal(loc=1.0, size=m).round(3)
            c = rng.normal(size=n).round(3)
            problem = LpProblem(
                objective=tuple(c),
                constraints=tuple((tuple(row), float(bb)) for row, bb in zip(a, b)),
                bounds=((0.0, 1.0),) * n,
            )
            mine = simplex_solve(problem)
            want = vertex_enumeration_optimum(problem)
            if want is None:
                assert mine.status == "infeasible"
            else:
                assert mine.objective == pytest.approx(want, abs=1e-8)


def test_dimension_validation():
    with pytest.raises(ValueError):
        LpProblem(objective=(1.0,), constraints=(((1.0, 2.0), 1.0),), bounds=((0.0, 1.0),))
    with pytest.raises(ValueError):
        LpProblem(objective=(1.0,), constraints=(), bounds=((1.0, 0.0),))


def test_solution_is_dataclass():
    s = LpSolution(x=(1.0,), objective=1.0, status="optimal")
    assert s.x == (1.0,)
