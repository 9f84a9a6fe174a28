from fractions import Fraction

import numpy as np
import pytest

from srbrw import asymptotics as asy
from srbrw.admissible import build_trajectory, feasible_K, staircase_evolution
from srbrw.core import ModelParams
from srbrw.errors import NotRepresentable


@pytest.mark.parametrize("N,K", [(5, 1), (9, 2), (12, 4), (16, 6), (20, 8)])
def test_interaction_exact_and_closed_form(N, K):
    r = 1 << K
    exact, asym = asy.analytic_interaction_cost(r, N)
    assert exact == sum(staircase_evolution(N, K).interactions())
    assert Fraction(exact) == asy.interaction_closed_form(r, N)
    # the asymptotic form drops only (2/3) r + (2/3) 2^M - 2/7
    assert exact - asym == pytest.approx(2 / 3 * r + 2 / 3 * (1 << (N - K)) - 2 / 7, abs=1e-6 * exact)


def test_interaction_rejects_non_dyadic():
    with pytest.raises(NotRepresentable):
        asy.analytic_interaction_cost(3, 10)
    with pytest.raises(NotRepresentable):
        asy.analytic_interaction_cost(64, 10)


def test_statement_form_misses_factor_r():
    exact, _ = asy.analytic_interaction_cost(16, 14)
    assert abs(asy.interaction_statement_form(16, 14) - exact) / exact > 0.5


@pytest.mark.parametrize("N,K", [(6, 1), (10, 3), (18, 6)])
def test_no_move_bound_forms(N, K):
    forms = asy.staircase_bound_closed_forms(1 << K, N)
    assert forms["direct"] == forms["corrected"]
    if N - K > 0:
        assert forms["printed"] != forms["direct"]


def test_staircase_transport_below_no_move_bound():
    for N in (9, 12, 15):
        for K in feasible_K(N):
            cost = asy.cost_of_staircase_phase(N, K, 1.0)
            assert cost <= asy.staircase_spreading_bound(1 << K, N)


@pytest.mark.parametrize("N", [3, 6, 9])
def test_frozen_benchmark(N):
    p = ModelParams(N, 1.0, 1.0)
    assert asy.hstarstar_cost(p).J == asy.hstarstar_interaction_formula(N)


def test_frozen_benchmark_requires_multiple_of_three():
    with pytest.raises(ValueError):
        asy.hstarstar_interaction_formula(4)


def test_cost_model_minimised_at_r_star():
    p = ModelParams(24, 2.0, 1.0)
    r = asy.r_star(p)
    grid = r * np.array([0.9, 0.99, 1.0, 1.01, 1.1])
    vals = [asy.total_cost_model(x, p) for x in grid]
    assert int(np.argmin(vals)) == 2
    a, b = asy.marginal_costs(r, p)
    assert a == pytest.approx(b, rel=1e-12)


def test_model_constants():
    assert asy.model_minimum_constant(3) == pytest.approx(1.5 ** (1 / 3))
    assert asy.model_minimum_constant(4) == pytest.approx(0.75 ** (1 / 3))
    p = ModelParams(40, 1.0, 1.0)
    ratio = asy.total_cost_model(asy.r_star(p), p) / asy.theorem4_value(p)
    assert ratio == pytest.approx(0.75, rel=1e-3)
    assert asy.teuer_value(p) == pytest.approx(asy.theorem4_value(p))


def test_direct_summation_tracks_measured_model():
    p = ModelParams(15, 1.0, 1.0)
    for K in (3, 4):
        direct = build_trajectory(p, K).costs.S_total
        assert direct == pytest.approx(asy.measured_cost_model(1 << K, p), rel=0.02)


def test_heuristic_optimum():
    plan = asy.heuristic_optimum(20, 1.0, 1.0)
    assert plan.r1_rel_diff < 1e-4
    assert plan.numeric_S <= plan.S_heur + 1e-9 * plan.S_heur
    np.testing.assert_allclose(plan.r_seq[-1], 2 * plan.r1 * (1 - 2.0 ** -20))
    big = asy.heuristic_optimum(40, 1.0, 1.0)
    assert big.S_heur / 2.0 ** (160 / 3) == pytest.approx(asy.HEURISTIC_CONSTANT, rel=1e-3)


def test_heuristic_functional_by_hand():
    # N = 1: beta eps 4 / r + 2 r^2 / 3
    assert asy.heuristic_functional([0.0, 2.0], 1.0, 1.0) == pytest.approx(2 + 8 / 3)
