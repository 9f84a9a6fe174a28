import math

import numpy as np
import pytest

from srbrw import dirichlet as d
from srbrw.core import NodeId


@pytest.fixture(scope="module")
def sol10():
    return d.solve_recursive(d.standard_boundary(10, 1.0))


@pytest.mark.parametrize("M", [1, 2, 5, 9])
def test_solvers_agree(M):
    b = d.standard_boundary(M, 0.7)
    s1, s2, s3 = d.solve_recursive(b), d.solve_closed_form(b), d.solve_quadratic_min(b)
    for x, y, z in zip(s1.profile.values, s2.profile.values, s3.profile.values):
        np.testing.assert_allclose(x, y, atol=1e-11 * 2 ** M)
        np.testing.assert_allclose(x, z, atol=1e-10 * 2 ** M)


def test_random_boundary_solvers_agree(rng):
    b = d.DirichletBoundary(7, rng.normal(size=128) * 5)
    s1, s2, s3 = d.solve_recursive(b), d.solve_closed_form(b), d.solve_quadratic_min(b)
    assert d.harmonicity_residual(s1) < 1e-10
    for x, y, z in zip(s1.profile.values, s2.profile.values, s3.profile.values):
        np.testing.assert_allclose(x, y, atol=1e-10)
        np.testing.assert_allclose(x, z, atol=1e-9)


def test_quadratic_minimiser_is_a_minimum(rng, sol10):
    # perturbing any interior value raises the spreading cost
    base = d.dirichlet_spreading_cost(sol10)
    from srbrw.core import TreeProfile

    vals = [v.copy() for v in sol10.profile.values]
    vals[4][3] += 0.01
    bumped = TreeProfile(vals)
    cost = 0.5 * sum(float(np.sum(bumped.increments(n) ** 2)) for n in range(1, 11))
    assert cost > base


def test_leaves_are_pinned(sol10):
    np.testing.assert_array_equal(sol10.profile.generation(10), sol10.boundary.u)
    assert sol10.profile.generation(0)[0] == 0.0


def test_harmonicity(sol10):
    assert d.harmonicity_residual(sol10) < 1e-9


def test_exact_small_costs():
    assert d.dirichlet_spreading_cost(d.solve_recursive(d.standard_boundary(1, 1.0))) == pytest.approx(0.25, rel=1e-14)
    assert d.dirichlet_spreading_cost(d.solve_recursive(d.standard_boundary(2, 1.0))) == pytest.approx(7 / 6, rel=1e-14)


def test_cost_scales_with_eps_squared():
    c1 = d.dirichlet_spreading_cost(d.solve_recursive(d.standard_boundary(6, 1.0)))
    c3 = d.dirichlet_spreading_cost(d.solve_recursive(d.standard_boundary(6, 3.0)))
    assert c3 == pytest.approx(9 * c1)


def test_standard_and_linear_have_equal_cost():
    a = d.dirichlet_spreading_cost(d.solve_recursive(d.standard_boundary(8, 1.0)))
    b = d.dirichlet_spreading_cost(d.solve_recursive(d.linear_boundary(8, 1.0)))
    assert a == pytest.approx(b, rel=1e-12)


def test_antisymmetry(sol10):
    for n in range(1, 11):
        h = sol10.profile.generation(n)
        idx = np.arange(1 << n)
        np.testing.assert_allclose(h[d.mirror_index(n, idx)], -h, atol=1e-12)
    lin = d.solve_recursive(d.linear_boundary(6, 1.0))
    for n in range(1, 7):
        h = lin.profile.generation(n)
        np.testing.assert_allclose(h[d.mirror_index(n, np.arange(1 << n), "linear")], -h, atol=1e-12)


def test_standard_boundary_is_not_odd_under_full_flip(sol10):
    h = sol10.profile.generation(3)
    flipped = h[(1 << 3) - 1 - np.arange(8)]
    assert not np.allclose(flipped, -h)


@pytest.mark.parametrize("M", [3, 8, 13])
def test_subtree_sum_of_right_half(M):
    sums = d.subtree_sums(d.standard_boundary(M, 1.0))
    assert sums[1][1] == pytest.approx(2.0 ** (2 * M - 3), rel=1e-14)
    assert sums[0][0] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("M", [2, 5, 10, 14])
def test_spacing(M):
    sol = d.solve_recursive(d.standard_boundary(M, 1.0))
    gaps = d.generation_gaps(sol)
    assert gaps[M] == pytest.approx(1.0)
    assert gaps[1:M].min() >= 4 / 3 - 1e-9
    assert d.spacing_check(sol, 1.0) >= 1.0 - 1e-12


def test_gap_at_second_to_last_generation_is_four_thirds():
    sol = d.solve_recursive(d.standard_boundary(9, 1.0))
    assert d.generation_gaps(sol)[8] == pytest.approx(4 / 3, rel=1e-12)


@pytest.mark.parametrize("M", range(1, 15))
def test_spreading_bounds(M):
    lo, hi = d.spreading_bounds(M, 1.0)
    c = d.dirichlet_spreading_cost(d.solve_recursive(d.standard_boundary(M, 1.0)))
    assert lo <= c <= hi


def test_spreading_leading_order_has_coefficient_one_half():
    c = d.dirichlet_spreading_cost(d.solve_recursive(d.standard_boundary(18, 1.0)))
    assert c / d.spreading_leading_order(18, 1.0) == pytest.approx(0.5, rel=2e-4)


def test_closed_form_increments_match(sol10):
    incs = d.closed_form_increments(sol10.boundary)
    for n in range(1, 11):
        np.testing.assert_allclose(incs[n], sol10.increments[n], atol=1e-10)


def test_explicit_profile_matches_recursion(sol10):
    for n in (1, 2, 5, 9, 10):
        for j in range(0, 1 << n, max(1, (1 << n) // 17)):
            assert d.explicit_standard_profile(10, n, NodeId(n, j), 1.0) == pytest.approx(
                sol10.profile.generation(n)[j], abs=1e-10
            )


def test_explicit_profile_checks_depth():
    with pytest.raises(ValueError):
        d.explicit_standard_profile(5, 2, NodeId(3, 0), 1.0)


def test_approximate_increments_are_close():
    M = 14
    sol = d.solve_recursive(d.standard_boundary(M, 1.0))
    worst = max(np.abs(sol.increments[n] - d.approx_increments(M, n, 1.0)).max() for n in range(1, M + 1))
    assert worst < 0.45


def test_approx_increment_sum_closed_form():
    M = 9
    direct = 0.5 * sum(float(np.sum(d.approx_increments(M, n, 1.0) ** 2)) for n in range(1, M + 1))
    assert direct == pytest.approx(d.approx_increment_sum(M, 1.0), rel=1e-12)


def test_approx_profile_is_sum_of_approx_increments():
    M, n = 30, 5
    acc = np.zeros(1)
    for k in range(1, n + 1):
        acc = np.repeat(acc, 2) + d.approx_increments(M, k, 1.0)
    np.testing.assert_allclose(acc, d.approx_profile(M, n, 1.0), rtol=1e-12)


@pytest.mark.parametrize("n,k", [(3, 1), (6, 2), (9, 8)])
def test_alpha_identity(n, k):
    lhs, rhs = d.alpha_identity(12, n, k)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_b_ratio_difference_sign():
    r = d.b_ratio_difference(3, 2, 1)
    assert r["direct"] == pytest.approx(-2 / 3)
    assert r["corrected"] == pytest.approx(r["direct"])
    assert r["printed"] == pytest.approx(2 / 3)


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_rightmost_particle_asymptotic(n):
    h = d.explicit_standard_profile(40, n, NodeId(n, (1 << n) - 1), 1.0)
    assert h / d.rightmost_asymptotic(40, n, 1.0) == pytest.approx(1.0, rel=1e-8)


def test_rightmost_printed_form_differs_beyond_first_generation():
    h = d.explicit_standard_profile(40, 2, NodeId(2, 3), 1.0)
    assert h / d.rightmost_asymptotic(40, 2, 1.0, printed=True) == pytest.approx(2 / 3, rel=1e-8)


def test_boundary_validation():
    with pytest.raises(ValueError):
        d.DirichletBoundary(3, np.zeros(7))
    with pytest.raises(ValueError):
        d.standard_boundary(0, 1.0)


def test_printed_approx_sum_is_twice_the_true_one_asymptotically():
    assert d.approx_increment_sum_printed(40, 1.0) / d.approx_increment_sum(40, 1.0) == pytest.approx(2.0, rel=1e-9)


def test_quadratic_min_cg_path_agrees():
    b = d.standard_boundary(8, 1.0)
    ref = d.solve_recursive(b)
    sol = d.solve_quadratic_min(b, method="cg", rtol=1e-14)
    for x, y in zip(ref.profile.values[1:], sol.profile.values[1:]):
        np.testing.assert_allclose(y, x, rtol=0, atol=1e-8)


def test_quadratic_min_rejects_unknown_method():
    with pytest.raises(ValueError):
        d.solve_quadratic_min(d.standard_boundary(3, 1.0), method="qr")
