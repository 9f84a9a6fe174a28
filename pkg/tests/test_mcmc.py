import math

import numpy as np
import pytest
from scipy import integrate

from srbrw.action import total_action
from srbrw.core import ModelParams
from srbrw.mcmc import (
    ChainState,
    PartitionEstimate,
    default_initial_profile,
    detailed_balance_residual,
    empirical_profile,
    estimate_partition,
    lattice_transition_matrix,
    merge_estimates,
    metropolis_step,
    partition_function_one_generation,
    run_chain,
    sample_collision_counts,
)


def z_one_generation_quadrature(beta, eps):
    """Integrate exp(-beta J) against the law of the two child displacements."""
    # the difference of the two increments is N(0, 2)
    dens = lambda u: math.exp(-u * u / 4) / math.sqrt(4 * math.pi)
    inside, _ = integrate.quad(dens, -eps, eps)
    return inside * math.exp(-2 * beta) + (1 - inside)


@pytest.mark.parametrize("beta,eps", [(1.0, 1.0), (0.3, 2.0), (4.0, 0.5)])
def test_partition_closed_form_against_quadrature(beta, eps):
    assert partition_function_one_generation(beta, eps) == pytest.approx(z_one_generation_quadrature(beta, eps), rel=1e-10)


def test_partition_estimate_n1():
    est = estimate_partition(ModelParams.relaxed(1, 1.0, 1.0), 200_000, seed=5)
    assert abs(est.Z_hat - partition_function_one_generation(1.0, 1.0)) < 4 * est.std_err


def test_partition_estimate_beta_zero_is_exact():
    est = estimate_partition(ModelParams.relaxed(3, 0.0, 1.0), 1000, seed=1)
    assert est.Z_hat == 1.0 and est.std_err == 0.0


def test_std_err_shrinks_like_root_n():
    p = ModelParams.relaxed(2, 1.0, 1.0)
    a = estimate_partition(p, 40_000, seed=2).std_err
    b = estimate_partition(p, 160_000, seed=3).std_err
    assert b / a == pytest.approx(0.5, rel=0.05)


def test_collision_counts_match_direct_counting(rng):
    from srbrw.action import interaction_count

    J = sample_collision_counts(3, 0.8, 50, np.random.default_rng(9))
    # regenerate the same trees by hand
    g = np.random.default_rng(9)
    h = np.zeros((50, 1))
    ref = np.zeros(50, dtype=int)
    for _ in range(3):
        h = np.repeat(h, 2, axis=1) + g.standard_normal((50, h.shape[1] * 2))
        ref += np.array([interaction_count(row, 0.8) for row in h])
    np.testing.assert_array_equal(J, ref)


def test_merge_estimates():
    m = merge_estimates([PartitionEstimate(1.0, 0.1, 10), PartitionEstimate(2.0, 0.1, 10)])
    assert m.Z_hat == pytest.approx(1.5)
    assert m.std_err == pytest.approx(0.1 / math.sqrt(2))
    exact = merge_estimates([PartitionEstimate(1.0, 0.0, 5), PartitionEstimate(3.0, 0.5, 5)])
    assert exact.Z_hat == 1.0 and exact.std_err == 0.0


@pytest.mark.parametrize("N,n_points", [(1, 5), (2, 3)])
def test_detailed_balance(N, n_points):
    p = ModelParams.relaxed(N, 1.0, 1.0)
    P, pi = lattice_transition_matrix(p, np.linspace(-1, 1, n_points))
    assert detailed_balance_residual(P, pi) <= 1e-12
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-14)
    np.testing.assert_allclose(pi @ P, pi, atol=1e-12)


def test_chain_cached_costs_stay_exact():
    p = ModelParams(4, 1.5, 1.0)
    res = run_chain(p, 3000, seed=11, step_size=0.8)
    direct = total_action(res.state.profile(), p)
    assert res.state.S == pytest.approx(direct.S_total, rel=1e-10)
    assert res.state.J == direct.J


def test_chain_is_reproducible():
    p = ModelParams(3, 1.0, 1.0)
    a = run_chain(p, 1500, seed=4, thin=10)
    b = run_chain(p, 1500, seed=4, thin=10)
    c = run_chain(p, 1500, seed=5, thin=10)
    np.testing.assert_array_equal(a.S_trace, b.S_trace)
    assert not np.array_equal(a.S_trace, c.S_trace)


def test_single_step_rejects_costly_move():
    p = ModelParams(2, 10.0, 1.0)
    st = ChainState(default_initial_profile(p), p)
    S0 = st.S
    # shifting the left child onto its sibling creates many collisions
    accepted = metropolis_step(st, 0, 1.5, 0.999)
    assert not accepted and st.S == S0


def test_sampler_depth_cap():
    with pytest.raises(ValueError):
        run_chain(ModelParams(9, 1.0, 1.0), 10)


def test_empirical_profile_on_grid():
    samples = np.array([[-1.5, -0.5, 0.5, 1.5], [-0.5, -0.5, 0.5, 0.5]])
    emp = empirical_profile(samples, 1.0)
    assert emp.on_grid_fraction == 1.0
    assert emp.smooth_fraction == 0.5
    assert emp.mean_range == pytest.approx(3.0)
