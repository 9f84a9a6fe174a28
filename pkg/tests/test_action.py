import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srbrw.action import (
    CostBreakdown,
    combine,
    interaction_count,
    occupation_interaction,
    spreading_increment_cost,
    total_action,
)
from srbrw.core import ModelParams, OccupationProfile, TreeProfile


def pair_count_reference(x, eps):
    """Quadratic-time count of ordered pairs closer than eps."""
    return sum(1 for i, j in itertools.permutations(range(len(x)), 2) if abs(x[i] - x[j]) < eps)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-20, 20, allow_nan=False), min_size=0, max_size=40), st.floats(0.05, 5.0))
def test_interaction_count_matches_quadratic_reference(xs, eps):
    x = np.array(xs)
    # keep away from the strict/non-strict boundary where the tolerance applies
    d = np.abs(x[:, None] - x[None, :]) if x.size else np.zeros((0, 0))
    if np.any(np.abs(d - eps) < 1e-6 * eps):
        return
    assert interaction_count(x, eps) == pair_count_reference(xs, eps)


def test_exact_spacing_does_not_interact():
    x = 0.1 * np.arange(50)  # spacings of exactly eps up to rounding
    assert interaction_count(x, 0.1) == 0
    assert interaction_count(np.array([0.0, 0.0999]), 0.1) == 2


def test_occupation_interaction_equals_position_count():
    occ = OccupationProfile(-3, [1, 2, 3, 4, 3, 2, 1], 4)
    assert occupation_interaction(occ.counts) == 2 + 6 + 12 + 6 + 2
    assert interaction_count(occ.positions(0.7), 0.7) == occupation_interaction(occ.counts)


def test_occupation_interaction_large_counts_exact():
    big = np.array([1 << 31, 1 << 31])
    assert occupation_interaction(big) == 2 * (1 << 31) * ((1 << 31) - 1)


def test_total_action_hand_computed():
    # N = 1: children at -0.3 and 0.4 with eps = 1 collide (two ordered pairs)
    prof = TreeProfile.from_increments([np.array([-0.3, 0.4])])
    costs = total_action(prof, ModelParams(1, 2.0, 1.0))
    assert costs.S_spr == pytest.approx(0.5 * (0.09 + 0.16))
    assert costs.J == 2
    assert costs.S_total == pytest.approx(0.125 + 4.0)


def test_spreading_cost_per_generation(rng):
    incs = [rng.normal(size=2 << n) for n in range(4)]
    prof = TreeProfile.from_increments(incs)
    for n, a in enumerate(incs):
        assert spreading_increment_cost(prof, n) == pytest.approx(0.5 * np.sum(a * a))


def test_combine_concatenates():
    a = CostBreakdown([1.0], [2], 1.5)
    b = CostBreakdown([0.5, 0.25], [0, 4], 1.5)
    c = combine([a, b])
    assert c.N == 3 and c.J == 6
    assert c.S_total == pytest.approx(1.75 + 9.0)
