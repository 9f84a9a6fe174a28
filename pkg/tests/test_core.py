import numpy as np
import pytest

from srbrw.core import (
    ModelParams,
    NodeId,
    OccupationProfile,
    TreeProfile,
    descendant_slice,
    is_smooth,
    node_parent,
    occupation_from_positions,
    site_position,
)
from srbrw.errors import ModelAssumptionError, NoParent, OffGrid


class TestModelParams:
    def test_standing_assumption(self):
        with pytest.raises(ModelAssumptionError):
            ModelParams(3, 0.5, 1.0)  # beta == eps^2/2 is excluded
        assert ModelParams(3, 0.5000001, 1.0).beta > 0.5

    def test_relaxed_allows_weak_penalty(self):
        p = ModelParams.relaxed(2, 0.0, 1.0)
        assert p.beta == 0.0

    @pytest.mark.parametrize("N,beta,eps", [(0, 1.0, 1.0), (2.5, 1.0, 1.0), (2, 1.0, 0.0), (2, -1.0, 1.0)])
    def test_rejects_bad_values(self, N, beta, eps):
        with pytest.raises(ModelAssumptionError):
            ModelParams.relaxed(N, beta, eps)

    def test_split(self):
        assert ModelParams(10, 1.0, 1.0).split(3) == (7, 3)


def test_node_bits_roundtrip():
    for n in range(6):
        for j in range(1 << n):
            node = NodeId(n, j)
            assert NodeId.from_bits(node.bits()) == node


def test_first_bit_is_most_significant():
    assert NodeId(3, 0b100).bits() == (1, 0, 0)


def test_parent_and_children():
    node = NodeId(4, 11)
    for child in node.children():
        assert node_parent(child) == node
    with pytest.raises(NoParent):
        node_parent(NodeId(0, 0))


def test_descendant_slice_is_contiguous():
    sl = descendant_slice(2, 3, 5)
    assert (sl.start, sl.stop) == (24, 32)
    # every descendant index maps back to the ancestor
    assert all(j >> 3 == 3 for j in range(sl.start, sl.stop))


def test_tree_profile_shapes_and_readonly():
    prof = TreeProfile.from_increments([np.array([-1.0, 1.0]), np.zeros(4)])
    assert prof.depth == 2
    np.testing.assert_array_equal(prof.generation(2), [-1, -1, 1, 1])
    with pytest.raises(ValueError):
        prof.generation(1)[0] = 5.0
    with pytest.raises(ValueError):
        TreeProfile([np.zeros(1), np.zeros(3)])


def test_from_generation_multisets_uses_sorted_matching():
    prof = TreeProfile.from_generation_multisets([[1.0, -1.0], [2.0, -2.0, 0.5, -0.5]])
    # the parent at -1 gets the two smallest children, the one at +1 the two largest
    g1, g2 = prof.generation(1), prof.generation(2)
    left = int(np.argmin(g1))
    assert sorted(g2[2 * left:2 * left + 2]) == [-2.0, -0.5]
    assert sorted(g2[2 * (1 - left):2 * (1 - left) + 2]) == [0.5, 2.0]


def test_occupation_profile_validates_conservation():
    OccupationProfile(-2, [1, 2, 1], 2)
    with pytest.raises(ValueError):
        OccupationProfile(0, [1, 2], 2)
    with pytest.raises(ValueError):
        OccupationProfile(0, [0, 4], 2)


def test_occupation_positions():
    occ = OccupationProfile(-1, [1, 2, 1], 2)
    np.testing.assert_allclose(occ.positions(2.0), [-1.0, 1.0, 1.0, 3.0])


def test_is_smooth_pads_with_zeros():
    assert is_smooth([1, 2, 2, 1])
    assert not is_smooth([2, 2])
    assert not is_smooth([1, 3, 1])


def test_occupation_from_positions_and_offgrid():
    occ = occupation_from_positions(site_position(np.array([0, 0, 1, 3]), 1.0), 1.0, 2)
    assert occ.offset == 0
    np.testing.assert_array_equal(occ.counts, [2, 1, 0, 1])
    with pytest.raises(OffGrid):
        occupation_from_positions(np.array([0.0, 0.5, 1.5, 2.5]), 1.0, 2)
