import itertools

import numpy as np
import pytest

from ttnets.decompositions import (
    CPTensor,
    HTTensor,
    TTTensor,
    cp_entry,
    cp_random,
    cp_to_dense,
    ht_entry,
    ht_node_leaf_sets,
    ht_random,
    ht_to_dense,
    ranks_from_dense,
    tt_delta_example,
    tt_entry,
    tt_equal_cores_random,
    tt_random,
    tt_svd,
    tt_to_dense,
)
from ttnets.svd import numerical_rank
from ttnets.tensor import matricize, odd_even_split


def hand_tt():
    # two modes, rank-1 chain: entries are products [1,2]_i * [3,4]_j
    g1 = np.array([1.0, 2.0]).reshape(1, 2, 1)
    g2 = np.array([3.0, 4.0]).reshape(1, 2, 1)
    return TTTensor((g1, g2))


class TestTTBasics:
    def test_hand_example_dense(self):
        np.testing.assert_array_equal(tt_to_dense(hand_tt()), [[3, 4], [6, 8]])

    def test_entry_matches_dense_everywhere(self):
        tt = tt_random((2, 3, 2, 3), (2, 3, 2), seed=5)
        dense = tt_to_dense(tt)
        for idx in itertools.product(*(range(n) for n in tt.shape)):
            e = tt_entry(tt, idx)
            assert abs(e - dense[idx]) <= 1e-13 * max(abs(e), 1.0)

    def test_zero_cores_zero_entries(self):
        tt = TTTensor((np.zeros((1, 2, 2)), np.zeros((2, 2, 1))))
        assert tt_entry(tt, (1, 1)) == 0.0
        assert not tt_to_dense(tt).any()

    def test_rank_one_chain_is_outer_product(self):
        v = [np.array([1.0, 2.0]), np.array([-1.0, 0.5]), np.array([3.0, 1.0])]
        tt = TTTensor(tuple(x.reshape(1, 2, 1) for x in v))
        want = np.multiply.outer(np.multiply.outer(v[0], v[1]), v[2])
        np.testing.assert_allclose(tt_to_dense(tt), want)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            tt_entry(hand_tt(), (0, 2))

    def test_rank_chain_validation(self):
        with pytest.raises(ValueError, match="rank mismatch"):
            TTTensor((np.zeros((1, 2, 2)), np.zeros((3, 2, 1))))

    def test_dense_cap(self):
        tt = tt_random((10,) * 8, (1,) * 7, seed=0)
        with pytest.raises(ValueError, match="cap"):
            tt_to_dense(tt)


class TestTTSVD:
    def test_rank_one_matrix(self):
        tt = tt_svd(np.array([[3.0, 4.0], [6.0, 8.0]]))
        assert tt.ranks == (1,)
        np.testing.assert_allclose(tt_to_dense(tt), [[3, 4], [6, 8]], atol=1e-14)

    def test_identity_matrix(self):
        assert tt_svd(np.eye(2)).ranks == (2,)

    def test_delta_chain_ranks(self):
        dense = tt_to_dense(tt_delta_example(4, 2, 2))
        assert tt_svd(dense).ranks == (2, 1, 2)

    def test_reconstruction_accuracy(self):
        x = np.random.default_rng(3).normal(size=(3, 4, 2, 3))
        tt = tt_svd(x)
        err = np.linalg.norm(tt_to_dense(tt) - x) / np.linalg.norm(x)
        assert err <= 1e-10

    def test_max_ranks_cap(self):
        x = np.random.default_rng(4).normal(size=(3, 3, 3))
        tt = tt_svd(x, max_ranks=[2, 2])
        assert all(r <= 2 for r in tt.ranks)

    def test_recompression_never_increases_ranks(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            d = int(rng.integers(3, 7))
            shape = tuple(int(v) for v in rng.integers(2, 5, size=d))
            ranks = tuple(int(v) for v in rng.integers(1, 5, size=d - 1))
            tt = tt_random(shape, ranks, seed=seed)
            again = tt_svd(tt_to_dense(tt))
            assert all(a <= b for a, b in zip(again.ranks, ranks))

    def test_zero_tensor(self):
        tt = tt_svd(np.zeros((2, 2, 2)))
        assert not tt_to_dense(tt).any()


class TestTTRandom:
    def test_determinism(self):
        a = tt_random((2, 3, 2), (2, 2), seed=9)
        b = tt_random((2, 3, 2), (2, 2), seed=9)
        assert all(np.array_equal(x, y) for x, y in zip(a.cores, b.cores))

    def test_prefix_ranks_bounded_by_chain_ranks(self):
        tt = tt_random((2, 2, 2, 2), (2, 2, 2), seed=1)
        observed = ranks_from_dense(tt_to_dense(tt), "tt")
        assert np.all(observed <= np.array([2, 2, 2]))

    def test_rank_one_chain_separable(self):
        tt = tt_random((2, 3, 2), (1, 1), seed=2)
        dense = tt_to_dense(tt)
        for s in ([1], [2], [3], [1, 2]):
            assert numerical_rank(matricize(dense, s)) == 1


class TestDeltaChain:
    def test_closed_form_entries(self):
        for d, n, r in [(4, 2, 2), (4, 3, 2), (6, 2, 3)]:
            tt = tt_delta_example(d, n, r)
            dense = tt_to_dense(tt)
            for idx in itertools.product(*(range(n) for _ in range(d))):
                pairs = [(idx[k], idx[k + 1]) for k in range(0, d, 2)]
                want = 1.0 if all(a == b and a < r for a, b in pairs) else 0.0
                assert dense[idx] == want

    def test_chain_ranks(self):
        tt = tt_delta_example(6, 2, 2)
        assert tt.ranks == (2, 1, 2, 1, 2)

    def test_entry_at_origin(self):
        assert tt_entry(tt_delta_example(6, 2, 2), (0,) * 6) == 1.0

    @pytest.mark.parametrize("d,n,r,expected", [(4, 2, 2, 4), (6, 3, 2, 8), (2, 2, 2, 2)])
    def test_paired_matricization_rank(self, d, n, r, expected):
        dense = tt_to_dense(tt_delta_example(d, n, r))
        mat = matricize(dense, odd_even_split(d))
        assert numerical_rank(mat) == expected

    def test_base_case_is_identity_matrix(self):
        np.testing.assert_array_equal(tt_to_dense(tt_delta_example(2, 2, 2)), np.eye(2))

    def test_odd_d_rejected(self):
        with pytest.raises(ValueError):
            tt_delta_example(3, 2, 2)


class TestEqualCores:
    def test_interior_cores_identical(self):
        tt = tt_equal_cores_random(6, 3, 2, seed=4)
        for k in range(2, 5):
            assert tt.cores[k] is tt.cores[1]

    def test_determinism(self):
        a = tt_equal_cores_random(5, 2, 2, seed=8)
        b = tt_equal_cores_random(5, 2, 2, seed=8)
        np.testing.assert_array_equal(tt_to_dense(a), tt_to_dense(b))

    def test_full_paired_rank_on_sampled_instances(self):
        for seed in (0, 1, 2):
            tt = tt_equal_cores_random(6, 3, 3, seed=seed)
            mat = matricize(tt_to_dense(tt), odd_even_split(6))
            assert numerical_rank(mat, 1e-12) == 27

    def test_needs_at_least_three_modes(self):
        with pytest.raises(ValueError):
            tt_equal_cores_random(2, 2, 2, seed=0)


class TestCP:
    def test_rank_one_outer_product(self):
        cp = CPTensor((np.array([[1.0], [2.0]]), np.array([[3.0], [4.0]])))
        np.testing.assert_array_equal(cp_to_dense(cp), [[3, 4], [6, 8]])

    def test_zero_factor_zero_tensor(self):
        cp = CPTensor((np.zeros((2, 3)), np.ones((2, 3))))
        assert not cp_to_dense(cp).any()

    def test_identity_from_orthonormal_factors(self):
        cp = CPTensor((np.eye(2), np.eye(2)))
        np.testing.assert_array_equal(cp_to_dense(cp), np.eye(2))

    def test_entry_matches_dense(self):
        cp = cp_random((2, 3, 2), 3, seed=6)
        dense = cp_to_dense(cp)
        for idx in itertools.product(range(2), range(3), range(2)):
            assert abs(cp_entry(cp, idx) - dense[idx]) <= 1e-12

    def test_determinism(self):
        np.testing.assert_array_equal(cp_to_dense(cp_random((2, 2), 2, 3)),
                                      cp_to_dense(cp_random((2, 2), 2, 3)))

    def test_every_matricization_rank_bounded_by_r(self):
        # max over all splits of the matrix rank never exceeds the number
        # of separable terms
        for seed in range(4):
            r = 2
            cp = cp_random((2, 2, 2, 2), r, seed=seed)
            dense = cp_to_dense(cp)
            d = 4
            for size in range(1, d):
                for s in itertools.combinations(range(1, d + 1), size):
                    assert numerical_rank(matricize(dense, s)) <= r

    def test_chain_ranks_bounded_by_cp_rank(self):
        for seed in range(4):
            cp = cp_random((2, 3, 2, 3), 3, seed=seed)
            assert np.all(ranks_from_dense(cp_to_dense(cp), "tt") <= 3)

    def test_rank_one_all_matricizations(self):
        cp = cp_random((2, 2, 3), 1, seed=1)
        dense = cp_to_dense(cp)
        for s in ([1], [2], [3], [1, 2], [1, 3]):
            assert numerical_rank(matricize(dense, s)) == 1

    def test_mixed_widths_rejected(self):
        with pytest.raises(ValueError):
            CPTensor((np.zeros((2, 2)), np.zeros((2, 3))))


class TestHT:
    def test_two_leaf_identity(self):
        root = np.zeros((2, 2, 1))
        root[:, :, 0] = np.eye(2)
        ht = HTTensor((np.eye(2), np.eye(2)), ((root,),))
        np.testing.assert_array_equal(ht_to_dense(ht), np.eye(2))

    def test_entry_matches_dense(self):
        ht = ht_random((2, 3, 2, 3), 2, seed=7)
        dense = ht_to_dense(ht)
        for idx in itertools.product(range(2), range(3), range(2), range(3)):
            assert abs(ht_entry(ht, idx) - dense[idx]) <= 1e-12 * max(1.0, abs(dense[idx]))

    def test_all_leaf_ranks_one_separable(self):
        ht = ht_random((2, 2, 2, 2), 1, seed=3)
        dense = ht_to_dense(ht)
        for s in ([1], [2], [1, 2], [1, 3]):
            assert numerical_rank(matricize(dense, s)) <= 1

    def test_zero_root_zero_tensor(self):
        ht = ht_random((2, 2), 2, seed=1)
        ht.transfer[0][0][:] = 0.0
        assert not ht_to_dense(ht).any()

    def test_determinism(self):
        np.testing.assert_array_equal(ht_to_dense(ht_random((2,) * 4, 2, 5)),
                                      ht_to_dense(ht_random((2,) * 4, 2, 5)))

    def test_eight_leaves_dense_is_finite(self):
        dense = ht_to_dense(ht_random((2,) * 8, 2, seed=11))
        assert np.all(np.isfinite(dense))

    def test_node_ranks_property_order(self):
        ht = ht_random((2, 2, 2, 2), [1, 2, 3, 4, 5, 6], seed=0)
        assert ht.node_ranks == (1, 2, 3, 4, 5, 6)

    def test_node_leaf_sets(self):
        assert ht_node_leaf_sets(4) == [(1,), (2,), (3,), (4,), (1, 2), (3, 4)]
        assert ht_node_leaf_sets(8)[-2:] == [(1, 2, 3, 4), (5, 6, 7, 8)]

    def test_leaf_count_must_be_power_of_two(self):
        with pytest.raises(ValueError):
            ht_random((2, 2, 2), 2, seed=0)


class TestRanksFromDense:
    def test_rank_one_tensor(self):
        v = np.multiply.outer(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        x = np.multiply.outer(v, np.array([1.0, -1.0]))
        assert np.all(ranks_from_dense(x, "tt") == 1)

    def test_delta_chain(self):
        dense = tt_to_dense(tt_delta_example(4, 2, 2))
        np.testing.assert_array_equal(ranks_from_dense(dense, "tt"), [2, 1, 2])

    def test_tree_ranks_of_random_tree(self):
        dense = ht_to_dense(ht_random((2, 2, 2, 2), 2, seed=9))
        assert np.all(ranks_from_dense(dense, "ht") <= 2)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="tt.*ht|'tt' or 'ht'"):
            ranks_from_dense(np.zeros((2, 2)), "tucker")
