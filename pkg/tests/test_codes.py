"""Tests for ldpc_lab.codes."""

import pickle

import numpy as np
import pytest

from ldpc_lab.codes import (
    Codeword,
    ParityCheckMatrix,
    build_array_code,
    build_random_regular,
    enumerate_codewords,
    gf2_rank,
    nullspace_basis,
    syndrome_check,
)
from ldpc_lab.models import ConstructionError, InvalidInputError


class TestParityCheckMatrix:
    def test_adjacency_is_consistent(self, hamming74):
        for a, row in enumerate(hamming74.check_neighbors):
            for i in row:
                assert a in hamming74.var_neighbors[i]
        for i, checks in enumerate(hamming74.var_neighbors):
            for a in checks:
                assert i in hamming74.check_neighbors[a]

    def test_edge_index_is_a_bijection(self, array53):
        seen = set()
        for e in range(array53.n_edges):
            i, a = array53.edge_pair(e)
            assert array53.edge_id(i, a) == e
            seen.add((i, a))
        assert len(seen) == array53.n_edges == 25 * 3

    def test_rejects_repeated_variable(self):
        with pytest.raises(InvalidInputError):
            ParityCheckMatrix(3, [[0, 0, 1]])

    def test_rejects_out_of_range_index(self):
        with pytest.raises(InvalidInputError):
            ParityCheckMatrix(3, [[0, 3]])

    def test_rejects_empty_code(self):
        with pytest.raises(InvalidInputError):
            ParityCheckMatrix(0, [])

    def test_missing_edge_lookup(self, toy_code):
        with pytest.raises(InvalidInputError):
            toy_code.edge_id(0, 1)

    def test_is_immutable(self, toy_code):
        with pytest.raises(AttributeError):
            toy_code.n_vars = 4

    def test_pickles(self, array53):
        assert pickle.loads(pickle.dumps(array53)) == array53

    def test_dense_round_trip(self, hamming74):
        assert ParityCheckMatrix.from_dense(hamming74.to_dense()) == hamming74

    def test_unsatisfied_checks(self, toy_code):
        assert toy_code.unsatisfied_checks([0, 1, 0]) == 2
        assert toy_code.unsatisfied_checks([1, 0, 0]) == 1


class TestSyndromeCheck:
    def test_zero_word(self, array53):
        assert syndrome_check(array53, np.zeros(25, dtype=np.uint8))

    def test_single_one(self, array53):
        word = np.zeros(25, dtype=np.uint8)
        word[7] = 1
        assert not syndrome_check(array53, word)

    def test_matches_dense_multiply(self, array53, array53_codebook):
        dense = array53.to_dense()
        rng = np.random.default_rng(5)
        for word in array53_codebook[rng.integers(0, len(array53_codebook), 20)]:
            assert not ((dense @ word) % 2).any()
            assert syndrome_check(array53, word)
        for _ in range(20):
            word = rng.integers(0, 2, 25).astype(np.uint8)
            assert syndrome_check(array53, word) == (not ((dense @ word) % 2).any())

    def test_length_mismatch(self, toy_code):
        with pytest.raises(InvalidInputError):
            syndrome_check(toy_code, [0, 0])

    def test_non_binary_word(self, toy_code):
        with pytest.raises(InvalidInputError):
            syndrome_check(toy_code, [0, 2, 0])


class TestCodeword:
    def test_bpsk_mapping(self):
        assert Codeword(np.array([0, 1, 1, 0])).bpsk.tolist() == [1.0, -1.0, -1.0, 1.0]

    def test_rejects_non_binary(self):
        with pytest.raises(InvalidInputError):
            Codeword(np.array([0, 3]))


class TestArrayCode:
    def test_large_array_code_dimensions(self):
        h = build_array_code(47, 4)
        assert (h.n_vars, h.n_checks) == (2209, 188)
        assert h.design_rate == pytest.approx(43 / 47)
        rate, is_design = h.rate()
        assert not is_design
        assert rate == pytest.approx(0.916, abs=1e-3)

    def test_single_block_row(self):
        h = build_array_code(5, 1)
        assert (h.n_vars, h.n_checks) == (25, 5)
        assert set(h.check_degree.tolist()) == {5}
        assert set(h.var_degree.tolist()) == {1}

    def test_degree_profile_and_circulant(self, array53):
        assert set(array53.var_degree.tolist()) == {3}
        assert set(array53.check_degree.tolist()) == {5}
        dense = array53.to_dense()
        shift = np.roll(np.eye(5, dtype=np.uint8), 1, axis=1)
        assert (dense[10:15, 15:20] == shift).all()

    def test_rejects_composite_q(self):
        with pytest.raises(InvalidInputError):
            build_array_code(6, 2)

    def test_rejects_j_above_q(self):
        with pytest.raises(InvalidInputError):
            build_array_code(5, 6)


class TestRandomRegular:
    def test_degrees(self):
        h = build_random_regular(6, 2, 3, seed=1)
        assert h.n_checks == 4
        assert set(h.var_degree.tolist()) == {2}
        assert set(h.check_degree.tolist()) == {3}

    def test_perfect_matching(self):
        h = build_random_regular(4, 1, 2, seed=3)
        assert h.n_checks == 2
        assert sorted(i for row in h.check_neighbors for i in row) == [0, 1, 2, 3]

    def test_deterministic_per_seed(self):
        assert build_random_regular(96, 3, 6, seed=9) == build_random_regular(
            96, 3, 6, seed=9
        )

    def test_indivisible_sockets(self):
        with pytest.raises(InvalidInputError):
            build_random_regular(5, 2, 3, seed=0)

    def test_impossible_graph_hits_retry_bound(self):
        # two checks of degree 3 over two variables cannot avoid parallel edges
        with pytest.raises(ConstructionError):
            build_random_regular(2, 3, 3, seed=0, max_retries=5)


class TestGf2:
    def test_rank_and_codebook(self, hamming74, hamming_codebook):
        assert gf2_rank(hamming74.to_dense()) == 3
        assert hamming_codebook.shape == (16, 7)
        assert not hamming_codebook[0].any()
        assert len({w.tobytes() for w in hamming_codebook}) == 16
        for word in hamming_codebook:
            assert syndrome_check(hamming74, word)

    def test_array_code_rank_deficiency(self, array53, array53_codebook):
        # j*q - (j - 1) independent rows
        assert gf2_rank(array53.to_dense()) == 13
        assert array53_codebook.shape == (1 << 12, 25)

    def test_nullspace_basis_rows_are_codewords(self, array53):
        for row in nullspace_basis(array53):
            assert syndrome_check(array53, row)

    def test_enumeration_limit(self, array53):
        with pytest.raises(InvalidInputError):
            enumerate_codewords(array53, limit=1 << 10)
