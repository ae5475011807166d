"""Tests for ldpc_lab.dmbp."""

import math

import numpy as np
import pytest

from ldpc_lab.bp import bp_beliefs, bp_decode, min_sum_check_messages
from ldpc_lab.channel import ChannelModel, llr_from_observation, transmit
from ldpc_lab.codes import ParityCheckMatrix, syndrome_check
from ldpc_lab.dmbp import dmbp_belief_update, dmbp_decode, dmbp_variable_update
from ldpc_lab.harness import ml_decode
from ldpc_lab.models import DmbpConfig, InvalidInputError

LC = math.log(0.9 / 0.1)


class TestBeliefUpdate:
    def test_scaled_sum(self):
        code = ParityCheckMatrix(1, [[0], [0]])
        b = dmbp_belief_update(code, np.array([0.5]), np.array([1.5, 0.5]), 0.35)
        assert b[0] == pytest.approx(0.875)

    def test_unit_scale_is_bp_belief(self, array53, rng):
        L = rng.normal(size=25)
        c2v = rng.normal(size=array53.n_edges)
        assert dmbp_belief_update(array53, L, c2v, 1.0) == pytest.approx(
            bp_beliefs(array53, L, c2v)
        )

    def test_zero_inputs(self, toy_code):
        b = dmbp_belief_update(toy_code, np.zeros(3), np.zeros(4), 0.35)
        assert b.tolist() == [0.0, 0.0, 0.0]


class TestVariableUpdate:
    def test_correction_vanishes_when_messages_agree(self, toy_code):
        b = np.array([0.2, -0.4, 0.9])
        msgs = np.array([1.0, 2.0, 3.0, 4.0])
        out = dmbp_variable_update(toy_code, b, msgs, msgs, clip=25.0)
        assert out.tolist() == [0.2, -0.4, -0.4, 0.9]

    def test_clipped(self, toy_code):
        b = np.array([10.0, 0.0, 0.0])
        out = dmbp_variable_update(toy_code, b, np.full(4, -10.0), np.zeros(4), clip=12.0)
        assert out[0] == 12.0
        assert out[1] == 5.0


class TestHandTrace:
    def test_first_iteration(self, toy_code):
        L = np.array([1.0, -2.0, 0.5])
        v2c = L[toy_code.edge_var]
        c2v = min_sum_check_messages(toy_code, v2c)
        assert c2v.tolist() == [-2.0, 1.0, 0.5, -2.0]
        b = dmbp_belief_update(toy_code, L, c2v, 0.5)
        assert b.tolist() == [-0.5, -0.25, -0.75]
        nxt = dmbp_variable_update(toy_code, b, c2v, v2c, clip=25.0)
        assert nxt.tolist() == [1.0, -1.75, -1.5, 0.5]

    def test_decodes_to_all_ones(self, toy_code):
        out = dmbp_decode(toy_code, np.array([1.0, -2.0, 0.5]), DmbpConfig(z=0.5))
        assert out.success
        assert out.iterations == 1
        assert out.word.tolist() == [1, 1, 1]


class TestDecode:
    def test_noiseless(self, hamming74):
        out = dmbp_decode(hamming74, np.full(7, LC), rng=np.random.default_rng(0))
        assert out.success
        assert out.iterations == 1
        assert not out.word.any()

    def test_single_flip(self, array53):
        for bit in (2, 13):
            L = np.full(25, LC)
            L[bit] = -LC
            out = dmbp_decode(array53, L, rng=np.random.default_rng(0))
            assert out.success
            assert out.iterations == 1
            assert not out.word.any()

    def test_scale_covariance(self, array53, rng):
        # min-sum and the overshoot rule are both homogeneous in the messages
        L = rng.normal(1.0, 1.5, size=25)
        cfg = DmbpConfig(t_max=30, clip=1e6)
        a = dmbp_decode(array53, L, cfg, np.random.default_rng(3))
        b = dmbp_decode(array53, 4.0 * L, cfg, np.random.default_rng(3))
        assert (a.success, a.iterations) == (b.success, b.iterations)
        assert (a.word == b.word).all()

    def test_deterministic_per_seed(self, array53, rng):
        L = rng.normal(0.8, 1.5, size=25)
        a = dmbp_decode(array53, L, DmbpConfig(t_max=20), np.random.default_rng(9))
        b = dmbp_decode(array53, L, DmbpConfig(t_max=20), np.random.default_rng(9))
        assert a.iterations == b.iterations
        assert (a.word == b.word).all()

    def test_success_is_codeword(self, array53):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            L = np.where(rng.random(25) < 0.08, -LC, LC)
            out = dmbp_decode(array53, L, DmbpConfig(t_max=30), rng)
            assert out.success == syndrome_check(array53, out.word)

    def test_hamming_agrees_with_ml_at_least_as_often_as_bp(self, hamming74, hamming_codebook):
        ch = ChannelModel.bsc(0.05)
        dm = bp = 0
        for seed in range(2000):
            rng = np.random.default_rng(seed)
            llr = llr_from_observation(transmit(np.ones(7), ch, rng), ch)
            ml = ml_decode(hamming_codebook, llr)
            dm += int((dmbp_decode(hamming74, llr, rng=np.random.default_rng(seed)).word == ml).all())
            bp += int((bp_decode(hamming74, llr, rng=np.random.default_rng(seed)).word == ml).all())
        assert dm >= 0.95 * 2000
        assert dm >= bp

    def test_trace(self, array53, rng):
        L = rng.normal(1.0, 1.0, size=25)
        out = dmbp_decode(array53, L, DmbpConfig(trace=True, t_max=15), rng)
        assert len(out.trace) == out.iterations
        if out.success:
            assert out.trace[-1].max_message_change == 0.0

    def test_rejects_non_positive_z(self):
        with pytest.raises(InvalidInputError):
            DmbpConfig(z=0.0)
