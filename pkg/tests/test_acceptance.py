"""Long statistical checks of the decoders and the harness.

Deselected by default; run with `pytest -m slow`.
"""

import itertools
from dataclasses import replace

import numpy as np
import pytest

from ldpc_lab.bp import bp_decode
from ldpc_lab.channel import ChannelModel, llr_from_observation, transmit
from ldpc_lab.codes import ParityCheckMatrix, build_array_code, build_random_regular, syndrome_check
from ldpc_lab.dc import (
    dc_belief_update,
    dc_check_update,
    dc_decode,
    dc_initial_state,
    dc_projection_pair,
    dc_variable_update,
    energy_bound,
    energy_divide_projection,
    extended_edge_var,
    spc_divide_projection,
)
from ldpc_lab.dm import initial_state
from ldpc_lab.dmbp import Z_ARRAY_BSC, dmbp_decode
from ldpc_lab.harness import (
    SweepSpec,
    bisect_channel_point,
    ml_decode,
    run_sweep,
    run_trial,
    trial_seed,
    wilson_interval,
)
from ldpc_lab.models import BpConfig, DcConfig, DmbpConfig, OutcomeKind
from ldpc_lab.multistage import multistage_decode, parse_pipeline, run_stage, stage_rng, substream

pytestmark = pytest.mark.slow


def even_patterns(degree: int) -> np.ndarray:
    rows = [s for s in itertools.product((1.0, -1.0), repeat=degree) if s.count(-1.0) % 2 == 0]
    return np.array(rows)


def channel_llr(code, ch, ss):
    y = transmit(np.ones(code.n_vars), ch, np.random.default_rng(substream(ss, 0)))
    return llr_from_observation(y, ch)


class TestProjections:
    def test_spc_against_exhaustive_search(self):
        rng = np.random.default_rng(2024)
        for degree in range(2, 13):
            patterns = even_patterns(degree)
            msgs = rng.normal(size=(10_000, degree))
            best = np.empty(len(msgs))
            for lo in range(0, len(msgs), 200):
                chunk = msgs[lo : lo + 200]
                dist = ((chunk[:, None, :] - patterns[None, :, :]) ** 2).sum(axis=2)
                best[lo : lo + 200] = dist.min(axis=1)
            for m, target in zip(msgs, best):
                h = spc_divide_projection(m, rng)
                assert np.sum((m - h) ** 2) == pytest.approx(target, rel=1e-12, abs=1e-12)

    def test_energy_contract(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            n = int(rng.integers(1, 40))
            L = rng.normal(scale=rng.uniform(0.1, 10.0), size=n)
            m = rng.normal(scale=2.0, size=n)
            e_max = energy_bound(L, float(rng.uniform(1e-4, 0.5)))
            h = energy_divide_projection(m, L, e_max)
            if -np.dot(L, m) <= e_max:
                continue
            assert -np.dot(L, h) == pytest.approx(e_max, rel=1e-9)
            d = h - m
            cos = abs(np.dot(d, L)) / (np.linalg.norm(d) * np.linalg.norm(L))
            assert np.arccos(min(cos, 1.0)) < 1e-6
            assert energy_divide_projection(h, L, e_max) == pytest.approx(h, rel=1e-9, abs=1e-9)


class TestDcIsDifferenceMap:
    @pytest.mark.parametrize("shape", [(12, 2, 4), (12, 3, 6), (10, 2, 5), (8, 2, 4), (12, 3, 4)])
    def test_every_iteration(self, shape):
        code = build_random_regular(*shape, seed=sum(shape))
        for trial in range(20):
            L = np.random.default_rng(trial).normal(1.0, 1.2, size=code.n_vars)
            state = dc_initial_state(code, L, 0.01)
            rng_dc, rng_dm = np.random.default_rng(trial), np.random.default_rng(trial)
            pair = dc_projection_pair(code, L, state.e_max, rng_dm)
            ext = extended_edge_var(code)
            for _ in range(30):
                s = initial_state(state.var_to_chk, pair)
                dc_check_update(state, code, L, rng_dc)
                dc_belief_update(state, code)
                assert (state.chk_to_var == s.r_over).all()
                assert (state.beliefs[ext] == s.r_conc).all()
                dc_variable_update(state, code)
                assert np.abs(state.var_to_chk - (s.r_conc - (s.r_div - s.r))).max() < 1e-12


class TestSyndromeGate:
    def test_successes_are_codewords(self, array53):
        decoders = ["dc", "dmbp", "bp", "minsum", "alg-e", "e-bp-dmbp"]
        for i in range(3000):
            ss = trial_seed(99, 0, i)
            p = (0.02, 0.06, 0.1)[i % 3]
            llr = channel_llr(array53, ChannelModel.bsc(p), ss)
            out = multistage_decode(parse_pipeline(decoders[i % len(decoders)]), array53, llr, ss)
            if out.success:
                assert syndrome_check(array53, out.word)


class TestMlAgreement:
    P = 0.04

    def agreement(self, code, codebook, decode, trials=10_000):
        agree = 0
        for i in range(trials):
            ss = trial_seed(5, 0, i)
            llr = channel_llr(code, ChannelModel.bsc(self.P), ss)
            out = decode(code, llr, np.random.default_rng(substream(ss, 1)))
            agree += int((out.word == ml_decode(codebook, llr)).all())
        return agree, trials

    def test_decoders_track_ml(self, array53, array53_codebook):
        rates = {}
        for name, decode in {
            "bp": lambda c, l, r: bp_decode(c, l, BpConfig(), r),
            "minsum": lambda c, l, r: bp_decode(c, l, BpConfig(variant="min-sum"), r),
            "dmbp": lambda c, l, r: dmbp_decode(c, l, DmbpConfig(z=0.35), r),
            "dc": lambda c, l, r: dc_decode(c, l, DcConfig(), r),
        }.items():
            rates[name] = self.agreement(array53, array53_codebook, decode)
        for name in ("bp", "dmbp", "dc"):
            k, n = rates[name]
            assert k / n >= 0.9, name
        _, dmbp_hi = wilson_interval(*rates["dmbp"])
        assert dmbp_hi >= rates["minsum"][0] / rates["minsum"][1]


class TestDcUndetectedErrors:
    def test_most_errors_are_wrong_codewords(self, array53, array53_codebook):
        ch = ChannelModel.from_snr("awgn", 6.0, array53.rate()[0])
        pipeline = parse_pipeline("dc")
        errors = undetected = 0
        for i in range(20_000):
            ss = trial_seed(11, 0, i)
            out = run_trial(array53, ch, pipeline, ss, codebook=array53_codebook, timing=False)
            if out.kind is OutcomeKind.CORRECT:
                continue
            errors += 1
            if out.kind is OutcomeKind.UNDETECTED_ERROR:
                undetected += 1
                if out.ml_beat:
                    assert out.ml_error
            if errors >= 100:
                break
        assert errors > 0
        assert undetected / errors > 0.5


class TestMultistageReplay:
    def test_last_stage_matches_standalone_dmbp(self, array53):
        pipeline = parse_pipeline("e-bp-dmbp")
        for i in range(1000):
            ss = trial_seed(3, 0, i)
            llr = channel_llr(array53, ChannelModel.bsc(0.07), ss)
            standalone = [run_stage(s, array53, llr, stage_rng(ss, k)) for k, s in enumerate(pipeline.stages)]
            out = multistage_decode(pipeline, array53, llr, ss)
            if not standalone[0].success and not standalone[1].success:
                assert out.stage == 2
                assert out.success == standalone[2].success
                assert (out.word == standalone[2].word).all()
            else:
                assert out.stage < 2

    def test_first_stage_share_grows_with_snr(self, array53):
        spec = SweepSpec(
            code=array53,
            decoders=(parse_pipeline("e-bp-dmbp"),),
            points=(0.08, 0.05, 0.02),
            point_kind="p",
            target_errors=10**6,
            max_trials=1500,
            seed=8,
            timing=False,
        )
        shares = [rec.stage1 / rec.trials for rec in run_sweep(spec)]
        assert shares[0] < shares[1] < shares[2]


class TestDeterminism:
    def test_worker_counts(self, array53):
        def records(workers):
            spec = SweepSpec(
                code=array53,
                decoders=(parse_pipeline("dmbp", t_max=20), parse_pipeline("e-bp")),
                points=(0.03, 0.06, 0.09),
                point_kind="p",
                target_errors=30,
                max_trials=3000,
                seed=42,
                workers=workers,
                batch=16,
                timing=False,
            )
            return [r.to_dict() for r in run_sweep(spec)]

        serial = records(1)
        assert records(4) == serial
        assert records(8) == serial


class TestLargeArrayCodeOrdering:
    def test_dmbp_below_bp(self):
        code = build_array_code(47, 4)
        rate = code.rate()[0]
        bp = parse_pipeline("bp", t_max=50)
        base = SweepSpec(
            code=code,
            decoders=(bp,),
            points=(6.0,),
            rate=rate,
            target_errors=200,
            max_trials=400_000,
            seed=1,
            workers=8,
            timing=False,
        )
        snr = bisect_channel_point(base, 1e-2, 4.0, 9.0, trials=1000, steps=6)
        dmbp = parse_pipeline("dmbp", t_max=50, z=Z_ARRAY_BSC)
        bp_rec, dmbp_rec = run_sweep(
            replace(base, decoders=(bp, dmbp), points=(snr,))
        )
        assert dmbp_rec.wer <= bp_rec.wer
        assert dmbp_rec.ci_hi < bp_rec.ci_lo


class TestEstimator:
    def test_wer_matches_known_error_rate(self, monkeypatch):
        from ldpc_lab import harness
        from ldpc_lab.models import DecodeOutcome

        pi = 0.1
        code = ParityCheckMatrix(2, [[0, 1]])

        def coin_decoder(pipeline, code, llr, ss):
            fail = np.random.default_rng(substream(ss, 1)).random() < pi
            return DecodeOutcome(not fail, 1, np.zeros(code.n_vars, dtype=np.uint8))

        monkeypatch.setattr(harness, "multistage_decode", coin_decoder)
        covered = 0
        for seed in range(40):
            spec = SweepSpec(
                code=code,
                decoders=(parse_pipeline("bp"),),
                points=(0.05,),
                point_kind="p",
                target_errors=100,
                seed=seed,
                timing=False,
            )
            rec = run_sweep(spec)[0]
            covered += int(rec.ci_lo <= pi <= rec.ci_hi)
        assert covered >= 34
