"""Monte Carlo word-error-rate harness.

Trial i at channel point k draws everything from SeedSequence(seed,
spawn_key=(k, i)): substream 0 is the channel noise and substream 1 + s drives
stage s of the decoder. Trials run in fixed-size batches, possibly in worker
processes, but are merged strictly in trial order and a record stops at
exactly the same trial whatever the worker count.
"""

import concurrent.futures
import logging
import math
import os
import time
from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm

from ldpc_lab.channel import AWGN, BSC, ChannelModel, energy, llr_from_observation, transmit
from ldpc_lab.codes import ParityCheckMatrix, bpsk, enumerate_codewords
from ldpc_lab.models import (
    DEFAULT_CLIP,
    InvalidInputError,
    OutcomeKind,
    SweepRecord,
    TrialClassification,
)
from ldpc_lab.multistage import (
    StageConfig,
    StagePipeline,
    multistage_decode,
    substream,
)

logger = logging.getLogger(__name__)

# Scheduling defaults; override via env vars.
WORKERS = int(os.getenv("LDPC_LAB_WORKERS", "1"))
BATCH = int(os.getenv("LDPC_LAB_BATCH", "64"))

SNR_POINTS = "snr"
P_POINTS = "p"


@dataclass(frozen=True)
class SweepSpec:
    code: ParityCheckMatrix
    decoders: tuple[StagePipeline, ...]
    points: tuple[float, ...]
    channel: str = BSC
    point_kind: str = SNR_POINTS  # "snr" (dB) or "p" (BSC crossover)
    target_errors: int = 100
    max_trials: int = 10**7
    seed: int = 0
    workers: int = WORKERS
    batch: int = BATCH
    rate: float | None = None  # None: exact rate from the GF(2) rank
    llr_cap: float = DEFAULT_CLIP
    ml_oracle: bool = False
    timing: bool = True

    def __post_init__(self):
        if not self.points:
            raise InvalidInputError("a sweep needs at least one channel point")
        if not self.decoders:
            raise InvalidInputError("a sweep needs at least one decoder")
        if self.target_errors < 1:
            raise InvalidInputError("target error events must be >= 1")
        if self.max_trials < 1:
            raise InvalidInputError("max trials must be >= 1")
        if self.workers < 1 or self.batch < 1:
            raise InvalidInputError("workers and batch size must be >= 1")
        if self.channel not in (AWGN, BSC):
            raise InvalidInputError(f"unknown channel {self.channel!r}")
        if self.point_kind not in (SNR_POINTS, P_POINTS):
            raise InvalidInputError(f"unknown point kind {self.point_kind!r}")
        if self.point_kind == P_POINTS and self.channel != BSC:
            raise InvalidInputError("crossover points only apply to the BSC")

    def code_rate(self) -> float:
        return self.rate if self.rate is not None else self.code.rate()[0]

    def channel_at(self, x: float) -> ChannelModel:
        rate = self.code_rate()
        if self.point_kind == P_POINTS:
            return ChannelModel.bsc(x, rate)
        return ChannelModel.from_snr(self.channel, x, rate)


# ---------------------------------------------------------------------------
# Statistics and oracles
# ---------------------------------------------------------------------------
def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for k events in n trials."""
    if n == 0:
        return 0.0, 1.0
    if not 0 <= k <= n:
        raise InvalidInputError(f"need 0 <= k <= n, got k={k}, n={n}")
    z = float(norm.ppf(1.0 - (1.0 - confidence) / 2.0))
    p_hat = k / n
    denom = 1.0 + z * z / n
    center = (p_hat + z * z / (2 * n)) / denom
    margin = z * math.sqrt(p_hat * (1 - p_hat) / n + z * z / (4 * n * n)) / denom
    # the endpoints are exact at k=0 and k=n; center - margin cancels there
    lo = 0.0 if k == 0 else max(0.0, center - margin)
    hi = 1.0 if k == n else min(1.0, center + margin)
    return lo, hi


def ml_decode(codebook: np.ndarray, llr) -> np.ndarray:
    """Minimum-energy codeword of an enumerated codebook (first one on ties)."""
    L = getattr(llr, "llr", llr)
    energies = -((1.0 - 2.0 * codebook) @ np.asarray(L, dtype=float))
    return codebook[int(np.argmin(energies))].copy()


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------
def trial_seed(seed: int, point: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(point, trial))


def run_trial(
    code: ParityCheckMatrix,
    ch: ChannelModel,
    pipeline: StagePipeline,
    seed_seq: np.random.SeedSequence,
    codebook: np.ndarray | None = None,
    llr_cap: float = DEFAULT_CLIP,
    timing: bool = True,
) -> TrialClassification:
    """Send the all-zeros codeword, decode and classify the outcome."""
    x = np.ones(code.n_vars)
    y = transmit(x, ch, np.random.default_rng(substream(seed_seq, 0)))
    llr = llr_from_observation(y, ch, llr_cap=llr_cap)

    start = time.perf_counter()
    outcome = multistage_decode(pipeline, code, llr, seed_seq)
    wall_ms = (time.perf_counter() - start) * 1000.0 if timing else 0.0

    ml_error = bool(codebook is not None and ml_decode(codebook, llr).any())
    word = outcome.word
    bit_errors = int(word.sum()) if word is not None else code.n_vars
    common = dict(
        ml_error=ml_error,
        iterations=outcome.iterations,
        stage=outcome.stage,
        bit_errors=bit_errors,
        wall_ms=wall_ms,
    )
    if not outcome.success:
        return TrialClassification(OutcomeKind.DETECTED_FAILURE, **common)
    if not word.any():
        return TrialClassification(OutcomeKind.CORRECT, **common)

    e_decoded = energy(bpsk(word), llr)
    e_sent = energy(x, llr)
    if e_decoded == e_sent:
        logger.debug("undetected error with energy equal to the transmitted word")
    return TrialClassification(
        OutcomeKind.UNDETECTED_ERROR,
        ml_beat=e_decoded < e_sent,
        tie=e_decoded == e_sent,
        **common,
    )


def _run_batch(
    code: ParityCheckMatrix,
    ch: ChannelModel,
    pipeline: StagePipeline,
    seed: int,
    point: int,
    first: int,
    last: int,
    codebook: np.ndarray | None,
    llr_cap: float,
    timing: bool,
) -> list[TrialClassification]:
    return [
        run_trial(code, ch, pipeline, trial_seed(seed, point, i), codebook, llr_cap, timing)
        for i in range(first, last)
    ]


def finalize(rec: SweepRecord) -> SweepRecord:
    """Fill the derived rates and intervals from the raw counts."""
    rec.check_counts()
    if rec.trials:
        rec.wer = rec.errors / rec.trials
        rec.ber = rec.bit_errors / (rec.trials * rec.n_bits) if rec.n_bits else 0.0
        rec.mean_iters = rec.total_iters / rec.trials
        rec.mean_ms = rec.total_ms / rec.trials
    rec.ci_lo, rec.ci_hi = wilson_interval(rec.errors, rec.trials)
    return rec


def _done(rec: SweepRecord, spec: SweepSpec) -> bool:
    return rec.errors >= spec.target_errors or rec.trials >= spec.max_trials


@dataclass
class _PointRun:
    """Batches for one (decoder, point) record, merged in trial order."""

    spec: SweepSpec
    pipeline: StagePipeline
    point: int
    ch: ChannelModel
    codebook: np.ndarray | None
    rec: SweepRecord
    next_trial: int = 0
    pending: deque = field(default_factory=deque)

    def batch_args(self) -> tuple | None:
        if self.next_trial >= self.spec.max_trials:
            return None
        first = self.next_trial
        last = min(first + self.spec.batch, self.spec.max_trials)
        self.next_trial = last
        return (
            self.spec.code,
            self.ch,
            self.pipeline,
            self.spec.seed,
            self.point,
            first,
            last,
            self.codebook,
            self.spec.llr_cap,
            self.spec.timing,
        )

    def merge(self, trials: list[TrialClassification]) -> None:
        for trial in trials:
            if _done(self.rec, self.spec):
                break
            self.rec.add(trial)
        logger.info(
            f"{self.rec.decoder} @ {self.rec.channel_x}: "
            f"{self.rec.trials} trials, {self.rec.errors} errors"
        )


def _run_record(run: _PointRun, pool: concurrent.futures.Executor | None) -> SweepRecord:
    if pool is None:
        while not _done(run.rec, run.spec) and (args := run.batch_args()):
            run.merge(_run_batch(*args))
        return run.rec

    in_flight = 2 * run.spec.workers
    while not _done(run.rec, run.spec):
        while len(run.pending) < in_flight and (args := run.batch_args()):
            run.pending.append(pool.submit(_run_batch, *args))
        if not run.pending:
            break
        run.merge(run.pending.popleft().result())
    for fut in run.pending:
        fut.cancel()
    run.pending.clear()
    return run.rec


def run_sweep(
    spec: SweepSpec, on_record: Callable[[SweepRecord], None] | None = None
) -> list[SweepRecord]:
    """One finalized record per (channel point, decoder), in that order."""
    codebook = enumerate_codewords(spec.code) if spec.ml_oracle else None
    records: list[SweepRecord] = []
    pool = (
        concurrent.futures.ProcessPoolExecutor(max_workers=spec.workers)
        if spec.workers > 1
        else None
    )
    try:
        for k, x in enumerate(spec.points):
            ch = spec.channel_at(x)
            logger.info(f"channel point {x} ({ch.describe()})")
            for pipeline in spec.decoders:
                rec = SweepRecord(
                    pipeline.label, spec.channel, float(x), n_bits=spec.code.n_vars
                )
                run = _PointRun(spec, pipeline, k, ch, codebook, rec)
                finalize(_run_record(run, pool))
                logger.info(
                    f"{rec.decoder} @ {x}: {rec.errors}/{rec.trials} errors, "
                    f"WER {rec.wer:.3g} [{rec.ci_lo:.3g}, {rec.ci_hi:.3g}]"
                )
                records.append(rec)
                if on_record is not None:
                    on_record(rec)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return records


# ---------------------------------------------------------------------------
# Utilities built on sweeps
# ---------------------------------------------------------------------------
def tune_z(
    spec: SweepSpec, z_grid: Sequence[float], t_max: int = 50
) -> tuple[list[SweepRecord], float]:
    """DMBP at every Z of the grid on the spec's first channel point.

    Returns the records and the Z with the lowest WER (ties go to the first).
    """
    if not z_grid:
        raise InvalidInputError("empty Z grid")
    pipelines = tuple(
        StagePipeline(
            (StageConfig("dmbp", t_max=t_max, z=z, clip=spec.llr_cap),),
            name=f"dmbp(z={z:g})",
        )
        for z in z_grid
    )
    records = run_sweep(replace(spec, decoders=pipelines, points=spec.points[:1]))
    best = min(range(len(records)), key=lambda i: records[i].wer)
    return records, float(z_grid[best])


def bisect_channel_point(
    spec: SweepSpec,
    target_wer: float,
    lo: float,
    hi: float,
    trials: int = 2000,
    steps: int = 8,
) -> float:
    """SNR in [lo, hi] dB where the spec's first decoder reaches `target_wer`.

    WER is taken to decrease with SNR; every probe runs a fixed trial count.
    """
    if not 0 < target_wer < 1:
        raise InvalidInputError(f"target WER must be in (0, 1), got {target_wer}")
    if spec.point_kind != SNR_POINTS:
        raise InvalidInputError("bisection runs over SNR points")
    probe = replace(
        spec,
        decoders=spec.decoders[:1],
        target_errors=trials,
        max_trials=trials,
        timing=False,
    )
    for _ in range(steps):
        mid = (lo + hi) / 2.0
        wer = run_sweep(replace(probe, points=(mid,)))[0].wer
        logger.info(f"bisection: WER {wer:.3g} at {mid:.3f} dB")
        if wer > target_wer:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0
