"""Multistage decoding: detectable failures of fast stages hand over to slower ones.

Every stage decodes the original channel LLRs with its own RNG substream
derived from the trial seed and the stage index, so a stage reached through a
pipeline behaves exactly like the same decoder run on its own.
"""

import logging
import time
from dataclasses import dataclass, replace

import numpy as np

from ldpc_lab.bp import algorithm_e_decode, bp_decode
from ldpc_lab.channel import LlrVector, hard_decisions
from ldpc_lab.codes import ParityCheckMatrix
from ldpc_lab.dc import dc_decode
from ldpc_lab.dmbp import dmbp_decode
from ldpc_lab.models import (
    DEFAULT_CLIP,
    AlgEConfig,
    BpConfig,
    DcConfig,
    DecodeOutcome,
    DmbpConfig,
    InvalidInputError,
)

logger = logging.getLogger(__name__)

DECODERS = ("dc", "dmbp", "bp", "minsum", "alg-e")

# Named compositions; single decoders are one-stage pipelines
PIPELINES: dict[str, tuple[str, ...]] = {
    **{name: (name,) for name in DECODERS},
    "e-bp": ("alg-e", "bp"),
    "e-bp-dmbp": ("alg-e", "bp", "dmbp"),
    "e-bp-dc": ("alg-e", "bp", "dc"),
    "bp-dmbp": ("bp", "dmbp"),
    "bp-dc": ("bp", "dc"),
}


@dataclass(frozen=True)
class StageConfig:
    decoder: str
    t_max: int | None = None  # None: the decoder's own default
    z: float = 0.35
    epsilon: float = 0.01
    clip: float = DEFAULT_CLIP
    trace: bool = False

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise InvalidInputError(
                f"unknown decoder {self.decoder!r}; choose from {', '.join(DECODERS)}"
            )
        if self.t_max is not None and self.t_max < 1:
            raise InvalidInputError(f"t_max must be >= 1, got {self.t_max}")

    def cap(self, default: int) -> int:
        return self.t_max if self.t_max is not None else default


@dataclass(frozen=True)
class StagePipeline:
    stages: tuple[StageConfig, ...]
    name: str = ""

    def __post_init__(self):
        if not self.stages:
            raise InvalidInputError("a pipeline needs at least one stage")

    @property
    def label(self) -> str:
        return self.name or ",".join(s.decoder for s in self.stages)


def parse_pipeline(text: str, **stage_opts) -> StagePipeline:
    """A registry name ("e-bp-dmbp") or a comma-separated list ("alg-e,bp,dmbp").

    `stage_opts` (t_max, z, epsilon, clip, trace) apply to every stage.
    """
    key = text.strip().lower()
    if key in PIPELINES:
        names, label = PIPELINES[key], key
    else:
        names = tuple(p.strip() for p in key.split(",") if p.strip())
        label = ""
    if not names:
        raise InvalidInputError(f"empty pipeline {text!r}")
    return StagePipeline(tuple(StageConfig(n, **stage_opts) for n in names), label)


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------
def substream(ss: np.random.SeedSequence, k: int) -> np.random.SeedSequence:
    """Child k of a seed sequence, independent of how many children were spawned."""
    return np.random.SeedSequence(entropy=ss.entropy, spawn_key=tuple(ss.spawn_key) + (k,))


def stage_rng(ss: np.random.SeedSequence, stage: int) -> np.random.Generator:
    # substream 0 is the channel noise
    return np.random.default_rng(substream(ss, 1 + stage))


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------
def run_stage(
    stage: StageConfig,
    code: ParityCheckMatrix,
    llr: LlrVector,
    rng: np.random.Generator,
) -> DecodeOutcome:
    match stage.decoder:
        case "dc":
            cfg = DcConfig(
                t_max=stage.cap(DcConfig.t_max), epsilon=stage.epsilon, trace=stage.trace
            )
            return dc_decode(code, llr, cfg, rng)
        case "dmbp":
            cfg = DmbpConfig(
                z=stage.z,
                t_max=stage.cap(DmbpConfig.t_max),
                clip=stage.clip,
                trace=stage.trace,
            )
            return dmbp_decode(code, llr, cfg, rng)
        case "bp" | "minsum":
            cfg = BpConfig(
                t_max=stage.cap(BpConfig.t_max),
                variant="sum-product" if stage.decoder == "bp" else "min-sum",
                clip=stage.clip,
                trace=stage.trace,
            )
            return bp_decode(code, llr, cfg, rng)
        case "alg-e":
            cfg = AlgEConfig(t_max=stage.cap(AlgEConfig.t_max))
            return algorithm_e_decode(code, hard_decisions(llr), cfg)
    raise InvalidInputError(f"unknown decoder {stage.decoder!r}")


def multistage_decode(
    pipeline: StagePipeline,
    code: ParityCheckMatrix,
    llr: LlrVector,
    seed_seq: np.random.SeedSequence,
) -> DecodeOutcome:
    """Run stages in order and return the first success.

    `stage` is the 0-based index of the deciding stage (the last one on
    failure) and `stage_ms` holds the wall time of every stage that ran.
    """
    stage_ms: list[float] = []
    outcome = None
    for idx, stage in enumerate(pipeline.stages):
        start = time.perf_counter()
        outcome = run_stage(stage, code, llr, stage_rng(seed_seq, idx))
        stage_ms.append((time.perf_counter() - start) * 1000.0)
        if outcome.success:
            break
        logger.debug(f"stage {idx} ({stage.decoder}) failed; handing over")
    return replace(outcome, stage=idx, stage_ms=stage_ms)
