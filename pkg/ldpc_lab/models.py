"""Shared data models, configuration objects and error types."""

import os
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

# Default LLR magnitude bound for BP-family decoders; override via env var.
DEFAULT_CLIP = float(os.getenv("LDPC_LAB_CLIP", "25.0"))


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------
class LdpcLabError(Exception):
    """Base class for every error raised by the library."""


class InvalidInputError(LdpcLabError, ValueError):
    pass


class AlistParseError(LdpcLabError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConstructionError(LdpcLabError, RuntimeError):
    pass


class ContractError(LdpcLabError, RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Decoder configuration
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DcConfig:
    t_max: int = 300
    epsilon: float = 0.01
    fixed_point_tol: float = 1e-9
    trace: bool = False

    def __post_init__(self):
        if self.t_max < 1:
            raise InvalidInputError(f"t_max must be >= 1, got {self.t_max}")
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.fixed_point_tol >= 0:
            raise InvalidInputError(
                f"fixed_point_tol must be >= 0, got {self.fixed_point_tol}"
            )


@dataclass(frozen=True)
class BpConfig:
    t_max: int = 50
    variant: str = "sum-product"  # "sum-product" | "min-sum"
    clip: float = DEFAULT_CLIP
    trace: bool = False

    def __post_init__(self):
        if self.t_max < 1:
            raise InvalidInputError(f"t_max must be >= 1, got {self.t_max}")
        if self.variant not in ("sum-product", "min-sum"):
            raise InvalidInputError(f"unknown BP variant {self.variant!r}")
        if not self.clip > 0:
            raise InvalidInputError(f"clip must be > 0, got {self.clip}")


@dataclass(frozen=True)
class DmbpConfig:
    z: float = 0.35
    t_max: int = 50
    clip: float = DEFAULT_CLIP
    trace: bool = False

    def __post_init__(self):
        if not self.z > 0:
            raise InvalidInputError(f"z must be > 0, got {self.z}")
        if self.t_max < 1:
            raise InvalidInputError(f"t_max must be >= 1, got {self.t_max}")
        if not self.clip > 0:
            raise InvalidInputError(f"clip must be > 0, got {self.clip}")


@dataclass(frozen=True)
class AlgEConfig:
    t_max: int = 50
    first_weight: int = 2
    later_weight: int = 1

    def __post_init__(self):
        if self.t_max < 1:
            raise InvalidInputError(f"t_max must be >= 1, got {self.t_max}")
        if self.first_weight < 1 or self.later_weight < 1:
            raise InvalidInputError("Algorithm-E weights must be >= 1")


# ---------------------------------------------------------------------------
# Decoder results
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class IterationTrace:
    t: int
    max_belief_change: float
    unsatisfied_checks: int
    max_message_change: float = 0.0
    # messages stopped moving while the syndrome is still nonzero
    stalled: bool = False


@dataclass
class DecodeOutcome:
    """Result of one decode.

    `word` is the last hard decision. It is a syndrome-verified codeword when
    `success` is true; on a detectable failure it is only kept for bit-error
    accounting. `stage` and `stage_ms` are filled by multistage decoding.
    """

    success: bool
    iterations: int
    word: np.ndarray | None = None
    stage: int = 0
    stage_ms: list[float] = field(default_factory=list)
    trace: list[IterationTrace] = field(default_factory=list)

    @property
    def codeword(self) -> np.ndarray | None:
        return self.word if self.success else None


class OutcomeKind(str, Enum):
    CORRECT = "correct"
    DETECTED_FAILURE = "detected_failure"
    UNDETECTED_ERROR = "undetected_error"


@dataclass(frozen=True)
class TrialClassification:
    kind: OutcomeKind
    ml_beat: bool = False
    tie: bool = False
    ml_error: bool = False  # exhaustive ML decision differs from the transmitted word
    iterations: int = 0
    stage: int = 0
    bit_errors: int = 0
    wall_ms: float = 0.0

    def __post_init__(self):
        if self.ml_beat and self.kind is not OutcomeKind.UNDETECTED_ERROR:
            raise InvalidInputError("ml_beat requires an undetected error")


# ---------------------------------------------------------------------------
# Sweep aggregates
# ---------------------------------------------------------------------------
@dataclass
class SweepRecord:
    decoder: str
    channel: str  # "bsc" | "awgn"
    channel_x: float  # SNR in dB, or crossover p for a p-list sweep
    trials: int = 0
    errors: int = 0
    bit_errors: int = 0
    detected: int = 0
    undetected: int = 0
    ml_beat: int = 0
    ties: int = 0
    ml_errors: int = 0
    stage1: int = 0
    total_iters: int = 0
    total_ms: float = 0.0
    n_bits: int = 0
    wer: float = 0.0
    ci_lo: float = 0.0
    ci_hi: float = 1.0
    ber: float = 0.0
    mean_iters: float = 0.0
    mean_ms: float = 0.0

    def add(self, trial: TrialClassification) -> None:
        """Merge one trial into the running counts."""
        self.trials += 1
        self.bit_errors += trial.bit_errors
        self.total_iters += trial.iterations
        self.total_ms += trial.wall_ms
        self.ml_errors += int(trial.ml_error)
        if trial.stage == 0:
            self.stage1 += 1
        if trial.kind is OutcomeKind.DETECTED_FAILURE:
            self.errors += 1
            self.detected += 1
        elif trial.kind is OutcomeKind.UNDETECTED_ERROR:
            self.errors += 1
            self.undetected += 1
            self.ml_beat += int(trial.ml_beat)
            self.ties += int(trial.tie)

    def check_counts(self) -> None:
        if not (
            0 <= self.ml_beat <= self.undetected <= self.errors <= self.trials
            and self.detected + self.undetected == self.errors
        ):
            raise ContractError(f"inconsistent counts in record {self!r}")

    def to_dict(self) -> dict:
        return asdict(self)
