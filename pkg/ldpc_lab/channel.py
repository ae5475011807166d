"""BPSK over AWGN / BSC: noise, channel LLRs, energy and SNR conversions.

SNR convention: SNR = 10·log10(1 / (2·R·σ²)) for unit-energy BPSK (Eb/N0
with rate scaling), the same 2R factor as the hard-decision BSC mapping
p = Q(sqrt(2·R·10^(SNR/10))).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcinv, expit

from ldpc_lab.models import InvalidInputError

logger = logging.getLogger(__name__)

AWGN = "awgn"
BSC = "bsc"


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    sigma: float = 0.0
    p: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in (AWGN, BSC):
            raise InvalidInputError(f"unknown channel {self.kind!r}")
        if not 0 < self.rate <= 1:
            raise InvalidInputError(f"code rate must be in (0, 1], got {self.rate}")
        if self.kind == AWGN and not self.sigma > 0:
            raise InvalidInputError(f"AWGN sigma must be > 0, got {self.sigma}")
        # p = 0 is a noiseless BSC; its LLRs need an explicit cap (see llr_from_observation)
        if self.kind == BSC and not 0 <= self.p < 0.5:
            raise InvalidInputError(f"BSC crossover must be in [0, 0.5), got {self.p}")

    @classmethod
    def awgn(cls, sigma: float, rate: float = 1.0) -> "ChannelModel":
        return cls(AWGN, sigma=sigma, rate=rate)

    @classmethod
    def bsc(cls, p: float, rate: float = 1.0) -> "ChannelModel":
        return cls(BSC, p=p, rate=rate)

    @classmethod
    def from_snr(cls, kind: str, snr_db: float, rate: float) -> "ChannelModel":
        if kind == AWGN:
            return cls.awgn(awgn_sigma_from_snr(snr_db, rate), rate)
        return cls.bsc(bsc_p_from_snr(snr_db, rate), rate)

    def describe(self) -> dict:
        """Sweep metadata: the channel parameter plus its SNR equivalent."""
        if self.kind == AWGN:
            return {
                "channel": AWGN,
                "sigma": self.sigma,
                "snr_db": snr_from_awgn_sigma(self.sigma, self.rate),
                "rate": self.rate,
            }
        snr = snr_from_bsc_p(self.p, self.rate) if self.p > 0 else math.inf
        return {"channel": BSC, "p": self.p, "snr_db": snr, "rate": self.rate}


@dataclass(frozen=True)
class LlrVector:
    llr: np.ndarray

    def __len__(self) -> int:
        return len(self.llr)

    @property
    def priors(self) -> np.ndarray:
        """p_i = exp(L_i) / (1 + exp(L_i)), probability that x_i = +1."""
        return expit(self.llr)


# ---------------------------------------------------------------------------
# Channel operations
# ---------------------------------------------------------------------------
def transmit(x, ch: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size and not np.isin(x, (-1.0, 1.0)).all():
        raise InvalidInputError("transmitted symbols must be ±1")
    if ch.kind == AWGN:
        return x + ch.sigma * rng.standard_normal(x.shape)
    flips = rng.random(x.shape) < ch.p
    return np.where(flips, -x, x)


def llr_from_observation(
    y, ch: ChannelModel, llr_cap: float | None = None
) -> LlrVector:
    """Channel LLRs L_i = log(Pr[y_i | x_i = 1] / Pr[y_i | x_i = −1]).

    A noiseless BSC (p = 0) has infinite LLRs; it is only accepted when
    `llr_cap` gives the magnitude to use instead.
    """
    y = np.asarray(y, dtype=float)
    if ch.kind == AWGN:
        return LlrVector(2.0 * y / ch.sigma**2)
    if ch.p == 0:
        if llr_cap is None:
            raise InvalidInputError("p = 0 gives infinite LLRs; pass llr_cap")
        mag = float(llr_cap)
    else:
        mag = math.log((1.0 - ch.p) / ch.p)
    return LlrVector(np.where(y > 0, mag, np.where(y < 0, -mag, 0.0)))


def hard_decisions(llr: LlrVector | np.ndarray) -> np.ndarray:
    """Ternary sign of each LLR (0 marks an erasure)."""
    values = llr.llr if isinstance(llr, LlrVector) else np.asarray(llr, dtype=float)
    return np.sign(values).astype(np.int8)


def energy(x, llr: LlrVector) -> float:
    """E = −Σ L_i x_i; lower energy means higher likelihood."""
    x = np.asarray(x, dtype=float)
    if x.shape != llr.llr.shape:
        raise InvalidInputError(f"length mismatch: {x.shape} vs {llr.llr.shape}")
    return float(-np.dot(llr.llr, x))


# ---------------------------------------------------------------------------
# SNR conversions
# ---------------------------------------------------------------------------
def q_function(z: float) -> float:
    """Gaussian tail Q(z) = ½·erfc(z/√2)."""
    return float(0.5 * erfc(z / math.sqrt(2.0)))


def _check_rate(rate: float) -> None:
    if not 0 < rate <= 1:
        raise InvalidInputError(f"code rate must be in (0, 1], got {rate}")


def bsc_p_from_snr(snr_db: float, rate: float) -> float:
    _check_rate(rate)
    return q_function(math.sqrt(2.0 * rate * 10 ** (snr_db / 10.0)))


def snr_from_bsc_p(p: float, rate: float) -> float:
    _check_rate(rate)
    if not 0 < p < 0.5:
        raise InvalidInputError(f"crossover must be in (0, 0.5), got {p}")
    z = math.sqrt(2.0) * float(erfcinv(2.0 * p))
    return 10.0 * math.log10(z * z / (2.0 * rate))


def awgn_sigma_from_snr(snr_db: float, rate: float) -> float:
    _check_rate(rate)
    return math.sqrt(1.0 / (2.0 * rate * 10 ** (snr_db / 10.0)))


def snr_from_awgn_sigma(sigma: float, rate: float) -> float:
    _check_rate(rate)
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be > 0, got {sigma}")
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))
