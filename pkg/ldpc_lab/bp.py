"""Baseline decoders: sum-product BP, min-sum BP and Algorithm-E.

All message arrays are indexed by the edge numbering of ParityCheckMatrix
(check-major). Check rules come in two forms: a scalar rule over the other
messages of one check (the reference definition) and a vectorised rule over
every edge of the graph (what the decoders run).
"""

import logging

import numpy as np

from ldpc_lab.channel import LlrVector
from ldpc_lab.codes import ParityCheckMatrix, syndrome_check
from ldpc_lab.models import (
    DEFAULT_CLIP,
    AlgEConfig,
    BpConfig,
    DecodeOutcome,
    InvalidInputError,
    IterationTrace,
)

logger = logging.getLogger(__name__)

# Largest float below 1; keeps atanh finite for saturated tanh products
_TANH_BOUND = np.nextafter(1.0, 0.0)


def llr_values(code: ParityCheckMatrix, llr: LlrVector | np.ndarray) -> np.ndarray:
    values = llr.llr if isinstance(llr, LlrVector) else np.asarray(llr, dtype=float)
    if values.shape != (code.n_vars,):
        raise InvalidInputError(
            f"LLR vector has shape {values.shape}, code has N={code.n_vars}"
        )
    if not np.isfinite(values).all():
        raise InvalidInputError("LLR vector contains NaN or infinity")
    return values.astype(float, copy=False)


def hard_decision(
    beliefs: np.ndarray, rng: np.random.Generator | None = None
) -> np.ndarray:
    """ĉ_i = 1 iff b_i < 0; b_i = 0 is a fair coin (or 0 without an rng)."""
    c = (beliefs < 0).astype(np.uint8)
    if rng is not None:
        ties = np.flatnonzero(beliefs == 0)
        if ties.size:
            c[ties] = rng.integers(0, 2, ties.size, dtype=np.uint8)
    return c


# ---------------------------------------------------------------------------
# Scalar check rules
# ---------------------------------------------------------------------------
def _others(msgs) -> np.ndarray:
    arr = np.asarray(msgs, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError("a check rule needs at least one other message")
    return arr


def sum_product_check_update(others, clip: float = DEFAULT_CLIP) -> float:
    """2·atanh(Π tanh(m_j/2)) over the other edges of the check, clipped."""
    prod = float(np.prod(np.tanh(_others(others) / 2.0)))
    prod = min(max(prod, -_TANH_BOUND), _TANH_BOUND)
    return float(np.clip(2.0 * np.arctanh(prod), -clip, clip))


def min_sum_check_update(others) -> float:
    """(min_j |m_j|)·Π sgn(m_j) over the other edges, with sgn(0) = 0."""
    arr = _others(others)
    return float(np.min(np.abs(arr)) * np.prod(np.sign(arr)))


# ---------------------------------------------------------------------------
# Vectorised check rules
# ---------------------------------------------------------------------------
def _extrinsic_sign(code: ParityCheckMatrix, v2c: np.ndarray) -> np.ndarray:
    """Product of the other edges' signs (0 if any other edge carries 0)."""
    ec, m = code.edge_check, code.n_checks
    is_neg = v2c < 0
    is_zero = v2c == 0
    neg = np.bincount(ec[is_neg], minlength=m)
    zeros = np.bincount(ec[is_zero], minlength=m)
    other_neg = neg[ec] - is_neg
    other_zero = zeros[ec] - is_zero
    sign = np.where(other_neg % 2 == 1, -1.0, 1.0)
    return np.where(other_zero > 0, 0.0, sign)


def min_sum_check_messages(
    code: ParityCheckMatrix, v2c: np.ndarray, clip: float = DEFAULT_CLIP
) -> np.ndarray:
    ec, m = code.edge_check, code.n_checks
    mag = np.abs(v2c)
    min1 = np.full(m, np.inf)
    np.minimum.at(min1, ec, mag)

    # first edge attaining the minimum of each check gets the second minimum
    at_min = np.flatnonzero(mag == min1[ec])
    checks, pos = np.unique(ec[at_min], return_index=True)
    argmin_edge = np.full(m, -1, dtype=np.intp)
    argmin_edge[checks] = at_min[pos]
    masked = mag.copy()
    masked[argmin_edge[checks]] = np.inf
    min2 = np.full(m, np.inf)
    np.minimum.at(min2, ec, masked)

    edges = np.arange(code.n_edges)
    out_mag = np.where(edges == argmin_edge[ec], min2[ec], min1[ec])
    # only a degree-1 check has no other edge: it pins its bit to 0
    out_mag = np.where(np.isinf(out_mag), clip, out_mag)
    return _extrinsic_sign(code, v2c) * out_mag


def sum_product_check_messages(
    code: ParityCheckMatrix, v2c: np.ndarray, clip: float = DEFAULT_CLIP
) -> np.ndarray:
    ec, m = code.edge_check, code.n_checks
    t = np.tanh(v2c / 2.0)
    nonzero = t != 0
    log_mag = np.zeros_like(t)
    log_mag[nonzero] = np.log(np.abs(t[nonzero]))
    total = np.bincount(ec, weights=log_mag, minlength=m)
    mag = np.exp(total[ec] - log_mag)
    sign = _extrinsic_sign(code, np.where(nonzero, v2c, 0.0))
    prod = np.clip(sign * mag, -_TANH_BOUND, _TANH_BOUND)
    return np.clip(2.0 * np.arctanh(prod), -clip, clip)


# ---------------------------------------------------------------------------
# Variable side
# ---------------------------------------------------------------------------
def bp_beliefs(
    code: ParityCheckMatrix, llr: np.ndarray, c2v: np.ndarray
) -> np.ndarray:
    """b_i = L_i + Σ_a m_{a→i}."""
    return llr + np.bincount(code.edge_var, weights=c2v, minlength=code.n_vars)


def bp_variable_update(
    code: ParityCheckMatrix,
    beliefs: np.ndarray,
    c2v: np.ndarray,
    clip: float = DEFAULT_CLIP,
) -> np.ndarray:
    """Extrinsic rule m_{i→a} = b_i − m_{a→i}, clipped."""
    return np.clip(beliefs[code.edge_var] - c2v, -clip, clip)


def bp_decode(
    code: ParityCheckMatrix,
    llr: LlrVector | np.ndarray,
    cfg: BpConfig = BpConfig(),
    rng: np.random.Generator | None = None,
) -> DecodeOutcome:
    """Flooding BP; stops at the first syndrome-verified hard decision."""
    L = llr_values(code, llr)
    check_rule = (
        sum_product_check_messages
        if cfg.variant == "sum-product"
        else min_sum_check_messages
    )
    v2c = np.clip(L[code.edge_var], -cfg.clip, cfg.clip)
    prev = np.zeros(code.n_vars)
    trace: list[IterationTrace] = []
    c = hard_decision(L, rng)

    for t in range(1, cfg.t_max + 1):
        c2v = check_rule(code, v2c, cfg.clip)
        beliefs = bp_beliefs(code, L, c2v)
        c = hard_decision(beliefs, rng)
        ok = syndrome_check(code, c)
        if cfg.trace:
            trace.append(
                IterationTrace(
                    t,
                    float(np.max(np.abs(beliefs - prev), initial=0.0)),
                    code.unsatisfied_checks(c),
                )
            )
            prev = beliefs
        if ok:
            logger.debug(f"BP ({cfg.variant}) converged at t={t}")
            return DecodeOutcome(True, t, c, trace=trace)
        v2c = bp_variable_update(code, beliefs, c2v, cfg.clip)

    logger.debug(f"BP ({cfg.variant}) failed after {cfg.t_max} iterations")
    return DecodeOutcome(False, cfg.t_max, c, trace=trace)


# ---------------------------------------------------------------------------
# Algorithm-E
# ---------------------------------------------------------------------------
def algorithm_e_decode(
    code: ParityCheckMatrix, hard, cfg: AlgEConfig = AlgEConfig()
) -> DecodeOutcome:
    """Ternary message passing on channel values y_i ∈ {−1, 0, +1}.

    Check out: product of the other signs (0 if any is 0). Variable out:
    sign(w_t·y_i + Σ extrinsic), w_1 = first_weight and w_t = later_weight
    afterwards. A bit whose full vote is 0 stays undecided, which blocks
    termination for that iteration.
    """
    y = np.asarray(hard, dtype=float)
    if y.shape != (code.n_vars,):
        raise InvalidInputError(f"expected {code.n_vars} channel values")
    if not np.isin(y, (-1.0, 0.0, 1.0)).all():
        raise InvalidInputError("Algorithm-E takes ternary channel values")

    v2c = y[code.edge_var]
    c = (y < 0).astype(np.uint8)
    for t in range(1, cfg.t_max + 1):
        # with ternary inputs min-sum is exactly the sign-product rule
        c2v = min_sum_check_messages(code, v2c, clip=1.0)
        w = cfg.first_weight if t == 1 else cfg.later_weight
        extrinsic = np.bincount(code.edge_var, weights=c2v, minlength=code.n_vars)
        votes = w * y + extrinsic
        c = (votes < 0).astype(np.uint8)
        if not (votes == 0).any() and syndrome_check(code, c):
            logger.debug(f"Algorithm-E converged at t={t}")
            return DecodeOutcome(True, t, c)
        v2c = np.sign(votes[code.edge_var] - c2v)

    logger.debug(f"Algorithm-E failed after {cfg.t_max} iterations")
    return DecodeOutcome(False, cfg.t_max, c)
