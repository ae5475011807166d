"""Divide-and-Concur decoder.

Replicas live on the edges of the Tanner graph extended by one energy node
(constraint 0 in the message-passing picture) that touches every variable.
Its N edges are appended after the SPC edges, so an extended edge k < E is the
SPC edge k and k = E + i is the energy edge of variable i.

One iteration is one β = 1 difference-map step on the replica vector:
check update = overshoot past the divide projection, belief = concur average,
variable update = overshoot correction.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ldpc_lab.bp import hard_decision, llr_values
from ldpc_lab.channel import LlrVector
from ldpc_lab.codes import ParityCheckMatrix, syndrome_check
from ldpc_lab.dm import ProjectionPair
from ldpc_lab.models import (
    ContractError,
    DcConfig,
    DecodeOutcome,
    InvalidInputError,
    IterationTrace,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Divide projections
# ---------------------------------------------------------------------------
def _spc_project(
    m: np.ndarray, edge_check: np.ndarray, n_checks: int, rng: np.random.Generator
) -> np.ndarray:
    """Nearest ±1 vector with an even number of −1s, independently per check."""
    h = np.where(m > 0, 1.0, -1.0)
    zeros = np.flatnonzero(m == 0)
    if zeros.size:
        h[zeros] = np.where(rng.random(zeros.size) < 0.5, 1.0, -1.0)

    odd = np.bincount(edge_check[h < 0], minlength=n_checks) % 2 == 1
    if not odd.any():
        return h

    mag = np.abs(m)
    in_odd = odd[edge_check]
    min_mag = np.full(n_checks, np.inf)
    np.minimum.at(min_mag, edge_check[in_odd], mag[in_odd])
    cand = np.flatnonzero(in_odd & (mag == min_mag[edge_check]))
    # uniform choice among equally unreliable entries of each check
    order = np.lexsort((rng.random(cand.size), edge_check[cand]))
    cand = cand[order]
    _, first = np.unique(edge_check[cand], return_index=True)
    flip = cand[first]
    h[flip] = -h[flip]
    return h


def spc_divide_projection(msgs, rng: np.random.Generator) -> np.ndarray:
    m = np.asarray(msgs, dtype=float)
    if m.ndim != 1 or m.size == 0:
        raise InvalidInputError("SPC projection needs a non-empty message vector")
    return _spc_project(m, np.zeros(m.size, dtype=np.intp), 1, rng)


def energy_divide_projection(msgs, llr: LlrVector | np.ndarray, e_max: float) -> np.ndarray:
    """Closest vector h with −Σ L_i h_i ≤ E_max.

    h = m − L·(Σ L_i m_i + E_max) / Σ L_i² when m violates the bound; the
    displacement is parallel to L and the bound then holds with equality.
    """
    m = np.asarray(msgs, dtype=float)
    L = llr.llr if isinstance(llr, LlrVector) else np.asarray(llr, dtype=float)
    if m.shape != L.shape:
        raise InvalidInputError(f"length mismatch: {m.shape} vs {L.shape}")
    norm2 = float(np.dot(L, L))
    if norm2 == 0:
        raise InvalidInputError("energy projection is undefined for an all-zero LLR")
    s = float(np.dot(L, m))
    if -s <= e_max:
        return m.copy()
    return m - L * ((s + e_max) / norm2)


def energy_bound(llr: np.ndarray, epsilon: float) -> float:
    """E_max = −(1 + ε)·Σ|L_i|, strictly below every achievable energy."""
    return -(1.0 + epsilon) * float(np.sum(np.abs(llr)))


# ---------------------------------------------------------------------------
# Message state and updates
# ---------------------------------------------------------------------------
@dataclass
class DcMessageState:
    var_to_chk: np.ndarray  # length E + N
    chk_to_var: np.ndarray  # length E + N
    beliefs: np.ndarray  # length N
    e_max: float


def extended_edge_var(code: ParityCheckMatrix) -> np.ndarray:
    return np.concatenate([code.edge_var, np.arange(code.n_vars)])


def dc_initial_state(
    code: ParityCheckMatrix, llr: np.ndarray, epsilon: float
) -> DcMessageState:
    """m_{i→a}(1) = 2p_i − 1 on every edge, energy edges included."""
    start = 2.0 * expit(llr) - 1.0
    var_to_chk = start[extended_edge_var(code)]
    return DcMessageState(
        var_to_chk=var_to_chk,
        chk_to_var=np.zeros_like(var_to_chk),
        beliefs=np.zeros(code.n_vars),
        e_max=energy_bound(llr, epsilon),
    )


def dc_divide(
    code: ParityCheckMatrix,
    llr: np.ndarray,
    e_max: float,
    m: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Blockwise P_D over the extended replica vector."""
    e = code.n_edges
    h = np.empty_like(m)
    h[:e] = _spc_project(m[:e], code.edge_check, code.n_checks, rng)
    h[e:] = energy_divide_projection(m[e:], llr, e_max)
    return h


def dc_concur(code: ParityCheckMatrix, values: np.ndarray) -> np.ndarray:
    """Per-variable average of the extended edge values (the beliefs)."""
    sums = np.bincount(extended_edge_var(code), weights=values, minlength=code.n_vars)
    return sums / (code.var_degree + 1)


def dc_check_update(
    state: DcMessageState,
    code: ParityCheckMatrix,
    llr: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """m_{a→} = m_{→a} + 2[P_D^a(m_{→a}) − m_{→a}] for every constraint."""
    m = state.var_to_chk
    h = dc_divide(code, llr, state.e_max, m, rng)
    state.chk_to_var = m + 2.0 * (h - m)
    return state.chk_to_var


def dc_belief_update(state: DcMessageState, code: ParityCheckMatrix) -> np.ndarray:
    state.beliefs = dc_concur(code, state.chk_to_var)
    return state.beliefs


def overshoot_correction(
    beliefs_on_edges: np.ndarray, chk_to_var: np.ndarray, var_to_chk: np.ndarray
) -> np.ndarray:
    """m_{i→a}(t+1) = b_i(t) − ½[m_{a→i}(t) − m_{i→a}(t)]."""
    return beliefs_on_edges - 0.5 * (chk_to_var - var_to_chk)


def dc_variable_update(state: DcMessageState, code: ParityCheckMatrix) -> np.ndarray:
    state.var_to_chk = overshoot_correction(
        state.beliefs[extended_edge_var(code)], state.chk_to_var, state.var_to_chk
    )
    return state.var_to_chk


def dc_projection_pair(
    code: ParityCheckMatrix,
    llr: np.ndarray,
    e_max: float,
    rng: np.random.Generator,
) -> ProjectionPair:
    """The decoder's divide/concur pair over the full replica vector."""
    ext = extended_edge_var(code)
    return ProjectionPair(
        divide=lambda r: dc_divide(code, llr, e_max, r, rng),
        concur=lambda r: dc_concur(code, r)[ext],
        dimension=code.n_edges + code.n_vars,
    )


# ---------------------------------------------------------------------------
# Decoder
# ---------------------------------------------------------------------------
def dc_decode(
    code: ParityCheckMatrix,
    llr: LlrVector | np.ndarray,
    cfg: DcConfig = DcConfig(),
    rng: np.random.Generator | None = None,
) -> DecodeOutcome:
    """Steps 0-4: init, check update, beliefs, codeword gate, variable update."""
    L = llr_values(code, llr)
    rng = rng if rng is not None else np.random.default_rng()
    state = dc_initial_state(code, L, cfg.epsilon)
    prev_beliefs = np.zeros(code.n_vars)
    trace: list[IterationTrace] = []
    c = hard_decision(L, rng)

    for t in range(1, cfg.t_max + 1):
        dc_check_update(state, code, L, rng)
        beliefs = dc_belief_update(state, code)
        c = hard_decision(beliefs, rng)
        ok = syndrome_check(code, c)
        if cfg.trace:
            if not np.isfinite(beliefs).all():
                raise ContractError(f"non-finite DC belief at t={t}")
            old = state.var_to_chk
            new = overshoot_correction(
                beliefs[extended_edge_var(code)], state.chk_to_var, old
            )
            change = float(np.max(np.abs(new - old), initial=0.0))
            stalled = not ok and change < cfg.fixed_point_tol
            if stalled:
                logger.debug(f"DC messages at a fixed point without a codeword, t={t}")
            trace.append(
                IterationTrace(
                    t,
                    float(np.max(np.abs(beliefs - prev_beliefs), initial=0.0)),
                    code.unsatisfied_checks(c),
                    change,
                    stalled,
                )
            )
            prev_beliefs = beliefs
        if ok:
            logger.debug(f"DC converged at t={t}")
            return DecodeOutcome(True, t, c, trace=trace)
        dc_variable_update(state, code)

    logger.debug(f"DC failed after {cfg.t_max} iterations")
    return DecodeOutcome(False, cfg.t_max, c, trace=trace)
