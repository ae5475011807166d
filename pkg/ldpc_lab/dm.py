"""Difference-map (β = 1) iteration over a divide/concur projection pair.

One step from r_t:

    d       = P_D(r_t) − r_t
    r_over  = r_t + 2d
    r_conc  = P_C(r_over)
    r_{t+1} = r_conc − d

At a fixed point r*, P_D(r*) = P_C(r* + 2[P_D(r*) − r*]) is a solution.
The two-point toy (divide = nearest of A=(0,0), B=(3,1); concur = projection
onto the diagonal) is kept here as a fixture.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ldpc_lab.models import ContractError, InvalidInputError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9

Projection = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProjectionPair:
    divide: Projection
    concur: Projection
    dimension: int


@dataclass(frozen=True)
class DmState:
    """Iterate r_t together with the intermediates computed from it."""

    t: int
    r: np.ndarray
    r_div: np.ndarray
    r_over: np.ndarray
    r_conc: np.ndarray

    def as_row(self) -> dict:
        return {
            "t": self.t,
            "r": self.r.tolist(),
            "p_d": self.r_div.tolist(),
            "r_over": self.r_over.tolist(),
            "r_conc": self.r_conc.tolist(),
        }


@dataclass
class DmRun:
    trace: list[DmState] = field(default_factory=list)
    converged: bool = False
    fixed_point: DmState | None = None
    solution: np.ndarray | None = None


def _check_vector(r, p: ProjectionPair) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (p.dimension,):
        raise InvalidInputError(f"expected a vector of length {p.dimension}")
    return r


def initial_state(r0, p: ProjectionPair) -> DmState:
    r = _check_vector(r0, p)
    return _state(1, r, p)


def _state(t: int, r: np.ndarray, p: ProjectionPair) -> DmState:
    r_div = np.asarray(p.divide(r), dtype=float)
    r_over = r + 2.0 * (r_div - r)
    r_conc = np.asarray(p.concur(r_over), dtype=float)
    return DmState(t, r, r_div, r_over, r_conc)


def dm_step(s: DmState, p: ProjectionPair) -> DmState:
    """Advance to r_{t+1} = r_conc − (P_D(r_t) − r_t) and project again."""
    r_next = s.r_conc - (s.r_div - s.r)
    return _state(s.t + 1, r_next, p)


def sup_change(a: DmState, b: DmState) -> float:
    return float(np.max(np.abs(b.r - a.r), initial=0.0))


def extract_solution(
    s: DmState, p: ProjectionPair, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """P_D(r*) at a fixed point; cross-checked against P_C(r* + 2[P_D(r*) − r*])."""
    nxt = dm_step(s, p)
    if sup_change(s, nxt) >= tol:
        raise ContractError(
            f"not at a fixed point: |r_(t+1) - r_t| = {sup_change(s, nxt):.3g}"
        )
    if np.max(np.abs(s.r_div - s.r_conc), initial=0.0) > tol:
        raise ContractError("divide and concur readouts of the fixed point disagree")
    return s.r_div.copy()


def run_dm(
    p: ProjectionPair,
    r0,
    t_max: int,
    tol: float = DEFAULT_TOL,
    keep_trace: bool = True,
) -> DmRun:
    """Iterate until sup-norm change < tol or t_max steps."""
    if t_max < 1:
        raise InvalidInputError(f"t_max must be >= 1, got {t_max}")
    run = DmRun()
    s = initial_state(r0, p)
    run.trace.append(s)
    for _ in range(t_max):
        nxt = dm_step(s, p)
        if keep_trace:
            run.trace.append(nxt)
        if sup_change(s, nxt) < tol:
            run.converged = True
            run.fixed_point = s
            run.solution = extract_solution(s, p, tol)
            logger.debug(f"DM fixed point at t={s.t}: solution {run.solution}")
            break
        s = nxt
    if not keep_trace:
        run.trace = [s]
    return run


def run_alternating(
    p: ProjectionPair, r0, t_max: int, tol: float = DEFAULT_TOL
) -> DmRun:
    """Plain alternating projections r_{t+1} = P_C(P_D(r_t)): the negative control.

    Stops when the iterate stagnates; `solution` is set only when the
    stagnation point also satisfies the divide constraint.
    """
    if t_max < 1:
        raise InvalidInputError(f"t_max must be >= 1, got {t_max}")
    run = DmRun()
    r = _check_vector(r0, p)
    for t in range(1, t_max + 1):
        r_div = np.asarray(p.divide(r), dtype=float)
        r_conc = np.asarray(p.concur(r_div), dtype=float)
        s = DmState(t, r, r_div, r_div, r_conc)
        run.trace.append(s)
        if np.max(np.abs(r_conc - r), initial=0.0) < tol:
            run.converged = True
            run.fixed_point = s
            if np.max(np.abs(r_div - r), initial=0.0) < tol:
                run.solution = r_div.copy()
            break
        r = r_conc
    return run


# ---------------------------------------------------------------------------
# Two-point toy
# ---------------------------------------------------------------------------
TOY_A = np.array([0.0, 0.0])
TOY_B = np.array([3.0, 1.0])


def toy_divide(r: np.ndarray) -> np.ndarray:
    """Nearest of A and B; a tie goes to A."""
    da = np.sum((r - TOY_A) ** 2)
    db = np.sum((r - TOY_B) ** 2)
    return (TOY_A if da <= db else TOY_B).copy()


def toy_concur(r: np.ndarray) -> np.ndarray:
    mean = (r[0] + r[1]) / 2.0
    return np.array([mean, mean])


def toy_projection_pair() -> ProjectionPair:
    return ProjectionPair(toy_divide, toy_concur, 2)
