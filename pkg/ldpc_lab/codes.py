"""Parity-check matrix representation, code constructors and GF(2) helpers."""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from ldpc_lab.models import ConstructionError, InvalidInputError

logger = logging.getLogger(__name__)


class ParityCheckMatrix:
    """Sparse binary M×N parity-check matrix with Tanner-graph adjacency.

    Edges are numbered by (check index, position within the check's neighbor
    list); every per-edge message array in the package uses this ordering.
    Instances are immutable and safe to share between concurrent trials.
    """

    __slots__ = (
        "n_vars",
        "n_checks",
        "check_neighbors",
        "var_neighbors",
        "edge_var",
        "edge_check",
        "var_degree",
        "check_degree",
        "_edge_ids",
    )

    def __init__(self, n_vars: int, check_neighbors: Iterable[Sequence[int]]):
        checks = tuple(tuple(int(i) for i in row) for row in check_neighbors)
        if n_vars < 1:
            raise InvalidInputError(f"n_vars must be >= 1, got {n_vars}")

        var_lists: list[list[int]] = [[] for _ in range(n_vars)]
        edge_ids: dict[tuple[int, int], int] = {}
        for a, row in enumerate(checks):
            if len(set(row)) != len(row):
                raise InvalidInputError(f"check {a} has a repeated variable")
            for i in row:
                if not 0 <= i < n_vars:
                    raise InvalidInputError(
                        f"check {a} references variable {i} outside [0, {n_vars})"
                    )
                edge_ids[(i, a)] = len(edge_ids)
                var_lists[i].append(a)

        edge_var = np.fromiter((i for row in checks for i in row), dtype=np.intp)
        edge_check = np.repeat(
            np.arange(len(checks), dtype=np.intp), [len(r) for r in checks]
        )
        var_degree = np.array([len(v) for v in var_lists], dtype=np.intp)
        check_degree = np.array([len(r) for r in checks], dtype=np.intp)
        for arr in (edge_var, edge_check, var_degree, check_degree):
            arr.flags.writeable = False

        set_ = object.__setattr__
        set_(self, "n_vars", int(n_vars))
        set_(self, "n_checks", len(checks))
        set_(self, "check_neighbors", checks)
        set_(self, "var_neighbors", tuple(tuple(v) for v in var_lists))
        set_(self, "edge_var", edge_var)
        set_(self, "edge_check", edge_check)
        set_(self, "var_degree", var_degree)
        set_(self, "check_degree", check_degree)
        set_(self, "_edge_ids", edge_ids)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __reduce__(self):
        return (type(self), (self.n_vars, self.check_neighbors))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and self.check_neighbors == other.check_neighbors
        )

    def __hash__(self) -> int:
        return hash((self.n_vars, self.check_neighbors))

    def __repr__(self) -> str:
        return (
            f"ParityCheckMatrix(N={self.n_vars}, M={self.n_checks}, "
            f"edges={self.n_edges})"
        )

    # -- edge index -------------------------------------------------------
    @property
    def n_edges(self) -> int:
        return len(self.edge_var)

    def edge_id(self, var: int, check: int) -> int:
        try:
            return self._edge_ids[(var, check)]
        except KeyError:
            raise InvalidInputError(f"no edge between v{var} and c{check}") from None

    def edge_pair(self, edge: int) -> tuple[int, int]:
        """Return (variable, check) for an edge number."""
        return int(self.edge_var[edge]), int(self.edge_check[edge])

    # -- rate -------------------------------------------------------------
    @property
    def design_rate(self) -> float:
        return (self.n_vars - self.n_checks) / self.n_vars

    def rate(self, exact: bool = True) -> tuple[float, bool]:
        """Return (rate, is_design_rate).

        exact=True uses the GF(2) rank of H; array codes are rank deficient so
        their true rate sits above the design rate.
        """
        if not exact:
            return self.design_rate, True
        return (self.n_vars - gf2_rank(self.to_dense())) / self.n_vars, False

    # -- dense views ------------------------------------------------------
    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        dense[self.edge_check, self.edge_var] = 1
        return dense

    @classmethod
    def from_dense(cls, dense) -> "ParityCheckMatrix":
        arr = np.asarray(dense)
        if arr.ndim != 2 or not np.isin(arr, (0, 1)).all():
            raise InvalidInputError("dense parity-check matrix must be 2-D binary")
        return cls(arr.shape[1], [np.flatnonzero(row).tolist() for row in arr])

    # -- syndrome ---------------------------------------------------------
    def syndrome(self, bits) -> np.ndarray:
        """Per-check parity (0 = satisfied) of a binary word."""
        c = _as_bits(bits)
        if c.shape != (self.n_vars,):
            raise InvalidInputError(
                f"word length {c.shape} does not match N={self.n_vars}"
            )
        counts = np.bincount(
            self.edge_check, weights=c[self.edge_var], minlength=self.n_checks
        )
        return counts.astype(np.int64) % 2

    def unsatisfied_checks(self, bits) -> int:
        return int(self.syndrome(bits).sum())


@dataclass(frozen=True)
class Codeword:
    bits: np.ndarray

    def __post_init__(self):
        bits = _as_bits(self.bits)
        object.__setattr__(self, "bits", bits)

    @property
    def bpsk(self) -> np.ndarray:
        return bpsk(self.bits)


def bpsk(bits) -> np.ndarray:
    """Map bits to ±1 symbols: x_i = 1 − 2c_i."""
    return 1.0 - 2.0 * _as_bits(bits)


def _as_bits(bits) -> np.ndarray:
    if isinstance(bits, Codeword):
        return bits.bits
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise InvalidInputError("a word must be a 1-D vector")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise InvalidInputError("a word must contain only 0 and 1")
    return arr.astype(np.uint8)


def syndrome_check(h: ParityCheckMatrix, c) -> bool:
    """True iff every check of `h` sees even parity in `c`."""
    return not h.syndrome(c).any()


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------
def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    f = 2
    while f * f <= q:
        if q % f == 0:
            return False
        f += 1
    return True


def build_array_code(q: int, j: int) -> ParityCheckMatrix:
    """Array LDPC code: a j×q grid of q×q circulants, block (a, b) = σ^(a·b).

    σ is the single-step cyclic shift, σ[r, (r+1) mod q] = 1, so row r of
    block (a, b) has its one in column (r + a·b) mod q.
    """
    if not _is_prime(q):
        raise InvalidInputError(f"array codes need a prime q, got {q}")
    if not 1 <= j <= q:
        raise InvalidInputError(f"need 1 <= j <= q, got j={j}, q={q}")
    checks = [
        [b * q + (r + a * b) % q for b in range(q)]
        for a in range(j)
        for r in range(q)
    ]
    h = ParityCheckMatrix(q * q, checks)
    logger.debug(f"Built array code q={q} j={j}: {h!r}")
    return h


def _parallel_sockets(sockets: np.ndarray, check_deg: int) -> list[int]:
    """Socket positions whose variable already appears earlier in the same check."""
    bad = []
    for start in range(0, len(sockets), check_deg):
        seen: set[int] = set()
        for k in range(start, start + check_deg):
            v = int(sockets[k])
            if v in seen:
                bad.append(k)
            seen.add(v)
    return bad


def build_random_regular(
    n: int, var_deg: int, check_deg: int, seed: int, max_retries: int = 1000
) -> ParityCheckMatrix:
    """Socket-permutation (d_v, d_c)-regular code without parallel edges.

    Sockets that would create a repeated (variable, check) pair are swapped
    with randomly chosen sockets until the graph is simple or `max_retries`
    rounds have passed.
    """
    if n < 1 or var_deg < 1 or check_deg < 1:
        raise InvalidInputError("n, var_deg and check_deg must be positive")
    if (n * var_deg) % check_deg:
        raise InvalidInputError(
            f"n*var_deg = {n * var_deg} is not divisible by check_deg = {check_deg}"
        )
    m = n * var_deg // check_deg
    rng = np.random.default_rng(seed)
    sockets = np.repeat(np.arange(n), var_deg)
    rng.shuffle(sockets)

    for attempt in range(max_retries + 1):
        bad = _parallel_sockets(sockets, check_deg)
        if not bad:
            break
        if attempt == max_retries:
            raise ConstructionError(
                f"could not remove {len(bad)} parallel edges after {max_retries} rounds"
            )
        for k in bad:
            other = int(rng.integers(len(sockets)))
            sockets[k], sockets[other] = sockets[other], sockets[k]

    checks = [
        sorted(sockets[a * check_deg : (a + 1) * check_deg].tolist())
        for a in range(m)
    ]
    h = ParityCheckMatrix(n, checks)
    logger.debug(
        f"Built random ({var_deg},{check_deg})-regular code n={n} seed={seed} "
        f"after {attempt} repair rounds"
    )
    return h


# ---------------------------------------------------------------------------
# GF(2) linear algebra
# ---------------------------------------------------------------------------
def _rref_gf2(dense: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and its pivot columns."""
    a = (np.asarray(dense, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for col in range(cols):
        if r >= rows:
            break
        nz = np.flatnonzero(a[r:, col])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.flatnonzero(a[:, col])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(col)
        r += 1
    return a[:r], pivots


def gf2_rank(dense) -> int:
    return len(_rref_gf2(dense)[1])


def nullspace_basis(h: ParityCheckMatrix) -> np.ndarray:
    """Rows form a basis of {c : Hc = 0} over GF(2)."""
    reduced, pivots = _rref_gf2(h.to_dense())
    pivot_set = set(pivots)
    free = [c for c in range(h.n_vars) if c not in pivot_set]
    basis = np.zeros((len(free), h.n_vars), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for row, p in enumerate(pivots):
            basis[k, p] = reduced[row, f]
    return basis


def enumerate_codewords(h: ParityCheckMatrix, limit: int = 1 << 16) -> np.ndarray:
    """All codewords of a small code as a (2^k, N) uint8 array, zero word first."""
    basis = nullspace_basis(h)
    k = basis.shape[0]
    if (1 << k) > limit:
        raise InvalidInputError(f"code has 2^{k} codewords, above the limit {limit}")
    msgs = (np.arange(1 << k)[:, None] >> np.arange(k)[None, :]) & 1
    return ((msgs @ basis) % 2).astype(np.uint8)
