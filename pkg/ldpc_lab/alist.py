"""Read and write parity-check matrices in the alist interchange format.

Layout (one record per line, indexes 1-based):

    N M
    max_col_degree max_row_degree
    col_degree_1 … col_degree_N
    row_degree_1 … row_degree_M
    N lines: check indexes of each column (zero padding allowed)
    M lines: variable indexes of each row (zero padding allowed)

Zero-padded files are accepted on read; the canonical unpadded form is written.
"""

import logging

from ldpc_lab.codes import ParityCheckMatrix
from ldpc_lab.models import AlistParseError

logger = logging.getLogger(__name__)


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise AlistParseError(f"non-integer token in {line.strip()!r}", lineno) from None


def _adjacency(
    values: list[int], degree: int, upper: int, lineno: int, what: str
) -> list[int]:
    """Drop zero padding, then check count and range (returns 0-based indexes)."""
    if any(v < 0 for v in values):
        raise AlistParseError(f"negative index in {what} list", lineno)
    nonzero = [v for v in values if v != 0]
    if len(nonzero) != degree:
        raise AlistParseError(
            f"{what} list has {len(nonzero)} entries, degree says {degree}", lineno
        )
    for v in nonzero:
        if v > upper:
            raise AlistParseError(f"index {v} out of range 1..{upper}", lineno)
    if len(set(nonzero)) != len(nonzero):
        raise AlistParseError(f"repeated index in {what} list", lineno)
    return [v - 1 for v in nonzero]


def parse_alist(text: str | bytes) -> ParityCheckMatrix:
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = text.splitlines()

    def line(k: int) -> str:
        # k is 0-based; missing trailing lines read as empty
        return lines[k] if k < len(lines) else ""

    def need(k: int, what: str) -> list[int]:
        if k >= len(lines):
            raise AlistParseError(f"file truncated before {what}", k + 1)
        return _ints(lines[k], k + 1)

    header = need(0, "the 'N M' line")
    if len(header) != 2 or min(header) < 0:
        raise AlistParseError("expected 'N M'", 1)
    n, m = header
    if n == 0:
        raise AlistParseError("a code needs at least one variable", 1)
    maxes = need(1, "the max-degree line")
    if len(maxes) != 2:
        raise AlistParseError("expected 'max_col_degree max_row_degree'", 2)
    col_deg = need(2, "the column degrees")
    if len(col_deg) != n:
        raise AlistParseError(f"expected {n} column degrees, got {len(col_deg)}", 3)
    row_deg = need(3, "the row degrees")
    if len(row_deg) != m:
        raise AlistParseError(f"expected {m} row degrees, got {len(row_deg)}", 4)
    if max(col_deg, default=0) > maxes[0] or max(row_deg, default=0) > maxes[1]:
        raise AlistParseError("a degree exceeds the declared maximum", 2)
    if sum(col_deg) != sum(row_deg):
        raise AlistParseError("column and row degrees count different edges", 4)

    var_lists: list[list[int]] = []
    for i in range(n):
        k = 4 + i
        if k >= len(lines) and col_deg[i] > 0:
            raise AlistParseError(f"file truncated in column list {i + 1}", k + 1)
        var_lists.append(
            _adjacency(_ints(line(k), k + 1), col_deg[i], m, k + 1, "column")
        )

    check_lists: list[list[int]] = []
    for a in range(m):
        k = 4 + n + a
        if k >= len(lines) and row_deg[a] > 0:
            raise AlistParseError(f"file truncated in row list {a + 1}", k + 1)
        check_lists.append(
            _adjacency(_ints(line(k), k + 1), row_deg[a], n, k + 1, "row")
        )

    from_rows = {(i, a) for a, row in enumerate(check_lists) for i in row}
    for i, checks in enumerate(var_lists):
        for a in checks:
            if (i, a) not in from_rows:
                raise AlistParseError(
                    f"column {i + 1} lists row {a + 1} but that row omits it", 5 + i
                )

    h = ParityCheckMatrix(n, check_lists)
    logger.debug(f"Parsed alist: {h!r}")
    return h


def emit_alist(h: ParityCheckMatrix) -> str:
    col_deg = [len(v) for v in h.var_neighbors]
    row_deg = [len(r) for r in h.check_neighbors]
    out = [
        f"{h.n_vars} {h.n_checks}",
        f"{max(col_deg, default=0)} {max(row_deg, default=0)}",
        " ".join(map(str, col_deg)),
        " ".join(map(str, row_deg)),
    ]
    out += [" ".join(str(a + 1) for a in checks) for checks in h.var_neighbors]
    out += [" ".join(str(i + 1) for i in row) for row in h.check_neighbors]
    return "\n".join(out) + "\n"
