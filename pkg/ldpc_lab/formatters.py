"""Output formatters for ldpc-lab (rich table, plain text, JSON)."""

import json
import logging
from collections.abc import Sequence
from typing import Any, Literal

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ldpc_lab.codes import ParityCheckMatrix
from ldpc_lab.dm import DmRun
from ldpc_lab.models import DecodeOutcome, SweepRecord

logger = logging.getLogger(__name__)
console = Console()

_Fmt = Literal["table", "text", "json"]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------
def _num(x: float) -> str:
    return f"{x:.4g}"


def _vec(v: np.ndarray) -> str:
    return "(" + ", ".join(f"{float(x):g}" for x in v) + ")"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def output_json(data: Any) -> None:
    print(json.dumps(_jsonable(data), indent=2))


def _plain_table(headers: list[str], rows: list[list[str]], max_col: int = 36) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row[: len(headers)]):
            widths[i] = min(max_col, max(widths[i], len(str(cell))))
    pad = "  "
    lines = [
        pad.join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        pad.join("-" * widths[i] for i in range(len(headers))).rstrip(),
    ]
    for row in rows:
        lines.append(
            pad.join(str(c).ljust(widths[i]) for i, c in enumerate(row)).rstrip()
        )
    return "\n".join(lines)


def _rich_table(title: str, headers: list[str], rows: list[list[str]]) -> Table:
    table = Table(title=title, show_lines=False, highlight=True)
    for i, h in enumerate(headers):
        if i == 0:
            table.add_column(h, style="bold cyan", no_wrap=True)
        else:
            table.add_column(h, justify="right")
    for row in rows:
        table.add_row(*row)
    return table


def _emit(title: str, headers: list[str], rows: list[list[str]], fmt: _Fmt) -> None:
    if fmt == "text":
        print(title)
        print(_plain_table(headers, rows))
    else:
        console.print(_rich_table(title, headers, rows))


# ---------------------------------------------------------------------------
# Difference-map trace
# ---------------------------------------------------------------------------
_DM_HEADERS = ["t", "r_t", "P_D(r_t)", "r_over", "r_conc"]


def dm_rows(run: DmRun) -> list[list[str]]:
    return [
        [str(s.t), _vec(s.r), _vec(s.r_div), _vec(s.r_over), _vec(s.r_conc)]
        for s in run.trace
    ]


def format_dm_run(run: DmRun, fmt: _Fmt = "table", show_trace: bool = True) -> None:
    if fmt == "json":
        output_json(
            {
                "trace": [s.as_row() for s in run.trace] if show_trace else [],
                "converged": run.converged,
                "fixed_point": run.fixed_point.r if run.fixed_point else None,
                "solution": run.solution,
            }
        )
        return
    if show_trace:
        _emit("Difference-map trace", _DM_HEADERS, dm_rows(run), fmt)
    if run.fixed_point is not None:
        print(f"fixed point r* = {_vec(run.fixed_point.r)} at t={run.fixed_point.t}")
    else:
        print(f"no fixed point after {len(run.trace)} iterates")
    if run.solution is not None:
        print(f"solution = {_vec(run.solution)}")


# ---------------------------------------------------------------------------
# Sweep records
# ---------------------------------------------------------------------------
_SWEEP_HEADERS = [
    "decoder",
    "x",
    "trials",
    "errors",
    "WER",
    "95% CI",
    "undet.",
    "ML beat",
    "stage 1",
    "iters",
    "ms",
]


def sweep_rows(records: Sequence[SweepRecord]) -> list[list[str]]:
    rows = []
    for r in records:
        stage1 = r.stage1 / r.trials if r.trials else 0.0
        rows.append(
            [
                r.decoder,
                f"{r.channel_x:g}",
                str(r.trials),
                str(r.errors),
                _num(r.wer),
                f"[{_num(r.ci_lo)}, {_num(r.ci_hi)}]",
                str(r.undetected),
                str(r.ml_beat),
                f"{stage1:.2f}",
                f"{r.mean_iters:.2f}",
                f"{r.mean_ms:.3f}",
            ]
        )
    return rows


def format_sweep(records: Sequence[SweepRecord], fmt: _Fmt = "table", title: str = "") -> None:
    if fmt == "json":
        output_json([r.to_dict() for r in records])
        return
    if not records:
        console.print("[yellow]No records.[/yellow]")
        return
    title = title or f"Sweep ({records[0].channel}, {len(records)} records)"
    _emit(title, _SWEEP_HEADERS, sweep_rows(records), fmt)


# ---------------------------------------------------------------------------
# Single decode
# ---------------------------------------------------------------------------
def format_decode(
    outcome: DecodeOutcome,
    decoder: str,
    code: ParityCheckMatrix,
    fmt: _Fmt = "table",
) -> None:
    word = outcome.word if outcome.word is not None else np.zeros(0, dtype=np.uint8)
    summary = {
        "decoder": decoder,
        "success": outcome.success,
        "iterations": outcome.iterations,
        "stage": outcome.stage,
        "stage_ms": outcome.stage_ms,
        "weight": int(word.sum()),
        "unsatisfied_checks": code.unsatisfied_checks(word) if word.size else None,
        "word": "".join(str(int(b)) for b in word),
    }
    if fmt == "json":
        output_json(summary)
        return
    if fmt == "text":
        for key, value in summary.items():
            print(f"{key}: {value}")
        return
    status = (
        "[bright_green]codeword found[/bright_green]"
        if outcome.success
        else "[red]detected failure[/red]"
    )
    lines = [
        f"Status:      {status}",
        f"Iterations:  {outcome.iterations}",
        f"Stage:       {outcome.stage + 1} of {len(outcome.stage_ms) or 1}",
        f"Weight:      {summary['weight']}",
    ]
    if not outcome.success:
        lines.append(f"Unsatisfied: {summary['unsatisfied_checks']}")
    console.print(Panel("\n".join(lines), title=f"[bold cyan]{decoder}[/bold cyan]"))
    console.print(f"[dim]{summary['word']}[/dim]")


def trace_lines(outcome: DecodeOutcome) -> list[str]:
    """One JSON object per iteration."""
    return [json.dumps(_jsonable(t)) for t in outcome.trace]


# ---------------------------------------------------------------------------
# Z tuning and conversions
# ---------------------------------------------------------------------------
def format_tune_z(records: Sequence[SweepRecord], best_z: float, fmt: _Fmt = "table") -> None:
    if fmt == "json":
        output_json({"best_z": best_z, "records": [r.to_dict() for r in records]})
        return
    format_sweep(records, fmt, title="Z tuning")
    print(f"best Z = {best_z:g}")


def format_conversions(rows: list[dict], fmt: _Fmt = "table") -> None:
    if fmt == "json":
        output_json(rows)
        return
    headers = ["SNR (dB)", "BSC p", "AWGN sigma"]
    cells = [[f"{r['snr_db']:g}", f"{r['p']:.6g}", f"{r['sigma']:.6g}"] for r in rows]
    _emit(f"Channel conversions (rate {rows[0]['rate']:.4g})", headers, cells, fmt)
