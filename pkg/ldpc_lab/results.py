"""Sweep result files: CSV or JSON records plus a plot-data companion."""

import csv
import io
import json
import logging
from collections.abc import Iterable
from pathlib import Path

from ldpc_lab.models import LdpcLabError, SweepRecord

logger = logging.getLogger(__name__)

# Stable column order of the CSV output
CSV_COLUMNS = (
    "decoder",
    "channel_x",
    "trials",
    "errors",
    "wer",
    "ci_lo",
    "ci_hi",
    "undetected",
    "ml_beat",
    "mean_iters",
    "mean_ms",
)

FORMATS = ("csv", "json")


class ResultsWriteError(LdpcLabError, OSError):
    pass


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = rec.to_dict()
        writer.writerow([row[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def records_to_json(records: Iterable[SweepRecord]) -> str:
    return json.dumps([rec.to_dict() for rec in records], indent=2) + "\n"


def plot_data(records: Iterable[SweepRecord]) -> dict:
    """One series per decoder, points sorted by channel_x."""
    series: dict[str, list[SweepRecord]] = {}
    for rec in records:
        series.setdefault(rec.decoder, []).append(rec)
    out = {}
    for name, recs in series.items():
        recs = sorted(recs, key=lambda r: r.channel_x)
        out[name] = {
            "channel": recs[0].channel,
            "x": [r.channel_x for r in recs],
            "wer": [r.wer for r in recs],
            "ci_lo": [r.ci_lo for r in recs],
            "ci_hi": [r.ci_hi for r in recs],
            "ber": [r.ber for r in recs],
        }
    return {"series": out}


def plot_data_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}.plot.json")


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)
    except OSError as e:
        tmp.unlink(missing_ok=True)
        raise ResultsWriteError(f"cannot write {path}: {e}") from e


def emit_results(
    records: list[SweepRecord],
    fmt: str,
    path: str | Path,
    with_plot_data: bool = True,
) -> list[Path]:
    """Write the records (and the plot-data companion); returns the paths written."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown results format {fmt!r}")
    path = Path(path)
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records)
    _write_atomic(path, text)
    written = [path]
    if with_plot_data:
        companion = plot_data_path(path)
        _write_atomic(companion, json.dumps(plot_data(records), indent=2) + "\n")
        written.append(companion)
    logger.debug(f"Wrote {len(records)} records to {path}")
    return written


def load_results_json(path: str | Path) -> list[SweepRecord]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [SweepRecord(**row) for row in data]
