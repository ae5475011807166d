"""Main CLI entry point for ldpc-lab."""

import importlib.metadata
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np
from rich.console import Console

from ldpc_lab import formatters
from ldpc_lab import logger as log_setup
from ldpc_lab.alist import emit_alist, parse_alist
from ldpc_lab.channel import (
    AWGN,
    BSC,
    ChannelModel,
    LlrVector,
    awgn_sigma_from_snr,
    bsc_p_from_snr,
    llr_from_observation,
    snr_from_bsc_p,
    transmit,
)
from ldpc_lab.codes import build_array_code, build_random_regular
from ldpc_lab.dm import run_alternating, run_dm, toy_projection_pair
from ldpc_lab.harness import (
    BATCH,
    P_POINTS,
    SNR_POINTS,
    WORKERS,
    SweepSpec,
    run_sweep,
    trial_seed,
    tune_z,
)
from ldpc_lab.models import DEFAULT_CLIP, LdpcLabError
from ldpc_lab.multistage import PIPELINES, multistage_decode, parse_pipeline, substream
from ldpc_lab.results import FORMATS, ResultsWriteError, emit_results

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

try:
    _version = importlib.metadata.version("ldpc-lab")
except importlib.metadata.PackageNotFoundError:
    _version = "unknown"

EXIT_DECODE_FAILURE = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# Shared options and parsing helpers
# ---------------------------------------------------------------------------
def _output_option(f):
    return click.option(
        "--output",
        "-o",
        "fmt",
        type=click.Choice(["table", "text", "json"], case_sensitive=False),
        default="table",
        show_default=True,
        help="Output format (table=rich, text=plain text, json).",
    )(f)


def _decoder_options(f):
    """Options shared by every command that builds decoders."""
    f = click.option(
        "--clip",
        default=DEFAULT_CLIP,
        show_default=True,
        type=float,
        help="LLR magnitude bound for BP-family messages (env LDPC_LAB_CLIP).",
    )(f)
    f = click.option(
        "--z", default=0.35, show_default=True, type=float, help="DMBP belief scale Z."
    )(f)
    f = click.option(
        "--epsilon",
        default=0.01,
        show_default=True,
        type=float,
        help="DC energy margin: E_max = -(1+epsilon)*sum|L|.",
    )(f)
    f = click.option(
        "--tmax",
        default=None,
        type=click.IntRange(min=1),
        help="Iteration cap per stage [default: 300 for dc, 50 otherwise].",
    )(f)
    return f


def _channel_options(f):
    f = click.option(
        "--channel",
        type=click.Choice([BSC, AWGN], case_sensitive=False),
        default=BSC,
        show_default=True,
        help="Channel model.",
    )(f)
    f = click.option(
        "--seed", default=0, show_default=True, type=int, help="Master random seed."
    )(f)
    return f


def _fail(message: str) -> None:
    err_console.print(f"[red]Error:[/red] {message}")
    sys.exit(EXIT_USAGE)


def _load_code(source):
    try:
        return parse_alist(source.read())
    except LdpcLabError as e:
        _fail(f"{getattr(source, 'name', 'code')}: {e}")


def parse_points(text: str) -> tuple[float, ...]:
    """'3:0.5:7' (inclusive range) or '3,4,5'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise click.BadParameter(f"expected start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise click.BadParameter(f"empty range {text!r}")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + k * step, 10) for k in range(count))
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise click.BadParameter(f"not a list of numbers: {text!r}") from None


def _points_callback(ctx, param, value):
    return parse_points(value) if value else None


def _pipeline_for(decoder: str, pipeline: str | None, **stage_opts):
    try:
        return parse_pipeline(pipeline or decoder, **stage_opts)
    except LdpcLabError as e:
        _fail(str(e))


def _apply_config(ctx: click.Context, path: str) -> None:
    """Load a JSON config keyed by subcommand name into click's default_map."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise click.UsageError(f"cannot read config {path}: {e}") from None
    if not isinstance(data, dict):
        raise click.UsageError("config must be a JSON object keyed by subcommand")
    commands = ctx.command.commands
    for name, options in data.items():
        if name not in commands or not isinstance(options, dict):
            raise click.UsageError(f"config: unknown subcommand {name!r}")
        known = {p.name for p in commands[name].params}
        unknown = sorted(set(options) - known)
        if unknown:
            raise click.UsageError(f"config: unknown options for {name}: {unknown}")
    ctx.default_map = data


# ---------------------------------------------------------------------------
# Root command group
# ---------------------------------------------------------------------------


@click.group()
@click.version_option(version=_version)
@click.option("--debug", is_flag=True, default=False, help="Enable debug output.")
@click.option(
    "--verbose",
    "-v",
    count=True,
    help="Increase verbosity. Use up to three times (-v, -vv, -vvv).",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file of per-subcommand defaults; explicit flags win.",
)
@click.pass_context
def main(ctx: click.Context, debug: bool, verbose: int, config_path: str | None) -> None:
    """Decoder laboratory for binary LDPC codes.

    \b
    Verbosity levels:
      (none)  warnings and errors only
      -v      one line per channel point
      -vv     one line per decode
      -vvv    debug + numpy floating-point errors raised

    \b
    Examples:
      ldpc-lab gen-code --array 5 3 > a53.alist
      ldpc-lab decode --code a53.alist --decoder dmbp --p 0.03
      ldpc-lab sweep --code a53.alist --decoder dmbp --snr-db 3:0.5:7 --out wer.csv
      ldpc-lab toy-dm --start 2,2 --trace
    """
    log_setup.setup(verbosity=verbose, debug=debug)
    if config_path:
        _apply_config(ctx, config_path)


# ---------------------------------------------------------------------------
# gen-code
# ---------------------------------------------------------------------------


@main.command("gen-code")
@click.option(
    "--array",
    "array",
    nargs=2,
    type=int,
    default=None,
    metavar="Q J",
    help="Array code: prime Q, J block rows.",
)
@click.option(
    "--regular",
    nargs=3,
    type=int,
    default=None,
    metavar="N DV DC",
    help="Random (DV, DC)-regular code of length N.",
)
@click.option(
    "--seed", default=0, show_default=True, type=int, help="Seed for --regular."
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Write the alist here instead of standard output.",
)
def gen_code(array, regular, seed: int, out: str | None) -> None:
    """Build a parity-check matrix and print it in alist format.

    \b
    Examples:
      ldpc-lab gen-code --array 47 4 --out array2209.alist
      ldpc-lab gen-code --regular 96 3 6 --seed 7
    """
    if bool(array) == bool(regular):
        raise click.UsageError("give exactly one of --array or --regular")
    try:
        code = build_array_code(*array) if array else build_random_regular(*regular, seed)
    except LdpcLabError as e:
        _fail(str(e))
    text = emit_alist(code)
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as e:
            _fail(f"cannot write {out}: {e}")
        logger.info(f"Wrote {code!r} to {out}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# decode
# ---------------------------------------------------------------------------


@main.command()
@click.option(
    "--code",
    "code_file",
    type=click.File("r"),
    default="-",
    show_default=True,
    help="Alist file ('-' reads standard input).",
)
@click.option(
    "--decoder",
    type=click.Choice(sorted(PIPELINES), case_sensitive=False),
    default="dmbp",
    show_default=True,
    help="Decoder or named multistage decoder.",
)
@click.option(
    "--pipeline", default=None, help="Comma-separated stages, e.g. alg-e,bp,dmbp."
)
@click.option("--p", "p", type=float, default=None, help="BSC crossover probability.")
@click.option("--snr-db", type=float, default=None, help="Channel SNR in dB.")
@click.option(
    "--llr",
    "llr_file",
    type=click.File("r"),
    default=None,
    help="Decode these whitespace-separated LLRs instead of a simulated channel.",
)
@click.option("--trace", is_flag=True, default=False, help="Print per-iteration JSON lines.")
@_channel_options
@_decoder_options
@_output_option
def decode(
    code_file,
    decoder: str,
    pipeline: str | None,
    p: float | None,
    snr_db: float | None,
    llr_file,
    trace: bool,
    channel: str,
    seed: int,
    tmax: int | None,
    epsilon: float,
    z: float,
    clip: float,
    fmt: str,
) -> None:
    """Decode one channel realization of the all-zeros codeword.

    Exit status is 0 for a correct decode, 1 for a detected failure or an
    undetected error, and 2 for bad input.

    \b
    Examples:
      ldpc-lab gen-code --array 5 3 | ldpc-lab decode --decoder dmbp --p 0.0
      ldpc-lab decode --code a.alist --decoder dc --channel awgn --snr-db 4 --trace
      ldpc-lab decode --code a.alist --pipeline alg-e,bp,dmbp --p 0.02
    """
    code = _load_code(code_file)
    pipe = _pipeline_for(
        decoder, pipeline, t_max=tmax, z=z, epsilon=epsilon, clip=clip, trace=trace
    )
    seed_seq = trial_seed(seed, 0, 0)
    try:
        if llr_file is not None:
            llr = LlrVector(np.array(llr_file.read().split(), dtype=float))
        else:
            if (p is None) == (snr_db is None):
                raise click.UsageError("give exactly one of --p or --snr-db (or --llr)")
            if p is not None and channel != BSC:
                raise click.UsageError("--p applies to the BSC only")
            rate = code.rate()[0]
            ch = (
                ChannelModel.bsc(p, rate)
                if p is not None
                else ChannelModel.from_snr(channel, snr_db, rate)
            )
            x = np.ones(code.n_vars)
            y = transmit(x, ch, np.random.default_rng(substream(seed_seq, 0)))
            llr = llr_from_observation(y, ch, llr_cap=clip)
        outcome = multistage_decode(pipe, code, llr, seed_seq)
    except ValueError as e:
        _fail(str(e))

    if trace:
        for line in formatters.trace_lines(outcome):
            print(line)
    formatters.format_decode(outcome, pipe.label, code, fmt)

    correct = outcome.success and (llr_file is not None or not outcome.word.any())
    if not correct:
        sys.exit(EXIT_DECODE_FAILURE)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _sweep_points(channel: str, snr_db, p_list) -> tuple[str, tuple[float, ...]]:
    if (snr_db is None) == (p_list is None):
        raise click.UsageError("give exactly one of --snr-db or --p")
    if p_list is not None:
        if channel != BSC:
            raise click.UsageError("--p applies to the BSC only")
        return P_POINTS, p_list
    return SNR_POINTS, snr_db


def _sweep_shared(f):
    f = click.option(
        "--target-errors",
        default=100,
        show_default=True,
        type=click.IntRange(min=1),
        help="Stop a point after this many word errors.",
    )(f)
    f = click.option(
        "--max-trials",
        default=1e7,
        show_default=True,
        type=float,
        help="Stop a point after this many trials.",
    )(f)
    f = click.option(
        "--workers",
        default=WORKERS,
        show_default=True,
        type=click.IntRange(min=1),
        help="Worker processes (env LDPC_LAB_WORKERS).",
    )(f)
    f = click.option(
        "--batch",
        default=BATCH,
        show_default=True,
        type=click.IntRange(min=1),
        help="Trials per scheduling batch (env LDPC_LAB_BATCH).",
    )(f)
    f = click.option(
        "--no-timing",
        is_flag=True,
        default=False,
        help="Record zero decode times, making output byte-reproducible.",
    )(f)
    return f


@main.command()
@click.option(
    "--code",
    "code_file",
    type=click.File("r"),
    required=True,
    help="Alist file of the code.",
)
@click.option(
    "--decoder",
    "decoders",
    multiple=True,
    type=click.Choice(sorted(PIPELINES), case_sensitive=False),
    default=["dmbp"],
    show_default=True,
    help="Decoder to sweep (repeatable).",
)
@click.option(
    "--pipeline",
    "pipelines",
    multiple=True,
    help="Explicit comma-separated pipeline (repeatable; replaces --decoder).",
)
@click.option(
    "--snr-db",
    default=None,
    callback=_points_callback,
    help="SNR points in dB: start:step:stop or a comma list.",
)
@click.option(
    "--p",
    "p_list",
    default=None,
    callback=_points_callback,
    help="BSC crossover points: start:step:stop or a comma list.",
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False),
    default=None,
    help="Results file, rewritten after every record.",
)
@click.option(
    "--format",
    "out_format",
    type=click.Choice(FORMATS),
    default=None,
    help="Results file format [default: from the --out suffix, else csv].",
)
@click.option(
    "--plot-data/--no-plot-data",
    default=True,
    show_default=True,
    help="Also write <out>.plot.json with one series per decoder.",
)
@click.option(
    "--ml-oracle",
    is_flag=True,
    default=False,
    help="Count exhaustive-ML errors too (small codes only).",
)
@_sweep_shared
@_channel_options
@_decoder_options
@_output_option
def sweep(
    code_file,
    decoders: tuple[str, ...],
    pipelines: tuple[str, ...],
    snr_db,
    p_list,
    out: str | None,
    out_format: str | None,
    plot_data: bool,
    ml_oracle: bool,
    target_errors: int,
    max_trials: float,
    workers: int,
    batch: int,
    no_timing: bool,
    channel: str,
    seed: int,
    tmax: int | None,
    epsilon: float,
    z: float,
    clip: float,
    fmt: str,
) -> None:
    """Monte Carlo word error rate over a list of channel points.

    \b
    Examples:
      ldpc-lab sweep --code a.alist --decoder dmbp --snr-db 3:0.5:7 --tmax 50 \\
          --target-errors 100 --max-trials 1e7 --seed 1 --out results.csv --workers 8
      ldpc-lab sweep --code a.alist --decoder bp --decoder e-bp-dmbp --p 0.01,0.02
    """
    code = _load_code(code_file)
    point_kind, points = _sweep_points(channel, snr_db, p_list)
    if max_trials < 1:
        raise click.BadParameter("must be >= 1", param_hint="--max-trials")
    stage_opts = dict(t_max=tmax, z=z, epsilon=epsilon, clip=clip)
    names = pipelines or decoders
    pipes = tuple(_pipeline_for(n, None, **stage_opts) for n in names)
    try:
        spec = SweepSpec(
            code=code,
            decoders=pipes,
            points=points,
            channel=channel,
            point_kind=point_kind,
            target_errors=target_errors,
            max_trials=int(max_trials),
            seed=seed,
            workers=workers,
            batch=batch,
            llr_cap=clip,
            ml_oracle=ml_oracle,
            timing=not no_timing,
        )
    except LdpcLabError as e:
        _fail(str(e))

    file_fmt = out_format or ("json" if out and out.endswith(".json") else "csv")
    done = []

    def _persist(rec) -> None:
        done.append(rec)
        if not out:
            return
        try:
            emit_results(done, file_fmt, out, with_plot_data=plot_data)
        except ResultsWriteError as e:
            logger.warning(str(e))

    try:
        records = run_sweep(spec, on_record=_persist)
    except LdpcLabError as e:
        _fail(str(e))
    if out and not records:
        _persist_empty(out, file_fmt, plot_data)
    formatters.format_sweep(records, fmt)


def _persist_empty(out: str, file_fmt: str, plot_data: bool) -> None:
    try:
        emit_results([], file_fmt, out, with_plot_data=plot_data)
    except ResultsWriteError as e:
        logger.warning(str(e))


# ---------------------------------------------------------------------------
# toy-dm
# ---------------------------------------------------------------------------


def _parse_start(ctx, param, value: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected x,y, got {value!r}") from None
    return x, y


@main.command("toy-dm")
@click.option(
    "--start",
    default="2,2",
    show_default=True,
    callback=_parse_start,
    help="Starting point x,y.",
)
@click.option(
    "--mode",
    type=click.Choice(["dm", "alternating"]),
    default="dm",
    show_default=True,
    help="Difference map, or plain alternating projections.",
)
@click.option(
    "--tmax", default=100, show_default=True, type=click.IntRange(min=1), help="Iteration cap."
)
@click.option("--trace", is_flag=True, default=False, help="Print every iterate.")
@_output_option
def toy_dm(start: tuple[float, float], mode: str, tmax: int, trace: bool, fmt: str) -> None:
    """Replay the two-point difference-map example.

    Divide: nearest of A=(0,0), B=(3,1). Concur: projection onto the diagonal.

    \b
    Examples:
      ldpc-lab toy-dm --start 2,2 --trace
      ldpc-lab toy-dm --start 2,2 --mode alternating --trace
    """
    pair = toy_projection_pair()
    run = (
        run_dm(pair, start, tmax)
        if mode == "dm"
        else run_alternating(pair, start, tmax)
    )
    formatters.format_dm_run(run, fmt, show_trace=trace)


# ---------------------------------------------------------------------------
# tune-z
# ---------------------------------------------------------------------------


@main.command("tune-z")
@click.option(
    "--code", "code_file", type=click.File("r"), required=True, help="Alist file."
)
@click.option(
    "--z-grid",
    default="0.25:0.05:0.6",
    show_default=True,
    callback=_points_callback,
    help="Z values: start:step:stop or a comma list.",
)
@click.option("--snr-db", type=float, default=None, help="Channel SNR in dB.")
@click.option("--p", "p", type=float, default=None, help="BSC crossover probability.")
@click.option(
    "--tmax", default=50, show_default=True, type=click.IntRange(min=1), help="Iteration cap."
)
@_sweep_shared
@_channel_options
@_output_option
def tune_z_cmd(
    code_file,
    z_grid,
    snr_db: float | None,
    p: float | None,
    tmax: int,
    target_errors: int,
    max_trials: float,
    workers: int,
    batch: int,
    no_timing: bool,
    channel: str,
    seed: int,
    fmt: str,
) -> None:
    """DMBP word error rate for each Z of a grid at one channel point.

    \b
    Examples:
      ldpc-lab tune-z --code a.alist --p 0.01 --z-grid 0.3:0.025:0.5
    """
    code = _load_code(code_file)
    point_kind, points = _sweep_points(
        channel,
        (snr_db,) if snr_db is not None else None,
        (p,) if p is not None else None,
    )
    try:
        spec = SweepSpec(
            code=code,
            decoders=(parse_pipeline("dmbp"),),
            points=points,
            channel=channel,
            point_kind=point_kind,
            target_errors=target_errors,
            max_trials=int(max_trials),
            seed=seed,
            workers=workers,
            batch=batch,
            timing=not no_timing,
        )
        records, best = tune_z(spec, z_grid, t_max=tmax)
    except LdpcLabError as e:
        _fail(str(e))
    formatters.format_tune_z(records, best, fmt)


# ---------------------------------------------------------------------------
# conv
# ---------------------------------------------------------------------------


@main.command("conv")
@click.option(
    "--rate", type=float, default=None, help="Code rate (or give --code)."
)
@click.option(
    "--code", "code_file", type=click.File("r"), default=None, help="Take the rate from this code."
)
@click.option(
    "--snr-db",
    default=None,
    callback=_points_callback,
    help="SNR points in dB: start:step:stop or a comma list.",
)
@click.option(
    "--p",
    "p_list",
    default=None,
    callback=_points_callback,
    help="BSC crossover points to convert to SNR.",
)
@_output_option
def conv(rate: float | None, code_file, snr_db, p_list, fmt: str) -> None:
    """Convert between SNR (dB), BSC crossover p and AWGN sigma.

    \b
    Examples:
      ldpc-lab conv --rate 0.5 --snr-db 3:1:7
      ldpc-lab conv --code a.alist --p 0.01,0.02
    """
    if (rate is None) == (code_file is None):
        raise click.UsageError("give exactly one of --rate or --code")
    if rate is None:
        rate = _load_code(code_file).rate()[0]
    if snr_db is None and p_list is None:
        raise click.UsageError("give --snr-db and/or --p")
    try:
        snrs = list(snr_db or ()) + [snr_from_bsc_p(p, rate) for p in p_list or ()]
        rows = [
            {
                "rate": rate,
                "snr_db": s,
                "p": bsc_p_from_snr(s, rate),
                "sigma": awgn_sigma_from_snr(s, rate),
            }
            for s in snrs
        ]
    except LdpcLabError as e:
        _fail(str(e))
    formatters.format_conversions(rows, fmt)
