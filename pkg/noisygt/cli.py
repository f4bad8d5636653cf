# noisygt/cli.py
import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

import click
import typer  # type: ignore
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from rich.table import Table
from rich.text import Text

from . import __version__
from .analysis import lemma1_check, lemma2_check, lemma3_bound, verify_correcting
from .condense import (
    SchemeParams,
    build_scheme,
    codeword_graph_matrix,
    induced_code,
    kautz_singleton_matrix,
    plan_extractor_style,
    plan_lossless_style,
    random_function,
    sampled_expansion_check,
)
from .config import Limits, SweepConfig, enumeration_cap, load_sweep_config, parse_grid_point
from .decode import threshold_decode
from .errors import GroupTestingError, ParameterRangeError
from .gtcore import NoiseBudget, closeness_deltas, encode, random_support
from .logger import LOG_FILE, setup_logger, stop_logger_queue_listener
from .mixtures import check_list_bound, observation_mixture_sampler
from .noise import NoiseMode, NoiseSpec, noisy_observations
from .serializer import (
    read_matrix,
    read_observation,
    read_support,
    write_matrix,
    write_observation,
    write_support,
)
from .sweep import run_sweep
from .utils import make_rng, parse_fraction

console = Console(highlight=False, stderr=True)
BRAND_COLOR = "orange3"

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    context_settings={"help_option_names": ["-h", "--help"]},
    help="noisygt: non-adaptive group testing under adversarial noise. Generate designs, "
    "encode, corrupt, decode, verify and sweep.",
    rich_markup_mode="markdown",
)

log_cli = logging.getLogger("noisygt")


def version_callback(value: bool):
    if value:
        typer.echo(f"noisygt {__version__}")
        raise typer.Exit()


@contextmanager
def reported_errors(ctx: typer.Context) -> Iterator[None]:
    """Contract violations and I/O failures become exit code 2."""
    try:
        yield
    except (GroupTestingError, OSError) as e:
        verbose = bool(ctx.obj and ctx.obj.get("verbose"))
        log_cli.error(f"{type(e).__name__}: {e}", exc_info=verbose)
        console.print(f"[bold red]Error:[/bold red] {escape(str(e))}")
        raise typer.Exit(code=2)


def echo_lines(lines: List[str]) -> None:
    for line in lines:
        typer.echo(line)


def is_quiet(ctx: typer.Context) -> bool:
    return bool(ctx.obj and ctx.obj.get("quiet"))


def plan_scheme(
    style: str,
    sparsity: int,
    universe: int,
    p: str,
    nu: str,
    delta: str,
    t_bits: Optional[int],
    limits: Optional[Limits] = None,
) -> SchemeParams:
    if style == "lossless":
        return plan_lossless_style(sparsity, universe, parse_fraction(delta), t_bits, limits)
    return plan_extractor_style(sparsity, universe, parse_fraction(p), parse_fraction(nu), t_bits, limits)


STYLE_CHOICE = click.Choice(["extractor", "lossless"], case_sensitive=False)


@app.callback()
def main_callback(
    ctx: typer.Context,
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging (DEBUG level to console and file)."),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Suppress console logs and progress bars. Errors are still shown."),
    log_file: Optional[Path] = typer.Option(LOG_FILE, "--log-file", help="Rotating log file.", dir_okay=False),
    no_log_file: bool = typer.Option(False, "--no-log-file", help="Do not write a log file."),
    version: Optional[bool] = typer.Option(None, "--version", callback=version_callback, is_eager=True, help="Show version and exit."),
):
    """Non-adaptive group testing under adversarial noise."""
    setup_logger(verbose=verbose, quiet=quiet, log_file=None if no_log_file else log_file)
    ctx.call_on_close(stop_logger_queue_listener)
    ctx.obj = {"verbose": verbose, "quiet": quiet}
    log_cli.debug(f"noisygt v{__version__} invoked with subcommand {ctx.invoked_subcommand!r}")


@app.command()
def gen(
    ctx: typer.Context,
    kind: str = typer.Option("random", "--kind", help="Design family.", click_type=click.Choice(["random", "kautz-singleton"], case_sensitive=False)),
    n_bits: Optional[int] = typer.Option(None, "--n-bits", help="log2 of the number of items (random).", min=1),
    t_bits: Optional[int] = typer.Option(None, "--t-bits", help="log2 of the column weight T (random).", min=1),
    l_bits: Optional[int] = typer.Option(None, "--l-bits", help="log2 of the alphabet size L (random).", min=1),
    seed: int = typer.Option(0, "--seed", help="Seed of the random function table."),
    q: Optional[int] = typer.Option(None, "--q", help="Field order, a prime power (kautz-singleton)."),
    w: Optional[int] = typer.Option(None, "--w", help="Polynomial degree bound (kautz-singleton)."),
    out: Path = typer.Option(..., "--out", "-o", help="Destination GTM1 file.", dir_okay=False),
):
    """Generate a codeword-graph measurement matrix as a GTM1 file."""
    with reported_errors(ctx):
        start = time.monotonic()
        if kind == "random":
            if n_bits is None or t_bits is None or l_bits is None:
                raise click.UsageError("--kind random needs --n-bits, --t-bits and --l-bits")
            matrix = codeword_graph_matrix(induced_code(random_function(n_bits, t_bits, l_bits, seed)))
            weight = 2**t_bits
        else:
            if q is None or w is None:
                raise click.UsageError("--kind kautz-singleton needs --q and --w")
            matrix = kautz_singleton_matrix(q, w)
            weight = q
        write_matrix(matrix, out)
        log_cli.info(f"Generated {matrix.rows}x{matrix.cols} {kind} design in {time.monotonic() - start:.4f}s")
        echo_lines([f"rows={matrix.rows}", f"cols={matrix.cols}", f"T={weight}"])


@app.command()
def plan(
    ctx: typer.Context,
    style: str = typer.Option("extractor", "--style", help="Condenser style.", click_type=STYLE_CHOICE),
    sparsity: int = typer.Option(..., "--sparsity", "-d", help="Sparsity D.", min=1),
    universe: int = typer.Option(256, "--universe", "-n", help="Number of items N.", min=1),
    p: str = typer.Option("0", "--p", help="False-positive fraction (extractor)."),
    nu: str = typer.Option("0", "--nu", help="False-negative parameter (extractor)."),
    delta: str = typer.Option("1", "--delta", help="False-positive factor of the output (lossless)."),
    t_bits: Optional[int] = typer.Option(None, "--t-bits", help="Override the heuristic seed length.", min=1),
    matrix_out: Optional[Path] = typer.Option(None, "--matrix-out", help="Also build the scheme and write its GTM1 matrix.", dir_okay=False),
    seed: int = typer.Option(0, "--seed", help="Seed of the random table used with --matrix-out."),
):
    """Print a planned parameter bundle as key=value lines."""
    with reported_errors(ctx):
        params = plan_scheme(style, sparsity, universe, p, nu, delta, t_bits)
        echo_lines(params.as_lines())
        if matrix_out is not None:
            write_matrix(build_scheme(params, seed).matrix, matrix_out)


@app.command("encode")
def encode_cmd(
    ctx: typer.Context,
    matrix: Path = typer.Option(..., "--matrix", "-m", help="GTM1 matrix.", dir_okay=False),
    support: Optional[Path] = typer.Option(None, "--support", "-x", help="GTV1 support to encode.", dir_okay=False),
    random_sparsity: Optional[int] = typer.Option(None, "--random-sparsity", help="Plant a uniformly random support of this weight instead.", min=0),
    seed: int = typer.Option(0, "--seed", help="Seed for --random-sparsity."),
    support_out: Optional[Path] = typer.Option(None, "--support-out", help="Where to write the planted support.", dir_okay=False),
    out: Path = typer.Option(..., "--out", "-o", help="Destination observation file.", dir_okay=False),
):
    """OR-encode a support through a matrix."""
    with reported_errors(ctx):
        A = read_matrix(matrix)
        if support is not None:
            x = read_support(support)
        elif random_sparsity is not None:
            x = random_support(A.cols, random_sparsity, make_rng(seed))
            if support_out is not None:
                write_support(x, support_out)
        else:
            raise click.UsageError("Give --support or --random-sparsity")
        y = encode(A, x)
        write_observation(y, out)
        echo_lines([f"support_weight={x.weight}", f"observation_weight={y.weight}"])


@app.command()
def corrupt(
    ctx: typer.Context,
    input_path: Path = typer.Option(..., "--in", "-i", help="Clean observation file.", dir_okay=False),
    e0: int = typer.Option(0, "--e0", help="False positives (0 -> 1 flips).", min=0),
    e1: int = typer.Option(0, "--e1", help="False negatives (1 -> 0 flips).", min=0),
    mode: str = typer.Option("random", "--mode", help="Noise channel.", click_type=click.Choice(["random", "greedy"], case_sensitive=False)),
    seed: int = typer.Option(0, "--seed", help="Seed of the random channel."),
    matrix: Optional[Path] = typer.Option(None, "--matrix", "-m", help="GTM1 matrix (greedy mode).", dir_okay=False),
    support: Optional[Path] = typer.Option(None, "--support", "-x", help="Planted GTV1 support (greedy mode).", dir_okay=False),
    out: Path = typer.Option(..., "--out", "-o", help="Destination observation file.", dir_okay=False),
):
    """Apply up to e0 false positives and e1 false negatives."""
    with reported_errors(ctx):
        y = read_observation(input_path)
        spec = NoiseSpec(NoiseBudget(e0, e1), NoiseMode.RANDOM if mode == "random" else NoiseMode.GREEDY, seed)
        A = x = None
        if spec.mode is NoiseMode.GREEDY:
            if matrix is None or support is None:
                raise click.UsageError("--mode greedy needs --matrix and --support")
            A, x = read_matrix(matrix), read_support(support)
            if encode(A, x) != y:
                raise ParameterRangeError("The input observation is not the encoding of the given support")
        y_hat = next(noisy_observations(spec, y, A, x))
        write_observation(y_hat, out)
        n01, n10 = closeness_deltas(y, y_hat)
        echo_lines([f"e0_applied={n01}", f"e1_applied={n10}"])


@app.command()
def decode(
    ctx: typer.Context,
    matrix: Path = typer.Option(..., "--matrix", "-m", help="GTM1 matrix (uniform column weight T).", dir_okay=False),
    obs: Path = typer.Option(..., "--obs", help="Noisy observation file.", dir_okay=False),
    T: int = typer.Option(..., "--T", help="Column weight of the matrix.", min=0),
    nu_over_gamma: str = typer.Option("0", "--nu-over-gamma", help="Decoder slack nu/gamma as p/q."),
    out: Path = typer.Option(..., "--out", "-o", help="Destination GTV1 file.", dir_okay=False),
):
    """Agreement-threshold decoding: keep items with at least T(1 - nu/gamma) positive tests."""
    with reported_errors(ctx):
        A = read_matrix(matrix)
        y_hat = read_observation(obs, expected_length=A.rows)
        result = threshold_decode(A, y_hat, T, parse_fraction(nu_over_gamma))
        write_support(result.support, out)
        echo_lines([f"decoded_weight={result.support.weight}", f"required_count={result.required_count}"])


@app.command()
def verify(
    ctx: typer.Context,
    matrix: Optional[Path] = typer.Option(None, "--matrix", "-m", help="GTM1 matrix for the exhaustive check.", dir_okay=False),
    d: int = typer.Option(1, "--d", help="Sparsity of the exhaustive check.", min=0),
    e0: int = typer.Option(0, "--e0", help="False positives tolerated in the tests.", min=0),
    e1: int = typer.Option(0, "--e1", help="False negatives tolerated in the tests.", min=0),
    acc_e0: int = typer.Option(0, "--acc-e0", help="False positives allowed in the reconstruction.", min=0),
    cap: Optional[int] = typer.Option(None, "--cap", help="Enumeration cap (default: GT_ENUM_CAP or 10^7).", min=1),
    list_bound: bool = typer.Option(False, "--list-bound", help="Check agreement-list sizes on a planned random table."),
    expansion: bool = typer.Option(False, "--expansion", help="Sample the expansion of a planned random table."),
    style: str = typer.Option("extractor", "--style", help="Condenser style (planned modes).", click_type=STYLE_CHOICE),
    sparsity: int = typer.Option(4, "--sparsity", help="Sparsity D (planned modes).", min=1),
    universe: int = typer.Option(256, "--universe", help="Number of items N (planned modes).", min=1),
    p: str = typer.Option("0", "--p", help="False-positive fraction (planned extractor)."),
    nu: str = typer.Option("0", "--nu", help="False-negative parameter (planned extractor)."),
    delta: str = typer.Option("1", "--delta", help="Output false-positive factor (planned lossless)."),
    t_bits: Optional[int] = typer.Option(None, "--t-bits", help="Seed length override (planned modes).", min=1),
    trials: int = typer.Option(200, "--trials", help="Sampled mixtures or subsets (planned modes).", min=1),
    seed: int = typer.Option(0, "--seed", help="Seed of the table and the samples (planned modes)."),
    workers: int = typer.Option(1, "--workers", "-w", help="Worker threads.", min=1, max=64),
):
    """Exhaustive correctness check of a matrix, or empirical checks of a planned random condenser."""
    with reported_errors(ctx):
        if list_bound or expansion:
            params = plan_scheme(style, sparsity, universe, p, nu, delta, t_bits)
            scheme = build_scheme(params, seed)
            if list_bound:
                budget = NoiseBudget(params.false_positive_budget, params.false_negative_budget)
                sampler = observation_mixture_sampler(scheme.code, params.D, budget)
                list_report = check_list_bound(scheme.table, params.k, params.k_prime, params.eps, sampler, trials, seed, workers)
                echo_lines(["check=list_bound"] + list_report.as_lines())
            if expansion:
                expansion_report = sampled_expansion_check(
                    scheme.table, params.k, params.eps, trials, seed, max_workers=workers, k_prime=params.k_prime
                )
                echo_lines(["check=expansion"] + expansion_report.as_lines())
            return
        if matrix is None:
            raise click.UsageError("Give --matrix, or one of --list-bound / --expansion")
        A = read_matrix(matrix)
        report = verify_correcting(A, d, NoiseBudget(e0, e1), NoiseBudget(acc_e0, 0), enumeration_cap(cap), workers)
        echo_lines(["check=correcting"] + report.as_lines())
        if report.passed and d >= 1 and A.rows >= 1:
            echo_lines([f"lemma1_satisfied={lemma1_check(A.rows, d, e0, e1, acc_e0, 0).satisfied}"])


@app.command()
def bounds(
    ctx: typer.Context,
    m: int = typer.Option(..., "--m", help="Number of tests.", min=1),
    d: int = typer.Option(..., "--d", help="Sparsity.", min=1),
    n: int = typer.Option(..., "--n", help="Number of items.", min=1),
    e0: int = typer.Option(0, "--e0", min=0),
    e1: int = typer.Option(0, "--e1", min=0),
    acc_e0: int = typer.Option(0, "--acc-e0", min=0),
    acc_e1: int = typer.Option(0, "--acc-e1", min=0),
    eps: str = typer.Option("1/2", "--eps", help="Trade-off parameter of the second bound."),
):
    """Print the three lower-bound reports as key=value lines."""
    with reported_errors(ctx):
        echo_lines(lemma1_check(m, d, e0, e1, acc_e0, acc_e1).as_lines())
        echo_lines(lemma2_check(m, d, n, e1, acc_e0, acc_e1, parse_fraction(eps)).as_lines())
        echo_lines(lemma3_bound(n, d, acc_e0, acc_e1).as_lines())


@app.command()
def sweep(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="YAML or JSON sweep configuration.", exists=True, dir_okay=False, readable=True),
    style: str = typer.Option("extractor", "--style", help="Planner style.", click_type=STYLE_CHOICE),
    sparsity: int = typer.Option(4, "--sparsity", "-d", help="Sparsity D.", min=1),
    universe: int = typer.Option(256, "--universe", "-n", help="Number of items N.", min=1),
    p: str = typer.Option("0", "--p"),
    nu: str = typer.Option("0", "--nu"),
    delta: str = typer.Option("1", "--delta"),
    t_bits: Optional[int] = typer.Option(None, "--t-bits", min=1),
    matrix: Optional[Path] = typer.Option(None, "--matrix", "-m", help="Use a GTM1 matrix instead of a planned one.", dir_okay=False),
    T: Optional[int] = typer.Option(None, "--T", help="Column weight of --matrix."),
    nu_over_gamma: Optional[str] = typer.Option(None, "--nu-over-gamma", help="Decoder slack for --matrix."),
    K: Optional[int] = typer.Option(None, "--K", help="Output weight cap for --matrix."),
    grid: List[str] = typer.Option([], "--grid", "-g", help="Noise level 'e0,e1' or 'p=..,nu=..'; repeatable."),
    trials: int = typer.Option(100, "--trials", help="Trials per grid point.", min=1),
    seed: int = typer.Option(0, "--seed", help="Seed of every random choice."),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Destination CSV.", dir_okay=False),
    output_format: str = typer.Option("csv", "--format", help="Output format.", click_type=click.Choice(["csv"])),
    workers: int = typer.Option(1, "--workers", "-w", help="Worker threads per grid point.", min=1, max=64),
):
    """Monte-Carlo sweep over a noise grid, one CSV row per trial."""
    quiet = is_quiet(ctx)
    with reported_errors(ctx):
        if config is not None:
            cfg = load_sweep_config(config)
            if out is not None:
                cfg = cfg.with_output(out)
        else:
            cfg = SweepConfig(
                sparsity=sparsity,
                trials=trials,
                seed=seed,
                grid=tuple(parse_grid_point(g) for g in grid) or (parse_grid_point("0,0"),),
                output=out,
                style=style,
                universe=universe,
                p=parse_fraction(p),
                nu=parse_fraction(nu),
                delta=parse_fraction(delta),
                t_bits=t_bits,
                matrix_path=matrix,
                T=T,
                nu_over_gamma=None if nu_over_gamma is None else parse_fraction(nu_over_gamma),
                K=K,
                max_workers=workers,
            )

        progress_columns = [
            SpinnerColumn(spinner_name="dots", style=BRAND_COLOR),
            TextColumn("[progress.description]{task.description}", style="green"),
            BarColumn(bar_width=None, style=BRAND_COLOR, complete_style="green"),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            TimeRemainingColumn(elapsed_when_finished=True),
        ]
        with Progress(*progress_columns, console=console, disable=quiet, transient=True) as progress_bar:
            task_id = progress_bar.add_task("Running trials...", total=len(cfg.grid) * cfg.trials)
            result = run_sweep(cfg, lambda done, total: progress_bar.update(task_id, completed=done))

        if not quiet:
            table = Table(title="Sweep summary", border_style=BRAND_COLOR)
            for column in ("grid point", "e0", "e1", "trials", "success rate", "trials with FN"):
                table.add_column(column)
            for s in result.summaries:
                table.add_row(s.label, str(s.e0), str(s.e1), str(s.trials), f"{float(s.success_rate):.4f}", str(s.false_negative_trials))
            console.print(table)
            if cfg.output is not None:
                console.print(Panel(Text(f"Wrote {len(result.rows)} rows to {cfg.output}"), border_style=BRAND_COLOR, expand=False))
        echo_lines([f"rows={len(result.rows)}", f"success_rate={float(result.success_rate):.6f}"])


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point: 0 on success, 1 on usage errors, 2 on contract violations."""
    try:
        outcome = app(args=argv, prog_name="noisygt", standalone_mode=False)
    except click.exceptions.Abort:
        console.print("[yellow]Aborted.[/yellow]")
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except (GroupTestingError, OSError) as e:
        log_cli.error(f"{type(e).__name__}: {e}")
        console.print(f"[bold red]Error:[/bold red] {escape(str(e))}")
        return 2
    return outcome if isinstance(outcome, int) else 0


if __name__ == "__main__":
    sys.exit(main())
