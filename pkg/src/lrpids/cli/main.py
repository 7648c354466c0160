"""
lrpids Main Entry Point.

Command-line interface of the simulator. Every subcommand reads one JSON
experiment config, runs the matching pipeline and writes
`<command>-<digest12>.{csv,json,svg}` into the output directory.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
1 anything unexpected. Failures also print the classified error as one JSON
line on stderr.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

import typer
from dotenv import load_dotenv

from ..core.errors import ErrorType, classify_error, format_error_for_display
from ..core.schemas import ExperimentConfig, load_config
from ..core.settings import get_settings
from ..utils.cache import ArtifactCache
from ..utils.tracing import init_tracing, shutdown_tracing
from ..workflow.pipelines import execute, write_outputs
from . import ui

load_dotenv()

app = typer.Typer(
    rich_markup_mode="rich",
    help="[bold blue]lrpids[/bold blue] - integrated density of states of random Hamiltonians on long-range percolation graphs",
    no_args_is_help=True,
    add_completion=False,
)


@app.command("version", hidden=True)
def version():
    """Show version information."""
    from .. import __version__
    typer.echo(f"lrpids v{__version__}")


logger = ui.setup_logging()


def _fail(exc: BaseException, verbose: bool = False) -> int:
    classified = classify_error(exc)
    typer.echo(classified.to_json(), err=True)
    logger.error(f"Problem: {classified.message}")
    ui.display_error(classified.to_dict())
    if verbose:
        logger.debug(format_error_for_display(classified, verbose=True))
        if classified.error_type is ErrorType.UNKNOWN_ERROR:
            logger.exception("Unexpected error with full traceback")
    return classified.exit_code


def _check_warnings(metadata: Dict) -> List[str]:
    """Soft failures a run reports without failing: violated events and bounds."""
    warnings = []
    if metadata.get("all_events_hold") is False:
        warnings.append("The long-edge event failed at some scale; see event_holds in the table.")
    failed = [delta for delta, ok in metadata.get("verdicts", {}).items() if not ok]
    if failed:
        warnings.append(f"Concentration bound violated for delta in {{{', '.join(failed)}}}.")
    return warnings


def run(
    config: ExperimentConfig,
    command: str,
    output_dir: Optional[Path] = None,
    use_cache: bool = True,
    verbose: bool = False,
) -> int:
    """
    Runs one command for a parsed config and writes its outputs.

    Args:
        config: Validated experiment config.
        command: One of sample, spectrum, ids, pastur-shubin, atoms,
            converge, concentration, lifshitz.
        output_dir: Overrides output.directory.
        use_cache: Read and write the artifact cache.
        verbose: Log tracebacks of unexpected failures.

    Returns:
        int: Exit status (0, 2, 3 or 1).
    """
    directory = Path(output_dir) if output_dir is not None else Path(config.output.directory)
    settings = get_settings()
    cache_root = Path(settings.cache_dir) if settings.cache_dir else directory / ".cache"
    cache = ArtifactCache(cache_root, enabled=use_cache)

    logger.info(f"Running '{command}' for config {config.digest()[:12]} ({config.model.operator_class()})")
    try:
        result = execute(config, command, cache)
        files = write_outputs(result, config, directory)
    except KeyboardInterrupt:
        ui.print_error("Cancelled", "Operation cancelled by user.")
        return 130
    except Exception as e:
        return _fail(e, verbose)

    logger.debug(f"Cache: {cache.hits} hits, {cache.misses} misses")
    for warning in _check_warnings(result.metadata):
        ui.print_warning(warning)
    ui.display_summary(command, config.digest(), [str(f) for f in files], result.metadata)
    return 0


def _invoke(command: str, config_path: Path, output_dir: Optional[Path], no_cache: bool, verbose: bool) -> None:
    if verbose:
        logger.setLevel(logging.DEBUG)
        logger.debug("Verbose mode enabled")
    init_tracing(service_name="lrpids")
    try:
        try:
            config = load_config(config_path)
        except Exception as e:
            code = _fail(e, verbose)
        else:
            code = run(config, command, output_dir, use_cache=not no_cache, verbose=verbose)
    finally:
        shutdown_tracing()
    if code:
        raise typer.Exit(code=code)


def _register(command: str, summary: str) -> None:
    def handler(
        config: Path = typer.Argument(..., help="Path to the JSON experiment config"),
        output_dir: Optional[Path] = typer.Option(
            None, "--output-dir", "-o", help="Output directory (overrides output.directory)"
        ),
        no_cache: bool = typer.Option(False, "--no-cache", help="Do not read or write the artifact cache"),
        verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose debug logging"),
    ):
        _invoke(command, config, output_dir, no_cache, verbose)

    handler.__doc__ = summary
    handler.__name__ = command.replace("-", "_")
    app.command(command)(handler)


_register("sample", "Sample window graphs and write their edge lists.")
_register("spectrum", "Compute full spectra of the finite-volume operators.")
_register("ids", "Estimate the IDS by normalized eigenvalue counting.")
_register("pastur-shubin", "Estimate the IDS from diagonal projector entries (run.mode: center | trace).")
_register("atoms", "Report spectral atoms with the finite-volume error bound.")
_register("converge", "Scan sup distances between consecutive scales of one realization.")
_register("concentration", "Check the long-edge concentration bound (no eigensolves).")
_register("lifshitz", "Fit the low-energy exponent of a Laplacian IDS.")


if __name__ == "__main__":
    app()
