"""
lrpids Command Pipelines.

One pipeline per CLI command. Each takes the parsed ExperimentConfig and an
optional ArtifactCache and returns a CommandResult: a table (columns + rows),
JSON metadata and, where the command has one, the data to plot.

Pipelines never write files themselves; `write_outputs` turns a result into
`<command>-<digest12>.{csv,json,svg}` according to `output.formats`.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ConfigError
from ..core.kernels import ConstantLaw, ModelParams, kernel_l1, moment_budget
from ..core.schemas import COMMANDS, ExperimentConfig
from ..engine.diagnostics import concentration_check, expected_long_edges, lifshitz_probe, long_edge_counts
from ..engine.ids import (
    atom_report,
    convergence_scan,
    ids_counting,
    ids_pastur_shubin,
    load_spectrum,
    load_window,
)
from ..engine.sampler import component_count, expected_interior_edges, mean_degree
from ..engine.spectra import average, counting_function, normalize
from ..utils.cache import ArtifactCache
from ..utils.export import output_stem, write_csv, write_json
from ..utils.parallel import map_seeds
from ..utils.plotting import emit_plot
from ..utils.tracing import create_span

logger = logging.getLogger("lrpids")


@dataclass
class CommandResult:
    """Tabular output of one command plus its metadata and optional plot data."""
    command: str
    columns: List[str]
    rows: List[Tuple[Any, ...]]
    metadata: Dict[str, Any] = field(default_factory=dict)
    plot: Optional[Tuple[str, Any]] = None


def _model_summary(params: ModelParams) -> Dict[str, Any]:
    return {
        "operator_class": params.operator_class(),
        "model_digest": params.digest(),
        "kernel_l1": kernel_l1(params.kernel),
        "p_loop": params.p_loop,
        "moment_budget": moment_budget(params),
    }


def _seeds_for(config: ExperimentConfig) -> List[int]:
    seeds = config.resolved_seeds()
    logger.debug(f"Using {len(seeds)} seed(s): {seeds[:5]}{' ...' if len(seeds) > 5 else ''}")
    return seeds


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------

def sample_pipeline(config: ExperimentConfig, cache: Optional[ArtifactCache]) -> CommandResult:
    """Edge lists of Lambda_n: one row per interior edge, cross edge and loop."""
    config.require("sample", "n")
    params, n, d = config.model, config.run.n, config.model.d
    coords = [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)]
    rows: List[Tuple[Any, ...]] = []
    per_seed = []
    for seed in _seeds_for(config):
        graph = load_window(params.with_seed(seed), n, config.run.trunc_tol, cache)
        for kind, edges, weights in (
            ("interior", graph.interior, graph.interior_weights),
            ("cross", graph.cross, graph.cross_weights),
        ):
            for (x, y), w in zip(edges.tolist(), weights.tolist()):
                rows.append((seed, kind, *x, *y, w))
        for x, w in zip(graph.loops.tolist(), graph.loop_weights.tolist()):
            rows.append((seed, "loop", *x, *x, w))
        per_seed.append(
            {
                "seed": seed,
                "interior_edges": int(graph.interior.shape[0]),
                "cross_edges": int(graph.cross.shape[0]),
                "loops": int(graph.loops.shape[0]),
                "mean_degree": mean_degree(graph),
                "components": component_count(graph),
                "truncation_radius": graph.truncation_radius,
            }
        )
    metadata = {
        "n": n,
        "expected_interior_edges": expected_interior_edges(params, n),
        "realizations": per_seed,
        **_model_summary(params),
    }
    return CommandResult("sample", ["seed", "kind", *coords, "weight"], rows, metadata)


def spectrum_pipeline(config: ExperimentConfig, cache: Optional[ArtifactCache]) -> CommandResult:
    """All eigenvalues of H_n per seed, plus the averaged counting curve for plotting."""
    config.require("spectrum", "n")
    params, n, tol = config.model, config.run.n, config.run.trunc_tol
    seeds = _seeds_for(config)

    def one(seed: int):
        p = params.with_seed(seed)
        graph = load_window(p, n, tol, cache)
        return graph.size, load_spectrum(p, graph, cache)

    results = map_seeds(one, seeds)
    rows = [
        (seed, k, float(value))
        for seed, (_, spec) in zip(seeds, results)
        for k, value in enumerate(spec.eigenvalues)
    ]
    curve = average([normalize(counting_function(spec), size) for size, spec in results])
    metadata = {
        "n": n,
        "seeds": seeds,
        "size": results[0][0],
        "norms": [spec.norm for _, spec in results],
        "cluster_tolerances": [spec.tolerance for _, spec in results],
        **_model_summary(params),
    }
    return CommandResult("spectrum", ["seed", "index", "lambda"], rows, metadata, ("ids-curve", curve))


def ids_pipeline(config: ExperimentConfig, cache: Optional[ArtifactCache]) -> CommandResult:
    config.require("ids", "n")
    estimate = ids_counting(config.model, config.run.n, _seeds_for(config), config.run.trunc_tol, cache)
    metadata = {**estimate.metadata(), **_model_summary(config.model)}
    return CommandResult(
        "ids", ["lambda", "cumulative"], estimate.curve.to_rows(), metadata, ("ids-curve", estimate.curve)
    )


def pastur_shubin_pipeline(config: ExperimentConfig, cache: Optional[ArtifactCache]) -> CommandResult:
    config.require("pastur-shubin", "n")
    estimate = ids_pastur_shubin(
        config.model,
        config.run.n,
        _seeds_for(config),
        mode=config.run.mode,
        buffer=config.run.buffer,
        trunc_tol=config.run.trunc_tol,
        cache=cache,
    )
    metadata = {**estimate.metadata(), **_model_summary(config.model)}
    return CommandResult(
        "pastur-shubin",
        ["lambda", "cumulative"],
        estimate.curve.to_rows(),
        metadata,
        ("ids-curve", estimate.curve),
    )


def atoms_pipeline(config: ExperimentConfig, cache: Optional[ArtifactCache]) -> CommandResult:
    config.require("atoms", "n")
    report = atom_report(
        config.model,
        config.run.n,
        _seeds_for(config),
        trunc_tol=config.run.trunc_tol,
        cache=cache,
        min_mass=config.run.min_mass,
    )
    rows = [(lam, mass, report.error_bound) for lam, mass in report.atoms]
    metadata = {**report.metadata(), "mass_at_zero": report.mass_at(0.0), **_model_summary(config.model)}
    return CommandResult("atoms", ["lambda", "mass", "error_bound"], rows, metadata)


def converge_pipeline(config: ExperimentConfig, cache: Optional[ArtifactCache]) -> CommandResult:
    config.require("converge", "n_list")
    seeds = _seeds_for(config)
    rows = convergence_scan(config.model, config.run.n_list, seeds, config.run.trunc_tol, cache)
    columns = [
        "n",
        "sup_distance",
        "error_bound",
        "boundary_ratio",
        "eps_n",
        "delta_n",
        "long_edges",
        "event_holds",
    ]
    table = [
        (r.n, r.sup_distance, r.error_bound, r.boundary_ratio, r.eps_n, r.delta_n, r.long_edges, r.event_holds)
        for r in rows
    ]
    metadata = {
        "n_list": list(config.run.n_list),
        "seeds": seeds,
        "all_events_hold": all(r.event_holds for r in rows),
        **_model_summary(config.model),
    }
    return CommandResult("converge", columns, table, metadata, ("convergence", rows))


def concentration_pipeline(config: ExperimentConfig, cache: Optional[ArtifactCache]) -> CommandResult:
    """Long-edge tail against the exponential bound, once per delta; no eigensolves."""
    config.require("concentration", "R", "Q_radius", "delta")
    run, params = config.run, config.model
    seeds = _seeds_for(config)
    counts = long_edge_counts(params, run.R, run.Q_radius, seeds, run.trunc_tol)
    results = [
        concentration_check(
            params, run.R, run.Q_radius, delta, seeds, run.trunc_tol, counts=counts, exact=run.exact_tail
        )
        for delta in run.deltas
    ]
    columns = ["delta", "empirical", "bound", "verdict", "threshold", "slack", "exact_tail"]
    rows = [
        (r.delta, r.empirical, r.bound, "pass" if r.passed else "fail", r.threshold, r.slack, r.exact_tail)
        for r in results
    ]
    metadata = {
        "R": run.R,
        "Q_radius": run.Q_radius,
        "q_size": results[0].q_size,
        "eps_R": results[0].eps_R,
        "trials": len(seeds),
        "seeds": seeds,
        "counts": [int(c) for c in counts],
        "mean_long_edges": float(np.mean(counts)),
        "expected_long_edges": expected_long_edges(params, run.R, run.Q_radius, run.trunc_tol),
        "truncation_bias": results[0].truncation_bias,
        "verdicts": {f"{r.delta:g}": r.passed for r in results},
        **_model_summary(params),
    }
    return CommandResult("concentration", columns, rows, metadata)


def lifshitz_pipeline(config: ExperimentConfig, cache: Optional[ArtifactCache]) -> CommandResult:
    config.require("lifshitz", "n", "E_grid")
    params = config.model
    if (params.alpha, params.beta) != (0.0, 1.0) or not isinstance(params.weights, ConstantLaw):
        logger.warning(
            f"Lifshitz probe targets the percolation Laplacian (alpha=0, beta=1, constant weights); "
            f"got {params.operator_class()} with {params.weights.family} weights"
        )
    estimate = ids_counting(params, config.run.n, _seeds_for(config), config.run.trunc_tol, cache)
    fit = lifshitz_probe(estimate, config.run.E_grid)
    metadata = {
        **estimate.metadata(),
        "slope": fit.slope,
        "intercept": fit.intercept,
        "atom_at_zero": fit.atom_at_zero,
        "usable_points": int(np.count_nonzero(fit.usable)),
        **_model_summary(params),
    }
    return CommandResult("lifshitz", ["E", "G", "logE", "loglogG"], fit.rows(), metadata, ("loglog-lifshitz", fit))


PIPELINES: Dict[str, Callable[[ExperimentConfig, Optional[ArtifactCache]], CommandResult]] = {
    "sample": sample_pipeline,
    "spectrum": spectrum_pipeline,
    "ids": ids_pipeline,
    "pastur-shubin": pastur_shubin_pipeline,
    "atoms": atoms_pipeline,
    "converge": converge_pipeline,
    "concentration": concentration_pipeline,
    "lifshitz": lifshitz_pipeline,
}

def execute(config: ExperimentConfig, command: str, cache: Optional[ArtifactCache] = None) -> CommandResult:
    """Runs the pipeline of one command."""
    if command not in PIPELINES:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}", field="command")
    with create_span(f"command.{command}", {"config_digest": config.digest()}):
        return PIPELINES[command](config, cache)


def write_outputs(result: CommandResult, config: ExperimentConfig, directory: Path) -> List[Path]:
    """
    Writes the CSV table, JSON sidecar and SVG plot requested by output.formats.

    Returns:
        List[Path]: The written files, in csv/json/svg order.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    config_digest = config.digest()
    stem = output_stem(result.command, config_digest)
    formats: Sequence[str] = config.output.formats
    written: List[Path] = []

    if "csv" in formats:
        written.append(write_csv(directory / f"{stem}.csv", result.columns, result.rows, config_digest))
    if "json" in formats:
        sidecar = {
            "command": result.command,
            "config": config.model_dump(mode="json"),
            "config_digest": config_digest,
            "columns": result.columns,
            "rows": result.rows,
            "metadata": result.metadata,
        }
        written.append(write_json(directory / f"{stem}.json", sidecar))
    if "svg" in formats:
        if result.plot is None:
            logger.info(f"Command '{result.command}' has no plot; skipping svg")
        else:
            style, data = result.plot
            info = emit_plot(data, style, directory / f"{stem}.svg", config_digest, title=result.command)
            written.append(info.path)
    return written
