"""
lrpids IDS Module.

Estimators of the integrated density of states:

- counting: normalized eigenvalue counting functions of H_n, averaged over seeds;
- pastur-shubin-center: F(lam) = sum_{lam_k <= lam} |psi_k(0)|^2, averaged over seeds;
- pastur-shubin-trace: the same projector diagonal averaged over an inner box
  Lambda_m, m = n - buffer, renormalized to total mass 1.

Also: atom (jump) reports with the finite-volume error bound, convergence
scans along one nested realization, and the spatial-vs-ensemble (Birkhoff)
consistency check.

Per-seed work runs on the thread pool; averages are reduced in seed order.
Window graphs and spectra go through the optional ArtifactCache.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import InvalidInputError
from ..core.kernels import ModelParams
from ..utils.cache import ArtifactCache, digest
from ..utils.parallel import map_seeds
from ..utils.tracing import create_span
from .diagnostics import Schedule, default_schedule, error_bound, long_edge_count
from .operator import assemble
from .sampler import WindowGraph, box_vertices, component_count, sample_window, vertex_index
from .spectra import (
    Spectrum,
    StepFunction,
    average,
    counting_function,
    eigen,
    merge_atoms,
    normalize,
    sup_distance,
    weighted_counting,
)

logger = logging.getLogger("lrpids")

Method = Literal["counting", "pastur-shubin-center", "pastur-shubin-trace"]


# ---------------------------------------------------------------------------
# Cached realizations
# ---------------------------------------------------------------------------

def window_key(params: ModelParams, n: int, trunc_tol: float) -> str:
    return digest("window", params.digest(), n, trunc_tol)


def load_window(
    params: ModelParams, n: int, trunc_tol: float, cache: Optional[ArtifactCache] = None
) -> WindowGraph:
    """sample_window through the cache."""
    if cache is None:
        return sample_window(params, n, trunc_tol)
    payload = cache.get_or_compute(
        "window", window_key(params, n, trunc_tol), lambda: sample_window(params, n, trunc_tol).to_dict()
    )
    return WindowGraph.from_dict(payload)


def load_spectrum(
    params: ModelParams,
    graph: WindowGraph,
    cache: Optional[ArtifactCache] = None,
    center: bool = False,
    inner_radius: Optional[int] = None,
) -> Spectrum:
    """
    Eigensolve of the assembled window, optionally with the origin's overlaps
    and the projector weights of the inner box Lambda_{inner_radius}.
    """
    def compute() -> Spectrum:
        M = assemble(graph, params)
        region = None
        if inner_radius is not None:
            region = vertex_index(box_vertices(inner_radius, graph.d), graph.n)
        origin = M.vertex_index((0,) * graph.d) if center else None
        return eigen(M, center=origin, region=region)

    if cache is None:
        return compute()
    key = digest("spectrum", window_key(params, graph.n, graph.trunc_tol), center, inner_radius)
    return Spectrum.from_dict(cache.get_or_compute("spectrum", key, lambda: compute().to_dict()))


def _check_seeds(seeds: Sequence[int], realizations: Optional[int]) -> List[int]:
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise InvalidInputError("at least one seed is required", field="run.seeds")
    if realizations is not None and realizations != len(seeds):
        raise InvalidInputError(
            f"realizations ({realizations}) must equal the number of seeds ({len(seeds)})",
            field="run.seeds",
        )
    return seeds


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IdsEstimate:
    """
    A seed-averaged IDS curve with its provenance.

    Attributes:
        curve: Normalized step function with final value 1.
        method: Estimator that produced the curve.
        n: Box radius.
        realizations: Number of seeds averaged.
        params_digest: Digest of the model parameters (seed excluded).
        trunc_tol: Truncation tolerance used for sampling.
        seeds: Seeds in reduction order.
        normalization: |Lambda_m| / |Lambda_n| for trace mode, else 1.
        inner_radius: m for trace mode.
    """
    curve: StepFunction
    method: Method
    n: int
    realizations: int
    params_digest: str
    trunc_tol: float
    seeds: Tuple[int, ...] = ()
    normalization: float = 1.0
    inner_radius: Optional[int] = None

    def metadata(self) -> Dict:
        return {
            "method": self.method,
            "n": self.n,
            "realizations": self.realizations,
            "params_digest": self.params_digest,
            "trunc_tol": self.trunc_tol,
            "seeds": list(self.seeds),
            "normalization": self.normalization,
            "inner_radius": self.inner_radius,
            "breakpoints": int(self.curve.breakpoints.size),
        }


def _params_digest(params: ModelParams) -> str:
    return params.with_seed(0).digest()


def _unit_mass(curve: StepFunction) -> StepFunction:
    return StepFunction(curve.breakpoints, curve.cumulative / curve.final)


def ids_counting(
    params: ModelParams,
    n: int,
    seeds: Sequence[int],
    trunc_tol: float = 1e-9,
    cache: Optional[ArtifactCache] = None,
    realizations: Optional[int] = None,
) -> IdsEstimate:
    """
    Seed average of F_n / |Lambda_n|.

    Args:
        params: Model parameters; the seed field is replaced per realization.
        n: Box radius.
        seeds: Master seeds, one realization each.
        trunc_tol: Truncation tolerance for sampling.
        cache: Optional artifact cache.
        realizations: If given, must equal len(seeds).

    Returns:
        IdsEstimate: method "counting".
    """
    seeds = _check_seeds(seeds, realizations)

    def one(seed: int) -> StepFunction:
        p = params.with_seed(seed)
        graph = load_window(p, n, trunc_tol, cache)
        return normalize(counting_function(load_spectrum(p, graph, cache)), graph.size)

    with create_span("ids.counting", {"n": n, "realizations": len(seeds)}):
        curves = map_seeds(one, seeds)
    return IdsEstimate(
        curve=average(curves),
        method="counting",
        n=n,
        realizations=len(seeds),
        params_digest=_params_digest(params),
        trunc_tol=trunc_tol,
        seeds=tuple(seeds),
    )


def _trace_curve(spec: Spectrum, inner_size: int) -> StepFunction:
    return normalize(weighted_counting(spec.eigenvalues, spec.region_weights, spec.tolerance), inner_size)


def ids_pastur_shubin(
    params: ModelParams,
    n: int,
    seeds: Sequence[int],
    mode: Literal["center", "trace"] = "center",
    buffer: Optional[int] = None,
    trunc_tol: float = 1e-9,
    cache: Optional[ArtifactCache] = None,
    realizations: Optional[int] = None,
) -> IdsEstimate:
    """
    IDS from diagonal entries of spectral projectors of H_n.

    mode="center" uses the origin's overlaps; mode="trace" averages the
    diagonal over Lambda_m with m = n - buffer (buffer defaults to R(n)) and
    renormalizes to mass 1. With buffer=0 the trace curve is the counting
    curve, bit for bit.

    Args:
        params: Model parameters.
        n: Box radius.
        seeds: Master seeds.
        mode: "center" or "trace".
        buffer: Trace-mode boundary buffer, 0 <= buffer <= n.
        trunc_tol: Truncation tolerance for sampling.
        cache: Optional artifact cache.
        realizations: If given, must equal len(seeds).

    Returns:
        IdsEstimate: method "pastur-shubin-center" or "pastur-shubin-trace".
    """
    seeds = _check_seeds(seeds, realizations)
    if mode not in ("center", "trace"):
        raise InvalidInputError(f"mode must be 'center' or 'trace', got {mode!r}", field="run.mode")

    inner_radius = None
    normalization = 1.0
    if mode == "trace":
        if buffer is None:
            buffer = default_schedule(n, params.kernel).R_n if n >= 1 else 0
        if not 0 <= buffer <= n:
            raise InvalidInputError(f"buffer must lie in [0, {n}], got {buffer}", field="run.buffer")
        inner_radius = n - buffer
        normalization = (2 * inner_radius + 1) ** params.d / (2 * n + 1) ** params.d

    def one(seed: int) -> StepFunction:
        p = params.with_seed(seed)
        graph = load_window(p, n, trunc_tol, cache)
        if mode == "center":
            spec = load_spectrum(p, graph, cache, center=True)
            curve = weighted_counting(spec.eigenvalues, spec.center_overlaps, spec.tolerance)
        else:
            spec = load_spectrum(p, graph, cache, inner_radius=inner_radius)
            curve = _trace_curve(spec, (2 * inner_radius + 1) ** params.d)
        return _unit_mass(curve)

    with create_span("ids.pastur_shubin", {"n": n, "mode": mode, "realizations": len(seeds)}):
        curves = map_seeds(one, seeds)
    return IdsEstimate(
        curve=average(curves),
        method=f"pastur-shubin-{mode}",
        n=n,
        realizations=len(seeds),
        params_digest=_params_digest(params),
        trunc_tol=trunc_tol,
        seeds=tuple(seeds),
        normalization=normalization,
        inner_radius=inner_radius,
    )


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------

@dataclass
class AtomReport:
    """
    Seed-averaged jumps of F_n / |Lambda_n| with the finite-volume error bound.
    """
    locations: np.ndarray
    masses: np.ndarray
    tolerance: float
    error_bound: float
    cluster_density: float
    long_edges: float
    schedule: Schedule
    n: int
    seeds: Tuple[int, ...] = ()

    @property
    def atoms(self) -> List[Tuple[float, float]]:
        return [(float(x), float(m)) for x, m in zip(self.locations, self.masses)]

    def mass_at(self, lam: float, tol: Optional[float] = None) -> float:
        """Total mass of atoms within tol (default: the clustering tolerance) of lam."""
        tol = self.tolerance if tol is None else tol
        return float(self.masses[np.abs(self.locations - lam) <= tol].sum())

    def metadata(self) -> Dict:
        return {
            "n": self.n,
            "seeds": list(self.seeds),
            "tolerance": self.tolerance,
            "error_bound": self.error_bound,
            "cluster_density": self.cluster_density,
            "long_edges": self.long_edges,
            "atom_count": int(self.masses.size),
            "total_mass": float(self.masses.sum()),
            "schedule": {
                "R_n": self.schedule.R_n,
                "eps_n": self.schedule.eps_n,
                "delta_n": self.schedule.delta_n,
            },
        }


def atom_report(
    params: ModelParams,
    n: int,
    seeds: Sequence[int],
    trunc_tol: float = 1e-9,
    cache: Optional[ArtifactCache] = None,
    min_mass: float = 0.0,
) -> AtomReport:
    """
    Clusters eigenvalues into atoms and averages their normalized masses.

    error_bound = (3 |boundary^{R(n)} Lambda_n| + 3 mean L_n) / |Lambda_n|,
    with L_n the number of edges of length >= R(n) touching Lambda_n.

    Args:
        params: Model parameters.
        n: Box radius (>= 1).
        seeds: Master seeds.
        trunc_tol: Truncation tolerance.
        cache: Optional artifact cache.
        min_mass: Atoms lighter than this are left out of the report.

    Returns:
        AtomReport: Atoms, tolerance, error bound, components per site, mean L_n.
    """
    seeds = _check_seeds(seeds, None)
    schedule = default_schedule(n, params.kernel)

    def one(seed: int):
        p = params.with_seed(seed)
        graph = load_window(p, n, trunc_tol, cache)
        spec = load_spectrum(p, graph, cache)
        curve = normalize(counting_function(spec), graph.size)
        return curve, spec.tolerance, long_edge_count(graph, schedule.R_n), component_count(graph) / graph.size

    with create_span("ids.atom_report", {"n": n, "realizations": len(seeds)}):
        results = map_seeds(one, seeds)

    curves, tolerances, long_counts, densities = zip(*results)
    tolerance = float(max(tolerances))
    locations, masses = merge_atoms(*average(list(curves)).atoms(), tolerance)
    keep = (masses > 0.0) & (masses >= min_mass)
    mean_long = float(np.mean(long_counts))
    report = AtomReport(
        locations=locations[keep],
        masses=masses[keep],
        tolerance=tolerance,
        error_bound=error_bound(n, params.d, schedule.R_n, mean_long),
        cluster_density=float(np.mean(densities)),
        long_edges=mean_long,
        schedule=schedule,
        n=n,
        seeds=tuple(seeds),
    )
    logger.debug(f"Atom report n={n}: {report.masses.size} atoms, error bound {report.error_bound:.4g}")
    return report


# ---------------------------------------------------------------------------
# Convergence along one realization
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceRow:
    """One scale of a convergence scan; sup_distance is to the previous scale (NaN for the first)."""
    n: int
    sup_distance: float
    error_bound: float
    boundary_ratio: float
    eps_n: float
    delta_n: float
    long_edges: float
    event_holds: bool


def _nested_windows(
    params: ModelParams, n_list: Sequence[int], trunc_tol: float, cache: Optional[ArtifactCache]
) -> Dict[int, WindowGraph]:
    """Samples the largest window once and restricts it to the smaller scales."""
    largest = load_window(params, n_list[-1], trunc_tol, cache)
    windows = {n_list[-1]: largest}
    for n in n_list[:-1]:
        payload = cache.load("window", window_key(params, n, trunc_tol)) if cache is not None else None
        if payload is not None:
            windows[n] = WindowGraph.from_dict(payload)
        else:
            windows[n] = largest.restrict(n)
            if cache is not None:
                cache.store("window", window_key(params, n, trunc_tol), windows[n].to_dict())
    return windows


def convergence_scan(
    params: ModelParams,
    n_list: Sequence[int],
    seeds: Sequence[int],
    trunc_tol: float = 1e-9,
    cache: Optional[ArtifactCache] = None,
) -> List[ConvergenceRow]:
    """
    Sup distances between consecutive scales of the same realizations.

    Args:
        params: Model parameters.
        n_list: Strictly ascending radii (>= 1).
        seeds: Fixed seed set, reused at every scale.
        trunc_tol: Truncation tolerance.
        cache: Optional artifact cache.

    Returns:
        List[ConvergenceRow]: One row per scale.
    """
    seeds = _check_seeds(seeds, None)
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 1:
        raise InvalidInputError("n_list must be nonempty, strictly ascending and >= 1", field="run.n_list")

    schedules = [default_schedule(n, params.kernel) for n in n_list]

    def one(seed: int):
        p = params.with_seed(seed)
        windows = _nested_windows(p, n_list, trunc_tol, cache)
        curves, longs = [], []
        for schedule in schedules:
            graph = windows[schedule.n]
            curves.append(normalize(counting_function(load_spectrum(p, graph, cache)), graph.size))
            longs.append(long_edge_count(graph, schedule.R_n))
        return curves, longs

    with create_span("ids.convergence_scan", {"n_list": str(n_list), "realizations": len(seeds)}):
        results = map_seeds(one, seeds)

    rows: List[ConvergenceRow] = []
    previous: Optional[StepFunction] = None
    for i, schedule in enumerate(schedules):
        curve = average([curves[i] for curves, _ in results])
        longs = np.array([longs[i] for _, longs in results], dtype=np.float64)
        holds = bool(np.all(longs <= schedule.event_threshold))
        if not holds:
            logger.warning(
                f"Long-edge event fails at n={schedule.n}: max L_n={int(longs.max())} > "
                f"{schedule.event_threshold:.4g}; probability bound {schedule.event_probability_bound:.3e}"
            )
        mean_long = float(longs.mean())
        rows.append(
            ConvergenceRow(
                n=schedule.n,
                sup_distance=math.nan if previous is None else sup_distance(previous, curve),
                error_bound=error_bound(schedule.n, params.d, schedule.R_n, mean_long),
                boundary_ratio=schedule.boundary_ratio,
                eps_n=schedule.eps_n,
                delta_n=schedule.delta_n,
                long_edges=mean_long,
                event_holds=holds,
            )
        )
        previous = curve
    return rows


# ---------------------------------------------------------------------------
# Spatial vs ensemble averages
# ---------------------------------------------------------------------------

@dataclass
class BirkhoffResult:
    """Spatial projector-diagonal average of one realization against the ensemble center value."""
    lam: float
    spatial: float
    ensemble_mean: float
    ensemble_stderr: float
    samples: int
    seeds: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return abs(self.spatial - self.ensemble_mean) <= 3.0 * self.ensemble_stderr


def birkhoff_consistency(
    params: ModelParams,
    n: int,
    m: int,
    lam: float,
    seeds: Sequence[int],
    trunc_tol: float = 1e-9,
    cache: Optional[ArtifactCache] = None,
) -> BirkhoffResult:
    """
    Compares |Lambda_m|^-1 sum_{x in Lambda_m} <E((-inf, lam]) delta_x, delta_x>
    for the first seed with the seed average of the same entry at the origin.

    Args:
        params: Model parameters.
        n: Box radius of H_n.
        m: Inner radius, 0 <= m <= n.
        lam: Energy.
        seeds: Ensemble seeds (>= 2); the first one provides the spatial average.
        trunc_tol: Truncation tolerance.
        cache: Optional artifact cache.

    Returns:
        BirkhoffResult: Both averages, the ensemble standard error and a 3-sigma verdict.
    """
    seeds = _check_seeds(seeds, None)
    if len(seeds) < 2:
        raise InvalidInputError("the ensemble needs at least two seeds", field="run.seeds")
    if not 0 <= m <= n:
        raise InvalidInputError(f"inner radius must lie in [0, {n}], got {m}", field="run.m")

    first = params.with_seed(seeds[0])
    spec = load_spectrum(first, load_window(first, n, trunc_tol, cache), cache, inner_radius=m)
    spatial = float(_trace_curve(spec, (2 * m + 1) ** params.d)(lam))

    def one(seed: int) -> float:
        p = params.with_seed(seed)
        spec = load_spectrum(p, load_window(p, n, trunc_tol, cache), cache, center=True)
        return float(weighted_counting(spec.eigenvalues, spec.center_overlaps, spec.tolerance)(lam))

    values = np.array(map_seeds(one, seeds))
    return BirkhoffResult(
        lam=float(lam),
        spatial=spatial,
        ensemble_mean=float(values.mean()),
        ensemble_stderr=float(values.std(ddof=1) / math.sqrt(values.size)),
        samples=int(values.size),
        seeds=seeds,
    )
