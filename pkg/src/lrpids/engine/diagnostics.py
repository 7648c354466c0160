"""
lrpids Diagnostics Module.

Geometric and probabilistic quantities that control the finite-volume error
of the IDS estimators:

- R-boundaries of boxes and the default scale schedule R(n), eps(n), delta(n);
- long-edge counts L(R, Q) and the error bound
  (3 |boundary| + 3 L) / |Lambda_n|;
- the concentration check P(L >= |Q|(eps_R + delta)) <= exp(-delta^2 |Q| / 4)
  with an exact tail over the truncated edge set;
- the low-energy (Lifshitz) probe of Laplacian IDS curves.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal, stats

from ..core.errors import DimensionMismatchError, InvalidInputError, LifshitzFitError
from ..core.kernels import Kernel, ModelParams, kernel_tail, truncation_radius
from ..core.settings import get_settings
from ..utils.parallel import map_seeds
from .sampler import WindowGraph, box_vertices, half_offsets, in_box, sample_window, vertex_index

if TYPE_CHECKING:
    from .ids import IdsEstimate

logger = logging.getLogger("lrpids")

LIFSHITZ_ZERO_TOL = 1e-8


# ---------------------------------------------------------------------------
# Boundaries and schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """
    Scale schedule at box radius n.

    Attributes:
        n: Box radius.
        d: Dimension.
        R_n: Boundary width ceil(sqrt(n)).
        eps_n: Kernel tail at R_n.
        delta_n: (2n+1)^(-d/4).
    """
    n: int
    d: int
    R_n: int
    eps_n: float
    delta_n: float

    @property
    def volume(self) -> int:
        return (2 * self.n + 1) ** self.d

    @property
    def boundary_ratio(self) -> float:
        return boundary_size(self.n, self.R_n, self.d) / self.volume

    @property
    def event_threshold(self) -> float:
        """Largest L_n compatible with the good event L_n <= |Lambda_n|(eps_n + delta_n)."""
        return self.volume * (self.eps_n + self.delta_n)

    @property
    def event_probability_bound(self) -> float:
        """Bound exp(-delta_n^2 |Lambda_n| / 4) on the probability of the bad event."""
        return math.exp(-self.delta_n ** 2 * self.volume / 4.0)


def _ceil_sqrt(n: int) -> int:
    root = math.isqrt(n)
    return root if root * root == n else root + 1


def default_schedule(n: int, kernel: Kernel) -> Schedule:
    """
    R(n) = ceil(sqrt(n)), eps(n) = kernel tail at R(n), delta(n) = (2n+1)^(-d/4).

    Args:
        n: Box radius (>= 1).
        kernel: Connection kernel; its dimension fixes d.

    Returns:
        Schedule: The scales at radius n.
    """
    if n < 1:
        raise InvalidInputError(f"schedule needs n >= 1, got {n}", field="run.n")
    d = kernel.dimension
    R = _ceil_sqrt(n)
    return Schedule(n=n, d=d, R_n=R, eps_n=kernel_tail(kernel, R), delta_n=(2 * n + 1) ** (-d / 4))


def boundary_size(n: int, R: int, d: int) -> int:
    """
    |boundary^R Lambda_n| = (2n+1)^d - (2(n-R)+1)^d; the whole box once R > n.
    """
    if R < 0:
        raise InvalidInputError(f"boundary width must be nonnegative, got {R}", field="run.R")
    if n < 0:
        raise InvalidInputError(f"box radius must be nonnegative, got {n}", field="run.n")
    if R > n:
        return (2 * n + 1) ** d
    return (2 * n + 1) ** d - (2 * (n - R) + 1) ** d


def boundary_size_bruteforce(n: int, R: int, d: int) -> int:
    """Counts points of Lambda_n within l1 distance R of the complement by enumeration."""
    if R < 0:
        raise InvalidInputError(f"boundary width must be nonnegative, got {R}", field="run.R")
    inside = box_vertices(n, d)
    shell = box_vertices(n + 1, d)
    shell = shell[~in_box(shell, n)]
    count = 0
    for start in range(0, inside.shape[0], 256):
        block = inside[start:start + 256]
        distances = np.abs(block[:, None, :] - shell[None, :, :]).sum(axis=2).min(axis=1)
        count += int(np.count_nonzero(distances <= R))
    return count


def error_bound(n: int, d: int, R: int, long_edges: float) -> float:
    """(3 |boundary^R Lambda_n| + 3 L_n) / |Lambda_n|."""
    return (3.0 * boundary_size(n, R, d) + 3.0 * long_edges) / (2 * n + 1) ** d


def truncation_bias(q_size: int, trunc_tol: float) -> float:
    """Upper bound on the expected number of long edges at Q lost to truncation."""
    return q_size * trunc_tol


# ---------------------------------------------------------------------------
# Long edges
# ---------------------------------------------------------------------------

def long_edge_count(graph: WindowGraph, R: int, Q: Optional[np.ndarray] = None) -> int:
    """
    Number of present edges of length >= R with at least one endpoint in Q.

    Args:
        graph: Sampled window; interior and cross edges are both counted.
        R: Minimal edge length (>= 1).
        Q: Vertex set as an (k, d) integer array inside the window; None
            means the whole window.

    Returns:
        int: L(R, Q) for this realization.

    Raises:
        InvalidInputError: If R < 1 or Q leaves the window.
        DimensionMismatchError: If Q has the wrong dimension.
    """
    if R < 1:
        raise InvalidInputError(f"long-edge length must be >= 1, got {R}", field="run.R")
    edges = np.concatenate([graph.interior, graph.cross])
    if edges.shape[0] == 0:
        if Q is not None:
            _check_region(graph, Q)
        return 0
    lengths = np.abs(edges[:, 0] - edges[:, 1]).sum(axis=1)
    long_edges = edges[lengths >= R]
    if Q is None:
        return int(long_edges.shape[0])

    members = np.zeros(graph.size, dtype=bool)
    members[vertex_index(_check_region(graph, Q), graph.n)] = True
    touches = np.zeros(long_edges.shape[0], dtype=bool)
    for end in (0, 1):
        points = long_edges[:, end]
        inside = in_box(points, graph.n)
        touches[inside] |= members[vertex_index(points[inside], graph.n)]
    return int(np.count_nonzero(touches))


def _check_region(graph: WindowGraph, Q: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.int64)
    if Q.ndim == 1 and graph.d == 1:
        Q = Q[:, None]
    if Q.ndim != 2 or Q.shape[1] != graph.d:
        raise DimensionMismatchError(f"Q must have shape (k, {graph.d}), got {Q.shape}", field="Q")
    if not np.all(in_box(Q, graph.n)):
        raise InvalidInputError(f"Q is not contained in the window of radius {graph.n}", field="Q")
    return Q


def _length_classes(params: ModelParams, R: int, q_radius: int, trunc_tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """Per edge length r >= R: number of lattice pairs touching Lambda_q and p(r)."""
    rho = truncation_radius(params.kernel, trunc_tol, get_settings().max_truncation_radius)
    offsets = half_offsets(params.d, rho)
    lengths = np.abs(offsets).sum(axis=1)
    keep = lengths >= R
    offsets, lengths = offsets[keep], lengths[keep]
    if offsets.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    side = 2 * q_radius + 1
    overlap = np.prod(np.clip(side - np.abs(offsets), 0, None), axis=1)
    pairs = 2 * side ** params.d - overlap
    radii = np.unique(lengths)
    counts = np.array([pairs[lengths == r].sum() for r in radii], dtype=np.int64)
    return counts, params.kernel.radial_value(radii)


def expected_long_edges(params: ModelParams, R: int, q_radius: int, trunc_tol: float = 1e-9) -> float:
    """E[L(R, Lambda_q)] over the truncated edge set."""
    counts, probs = _length_classes(params, R, q_radius, trunc_tol)
    return float(np.sum(counts * probs))


def exact_long_edge_tail(
    params: ModelParams, R: int, q_radius: int, threshold: float, trunc_tol: float = 1e-9
) -> float:
    """
    Exact P(L(R, Lambda_q) >= threshold) over the truncated edge set.

    All edges of one length share p, so L is a sum of independent binomials,
    one per length class; their laws are convolved.
    """
    counts, probs = _length_classes(params, R, q_radius, trunc_tol)
    pmf = np.ones(1)
    for N, p in zip(counts.tolist(), probs.tolist()):
        if N == 0 or p <= 0.0:
            continue
        upper = N if p >= 1.0 else min(N, int(stats.binom.isf(1e-17, N, p)) + 1)
        pmf = np.clip(signal.fftconvolve(pmf, stats.binom.pmf(np.arange(upper + 1), N, p)), 0.0, None)
    start = max(0, math.ceil(threshold))
    if start >= pmf.size:
        return 0.0
    return float(min(1.0, pmf[start:].sum()))


@dataclass
class ConcentrationResult:
    """Empirical tail of L(R, Q) against exp(-delta^2 |Q| / 4)."""
    R: int
    q_radius: int
    q_size: int
    delta: float
    eps_R: float
    threshold: float
    counts: List[int]
    empirical: float
    bound: float
    slack: float
    truncation_bias: float
    exact_tail: Optional[float] = None
    seeds: List[int] = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.counts)

    @property
    def passed(self) -> bool:
        return self.empirical <= self.bound + self.slack + self.truncation_bias

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["passed"] = self.passed
        data["trials"] = self.trials
        return data


def long_edge_counts(
    params: ModelParams, R: int, q_radius: int, seeds: Sequence[int], trunc_tol: float = 1e-9
) -> np.ndarray:
    """L(R, Lambda_q) for every seed, in seed order."""
    def one(seed: int) -> int:
        return long_edge_count(sample_window(params.with_seed(seed), q_radius, trunc_tol), R)

    return np.asarray(map_seeds(one, list(seeds)), dtype=np.int64)


def concentration_check(
    params: ModelParams,
    R: int,
    q_radius: int,
    delta: float,
    seeds: Sequence[int],
    trunc_tol: float = 1e-9,
    counts: Optional[np.ndarray] = None,
    exact: bool = True,
) -> ConcentrationResult:
    """
    Compares the empirical frequency of {L(R, Q) >= |Q|(eps_R + delta)} with
    exp(-delta^2 |Q| / 4) for Q = Lambda_{q_radius}.

    The check passes iff empirical <= bound + 3 sqrt(bound(1 - bound)/trials)
    + trunc_tol |Q|. The inequality only holds for R and delta in an
    unspecified admissible range, so failures are reported, not raised.

    Args:
        params: Model parameters.
        R: Long-edge length.
        q_radius: Radius of the box Q.
        delta: Deviation parameter (> 0).
        seeds: One trial per seed.
        trunc_tol: Truncation tolerance.
        counts: Precomputed L per seed (reused across delta sweeps).
        exact: Also compute the exact tail over the truncated edge set.

    Returns:
        ConcentrationResult: Counts, threshold, bound, slack and verdict.
    """
    if delta <= 0:
        raise InvalidInputError(f"delta must be positive, got {delta}", field="run.delta")
    if not seeds:
        raise InvalidInputError("at least one trial seed is required", field="run.seeds")
    if counts is None:
        counts = long_edge_counts(params, R, q_radius, seeds, trunc_tol)

    q_size = (2 * q_radius + 1) ** params.d
    eps_R = kernel_tail(params.kernel, R)
    threshold = q_size * (eps_R + delta)
    bound = math.exp(-delta * delta * q_size / 4.0)
    trials = len(counts)
    result = ConcentrationResult(
        R=R,
        q_radius=q_radius,
        q_size=q_size,
        delta=delta,
        eps_R=eps_R,
        threshold=threshold,
        counts=[int(c) for c in counts],
        empirical=float(np.count_nonzero(np.asarray(counts) >= threshold) / trials),
        bound=bound,
        slack=3.0 * math.sqrt(bound * (1.0 - bound) / trials),
        truncation_bias=truncation_bias(q_size, trunc_tol),
        exact_tail=exact_long_edge_tail(params, R, q_radius, threshold, trunc_tol) if exact else None,
        seeds=[int(s) for s in seeds],
    )
    if not result.passed:
        logger.warning(
            f"Concentration violated at R={R}, delta={delta:g}: empirical {result.empirical:.4g} "
            f"> bound {bound:.4g} + slack; R may be below the admissible range"
        )
    return result


# ---------------------------------------------------------------------------
# Lifshitz probe
# ---------------------------------------------------------------------------

@dataclass
class LifshitzFit:
    """Per-point values and the fitted slope of log(-log G) against log E."""
    E: np.ndarray
    G: np.ndarray
    usable: np.ndarray
    slope: float
    intercept: float
    atom_at_zero: Optional[float] = None

    @property
    def log_E(self) -> np.ndarray:
        return np.log(self.E)

    @property
    def loglog_G(self) -> np.ndarray:
        out = np.full(self.G.shape, np.nan)
        out[self.usable] = np.log(-np.log(self.G[self.usable]))
        return out

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return [
            (float(e), float(g), float(le), float(lg))
            for e, g, le, lg in zip(self.E, self.G, self.log_E, self.loglog_G)
        ]


def fit_lifshitz_exponent(E_grid: Sequence[float], G: Sequence[float]) -> LifshitzFit:
    """
    Least-squares slope of log(-log G(E)) against log E.

    Points with G outside (0, 1) are kept in the result but excluded from
    the fit.

    Raises:
        LifshitzFitError: If fewer than 3 points are usable.
    """
    E = np.asarray(E_grid, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    if E.ndim != 1 or E.shape != G.shape:
        raise InvalidInputError("E_grid and G must be 1-D arrays of equal length", field="run.E_grid")
    if E.size and (np.any(E <= 0) or np.any(np.diff(E) <= 0)):
        raise InvalidInputError("E_grid must be ascending and positive", field="run.E_grid")
    usable = np.isfinite(G) & (G > 0.0) & (G < 1.0)
    if np.count_nonzero(usable) < 3:
        raise LifshitzFitError(
            f"only {int(np.count_nonzero(usable))} of {E.size} grid points have 0 < G(E) < 1; "
            "coarsen the grid or add realizations"
        )
    slope, intercept = np.polyfit(np.log(E[usable]), np.log(-np.log(G[usable])), 1)
    return LifshitzFit(E=E, G=G, usable=usable, slope=float(slope), intercept=float(intercept))


def lifshitz_probe(ids: "IdsEstimate", E_grid: Sequence[float], zero_tol: float = LIFSHITZ_ZERO_TOL) -> LifshitzFit:
    """
    Low-energy probe of a Laplacian IDS (spectrum on the non-positive axis).

    Energies map as E = |lambda|, so G(E) = F(-zero_tol) - F((-E)-): the mass
    of eigenvalues in [-E, 0) net of the atom at zero.

    Args:
        ids: Estimate from an alpha = 0, beta = 1, constant-weight model.
        E_grid: Ascending positive energies.
        zero_tol: Half width of the window treated as the zero atom.

    Returns:
        LifshitzFit: Per-point G, usability flags and the fitted slope.
    """
    E = np.asarray(E_grid, dtype=np.float64)
    F = ids.curve
    G = F(-zero_tol) - F.left_limit(-E)
    fit = fit_lifshitz_exponent(E, G)
    fit.atom_at_zero = float(F(zero_tol) - F(-zero_tol))
    excluded = int(E.size - np.count_nonzero(fit.usable))
    if excluded:
        logger.info(f"Lifshitz probe: {excluded} grid points with G outside (0, 1) excluded from the fit")
    return fit
