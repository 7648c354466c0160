"""
lrpids Sampler Module.

Deterministic sampling of one percolation realization: edge indicators b_e
and weights a_e are pure functions of (master seed, canonical edge key), drawn
from a stateless counter-based generator. Because nothing is drawn
sequentially, the same realization is seen by every window size, every
process and every worker thread.

The generator is a 64-bit SplitMix finalizer chained over the seed, a stream
label, the edge arity and the (shifted) endpoint coordinates, vectorized over
numpy uint64 arrays. Separate stream labels keep a_e independent of b_e.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..core.errors import DimensionMismatchError, InvalidInputError
from ..core.kernels import ModelParams, truncation_radius
from ..core.settings import get_settings
from ..utils.tracing import trace_stage

logger = logging.getLogger("lrpids")

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

STREAM_INDICATOR = 0x1
STREAM_WEIGHT = 0x2
STREAM_LOOP_INDICATOR = 0x3
STREAM_LOOP_WEIGHT = 0x4


def _finalize(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _scalar_mix(value: int) -> int:
    return int(_finalize(np.array([value & _MASK64], dtype=np.uint64))[0])


def counter_uniforms(seed: int, stream: int, coords: np.ndarray) -> np.ndarray:
    """
    Uniform variates in (0, 1), one per row of an integer coordinate array.

    Args:
        seed: 64-bit master seed.
        stream: Stream label separating independent families of draws.
        coords: Integer array of shape (m, k); each row is one counter.

    Returns:
        np.ndarray: Float array of shape (m,).
    """
    coords = np.ascontiguousarray(np.asarray(coords, dtype=np.int64))
    if coords.ndim != 2:
        raise ValueError("coords must be a 2-D array")
    m, k = coords.shape
    key = _scalar_mix(_scalar_mix(seed) ^ (stream * 0x100 + k))
    h = np.full(m, key, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for column in coords.T:
            h = _finalize(h ^ _finalize(column.astype(np.uint64) + _GOLDEN))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


@dataclass(frozen=True)
class EdgeKey:
    """Canonical unordered edge {x, y} or loop {x} of Z^d."""

    endpoints: Tuple[Tuple[int, ...], ...]

    @classmethod
    def of(cls, x: Sequence[int], y: Optional[Sequence[int]] = None) -> "EdgeKey":
        x = tuple(int(c) for c in x)
        if y is None:
            return cls((x,))
        y = tuple(int(c) for c in y)
        if len(x) != len(y):
            raise DimensionMismatchError(f"endpoints {x} and {y} have different dimensions")
        if x == y:
            return cls((x,))
        return cls((min(x, y), max(x, y)))

    @property
    def is_loop(self) -> bool:
        return len(self.endpoints) == 1

    @property
    def dimension(self) -> int:
        return len(self.endpoints[0])

    @property
    def difference(self) -> Tuple[int, ...]:
        if self.is_loop:
            return (0,) * self.dimension
        x, y = self.endpoints
        return tuple(b - a for a, b in zip(x, y))

    @property
    def length(self) -> int:
        return sum(abs(c) for c in self.difference)

    def shifted(self, gamma: Sequence[int]) -> "EdgeKey":
        moved = [tuple(c + g for c, g in zip(point, gamma)) for point in self.endpoints]
        return EdgeKey.of(*moved)


def _shifted(params: ModelParams, points: np.ndarray) -> np.ndarray:
    if params.shift is None:
        return points
    return points + np.asarray(params.offset, dtype=np.int64)


def _edge_counters(params: ModelParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.concatenate([_shifted(params, x), _shifted(params, y)], axis=1)


def draw_edges(params: ModelParams, x: np.ndarray, y: np.ndarray, stream: int) -> np.ndarray:
    """Uniforms for canonical edge endpoint arrays x < y of shape (m, d)."""
    return counter_uniforms(params.seed, stream, _edge_counters(params, x, y))


def draw_loops(params: ModelParams, x: np.ndarray, stream: int) -> np.ndarray:
    return counter_uniforms(params.seed, stream, _shifted(params, x))


def _check_key(params: ModelParams, e: EdgeKey) -> None:
    if e.dimension != params.d:
        raise DimensionMismatchError(f"edge {e.endpoints} is not in dimension {params.d}", field="d")


def edge_bernoulli(params: ModelParams, e: EdgeKey) -> bool:
    """
    Returns the indicator b_e of one realization.

    Args:
        params: Model parameters (seed, kernel, loop probability, shift).
        e: Canonical edge or loop key.

    Returns:
        bool: True iff the edge is present.
    """
    _check_key(params, e)
    if e.is_loop:
        u = draw_loops(params, np.array(e.endpoints, dtype=np.int64), STREAM_LOOP_INDICATOR)
        return bool(u[0] < params.p_loop)
    x, y = (np.array([point], dtype=np.int64) for point in e.endpoints)
    p = params.kernel.radial_value(np.array([e.length]))[0]
    return bool(draw_edges(params, x, y, STREAM_INDICATOR)[0] < p)


def edge_weight(params: ModelParams, e: EdgeKey) -> float:
    """Returns the weight a_e, drawn from a stream independent of b_e."""
    _check_key(params, e)
    if e.is_loop:
        u = draw_loops(params, np.array(e.endpoints, dtype=np.int64), STREAM_LOOP_WEIGHT)
    else:
        x, y = (np.array([point], dtype=np.int64) for point in e.endpoints)
        u = draw_edges(params, x, y, STREAM_WEIGHT)
    return float(params.weights.quantile(u)[0])


def shift_realization(params: ModelParams, gamma: Sequence[int]) -> ModelParams:
    """
    Returns params whose sampler answers at e equal the original's at e + gamma.

    Args:
        params: Model parameters.
        gamma: Lattice translation.

    Returns:
        ModelParams: Same law, translated realization.
    """
    gamma = tuple(int(g) for g in gamma)
    if len(gamma) != params.d:
        raise DimensionMismatchError(f"shift {gamma} is not in dimension {params.d}", field="shift")
    total = tuple(a + b for a, b in zip(params.offset, gamma))
    return params.model_copy(update={"shift": None if not any(total) else total})


# ---------------------------------------------------------------------------
# Window geometry
# ---------------------------------------------------------------------------

def box_vertices(n: int, d: int) -> np.ndarray:
    """Vertices of Lambda_n = ([-n, n] cap Z)^d in lexicographic order, shape (N, d)."""
    side = np.arange(-n, n + 1, dtype=np.int64)
    grids = np.meshgrid(*([side] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def vertex_index(points: np.ndarray, n: int) -> np.ndarray:
    """Lexicographic index of points inside Lambda_n."""
    points = np.asarray(points, dtype=np.int64)
    side = 2 * n + 1
    index = np.zeros(points.shape[0], dtype=np.int64)
    for column in points.T:
        index = index * side + (column + n)
    return index


def in_box(points: np.ndarray, n: int) -> np.ndarray:
    return np.all(np.abs(points) <= n, axis=1)


def half_offsets(d: int, radius: int) -> np.ndarray:
    """
    All z with 1 <= ||z||_1 <= radius whose first nonzero coordinate is positive.

    Each unordered pair {x, x+z} is then enumerated exactly once.
    """
    if radius < 1:
        return np.zeros((0, d), dtype=np.int64)
    if d == 1:
        return np.arange(1, radius + 1, dtype=np.int64)[:, None]
    rows: List[np.ndarray] = []
    lower = half_offsets(d - 1, radius)
    rows.append(np.concatenate([np.zeros((lower.shape[0], 1), dtype=np.int64), lower], axis=1))
    for first in range(1, radius + 1):
        rest = _l1_ball(d - 1, radius - first)
        rows.append(np.concatenate([np.full((rest.shape[0], 1), first, dtype=np.int64), rest], axis=1))
    return np.concatenate(rows, axis=0)


def _l1_ball(d: int, radius: int) -> np.ndarray:
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    rows = []
    for first in range(-radius, radius + 1):
        rest = _l1_ball(d - 1, radius - abs(first))
        rows.append(np.concatenate([np.full((rest.shape[0], 1), first, dtype=np.int64), rest], axis=1))
    return np.concatenate(rows, axis=0)


# ---------------------------------------------------------------------------
# Window graphs
# ---------------------------------------------------------------------------

def _empty_edges(d: int) -> np.ndarray:
    return np.zeros((0, 2, d), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class WindowGraph:
    """
    One realization restricted to the box Lambda_n.

    Edge arrays have shape (m, 2, d) with canonical (lexicographically ordered)
    endpoints and are sorted lexicographically; interior edges have both
    endpoints in Lambda_n, cross edges exactly one.
    """

    n: int
    d: int
    truncation_radius: int
    trunc_tol: float
    params_digest: str
    interior: np.ndarray
    interior_weights: np.ndarray
    cross: np.ndarray
    cross_weights: np.ndarray
    loops: np.ndarray = field(default=None)
    loop_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.loops is None:
            object.__setattr__(self, "loops", np.zeros((0, self.d), dtype=np.int64))
            object.__setattr__(self, "loop_weights", np.zeros(0))

    @property
    def size(self) -> int:
        return (2 * self.n + 1) ** self.d

    @property
    def interior_edges(self) -> List[Tuple[EdgeKey, float]]:
        return [(EdgeKey.of(x, y), float(w)) for (x, y), w in zip(self.interior.tolist(), self.interior_weights)]

    @property
    def cross_edges(self) -> List[Tuple[EdgeKey, float]]:
        return [(EdgeKey.of(x, y), float(w)) for (x, y), w in zip(self.cross.tolist(), self.cross_weights)]

    def interior_keys(self) -> set:
        return {key for key, _ in self.interior_edges}

    def interior_index_pairs(self) -> Tuple[np.ndarray, np.ndarray]:
        return vertex_index(self.interior[:, 0], self.n), vertex_index(self.interior[:, 1], self.n)

    def cross_inside(self) -> np.ndarray:
        """Window index of the inside endpoint of every cross edge."""
        first_inside = in_box(self.cross[:, 0], self.n)
        inside = np.where(first_inside[:, None], self.cross[:, 0], self.cross[:, 1])
        return vertex_index(inside, self.n)

    def degrees(self) -> np.ndarray:
        """Degree of every window vertex, counting interior and cross edges."""
        i, j = self.interior_index_pairs()
        counts = np.bincount(i, minlength=self.size) + np.bincount(j, minlength=self.size)
        return counts + np.bincount(self.cross_inside(), minlength=self.size)

    def restrict(self, n: int) -> "WindowGraph":
        """
        The same realization seen through the smaller box Lambda_n (n <= self.n).

        Every edge touching Lambda_n within the truncation radius touches
        Lambda_{self.n} too, so the result equals sample_window at radius n.
        """
        if n > self.n:
            raise InvalidInputError(f"cannot restrict window {self.n} to larger radius {n}")
        edges = np.concatenate([self.interior, self.cross])
        weights = np.concatenate([self.interior_weights, self.cross_weights])
        inside = in_box(edges[:, 0], n).astype(int) + in_box(edges[:, 1], n).astype(int)
        touching = inside > 0
        edges, weights, inside = edges[touching], weights[touching], inside[touching]
        order = _sort_edges(edges[:, 0], edges[:, 1])
        edges, weights, inside = edges[order], weights[order], inside[order]
        loop_mask = in_box(self.loops, n)
        return WindowGraph(
            n=n,
            d=self.d,
            truncation_radius=self.truncation_radius,
            trunc_tol=self.trunc_tol,
            params_digest=self.params_digest,
            interior=edges[inside == 2],
            interior_weights=weights[inside == 2],
            cross=edges[inside == 1],
            cross_weights=weights[inside == 1],
            loops=self.loops[loop_mask],
            loop_weights=self.loop_weights[loop_mask],
        )

    def to_dict(self) -> Dict:
        """JSON cache schema: vertices implicit via n and d."""
        return {
            "n": self.n,
            "d": self.d,
            "truncation_radius": self.truncation_radius,
            "trunc_tol": self.trunc_tol,
            "params_digest": self.params_digest,
            "interior": {"endpoints": self.interior.tolist(), "weights": self.interior_weights.tolist()},
            "cross": {"endpoints": self.cross.tolist(), "weights": self.cross_weights.tolist()},
            "loops": {"vertices": self.loops.tolist(), "weights": self.loop_weights.tolist()},
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "WindowGraph":
        d = int(data["d"])

        def edges(block):
            arr = np.asarray(block["endpoints"], dtype=np.int64)
            return (arr if arr.size else _empty_edges(d)), np.asarray(block["weights"], dtype=np.float64)

        interior, interior_w = edges(data["interior"])
        cross, cross_w = edges(data["cross"])
        loops = np.asarray(data["loops"]["vertices"], dtype=np.int64).reshape(-1, d)
        return cls(
            n=int(data["n"]),
            d=d,
            truncation_radius=int(data["truncation_radius"]),
            trunc_tol=float(data["trunc_tol"]),
            params_digest=data["params_digest"],
            interior=interior,
            interior_weights=interior_w,
            cross=cross,
            cross_weights=cross_w,
            loops=loops,
            loop_weights=np.asarray(data["loops"]["weights"], dtype=np.float64),
        )


def _sort_edges(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    keys = np.concatenate([x, y], axis=1)
    return np.lexsort(keys.T[::-1])


def _candidate_pairs(n: int, d: int, offsets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Canonical pairs (x, x+z) over half offsets z with at least one endpoint in Lambda_n."""
    vertices = box_vertices(n, d)
    xs, ys = [], []
    for z in offsets:
        forward = vertices + z
        xs.append(vertices)
        ys.append(forward)
        backward = vertices - z
        outside = ~in_box(backward, n)
        xs.append(backward[outside])
        ys.append(vertices[outside])
    if not xs:
        return np.zeros((0, d), dtype=np.int64), np.zeros((0, d), dtype=np.int64)
    return np.concatenate(xs), np.concatenate(ys)


@trace_stage("sample", lambda a: {"window.n": a["n"], "window.d": a["params"].d, "seed": str(a["params"].seed)})
def sample_window(params: ModelParams, n: int, trunc_tol: float = 1e-9) -> WindowGraph:
    """
    Materializes the realization on Lambda_n with its cross-boundary edges.

    Args:
        params: Model parameters.
        n: Box radius (>= 0).
        trunc_tol: Tail mass below which edge lengths are not enumerated.

    Returns:
        WindowGraph: Present interior edges, cross edges and loops with weights.

    Raises:
        InvalidInputError: On negative n or trunc_tol outside (0, 1].
        TruncationCapError: If the truncation radius exceeds the configured cap.
    """
    if n < 0:
        raise InvalidInputError(f"window radius must be nonnegative, got {n}", field="run.n")
    if not 0.0 < trunc_tol <= 1.0:
        raise InvalidInputError(f"trunc_tol must lie in (0, 1], got {trunc_tol}", field="run.trunc_tol")

    settings = get_settings()
    rho = truncation_radius(params.kernel, trunc_tol, settings.max_truncation_radius)
    offsets = half_offsets(params.d, rho)
    if offsets.shape[0]:
        offsets = offsets[params.kernel.radial_value(np.abs(offsets).sum(axis=1)) > 0.0]

    x, y = _candidate_pairs(n, params.d, offsets)
    if x.shape[0]:
        p = params.kernel.radial_value(np.abs(y - x).sum(axis=1))
        present = draw_edges(params, x, y, STREAM_INDICATOR) < p
        x, y = x[present], y[present]
    order = _sort_edges(x, y)
    x, y = x[order], y[order]
    weights = params.weights.quantile(draw_edges(params, x, y, STREAM_WEIGHT)) if x.shape[0] else np.zeros(0)

    interior_mask = in_box(x, n) & in_box(y, n)
    pairs = np.stack([x, y], axis=1) if x.shape[0] else _empty_edges(params.d)

    vertices = box_vertices(n, params.d)
    if params.p_loop > 0.0:
        loop_mask = draw_loops(params, vertices, STREAM_LOOP_INDICATOR) < params.p_loop
        loops = vertices[loop_mask]
        loop_weights = params.weights.quantile(draw_loops(params, loops, STREAM_LOOP_WEIGHT))
    else:
        loops = np.zeros((0, params.d), dtype=np.int64)
        loop_weights = np.zeros(0)

    graph = WindowGraph(
        n=n,
        d=params.d,
        truncation_radius=rho,
        trunc_tol=trunc_tol,
        params_digest=params.digest(),
        interior=pairs[interior_mask],
        interior_weights=weights[interior_mask],
        cross=pairs[~interior_mask],
        cross_weights=weights[~interior_mask],
        loops=loops,
        loop_weights=loop_weights,
    )
    logger.debug(
        f"Sampled window n={n} d={params.d}: {graph.interior.shape[0]} interior, "
        f"{graph.cross.shape[0]} cross, {graph.loops.shape[0]} loops (rho={rho})"
    )
    return graph


def mean_degree(graph: WindowGraph, margin: Optional[int] = None) -> float:
    """
    Mean degree over the vertices of Lambda_{n - margin}.

    Cross edges are counted, so boundary vertices lose only truncated edges.
    """
    margin = 0 if margin is None else margin
    if margin > graph.n:
        raise InvalidInputError(f"margin {margin} exceeds window radius {graph.n}")
    degrees = graph.degrees()
    vertices = box_vertices(graph.n, graph.d)
    inner = in_box(vertices, graph.n - margin)
    return float(degrees[inner].mean())


def component_count(graph: WindowGraph) -> int:
    """Number of connected components of the interior graph on Lambda_n."""
    i, j = graph.interior_index_pairs()
    adjacency = coo_matrix((np.ones(i.shape[0]), (i, j)), shape=(graph.size, graph.size)).tocsr()
    count, _ = connected_components(adjacency, directed=False)
    return int(count)


def lexicographically_positive(z: np.ndarray) -> np.ndarray:
    """Rows whose first nonzero coordinate is positive."""
    nonzero = z != 0
    first = np.argmax(nonzero, axis=1)
    leading = z[np.arange(z.shape[0]), first]
    return nonzero.any(axis=1) & (leading > 0)


def expected_interior_edges(params: ModelParams, n: int) -> float:
    """Sum of p(x - y) over unordered pairs of distinct points of Lambda_n."""
    side = 2 * n + 1
    offsets = box_vertices(2 * n, params.d)
    offsets = offsets[lexicographically_positive(offsets)]
    pairs = np.prod(side - np.abs(offsets), axis=1).astype(np.float64)
    return float(np.sum(pairs * params.kernel.radial_value(np.abs(offsets).sum(axis=1))))

