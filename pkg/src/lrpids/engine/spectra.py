"""
lrpids Spectra Module.

Full spectra of assembled operators and exact algebra on right-continuous
step functions (eigenvalue counting functions and their averages).

Eigenvalues closer than the clustering tolerance
max(1e-9, 1e-12 ||M||) * size are treated as one atom: numerically split
multiplicities (e.g. the kernel of a percolation Laplacian) re-merge, and
projector weights are summed over each cluster so they do not depend on the
eigenbasis the solver happened to return.

Across curves, breakpoints within 1e-9 (relative) of each other are one jump
when curves are compared or averaged.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ..core.errors import DenseLimitError, InvalidInputError
from ..utils.tracing import trace_stage
from .operator import SymmetricMatrix

logger = logging.getLogger("lrpids")


def cluster_tolerance(norm: float, size: int) -> float:
    """Gap below which neighbouring eigenvalues count as one atom."""
    return max(1e-9, 1e-12 * norm) * size


def cluster_starts(values: np.ndarray, tol: float) -> np.ndarray:
    """Start index of each cluster of a sorted array (gaps <= tol chain together)."""
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate([[0], np.flatnonzero(np.diff(values) > tol) + 1]).astype(np.int64)


def _cluster_average(weights: np.ndarray, starts: np.ndarray) -> np.ndarray:
    sums = np.add.reduceat(weights, starts)
    counts = np.diff(np.append(starts, weights.size))
    return np.repeat(sums / counts, counts)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Ascending eigenvalues with optional projector weights.

    Attributes:
        eigenvalues: All eigenvalues with multiplicity, ascending.
        center_overlaps: |psi_k(x0)|^2, cluster-averaged; sums to 1.
        region_weights: sum over a vertex region of |psi_k(x)|^2, cluster-averaged.
    """
    eigenvalues: np.ndarray
    center_overlaps: Optional[np.ndarray] = None
    region_weights: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def norm(self) -> float:
        if self.eigenvalues.size == 0:
            return 0.0
        return float(max(abs(self.eigenvalues[0]), abs(self.eigenvalues[-1])))

    @property
    def tolerance(self) -> float:
        return cluster_tolerance(self.norm, self.size)

    def to_dict(self) -> Dict:
        def listed(arr):
            return None if arr is None else arr.tolist()

        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "center_overlaps": listed(self.center_overlaps),
            "region_weights": listed(self.region_weights),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Spectrum":
        def array(value):
            return None if value is None else np.asarray(value, dtype=np.float64)

        return cls(
            eigenvalues=np.asarray(data["eigenvalues"], dtype=np.float64),
            center_overlaps=array(data.get("center_overlaps")),
            region_weights=array(data.get("region_weights")),
        )


@trace_stage("eigen", lambda a: {"matrix.size": a["M"].size, "matrix.dense": a["M"].is_dense})
def eigen(
    M: SymmetricMatrix,
    center: Optional[Union[int, Sequence[int]]] = None,
    region: Optional[np.ndarray] = None,
) -> Spectrum:
    """
    Computes the full spectrum of a dense symmetric matrix.

    Args:
        M: Assembled operator.
        center: Vertex (window index or lattice point) whose projector
            diagonal is recorded as center_overlaps.
        region: Window indices whose summed projector diagonals are recorded
            as region_weights.

    Returns:
        Spectrum: Ascending eigenvalues and the requested weights.

    Raises:
        DenseLimitError: If M is stored sparse.
    """
    if not M.is_dense:
        raise DenseLimitError(f"matrix of size {M.size} is above the dense eigensolver threshold")
    if M.size < 1:
        raise InvalidInputError("matrix must have at least one row")

    full_region = region is not None and np.unique(region).size == M.size
    need_vectors = center is not None or (region is not None and not full_region)
    if need_vectors:
        values, vectors = linalg.eigh(M.dense)
    else:
        values, vectors = linalg.eigh(M.dense, eigvals_only=True), None

    spectrum_norm = float(max(abs(values[0]), abs(values[-1])))
    starts = cluster_starts(values, cluster_tolerance(spectrum_norm, M.size))

    overlaps = None
    if center is not None:
        index = center if isinstance(center, (int, np.integer)) else M.vertex_index(center)
        overlaps = _cluster_average(vectors[int(index), :] ** 2, starts)

    weights = None
    if region is not None:
        if full_region:
            weights = np.ones(M.size)
        else:
            weights = _cluster_average(np.sum(vectors[np.asarray(region), :] ** 2, axis=0), starts)

    logger.debug(f"Eigensolve of size {M.size}: {starts.size} clusters, norm {spectrum_norm:.6g}")
    return Spectrum(eigenvalues=values, center_overlaps=overlaps, region_weights=weights)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """
    Right-continuous nondecreasing step function, zero before the first breakpoint.
    """
    breakpoints: np.ndarray
    cumulative: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=np.float64)
        c = np.asarray(self.cumulative, dtype=np.float64)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "cumulative", c)
        if b.ndim != 1 or b.shape != c.shape:
            raise InvalidInputError("breakpoints and cumulative must be 1-D arrays of equal length")
        if b.size and np.any(np.diff(b) <= 0):
            raise InvalidInputError("breakpoints must be strictly increasing")
        if c.size and (c[0] < 0 or np.any(np.diff(c) < 0)):
            raise InvalidInputError("cumulative values must be nonnegative and nondecreasing")

    @property
    def final(self) -> float:
        return float(self.cumulative[-1]) if self.cumulative.size else 0.0

    def __call__(self, lam):
        idx = np.searchsorted(self.breakpoints, lam, side="right")
        padded = np.concatenate([[0.0], self.cumulative])
        return padded[idx]

    def left_limit(self, lam):
        idx = np.searchsorted(self.breakpoints, lam, side="left")
        padded = np.concatenate([[0.0], self.cumulative])
        return padded[idx]

    def atoms(self) -> Tuple[np.ndarray, np.ndarray]:
        """Locations and masses of the jumps."""
        return self.breakpoints.copy(), np.diff(self.cumulative, prepend=0.0)

    def to_rows(self) -> List[Tuple[float, float]]:
        return [(float(b), float(c)) for b, c in zip(self.breakpoints, self.cumulative)]

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> "StepFunction":
        rows = [tuple(row) for row in rows]
        if not rows:
            return cls(np.zeros(0), np.zeros(0))
        b, c = zip(*rows)
        return cls(np.array(b, dtype=np.float64), np.array(c, dtype=np.float64))


def weighted_counting(eigenvalues: np.ndarray, weights: np.ndarray, tol: float) -> StepFunction:
    """lam -> sum of weights of eigenvalues <= lam, with clustered breakpoints."""
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    starts = cluster_starts(eigenvalues, tol)
    if starts.size == 0:
        return StepFunction(np.zeros(0), np.zeros(0))
    counts = np.diff(np.append(starts, eigenvalues.size))
    locations = np.add.reduceat(eigenvalues, starts) / counts + 0.0
    masses = np.add.reduceat(np.asarray(weights, dtype=np.float64), starts)
    return StepFunction(locations, np.cumsum(masses))


def counting_function(spec: Spectrum) -> StepFunction:
    """
    F(lam) = #{k : lam_k <= lam}, eigenvalues within tolerance merged.

    Args:
        spec: A spectrum.

    Returns:
        StepFunction: The counting function; final value equals spec.size.
    """
    return weighted_counting(spec.eigenvalues, np.ones(spec.size), spec.tolerance)


def normalize(F: StepFunction, volume: int) -> StepFunction:
    """Divides cumulative values by a positive volume."""
    if volume < 1:
        raise InvalidInputError(f"volume must be >= 1, got {volume}")
    return StepFunction(F.breakpoints, F.cumulative / volume)


BREAKPOINT_RTOL = 1e-9


def breakpoint_tolerance(curves: Sequence[StepFunction]) -> float:
    """Relative gap below which breakpoints of different curves are the same jump."""
    scale = max((float(np.max(np.abs(c.breakpoints))) for c in curves if c.breakpoints.size), default=0.0)
    return BREAKPOINT_RTOL * max(1.0, scale)


def merged_breakpoints(
    curves: Sequence[StepFunction], tol: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Union of the curves' breakpoints with clusters (gaps <= tol) collapsed.

    An atom computed at two scales can land on locations that differ only by
    rounding (a Laplacian kernel at 3.9e-17 and at 3.1e-17).

    Returns:
        (first, last, mean) location of each cluster, ascending.
    """
    if tol is None:
        tol = breakpoint_tolerance(curves)
    union = np.unique(np.concatenate([c.breakpoints for c in curves]))
    starts = cluster_starts(union, tol)
    if starts.size == 0:
        empty = np.zeros(0)
        return empty, empty, empty
    ends = np.append(starts[1:], union.size) - 1
    counts = ends - starts + 1
    means = np.add.reduceat(union, starts) / counts + 0.0
    return union[starts], union[ends], means


def sup_distance(F: StepFunction, G: StepFunction, tol: Optional[float] = None) -> float:
    """
    Exact sup over lam of |F(lam) - G(lam)|, jumps closer than tol identified.

    Both functions are constant between clusters of merged breakpoints, so
    the sup is attained just after a cluster's last point or just before its
    first point.
    """
    first, last, _ = merged_breakpoints([F, G], tol)
    if first.size == 0:
        return 0.0
    right = np.abs(F(last) - G(last))
    left = np.abs(F.left_limit(first) - G.left_limit(first))
    return float(max(right.max(), left.max()))


def sup_distance_to(F: StepFunction, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """
    Exact sup distance between a step function and a continuous distribution function.
    """
    if F.breakpoints.size == 0:
        return float(np.max(np.abs(cdf(np.array([-np.inf, np.inf])))))
    g = cdf(F.breakpoints)
    before = np.concatenate([[0.0], F.cumulative[:-1]])
    candidates = [
        np.abs(F.cumulative - g),
        np.abs(before - g),
        np.abs(F.final - cdf(np.array([np.inf]))),
    ]
    return float(max(np.max(c) for c in candidates))


def average(curves: Sequence[StepFunction], tol: Optional[float] = None) -> StepFunction:
    """
    Pointwise mean of step functions, reduced in list order.

    Args:
        curves: Nonempty list of curves with equal final values (within 1e-12).
        tol: Breakpoints of different curves closer than this become one
            jump placed at their mean (default: breakpoint_tolerance).

    Returns:
        StepFunction: The mean curve on the collapsed union of breakpoints.
    """
    if not curves:
        raise InvalidInputError("cannot average an empty list of curves")
    finals = np.array([c.final for c in curves])
    if np.max(np.abs(finals - finals[0])) > 1e-12:
        raise InvalidInputError(f"curves have different final values: {finals.min()} .. {finals.max()}")
    if len(curves) == 1:
        return curves[0]
    _, last, locations = merged_breakpoints(curves, tol)
    total = np.zeros(last.size)
    for curve in curves:
        total = total + curve(last)
    return StepFunction(locations, total / len(curves))


def merge_atoms(locations: np.ndarray, masses: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """Clusters atom locations (gaps <= tol) into mass-weighted locations with summed masses."""
    order = np.argsort(locations, kind="stable")
    locations, masses = np.asarray(locations)[order], np.asarray(masses)[order]
    starts = cluster_starts(locations, tol)
    if starts.size == 0:
        return locations, masses
    summed = np.add.reduceat(masses, starts)
    counts = np.diff(np.append(starts, locations.size))
    plain = np.add.reduceat(locations, starts) / counts
    weighted = np.divide(
        np.add.reduceat(locations * masses, starts), summed, out=plain.copy(), where=summed > 0
    )
    return weighted + 0.0, summed


def uniform_cdf(lam: np.ndarray) -> np.ndarray:
    """Distribution function of the uniform law on [0, 1]."""
    return np.clip(np.asarray(lam, dtype=np.float64), 0.0, 1.0)


def arcsine_cdf(lam: np.ndarray) -> np.ndarray:
    """Integrated density of states of the free adjacency operator on Z."""
    x = np.clip(np.asarray(lam, dtype=np.float64) / 2.0, -1.0, 1.0)
    return 1.0 - np.arccos(x) / np.pi
