"""
lrpids Operator Module.

Builds the finite-volume Hamiltonian of a window graph,

    H_{x,y} = a_{xy} b_{xy}                                 (x != y)
    H_{x,x} = alpha a_x b_x - beta sum_{z != x} a_{xz} b_{xz},

with the beta-sum over interior neighbours only ("compression") or also over
cross edges ("full-diagonal"). The matrix-free action
(H phi)(x) = sum_y (phi(y) - beta phi(x)) a_{xy} + alpha phi(x) a_x b_x is
provided separately so the two forms can be checked against each other.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from ..core.errors import GraphMismatchError, InvalidInputError
from ..core.kernels import ModelParams, kernel_l1
from ..core.settings import get_settings
from .sampler import WindowGraph, box_vertices, sample_window, vertex_index

logger = logging.getLogger("lrpids")


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """
    H_n stored dense up to the dense limit, as CSR beyond.

    Rows and columns follow the lexicographic vertex order of Lambda_n.
    """

    n: int
    d: int
    dense: Optional[np.ndarray] = None
    sparse: Optional[csr_matrix] = None

    @property
    def size(self) -> int:
        return (2 * self.n + 1) ** self.d

    @property
    def entries(self) -> Union[np.ndarray, csr_matrix]:
        return self.dense if self.dense is not None else self.sparse

    @property
    def is_dense(self) -> bool:
        return self.dense is not None

    def vertex_index(self, point: Sequence[int]) -> int:
        return int(vertex_index(np.array([point], dtype=np.int64), self.n)[0])

    def vertices(self) -> np.ndarray:
        return box_vertices(self.n, self.d)

    def matvec(self, phi: np.ndarray) -> np.ndarray:
        return np.asarray(self.entries @ phi)

    def diagonal(self) -> np.ndarray:
        return self.dense.diagonal().copy() if self.is_dense else self.sparse.diagonal()


def _check_digest(graph: WindowGraph, params: ModelParams) -> None:
    if graph.params_digest != params.digest():
        raise GraphMismatchError(
            f"window graph was sampled under params {graph.params_digest[:12]}, "
            f"not {params.digest()[:12]}"
        )


def _diagonal(graph: WindowGraph, params: ModelParams) -> np.ndarray:
    size = graph.size
    i, j = graph.interior_index_pairs()
    weighted_degree = np.bincount(i, weights=graph.interior_weights, minlength=size)
    weighted_degree = weighted_degree + np.bincount(j, weights=graph.interior_weights, minlength=size)
    if params.restriction == "full-diagonal" and graph.cross.shape[0]:
        weighted_degree = weighted_degree + np.bincount(
            graph.cross_inside(), weights=graph.cross_weights, minlength=size
        )
    potential = np.zeros(size)
    if graph.loops.shape[0]:
        potential[vertex_index(graph.loops, graph.n)] = graph.loop_weights
    return params.alpha * potential - params.beta * weighted_degree


def assemble(graph: WindowGraph, params: ModelParams) -> SymmetricMatrix:
    """
    Assembles H_n for a sampled window.

    Args:
        graph: Window graph sampled under params.
        params: Model parameters (alpha, beta, restriction).

    Returns:
        SymmetricMatrix: Exactly symmetric matrix of size |Lambda_n|.

    Raises:
        GraphMismatchError: If the graph was sampled under other params.
    """
    _check_digest(graph, params)
    size = graph.size
    i, j = graph.interior_index_pairs()
    w = graph.interior_weights
    diag = _diagonal(graph, params)

    if size <= get_settings().dense_limit:
        dense = np.zeros((size, size))
        dense[i, j] = w
        dense[j, i] = w
        dense[np.arange(size), np.arange(size)] = diag
        return SymmetricMatrix(n=graph.n, d=graph.d, dense=dense)

    logger.debug(f"Matrix of size {size} exceeds dense limit, storing CSR")
    rows = np.concatenate([i, j, np.arange(size)])
    cols = np.concatenate([j, i, np.arange(size)])
    data = np.concatenate([w, w, diag])
    sparse = coo_matrix((data, (rows, cols)), shape=(size, size)).tocsr()
    return SymmetricMatrix(n=graph.n, d=graph.d, sparse=sparse)


def apply(graph: WindowGraph, params: ModelParams, phi: np.ndarray) -> np.ndarray:
    """
    Matrix-free action of H_n on a vector indexed by Lambda_n.

    Args:
        graph: Window graph sampled under params.
        params: Model parameters.
        phi: Vector of length |Lambda_n|.

    Returns:
        np.ndarray: H_n phi.
    """
    _check_digest(graph, params)
    phi = np.asarray(phi, dtype=np.float64)
    size = graph.size
    if phi.shape != (size,):
        raise InvalidInputError(f"vector has shape {phi.shape}, expected ({size},)")

    i, j = graph.interior_index_pairs()
    w = graph.interior_weights
    out = np.bincount(i, weights=w * (phi[j] - params.beta * phi[i]), minlength=size)
    out = out + np.bincount(j, weights=w * (phi[i] - params.beta * phi[j]), minlength=size)
    if params.restriction == "full-diagonal" and graph.cross.shape[0]:
        c = graph.cross_inside()
        out = out - params.beta * np.bincount(c, weights=graph.cross_weights * phi[c], minlength=size)
    if graph.loops.shape[0]:
        k = vertex_index(graph.loops, graph.n)
        out[k] += params.alpha * graph.loop_weights * phi[k]
    return out


@dataclass
class RowMomentResult:
    """Monte Carlo estimate of E[(sum_x |H_{0,x}|)^2] on the full lattice row."""
    mean: float
    stderr: float
    ceiling: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.mean <= self.ceiling + 3.0 * self.stderr


def origin_row_moment(params: ModelParams, seeds: Sequence[int], trunc_tol: float = 1e-9) -> RowMomentResult:
    """
    Samples the origin's full row (a radius-0 window plus all its cross edges).

    The ceiling is 4 v^2 (m^2 + m) with m = ||p||_1 + p_loop the expected number
    of edges at the origin including its loop.

    Args:
        params: Model parameters.
        seeds: Realizations to average over.
        trunc_tol: Truncation tolerance for edge enumeration.

    Returns:
        RowMomentResult: Mean, standard error and ceiling.
    """
    if not seeds:
        raise InvalidInputError("at least one seed is required", field="run.seeds")
    values = np.empty(len(seeds))
    for k, seed in enumerate(seeds):
        graph = sample_window(params.with_seed(seed), 0, trunc_tol)
        off_diagonal = np.abs(graph.cross_weights)
        loop = float(graph.loop_weights.sum())
        diag = params.alpha * loop - params.beta * float(graph.cross_weights.sum())
        values[k] = (abs(diag) + float(off_diagonal.sum())) ** 2
    m = kernel_l1(params.kernel) + params.p_loop
    ceiling = 4.0 * params.weights.moment_bound * (m * m + m)
    stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return RowMomentResult(mean=float(values.mean()), stderr=stderr, ceiling=ceiling, samples=len(values))
