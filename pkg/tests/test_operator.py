"""Tests for the operator module: assembly and matrix-free application of H_n."""
import numpy as np
import pytest

from lrpids.core.errors import GraphMismatchError, InvalidInputError
from lrpids.core.kernels import (
    ConstantLaw,
    GaussianLaw,
    GeometricKernel,
    ModelParams,
    NearestNeighborKernel,
    UniformLaw,
    ZeroKernel,
)
from lrpids.core.settings import RuntimeSettings, set_settings
from lrpids.engine.operator import apply, assemble, origin_row_moment
from lrpids.engine.sampler import sample_window


def _params(kernel, alpha, beta, weights=None, restriction="compression", seed=3):
    return ModelParams(
        d=kernel.dimension,
        alpha=alpha,
        beta=beta,
        kernel=kernel,
        weights=weights or ConstantLaw(),
        restriction=restriction,
        seed=seed,
    )


class TestAssemble:
    """Test dense and sparse assembly."""

    def test_free_adjacency_spectrum(self):
        """Test that the q = 1 adjacency on 7 sites has eigenvalues 2 cos(k pi / 8)."""
        params = _params(NearestNeighborKernel(dimension=1, q=1.0), alpha=0.0, beta=0.0)
        M = assemble(sample_window(params, 3), params)
        expected = np.sort(2.0 * np.cos(np.arange(1, 8) * np.pi / 8))
        np.testing.assert_allclose(np.linalg.eigvalsh(M.dense), expected, atol=1e-12)

    @pytest.mark.parametrize("restriction", ["compression", "full-diagonal"])
    def test_symmetric(self, restriction):
        params = _params(GeometricKernel(dimension=2, q=0.4), 1.0, 1.0, GaussianLaw(), restriction)
        M = assemble(sample_window(params, 4, 1e-6), params)
        np.testing.assert_array_equal(M.dense, M.dense.T)

    def test_compressed_laplacian_annihilates_constants(self):
        """Test that interior-degree diagonals give zero row sums."""
        params = _params(GeometricKernel(dimension=1, q=0.6), alpha=0.0, beta=1.0)
        M = assemble(sample_window(params, 15), params)
        np.testing.assert_allclose(M.matvec(np.ones(M.size)), 0.0, atol=1e-12)

    def test_full_diagonal_counts_cross_edges(self):
        """Test the two conventions differ exactly by the cross-edge weights on the diagonal."""
        kernel = NearestNeighborKernel(dimension=1, q=1.0)
        compressed = _params(kernel, 0.0, 1.0)
        full = _params(kernel, 0.0, 1.0, restriction="full-diagonal")
        a = assemble(sample_window(compressed, 3), compressed).diagonal()
        b = assemble(sample_window(full, 3), full).diagonal()
        np.testing.assert_array_equal(a, [-1, -2, -2, -2, -2, -2, -1])
        np.testing.assert_array_equal(b, [-2] * 7)

    def test_potential_on_diagonal(self):
        params = _params(ZeroKernel(dimension=1), alpha=1.0, beta=1.0, weights=ConstantLaw(c=2.5))
        M = assemble(sample_window(params, 2), params)
        np.testing.assert_array_equal(M.dense, 2.5 * np.eye(5))

    def test_sparse_above_dense_limit(self):
        set_settings(RuntimeSettings(max_workers=1, dense_limit=10))
        params = _params(GeometricKernel(dimension=1, q=0.5), 1.0, 1.0, UniformLaw())
        graph = sample_window(params, 10)
        M = assemble(graph, params)
        assert not M.is_dense
        phi = np.linspace(-1.0, 1.0, graph.size)
        np.testing.assert_allclose(M.matvec(phi), apply(graph, params, phi), atol=1e-12)

    def test_graph_from_other_params(self):
        params = _params(GeometricKernel(dimension=1, q=0.5), 0.0, 1.0)
        graph = sample_window(params, 3)
        with pytest.raises(GraphMismatchError):
            assemble(graph, params.with_seed(99))


class TestApply:
    """Test the matrix-free action against the assembled matrix."""

    @pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (1.0, 1.0), (1.0, 0.0), (0.0, 0.0), (0.3, 0.7)])
    @pytest.mark.parametrize("restriction", ["compression", "full-diagonal"])
    def test_matches_assembly(self, alpha, beta, restriction):
        params = _params(GeometricKernel(dimension=2, q=0.35), alpha, beta, UniformLaw(lo=-1.0, hi=2.0), restriction)
        graph = sample_window(params, 5, 1e-6)
        M = assemble(graph, params)
        rng = np.random.default_rng(0)
        for _ in range(3):
            phi = rng.standard_normal(graph.size)
            np.testing.assert_allclose(
                apply(graph, params, phi), M.dense @ phi, atol=1e-12 * max(1.0, np.abs(phi).max()) * graph.size
            )

    def test_wrong_shape(self):
        params = _params(ZeroKernel(dimension=1), 0.0, 1.0)
        graph = sample_window(params, 2)
        with pytest.raises(InvalidInputError):
            apply(graph, params, np.ones(4))


class TestOriginRowMoment:
    """Test the Monte Carlo row moment against its ceiling."""

    def test_potential_only(self):
        """Test |H_00| = c for pure potentials."""
        params = _params(ZeroKernel(dimension=1), alpha=1.0, beta=1.0, weights=ConstantLaw(c=1.0))
        result = origin_row_moment(params, seeds=[1, 2, 3])
        assert result.mean == pytest.approx(1.0)
        assert result.ceiling == pytest.approx(8.0)
        assert result.passed

    def test_geometric_within_ceiling(self):
        params = _params(GeometricKernel(dimension=1, q=0.5), alpha=1.0, beta=1.0, weights=UniformLaw())
        result = origin_row_moment(params, seeds=range(200))
        assert result.samples == 200
        assert result.passed

    def test_requires_seeds(self):
        with pytest.raises(InvalidInputError):
            origin_row_moment(_params(ZeroKernel(dimension=1), 0.0, 1.0), seeds=[])
