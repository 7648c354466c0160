"""Tests for the sampler module: counter-based draws and window graphs."""
import numpy as np
import pytest

from lrpids.core.errors import DimensionMismatchError, InvalidInputError
from lrpids.core.kernels import (
    GaussianLaw,
    GeometricKernel,
    ModelParams,
    NearestNeighborKernel,
    PolynomialKernel,
    UniformLaw,
    ZeroKernel,
    kernel_l1,
    kernel_value,
)
from lrpids.engine.sampler import (
    STREAM_INDICATOR,
    STREAM_WEIGHT,
    EdgeKey,
    WindowGraph,
    box_vertices,
    component_count,
    counter_uniforms,
    draw_edges,
    edge_bernoulli,
    edge_weight,
    expected_interior_edges,
    half_offsets,
    mean_degree,
    sample_window,
    shift_realization,
    vertex_index,
)


def _params(kernel, alpha=0.0, beta=1.0, seed=11, **kwargs):
    return ModelParams(d=kernel.dimension, alpha=alpha, beta=beta, kernel=kernel, seed=seed, **kwargs)


def _assert_same_graph(a: WindowGraph, b: WindowGraph):
    assert a.n == b.n and a.d == b.d
    np.testing.assert_array_equal(a.interior, b.interior)
    np.testing.assert_array_equal(a.interior_weights, b.interior_weights)
    np.testing.assert_array_equal(a.cross, b.cross)
    np.testing.assert_array_equal(a.cross_weights, b.cross_weights)
    np.testing.assert_array_equal(a.loops, b.loops)
    np.testing.assert_array_equal(a.loop_weights, b.loop_weights)


class TestCounterUniforms:
    """Test the hash-based uniform stream."""

    def test_range_and_determinism(self):
        coords = np.arange(2000).reshape(-1, 2)
        u = counter_uniforms(5, STREAM_INDICATOR, coords)
        assert u.shape == (1000,)
        assert np.all((u > 0.0) & (u < 1.0))
        np.testing.assert_array_equal(u, counter_uniforms(5, STREAM_INDICATOR, coords))

    def test_streams_and_seeds_differ(self):
        coords = np.arange(200).reshape(-1, 2)
        base = counter_uniforms(5, STREAM_INDICATOR, coords)
        assert not np.array_equal(base, counter_uniforms(5, STREAM_WEIGHT, coords))
        assert not np.array_equal(base, counter_uniforms(6, STREAM_INDICATOR, coords))

    def test_roughly_uniform(self):
        """Test the mean and a coarse histogram of 100k draws."""
        coords = np.stack([np.arange(100_000), np.zeros(100_000, dtype=np.int64)], axis=1)
        u = counter_uniforms(123, STREAM_INDICATOR, coords)
        assert abs(u.mean() - 0.5) < 0.005
        counts, _ = np.histogram(u, bins=10, range=(0.0, 1.0))
        assert np.all(np.abs(counts - 10_000) < 500)

    def test_rejects_flat_input(self):
        with pytest.raises(ValueError):
            counter_uniforms(1, STREAM_INDICATOR, np.arange(5))


class TestEdgeKey:
    """Test canonical edge keys."""

    def test_unordered(self):
        assert EdgeKey.of((3, 1), (0, 2)) == EdgeKey.of((0, 2), (3, 1))
        assert EdgeKey.of((0, 2), (3, 1)).endpoints == ((0, 2), (3, 1))

    def test_loop(self):
        key = EdgeKey.of((1, 1), (1, 1))
        assert key.is_loop
        assert key == EdgeKey.of((1, 1))
        assert key.length == 0

    def test_length_and_shift(self):
        key = EdgeKey.of((0, 0), (2, -3))
        assert key.length == 5
        assert key.shifted((1, 1)) == EdgeKey.of((1, 1), (3, -2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            EdgeKey.of((0,), (1, 1))


class TestEdgeQueries:
    """Test single-edge queries against window sampling."""

    def test_window_agrees_with_queries(self):
        """Test that every candidate pair is present in the window iff b_e = 1, with the same weight."""
        params = _params(GeometricKernel(dimension=2, q=0.3), weights=UniformLaw())
        graph = sample_window(params, 3, trunc_tol=1e-6)
        present = {key: w for key, w in graph.interior_edges + graph.cross_edges}
        vertices = box_vertices(3, 2)
        for x in vertices[::3]:
            for z in half_offsets(2, 4):
                e = EdgeKey.of(x, x + z)
                assert edge_bernoulli(params, e) == (e in present)
                if e in present:
                    assert edge_weight(params, e) == present[e]

    def test_nearest_neighbor_q_one_is_complete(self):
        params = _params(NearestNeighborKernel(dimension=1, q=1.0))
        assert edge_bernoulli(params, EdgeKey.of((4,), (5,)))
        assert not edge_bernoulli(params, EdgeKey.of((4,), (6,)))

    def test_loops(self):
        """Test that loops follow p_loop."""
        kernel = ZeroKernel(dimension=1)
        assert edge_bernoulli(_params(kernel, alpha=1.0), EdgeKey.of((3,)))
        assert not edge_bernoulli(_params(kernel, alpha=0.0), EdgeKey.of((3,)))

    def test_wrong_dimension(self):
        with pytest.raises(DimensionMismatchError):
            edge_bernoulli(_params(ZeroKernel(dimension=2)), EdgeKey.of((0,), (1,)))


class TestShiftRealization:
    """Test lattice translations of a realization."""

    def test_shift_matches_translated_queries(self):
        params = _params(GeometricKernel(dimension=2, q=0.5), weights=UniformLaw())
        gamma = (3, -7)
        shifted = shift_realization(params, gamma)
        for x in [(0, 0), (1, 2), (-4, 5)]:
            for z in [(1, 0), (0, 1), (2, -1), (1, 3)]:
                e = EdgeKey.of(x, tuple(a + b for a, b in zip(x, z)))
                assert edge_bernoulli(shifted, e) == edge_bernoulli(params, e.shifted(gamma))
                assert edge_weight(shifted, e) == edge_weight(params, e.shifted(gamma))

    def test_shifts_compose(self):
        params = _params(GeometricKernel(dimension=1, q=0.5))
        twice = shift_realization(shift_realization(params, (2,)), (3,))
        assert twice.shift == (5,)
        assert shift_realization(twice, (-5,)).shift is None
        assert shift_realization(twice, (-5,)).digest() == params.digest()

    def test_shift_dimension(self):
        with pytest.raises(DimensionMismatchError):
            shift_realization(_params(ZeroKernel(dimension=2)), (1,))


class TestSampleWindow:
    """Test window sampling."""

    def test_nearest_neighbor_path(self):
        """Test q = 1 in d = 1: a path of 7 vertices plus the two boundary edges."""
        graph = sample_window(_params(NearestNeighborKernel(dimension=1, q=1.0)), 3)
        assert graph.size == 7
        assert graph.interior.shape[0] == 6
        assert graph.cross.shape[0] == 2
        assert mean_degree(graph) == 2.0
        assert component_count(graph) == 1

    def test_zero_kernel_is_empty(self):
        graph = sample_window(_params(ZeroKernel(dimension=2)), 4)
        assert graph.interior.shape[0] == 0
        assert graph.cross.shape[0] == 0
        assert component_count(graph) == graph.size

    def test_loops_when_alpha_positive(self):
        graph = sample_window(_params(ZeroKernel(dimension=1), alpha=1.0, weights=UniformLaw()), 5)
        assert graph.loops.shape[0] == graph.size
        assert np.all((graph.loop_weights > 0.0) & (graph.loop_weights < 1.0))

    def test_edges_are_canonical_and_sorted(self):
        graph = sample_window(_params(GeometricKernel(dimension=2, q=0.4)), 4, trunc_tol=1e-6)
        keys = [tuple(map(tuple, pair)) for pair in graph.interior.tolist()]
        assert all(x < y for x, y in keys)
        assert keys == sorted(keys)

    def test_deterministic(self):
        params = _params(PolynomialKernel(dimension=1, amplitude=1.0, exponent=3.0), weights=UniformLaw())
        _assert_same_graph(sample_window(params, 20, 1e-6), sample_window(params, 20, 1e-6))

    @pytest.mark.parametrize(
        "kernel,tol",
        [(GeometricKernel(dimension=1, q=0.4), 1e-9), (GeometricKernel(dimension=2, q=0.3), 1e-6)],
    )
    def test_nested_windows(self, kernel, tol):
        """Test that the n=10 window is the restriction of the n=16 window."""
        params = _params(kernel, alpha=1.0, weights=UniformLaw())
        big = sample_window(params, 16, tol)
        small = sample_window(params, 10, tol)
        _assert_same_graph(big.restrict(10), small)
        assert small.interior_keys() <= big.interior_keys()

    def test_restrict_to_larger_radius(self):
        graph = sample_window(_params(ZeroKernel(dimension=1)), 2)
        with pytest.raises(InvalidInputError):
            graph.restrict(3)

    def test_dict_round_trip(self):
        graph = sample_window(_params(GeometricKernel(dimension=2, q=0.4), alpha=1.0), 3, 1e-6)
        _assert_same_graph(WindowGraph.from_dict(graph.to_dict()), graph)

    def test_invalid_arguments(self):
        params = _params(ZeroKernel(dimension=1))
        with pytest.raises(InvalidInputError):
            sample_window(params, -1)
        with pytest.raises(InvalidInputError):
            sample_window(params, 2, trunc_tol=0.0)

    def test_mean_edge_count(self):
        """Test the average interior edge count over 200 seeds against its expectation."""
        base = _params(GeometricKernel(dimension=1, q=0.5))
        counts = np.array([sample_window(base.with_seed(s), 20).interior.shape[0] for s in range(200)])
        expected = expected_interior_edges(base, 20)
        assert abs(counts.mean() - expected) <= 4.0 * counts.std(ddof=1) / np.sqrt(counts.size)

    def test_vertex_index_is_lexicographic(self):
        vertices = box_vertices(2, 2)
        np.testing.assert_array_equal(vertex_index(vertices, 2), np.arange(25))


class TestEnsembleStatistics:
    """Test the law of the sampled environment over many seeds."""

    def test_edge_law_is_translation_invariant(self):
        """Test that b_e and b_{e + gamma} have frequency p(e) over 4000 seeds."""
        base = _params(GeometricKernel(dimension=1, q=0.5))
        p = kernel_value(base.kernel, (1,))
        trials = 4000
        sigma = np.sqrt(p * (1.0 - p) / trials)
        for gamma in (0, 17, -1000, 2 ** 20):
            e = EdgeKey.of((gamma,), (gamma + 1,))
            frequency = np.mean([edge_bernoulli(base.with_seed(s), e) for s in range(trials)])
            assert abs(frequency - p) <= 4.0 * sigma

    def test_mean_degree_matches_kernel_mass(self):
        """Test the mean degree over 200 seeds against ||p||_1."""
        base = _params(GeometricKernel(dimension=1, q=0.5))
        degrees = np.array([mean_degree(sample_window(base.with_seed(s), 30)) for s in range(200)])
        expected = kernel_l1(base.kernel)
        assert abs(degrees.mean() - expected) <= 3.0 * degrees.std(ddof=1) / np.sqrt(degrees.size)

    @pytest.mark.parametrize("law", [UniformLaw(), GaussianLaw(mean=0.5, sd=1.0), UniformLaw(lo=-2.0, hi=1.0)])
    def test_weight_second_moment(self, law):
        """Test E[a^2] <= v^2 + 3 sigma over 10^5 edge weights."""
        params = _params(ZeroKernel(dimension=1), weights=law)
        x = np.arange(100_000, dtype=np.int64).reshape(-1, 1)
        a = law.quantile(draw_edges(params, x, x + 1, STREAM_WEIGHT))
        squares = a * a
        assert squares.mean() <= law.moment_bound + 3.0 * squares.std(ddof=1) / np.sqrt(squares.size)
        assert edge_weight(params, EdgeKey.of((7,), (8,))) == a[7]

    def test_uniform_weight_mean(self):
        params = _params(ZeroKernel(dimension=1), weights=UniformLaw())
        x = np.arange(100_000, dtype=np.int64).reshape(-1, 1)
        a = params.weights.quantile(draw_edges(params, x, x + 1, STREAM_WEIGHT))
        assert abs(a.mean() - 0.5) <= 0.01
