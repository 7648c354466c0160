"""Tests for the kernels module: connection kernels, weight laws and ModelParams."""
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import special

from lrpids.core.errors import DimensionMismatchError, TruncationCapError
from lrpids.core.kernels import (
    ConstantLaw,
    ExponentialCoupling,
    GaussianLaw,
    GeometricKernel,
    JBetaKernel,
    ModelParams,
    NearestNeighborKernel,
    PolynomialKernel,
    PowerCoupling,
    RademacherLaw,
    UniformLaw,
    ZeroKernel,
    kernel_l1,
    kernel_tail,
    kernel_value,
    moment_budget,
    shell_size,
    truncation_radius,
)
from lrpids.engine.sampler import box_vertices


def _bruteforce_tail(kernel, R, radius):
    points = box_vertices(radius, kernel.dimension)
    r = np.abs(points).sum(axis=1)
    r = r[(r >= R) & (r <= radius)]
    return float(kernel.radial_value(r).sum())


class TestShellSize:
    """Test the l1 sphere sizes N_d(r)."""

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_matches_enumeration(self, d):
        """Test shell sizes against counting lattice points."""
        points = box_vertices(5, d)
        r = np.abs(points).sum(axis=1)
        for radius in range(0, 6):
            assert shell_size(d, radius) == np.count_nonzero(r == radius)

    def test_known_values(self):
        """Test a few closed-form values."""
        assert shell_size(2, 3) == 12
        assert shell_size(3, 2) == 18
        assert shell_size(1, 0) == 1


class TestKernelValues:
    """Test p(x) for each family."""

    def test_zero_kernel(self):
        kernel = ZeroKernel(dimension=2)
        assert kernel_value(kernel, (1, 0)) == 0.0
        assert kernel_l1(kernel) == 0.0

    def test_nearest_neighbor(self):
        """Test that only unit vectors connect."""
        kernel = NearestNeighborKernel(dimension=2, q=0.5)
        assert kernel_value(kernel, (1, 0)) == 0.5
        assert kernel_value(kernel, (0, -1)) == 0.5
        assert kernel_value(kernel, (1, 1)) == 0.0
        assert kernel_value(kernel, (0, 0)) == 0.0
        assert kernel_l1(kernel) == pytest.approx(2.0)

    def test_symmetric_and_zero_at_origin(self):
        """Test p(x) = p(-x) and p(0) = 0 across families."""
        kernels = [
            GeometricKernel(dimension=2, q=0.3),
            PolynomialKernel(dimension=2, amplitude=2.0, exponent=3.5),
            JBetaKernel(dimension=2, coupling=PowerCoupling(strength=1.0, exponent=3.0), beta=0.5),
        ]
        for kernel in kernels:
            assert kernel_value(kernel, (0, 0)) == 0.0
            for x in [(1, 0), (2, -1), (-3, 4)]:
                assert kernel_value(kernel, x) == kernel_value(kernel, tuple(-c for c in x))

    def test_j_beta_power_at_unit_distance(self):
        """Test J0=1, s=2, beta=1 gives 1 - e^{-1} at distance one."""
        kernel = JBetaKernel(dimension=1, coupling=PowerCoupling(strength=1.0, exponent=2.0), beta=1.0)
        assert kernel_value(kernel, (1,)) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-15)

    def test_polynomial_is_clipped_at_one(self):
        kernel = PolynomialKernel(dimension=1, amplitude=2.0, exponent=3.0)
        assert kernel_value(kernel, (1,)) == 1.0
        assert kernel_value(kernel, (2,)) == pytest.approx(0.25)

    def test_dimension_mismatch(self):
        """Test that a vector of the wrong length is rejected."""
        with pytest.raises(DimensionMismatchError):
            kernel_value(GeometricKernel(dimension=2, q=0.5), (1,))


class TestKernelTail:
    """Test eps_R against closed forms and brute-force sums."""

    def test_geometric_one_dimension(self):
        """Test the tail 2 q^R / (1 - q)."""
        kernel = GeometricKernel(dimension=1, q=0.5)
        for R in [1, 3, 10]:
            assert kernel_tail(kernel, R) == pytest.approx(4.0 * 0.5 ** R, rel=1e-12)
        assert kernel_l1(kernel) == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("d", [2, 3])
    def test_geometric_higher_dimension(self, d):
        """Test the negative-binomial tail against enumeration."""
        kernel = GeometricKernel(dimension=d, q=0.4 if d == 2 else 0.2)
        radius = 80 if d == 2 else 30
        for R in [0, 3, 7]:
            assert kernel_tail(kernel, R) == pytest.approx(_bruteforce_tail(kernel, R, radius), rel=1e-10)

    def test_polynomial_closed_form(self):
        """Test C=2, s=3 in d=1: tail(0) = 2 + 4 (zeta(3) - 1)."""
        kernel = PolynomialKernel(dimension=1, amplitude=2.0, exponent=3.0)
        expected = 2.0 + 4.0 * (float(special.zeta(3.0)) - 1.0)
        assert kernel_l1(kernel) == pytest.approx(expected, rel=1e-12)

    def test_polynomial_two_dimensions_near_enumeration(self):
        kernel = PolynomialKernel(dimension=2, amplitude=1.0, exponent=6.0)
        # the r > 60 remainder of sum 4r * r^-6 is below 1e-7
        assert kernel_tail(kernel, 2) == pytest.approx(_bruteforce_tail(kernel, 2, 60), abs=1e-7)

    @pytest.mark.parametrize(
        "coupling",
        [PowerCoupling(strength=1.0, exponent=2.0), ExponentialCoupling(strength=5.0, decay=0.1)],
    )
    def test_j_beta_shell_differences(self, coupling):
        """Test tail(R) - tail(R+1) = N(R) p(R), across the switch to the series expansion."""
        kernel = JBetaKernel(dimension=1, coupling=coupling, beta=1.0)
        for R in [1, 5, 99, 100, 101, 150]:
            difference = kernel_tail(kernel, R) - kernel_tail(kernel, R + 1)
            assert difference == pytest.approx(2.0 * kernel_value(kernel, (R,)), rel=1e-8)

    def test_nearest_neighbor_tail(self):
        kernel = NearestNeighborKernel(dimension=3, q=0.25)
        assert kernel_tail(kernel, 1) == pytest.approx(1.5)
        assert kernel_tail(kernel, 2) == 0.0

    def test_tail_is_nonincreasing(self):
        kernel = PolynomialKernel(dimension=1, amplitude=3.0, exponent=2.5)
        tails = [kernel_tail(kernel, R) for R in range(0, 50)]
        assert all(b <= a for a, b in zip(tails, tails[1:]))

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            kernel_tail(GeometricKernel(dimension=1, q=0.5), -1)


class TestTruncationRadius:
    """Test the smallest R with tail below the tolerance."""

    def test_geometric(self):
        """Test 4 * 0.5^R < 1e-9 first holds at R = 32."""
        assert truncation_radius(GeometricKernel(dimension=1, q=0.5), 1e-9, 10_000) == 32

    def test_nearest_neighbor(self):
        assert truncation_radius(NearestNeighborKernel(dimension=2, q=1.0), 1e-9, 10_000) == 2

    def test_zero_kernel(self):
        assert truncation_radius(ZeroKernel(dimension=1), 1e-9, 10_000) == 0

    def test_heavy_tail_hits_cap(self):
        """Test that a barely summable kernel exceeds a small cap."""
        kernel = PolynomialKernel(dimension=1, amplitude=1.0, exponent=1.5)
        with pytest.raises(TruncationCapError) as exc_info:
            truncation_radius(kernel, 1e-9, 1000)
        assert exc_info.value.field == "run.trunc_tol"


class TestKernelValidation:
    """Test summability and discriminator validation."""

    def test_polynomial_exponent_must_exceed_dimension(self):
        with pytest.raises(ValidationError):
            PolynomialKernel(dimension=2, amplitude=1.0, exponent=2.0)

    def test_power_coupling_exponent_must_exceed_dimension(self):
        with pytest.raises(ValidationError):
            JBetaKernel(dimension=1, coupling=PowerCoupling(strength=1.0, exponent=1.0), beta=1.0)

    def test_geometric_q_below_one(self):
        with pytest.raises(ValidationError):
            GeometricKernel(dimension=1, q=1.0)

    def test_family_discriminator(self):
        """Test that dicts parse into the right family."""
        params = ModelParams.model_validate(
            {"d": 1, "alpha": 0, "beta": 1, "kernel": {"family": "geometric", "dimension": 1, "q": 0.5}}
        )
        assert isinstance(params.kernel, GeometricKernel)

    def test_unknown_kernel_key(self):
        with pytest.raises(ValidationError):
            ModelParams.model_validate(
                {"d": 1, "alpha": 0, "beta": 1, "kernel": {"family": "zero", "dimension": 1, "q": 0.5}}
            )


class TestWeightLaws:
    """Test weight laws and their certified second moments."""

    def test_exact_second_moments(self):
        assert ConstantLaw(c=2.0).moment_bound == 4.0
        assert UniformLaw().moment_bound == pytest.approx(1.0 / 3.0)
        assert GaussianLaw(mean=1.0, sd=2.0).moment_bound == 5.0
        assert RademacherLaw().moment_bound == 1.0

    def test_explicit_bound(self):
        assert ConstantLaw(c=2.0, second_moment_bound=5.0).moment_bound == 5.0

    def test_bound_below_exact_rejected(self):
        with pytest.raises(ValidationError):
            ConstantLaw(c=2.0, second_moment_bound=3.0)

    def test_uniform_needs_ordered_support(self):
        with pytest.raises(ValidationError):
            UniformLaw(lo=1.0, hi=0.0)

    def test_quantiles(self):
        u = np.array([0.25, 0.5, 0.75])
        np.testing.assert_allclose(UniformLaw(lo=-1.0, hi=1.0).quantile(u), [-0.5, 0.0, 0.5])
        assert GaussianLaw(mean=3.0, sd=2.0).quantile(np.array([0.5]))[0] == pytest.approx(3.0)
        np.testing.assert_array_equal(RademacherLaw().quantile(u), [-1.0, 1.0, 1.0])
        np.testing.assert_array_equal(ConstantLaw(c=0.5).quantile(u), [0.5, 0.5, 0.5])


class TestModelParams:
    """Test ModelParams validation and derived values."""

    def test_alpha_out_of_range(self):
        """Test that alpha = 1.5 is rejected with a message naming the range."""
        with pytest.raises(ValidationError) as exc_info:
            ModelParams(d=1, alpha=1.5, beta=1.0, kernel=ZeroKernel(dimension=1))
        error = exc_info.value.errors()[0]
        assert error["loc"] == ("alpha",)
        assert "[0, 1]" in error["msg"]

    def test_kernel_dimension_must_match(self):
        with pytest.raises(ValidationError):
            ModelParams(d=2, alpha=0.0, beta=1.0, kernel=ZeroKernel(dimension=1))

    def test_shift_dimension_must_match(self):
        with pytest.raises(ValidationError):
            ModelParams(d=2, alpha=0.0, beta=1.0, kernel=ZeroKernel(dimension=2), shift=(1,))

    def test_loop_probability_default(self):
        """Test that loops are present iff alpha > 0 unless configured."""
        kernel = ZeroKernel(dimension=1)
        assert ModelParams(d=1, alpha=0.5, beta=0.0, kernel=kernel).p_loop == 1.0
        assert ModelParams(d=1, alpha=0.0, beta=1.0, kernel=kernel).p_loop == 0.0
        assert ModelParams(d=1, alpha=1.0, beta=1.0, kernel=kernel, loop_probability=0.3).p_loop == 0.3

    def test_operator_class(self):
        kernel = ZeroKernel(dimension=1)
        assert ModelParams(d=1, alpha=0.0, beta=1.0, kernel=kernel).operator_class() == "laplacian"
        assert ModelParams(d=1, alpha=1.0, beta=0.0, kernel=kernel).operator_class() == "adjacency-plus-potential"
        assert ModelParams(d=1, alpha=0.5, beta=0.5, kernel=kernel).operator_class() == "mixed"

    def test_digest_tracks_seed(self):
        params = ModelParams(d=1, alpha=0.0, beta=1.0, kernel=ZeroKernel(dimension=1), seed=7)
        assert params.digest() == ModelParams(d=1, alpha=0.0, beta=1.0, kernel=ZeroKernel(dimension=1), seed=7).digest()
        assert params.with_seed(8).digest() != params.digest()
        assert params.with_seed(8).seed == 8

    def test_moment_budget(self):
        """Test v^2 (||p||^2 + ||p||) for bond percolation with q = 1."""
        params = ModelParams(d=1, alpha=0.0, beta=1.0, kernel=NearestNeighborKernel(dimension=1, q=1.0))
        assert moment_budget(params) == pytest.approx(6.0)
