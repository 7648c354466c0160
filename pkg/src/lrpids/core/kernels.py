"""
lrpids Kernels Module.

Connection-probability kernels p on Z^d, edge-weight laws and the model
parameters that together fix the law of one percolation realization.

Every kernel family depends on x only through r = ||x||_1 and has p(0) = 0;
diagonal randomness enters through the loop probability on ModelParams.
Tails eps_R = sum_{||x||_1 >= R} p(x) are computed from closed forms
(negative-binomial sums for geometric shells, Hurwitz zeta sums for power
laws) so that they are accurate to well below 1e-12 relative.
"""

import hashlib
import logging
import math
from functools import lru_cache
from typing import Annotated, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import special, stats

from .errors import DimensionMismatchError, TruncationCapError

logger = logging.getLogger("lrpids")

# Power-law tails switch to a three-term series once u = A r^{-s} drops below this.
SERIES_THRESHOLD = 1e-4


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# ---------------------------------------------------------------------------
# Shell geometry
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def shell_polynomial(d: int) -> Tuple[float, ...]:
    """
    Coefficients (ascending powers of r) of N_d(r) = #{x in Z^d : ||x||_1 = r}.

    The identity N_d(r) = sum_k 2^k C(d,k) C(r-1,k-1) is a polynomial in r
    that holds for every r >= 1.
    """
    coeffs = np.zeros(d)
    for k in range(1, d + 1):
        term = P.polyfromroots(np.arange(1, k)) if k > 1 else np.array([1.0])
        term = term * (2.0 ** k) * math.comb(d, k) / math.factorial(k - 1)
        coeffs[: len(term)] += term
    return tuple(float(c) for c in coeffs)


def shell_size(d: int, r) -> np.ndarray:
    """Number of lattice points at l1 radius r (vectorized, r >= 0)."""
    r = np.asarray(r, dtype=np.int64)
    sizes = P.polyval(r.astype(np.float64), shell_polynomial(d))
    return np.where(r == 0, 1.0, np.rint(sizes))


def _hurwitz_shell_sum(d: int, s: float, start: int) -> float:
    """sum_{r >= start} N_d(r) r^{-s} for s > d and start >= 1."""
    return float(sum(c * special.zeta(s - j, start) for j, c in enumerate(shell_polynomial(d)) if c != 0.0))


def _geometric_shell_sum(d: int, q: float, start: int) -> float:
    """sum_{r >= start} N_d(r) q^r for 0 <= q < 1, via negative-binomial tails."""
    if q == 0.0:
        return 0.0
    start = max(start, 1)
    total = 0.0
    for k in range(1, d + 1):
        # sum_{r >= start} C(r-1,k-1) q^r = (q/(1-q))^k P(k + NegBin(k, 1-q) >= start)
        weight = (2.0 ** k) * math.comb(d, k) * (q / (1.0 - q)) ** k
        total += weight * float(stats.nbinom.sf(start - k - 1, k, 1.0 - q))
    return total


# ---------------------------------------------------------------------------
# Kernel families
# ---------------------------------------------------------------------------

class _KernelBase(_Frozen):
    dimension: int = Field(ge=1, description="Lattice dimension d")

    def radial_value(self, r) -> np.ndarray:
        """p at l1 radius r, vectorized; radius 0 always maps to 0."""
        raise NotImplementedError

    def _tail(self, R: int) -> float:
        raise NotImplementedError

    def _explicit_sum(self, lo: int, hi: int) -> float:
        """sum_{lo <= r < hi} N_d(r) p(r)."""
        lo = max(lo, 1)
        if hi <= lo:
            return 0.0
        r = np.arange(lo, hi, dtype=np.int64)
        return float(np.sum(shell_size(self.dimension, r) * self.radial_value(r)))


class ZeroKernel(_KernelBase):
    """p identically zero."""

    family: Literal["zero"] = "zero"

    def radial_value(self, r) -> np.ndarray:
        return np.zeros(np.shape(r))

    def _tail(self, R: int) -> float:
        return 0.0


class NearestNeighborKernel(_KernelBase):
    """Bond percolation: p = q on the 2d nearest neighbours."""

    family: Literal["nearest-neighbor"] = "nearest-neighbor"
    q: float = Field(ge=0.0, le=1.0, description="Bond occupation probability")

    def radial_value(self, r) -> np.ndarray:
        return np.where(np.asarray(r) == 1, self.q, 0.0)

    def _tail(self, R: int) -> float:
        return 2.0 * self.dimension * self.q if R <= 1 else 0.0


class GeometricKernel(_KernelBase):
    """p(x) = q^{||x||_1} for x != 0."""

    family: Literal["geometric"] = "geometric"
    q: float = Field(ge=0.0, lt=1.0, description="Decay ratio per unit of l1 length")

    def radial_value(self, r) -> np.ndarray:
        r = np.asarray(r)
        return np.where(r == 0, 0.0, np.power(self.q, r.astype(np.float64)))

    def _tail(self, R: int) -> float:
        if self.dimension == 1:
            start = max(R, 1)
            return 2.0 * self.q ** start / (1.0 - self.q)
        return _geometric_shell_sum(self.dimension, self.q, R)


class PolynomialKernel(_KernelBase):
    """p(x) = min(1, C ||x||_1^{-s}) with s > d."""

    family: Literal["polynomial"] = "polynomial"
    amplitude: float = Field(gt=0.0, description="Prefactor C")
    exponent: float = Field(description="Decay exponent s; must exceed the dimension")

    @model_validator(mode="after")
    def _summable(self):
        if self.exponent <= self.dimension:
            raise ValueError(
                f"polynomial kernel needs exponent > dimension for summability, "
                f"got exponent={self.exponent}, dimension={self.dimension}"
            )
        return self

    def radial_value(self, r) -> np.ndarray:
        r = np.asarray(r).astype(np.float64)
        with np.errstate(divide="ignore"):
            values = np.minimum(1.0, self.amplitude * np.power(r, -self.exponent))
        return np.where(r == 0, 0.0, values)

    def _clip_radius(self) -> int:
        """Largest r with C r^{-s} >= 1 (0 if none)."""
        r = int(math.floor(self.amplitude ** (1.0 / self.exponent)))
        while r >= 1 and self.amplitude * r ** (-self.exponent) < 1.0:
            r -= 1
        while self.amplitude * (r + 1) ** (-self.exponent) >= 1.0:
            r += 1
        return r

    def _tail(self, R: int) -> float:
        start = max(R, self._clip_radius() + 1, 1)
        explicit = self._explicit_sum(R, start)
        return explicit + self.amplitude * _hurwitz_shell_sum(self.dimension, self.exponent, start)


class PowerCoupling(_Frozen):
    """J(x) = J0 ||x||_1^{-s}."""

    form: Literal["power"] = "power"
    strength: float = Field(gt=0.0, description="Coupling prefactor J0")
    exponent: float = Field(gt=0.0, description="Decay exponent s; must exceed the dimension")

    def at(self, r: np.ndarray) -> np.ndarray:
        return self.strength * np.power(r, -self.exponent)


class ExponentialCoupling(_Frozen):
    """J(x) = J0 exp(-decay ||x||_1)."""

    form: Literal["exponential"] = "exponential"
    strength: float = Field(gt=0.0, description="Coupling prefactor J0")
    decay: float = Field(gt=0.0, description="Decay rate per unit of l1 length")

    def at(self, r: np.ndarray) -> np.ndarray:
        return self.strength * np.exp(-self.decay * r)


Coupling = Annotated[Union[PowerCoupling, ExponentialCoupling], Field(discriminator="form")]


class JBetaKernel(_KernelBase):
    """p(x) = 1 - exp(-beta J(x)): coupling J at inverse temperature beta."""

    family: Literal["j-beta"] = "j-beta"
    coupling: Coupling
    beta: float = Field(gt=0.0, description="Inverse temperature")

    @model_validator(mode="after")
    def _summable(self):
        if isinstance(self.coupling, PowerCoupling) and self.coupling.exponent <= self.dimension:
            raise ValueError(
                f"power coupling needs exponent > dimension for summability, "
                f"got exponent={self.coupling.exponent}, dimension={self.dimension}"
            )
        return self

    def radial_value(self, r) -> np.ndarray:
        r = np.asarray(r).astype(np.float64)
        safe = np.where(r == 0, 1.0, r)
        values = -np.expm1(-self.beta * self.coupling.at(safe))
        return np.where(r == 0, 0.0, values)

    def _series_start(self) -> int:
        """First radius where u = beta J(r) <= SERIES_THRESHOLD."""
        amp = self.beta * self.coupling.strength
        if amp <= SERIES_THRESHOLD:
            return 1
        if isinstance(self.coupling, PowerCoupling):
            r = (amp / SERIES_THRESHOLD) ** (1.0 / self.coupling.exponent)
        else:
            r = math.log(amp / SERIES_THRESHOLD) / self.coupling.decay
        return max(1, int(math.ceil(r)))

    def _tail(self, R: int) -> float:
        # 1 - e^{-u} = u - u^2/2 + u^3/6 - ...; the omitted u^4/24 term is below 1e-16 relative.
        start = max(R, self._series_start(), 1)
        explicit = self._explicit_sum(R, start)
        amp = self.beta * self.coupling.strength
        d = self.dimension
        series = 0.0
        for m, sign, fact in ((1, 1.0, 1.0), (2, -1.0, 2.0), (3, 1.0, 6.0)):
            if isinstance(self.coupling, PowerCoupling):
                shell = _hurwitz_shell_sum(d, m * self.coupling.exponent, start)
            else:
                shell = _geometric_shell_sum(d, math.exp(-m * self.coupling.decay), start)
            series += sign * amp ** m / fact * shell
        return explicit + series


Kernel = Annotated[
    Union[ZeroKernel, NearestNeighborKernel, GeometricKernel, PolynomialKernel, JBetaKernel],
    Field(discriminator="family"),
]


@lru_cache(maxsize=4096)
def _cached_tail(kernel: _KernelBase, R: int) -> float:
    return max(0.0, kernel._tail(R))


def kernel_value(kernel: _KernelBase, x: Sequence[int]) -> float:
    """
    Returns p(x) for a lattice vector x.

    Args:
        kernel: The connection-probability kernel.
        x: Integer lattice vector of length kernel.dimension.

    Returns:
        float: Probability in [0, 1]; symmetric in x and -x.

    Raises:
        DimensionMismatchError: If len(x) differs from the kernel dimension.
    """
    x = tuple(int(c) for c in x)
    if len(x) != kernel.dimension:
        raise DimensionMismatchError(
            f"vector has dimension {len(x)} but kernel has dimension {kernel.dimension}", field="x"
        )
    r = sum(abs(c) for c in x)
    return float(kernel.radial_value(np.array([r]))[0])


def kernel_tail(kernel: _KernelBase, R: int) -> float:
    """
    Returns eps_R = sum over ||x||_1 >= R of p(x).

    Args:
        kernel: The connection-probability kernel.
        R: Nonnegative integer radius.

    Returns:
        float: The tail mass; kernel_tail(kernel, 0) equals kernel_l1(kernel).
    """
    if R < 0:
        raise ValueError(f"tail radius must be nonnegative, got {R}")
    return _cached_tail(kernel, int(R))


def kernel_l1(kernel: _KernelBase) -> float:
    """Returns ||p||_1, which is also the expected vertex degree."""
    return kernel_tail(kernel, 0)


def truncation_radius(kernel: _KernelBase, trunc_tol: float, cap: int) -> int:
    """
    Smallest R with kernel_tail(R) < trunc_tol.

    Args:
        kernel: The connection-probability kernel.
        trunc_tol: Omitted expected degree per vertex, in (0, 1].
        cap: Largest admissible radius.

    Returns:
        int: The truncation radius rho_max.

    Raises:
        TruncationCapError: If rho_max would exceed cap.
    """
    if kernel_tail(kernel, 0) < trunc_tol:
        return 0
    lo, hi = 0, 1
    while kernel_tail(kernel, hi) >= trunc_tol:
        if hi >= cap:
            raise TruncationCapError(
                f"truncation radius for trunc_tol={trunc_tol:g} exceeds the cap of {cap} "
                f"(tail at cap is {kernel_tail(kernel, cap):.3e})",
                field="run.trunc_tol",
            )
        lo, hi = hi, min(2 * hi, cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if kernel_tail(kernel, mid) < trunc_tol:
            hi = mid
        else:
            lo = mid
    logger.debug(f"Truncation radius {hi} for {kernel.family} kernel at tol {trunc_tol:g}")
    return hi


# ---------------------------------------------------------------------------
# Weight laws
# ---------------------------------------------------------------------------

class _LawBase(_Frozen):
    second_moment_bound: Optional[float] = Field(
        default=None,
        ge=0.0,
        description="Certified bound v^2 on E[a^2]; defaults to the exact second moment",
    )

    def exact_second_moment(self) -> float:
        raise NotImplementedError

    def expectation(self) -> float:
        raise NotImplementedError

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Maps uniforms in (0, 1) to draws of the law."""
        raise NotImplementedError

    @model_validator(mode="after")
    def _bound_is_valid(self):
        if self.second_moment_bound is not None:
            exact = self.exact_second_moment()
            if self.second_moment_bound < exact * (1.0 - 1e-12):
                raise ValueError(
                    f"second_moment_bound {self.second_moment_bound} is below E[a^2] = {exact} "
                    f"for the {self.family} law"
                )
        return self

    @property
    def moment_bound(self) -> float:
        """The v^2 in effect."""
        if self.second_moment_bound is not None:
            return self.second_moment_bound
        return self.exact_second_moment()


class ConstantLaw(_LawBase):
    family: Literal["constant"] = "constant"
    c: float = Field(default=1.0, description="The constant weight")

    def exact_second_moment(self) -> float:
        return self.c * self.c

    def expectation(self) -> float:
        return self.c

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return np.full(np.shape(u), self.c, dtype=np.float64)


class UniformLaw(_LawBase):
    family: Literal["uniform"] = "uniform"
    lo: float = Field(default=0.0, description="Lower end of the support")
    hi: float = Field(default=1.0, description="Upper end of the support")

    @model_validator(mode="after")
    def _ordered(self):
        if not self.lo < self.hi:
            raise ValueError(f"uniform law needs lo < hi, got lo={self.lo}, hi={self.hi}")
        return self

    def exact_second_moment(self) -> float:
        return (self.lo * self.lo + self.lo * self.hi + self.hi * self.hi) / 3.0

    def expectation(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * np.asarray(u, dtype=np.float64)


class GaussianLaw(_LawBase):
    family: Literal["gaussian"] = "gaussian"
    mean: float = Field(default=0.0, description="Mean of the weight")
    sd: float = Field(default=1.0, ge=0.0, description="Standard deviation of the weight")

    def exact_second_moment(self) -> float:
        return self.mean * self.mean + self.sd * self.sd

    def expectation(self) -> float:
        return self.mean

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return self.mean + self.sd * special.ndtri(np.asarray(u, dtype=np.float64))


class RademacherLaw(_LawBase):
    family: Literal["rademacher"] = "rademacher"

    def exact_second_moment(self) -> float:
        return 1.0

    def expectation(self) -> float:
        return 0.0

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(u) < 0.5, -1.0, 1.0)


WeightLaw = Annotated[
    Union[ConstantLaw, UniformLaw, GaussianLaw, RademacherLaw],
    Field(discriminator="family"),
]


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------

OPERATOR_CLASSES = {
    (0.0, 1.0): "laplacian",
    (1.0, 1.0): "laplacian-plus-potential",
    (1.0, 0.0): "adjacency-plus-potential",
    (0.0, 0.0): "adjacency",
}


class ModelParams(_Frozen):
    """
    The law of one realization: lattice, operator coefficients, kernel,
    weight law and master seed.
    """

    d: int = Field(ge=1, description="Lattice dimension")
    alpha: float = Field(description="Coefficient of the diagonal loop term, in [0, 1]")
    beta: float = Field(description="Coefficient of the degree term, in [0, 1]")
    kernel: Kernel
    weights: WeightLaw = Field(default_factory=ConstantLaw, description="Edge and loop weight law")
    seed: int = Field(default=0, ge=0, lt=2 ** 64, description="Master seed (64-bit unsigned)")
    loop_probability: Optional[float] = Field(
        default=None,
        ge=0.0,
        le=1.0,
        description="Presence probability of loops; defaults to 1 when alpha > 0, else 0",
    )
    restriction: Literal["compression", "full-diagonal"] = Field(
        default="compression",
        description="Diagonal convention of the finite-volume operator",
    )
    shift: Optional[Tuple[int, ...]] = Field(
        default=None, description="Lattice translation composed into the edge hash"
    )

    @field_validator("alpha", "beta")
    @classmethod
    def _unit_interval(cls, value: float, info):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{info.field_name} must lie in [0, 1], got {value}")
        return value

    @model_validator(mode="after")
    def _consistent_dimension(self):
        if self.kernel.dimension != self.d:
            raise ValueError(f"kernel.dimension ({self.kernel.dimension}) must equal d ({self.d})")
        if self.shift is not None and len(self.shift) != self.d:
            raise ValueError(f"shift has length {len(self.shift)} but d is {self.d}")
        return self

    @property
    def p_loop(self) -> float:
        if self.loop_probability is not None:
            return self.loop_probability
        return 1.0 if self.alpha > 0 else 0.0

    @property
    def offset(self) -> Tuple[int, ...]:
        return self.shift if self.shift is not None else (0,) * self.d

    def digest(self) -> str:
        """sha256 of the canonical JSON form."""
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()

    def with_seed(self, seed: int) -> "ModelParams":
        return self.model_copy(update={"seed": int(seed) % 2 ** 64})

    def operator_class(self) -> str:
        return OPERATOR_CLASSES.get((self.alpha, self.beta), "mixed")


def moment_budget(params: ModelParams) -> float:
    """
    Returns v^2 (||p||_1^2 + ||p||_1), the bound on E[(sum_x |a_{0,x}| b_{0,x})^2].

    Args:
        params: Model parameters supplying v^2 and the kernel.

    Returns:
        float: The moment budget.
    """
    l1 = kernel_l1(params.kernel)
    return params.weights.moment_bound * (l1 * l1 + l1)
