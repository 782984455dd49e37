"""
Grid operators: coordinate polynomials, spectral derivatives and their products.

An OperatorSpec is a coefficient times an ordered product of per-axis
factors. Factors are applied right to left, as the product is written.
A product whose factors sit on distinct axes is diagonal in a mixed
representation (derivative axes transformed) and can be exponentiated
exactly.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.fft

from src.logger import setup_logger
from src.kvn.errors import ConfigurationError, ParameterError, SelfAdjointnessError, ShapeError
from src.kvn.grids import Grid1D, StateVector, inner_product
from src.kvn.utils import evaluate_polynomial

# Setup logger
logger = setup_logger(__name__)

COORDINATE = "coordinate"
DERIVATIVE = "derivative"
IMAGINARY_THRESHOLD = 1e-10


@dataclass(frozen=True)
class AxisFactor:
    """
    Polynomial in the coordinate of an axis, or in its conjugate derivative -i d/d(axis).

    Attributes:
        axis: Axis label
        kind: COORDINATE or DERIVATIVE
        coefficients: Ascending polynomial coefficients
    """
    axis: str
    kind: str
    coefficients: Tuple[float, ...] = (0.0, 1.0)

    def __post_init__(self):
        if self.kind not in (COORDINATE, DERIVATIVE):
            raise ParameterError(f"unknown factor kind '{self.kind}'")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if not all(np.isfinite(self.coefficients)):
            raise ParameterError("polynomial coefficients must be finite")

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coefficients)

    def values(self, grid: Grid1D) -> np.ndarray:
        """The factor's diagonal values in its own representation."""
        samples = grid.points if self.kind == COORDINATE else grid.frequencies
        return evaluate_polynomial(self.coefficients, samples)

    def describe(self) -> str:
        symbol = self.axis if self.kind == COORDINATE else f"p_{self.axis}"
        if self.coefficients == (0.0, 1.0):
            return symbol
        return f"poly[{','.join(repr(c) for c in self.coefficients)}]({symbol})"


@dataclass(frozen=True)
class OperatorSpec:
    """
    coefficient * factors[0] * factors[1] * ... (applied right to left).
    """
    factors: Tuple[AxisFactor, ...] = ()
    coefficient: complex = 1.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    @classmethod
    def identity(cls, coefficient: complex = 1.0) -> "OperatorSpec":
        return cls((), coefficient, "1")

    @classmethod
    def coordinate(cls, axis: str, coefficients: Sequence[float] = (0.0, 1.0),
                   coefficient: complex = 1.0) -> "OperatorSpec":
        """Multiplication by a polynomial of one coordinate."""
        factor = AxisFactor(axis, COORDINATE, tuple(coefficients))
        return cls((factor,), coefficient, factor.describe())

    @classmethod
    def derivative(cls, axis: str, coefficients: Sequence[float] = (0.0, 1.0),
                   coefficient: complex = 1.0) -> "OperatorSpec":
        """Polynomial in -i d/d(axis), applied spectrally."""
        factor = AxisFactor(axis, DERIVATIVE, tuple(coefficients))
        return cls((factor,), coefficient, factor.describe())

    @classmethod
    def composed(cls, coordinate_axis: str, coordinate_coefficients: Sequence[float],
                 derivative_axis: str, coefficient: complex = 1.0,
                 derivative_coefficients: Sequence[float] = (0.0, 1.0)) -> "OperatorSpec":
        """Coordinate polynomial times a derivative on a distinct axis."""
        if coordinate_axis == derivative_axis:
            raise ConfigurationError(
                f"composed operator needs distinct axes, got '{coordinate_axis}' twice")
        first = AxisFactor(coordinate_axis, COORDINATE, tuple(coordinate_coefficients))
        second = AxisFactor(derivative_axis, DERIVATIVE, tuple(derivative_coefficients))
        return cls((first, second), coefficient, f"{first.describe()}*{second.describe()}")

    @property
    def axes(self) -> Tuple[str, ...]:
        return tuple(f.axis for f in self.factors)

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0 or any(f.is_zero for f in self.factors)

    @property
    def is_exponentiable(self) -> bool:
        """True when every axis carries at most one factor."""
        return len(set(self.axes)) == len(self.axes)

    @property
    def derivative_axes(self) -> Tuple[str, ...]:
        return tuple(f.axis for f in self.factors if f.kind == DERIVATIVE)

    def times(self, other: "OperatorSpec") -> "OperatorSpec":
        """Operator product self * other (other acts first)."""
        name = f"{self.name}*{other.name}" if self.name and other.name else ""
        return OperatorSpec(self.factors + other.factors, self.coefficient * other.coefficient, name)

    def scaled(self, factor: complex) -> "OperatorSpec":
        return OperatorSpec(self.factors, self.coefficient * factor, self.name)

    def describe(self) -> str:
        body = "*".join(f.describe() for f in self.factors) or "1"
        return body if self.coefficient == 1.0 else f"{self.coefficient!r}*{body}"


def _broadcast(values: np.ndarray, index: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[index] = values.size
    return values.reshape(shape)


def _apply_factor(factor: AxisFactor, state: StateVector, amplitudes: np.ndarray,
                  workers: Optional[int]) -> np.ndarray:
    index = state.axis(factor.axis)
    values = _broadcast(factor.values(state.grids[index]), index, amplitudes.ndim)
    if factor.kind == COORDINATE:
        return amplitudes * values
    transformed = scipy.fft.fft(amplitudes, axis=index, workers=workers)
    return scipy.fft.ifft(transformed * values, axis=index, workers=workers)


def apply_operator(op: OperatorSpec, state: StateVector, workers: Optional[int] = None) -> StateVector:
    """
    Apply an operator to a state.

    Coordinate factors multiply pointwise; derivative factors transform along
    their axis, multiply by the frequency polynomial and transform back.

    Raises:
        ShapeError: If the operator names an axis the state lacks
    """
    missing = [axis for axis in op.axes if axis not in state.labels]
    if missing:
        raise ShapeError(f"operator acts on axes {missing} absent from state axes {state.labels}")
    amplitudes = state.amplitudes
    for factor in reversed(op.factors):
        amplitudes = _apply_factor(factor, state, amplitudes, workers)
    if op.coefficient != 1.0:
        amplitudes = amplitudes * op.coefficient
    return state.with_amplitudes(amplitudes)


def expectation(op: OperatorSpec, state: StateVector, workers: Optional[int] = None,
                threshold: float = IMAGINARY_THRESHOLD) -> float:
    """
    Real expectation <s|op s>.

    Raises:
        SelfAdjointnessError: If the imaginary part exceeds the threshold
    """
    value = inner_product(state, apply_operator(op, state, workers))
    if abs(value.imag) > threshold:
        raise SelfAdjointnessError(
            f"<{op.describe()}> has imaginary part {value.imag:.3e}", value.imag)
    return value.real


def transform_axes(amplitudes: np.ndarray, axes: Sequence[int], inverse: bool = False,
                   workers: Optional[int] = None) -> np.ndarray:
    """Unitary (orthonormal) FFT over the given axes."""
    if not axes:
        return amplitudes
    if inverse:
        return scipy.fft.ifftn(amplitudes, axes=tuple(axes), norm="ortho", workers=workers)
    return scipy.fft.fftn(amplitudes, axes=tuple(axes), norm="ortho", workers=workers)


def diagonal_values(op: OperatorSpec, grids: Sequence[Grid1D]) -> np.ndarray:
    """
    Values of an exponentiable operator in its diagonal (mixed) representation.

    Raises:
        ConfigurationError: If two factors share an axis
    """
    if not op.is_exponentiable:
        raise ConfigurationError(f"operator {op.describe()} repeats an axis and is not diagonalizable")
    labels = [g.label for g in grids]
    values = np.ones([1] * len(grids))
    for factor in op.factors:
        if factor.axis not in labels:
            raise ShapeError(f"operator acts on axis '{factor.axis}' absent from {labels}")
        index = labels.index(factor.axis)
        values = values * _broadcast(factor.values(grids[index]), index, len(grids))
    return values * op.coefficient


class PhaseKernel:
    """
    Precomputed exact exponential exp(-i tau op) of an exponentiable operator.

    The kernel is built once per (operator, grids, tau) and applied to raw
    amplitude buffers by the evolution drivers.
    """

    def __init__(self, op: OperatorSpec, grids: Sequence[Grid1D], tau: float,
                 workers: Optional[int] = None):
        if complex(op.coefficient).imag != 0.0:
            raise ConfigurationError(f"generator {op.describe()} has a complex coefficient and is not self-adjoint")
        labels = [g.label for g in grids]
        self.name = op.name or op.describe()
        self.tau = tau
        self.workers = workers
        self.axes = tuple(labels.index(axis) for axis in op.derivative_axes)
        self.phase = np.exp(-1j * tau * np.real(diagonal_values(op, grids)))

    def merged(self, other: "PhaseKernel") -> "PhaseKernel":
        """Product of two kernels diagonal in the same representation."""
        if self.axes != other.axes:
            raise ConfigurationError("only kernels sharing derivative axes can be merged")
        kernel = object.__new__(PhaseKernel)
        kernel.name = f"{self.name}+{other.name}"
        kernel.tau = self.tau
        kernel.workers = self.workers
        kernel.axes = self.axes
        kernel.phase = self.phase * other.phase
        return kernel

    def __call__(self, amplitudes: np.ndarray) -> np.ndarray:
        if not self.axes:
            return amplitudes * self.phase
        transformed = scipy.fft.fftn(amplitudes, axes=self.axes, workers=self.workers)
        return scipy.fft.ifftn(transformed * self.phase, axes=self.axes, workers=self.workers)


def exponentiate(op: OperatorSpec, state: StateVector, t: float,
                 workers: Optional[int] = None) -> StateVector:
    """
    exp(-i t op) applied exactly to a state.

    Raises:
        ConfigurationError: If op is not exactly exponentiable
    """
    kernel = PhaseKernel(op, state.grids, t, workers)
    return state.with_amplitudes(kernel(state.amplitudes))


def shear(state: StateVector, axis: str, shift, workers: Optional[int] = None) -> StateVector:
    """
    Exact spectral translation psi(a) -> psi(a - shift) along one axis.

    ``shift`` may be a scalar or an array broadcastable against the amplitudes
    (for a shift that depends on the other coordinates).
    """
    index = state.axis(axis)
    frequencies = _broadcast(state.grids[index].frequencies, index, state.amplitudes.ndim)
    transformed = scipy.fft.fft(state.amplitudes, axis=index, workers=workers)
    shifted = scipy.fft.ifft(transformed * np.exp(-1j * frequencies * shift), axis=index, workers=workers)
    return state.with_amplitudes(shifted)
