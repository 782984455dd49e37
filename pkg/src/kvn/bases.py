"""
Truncated orthonormal mode families on a quantum grid.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.logger import setup_logger
from src.kvn.errors import ConfigurationError, ParameterError, ShapeError
from src.kvn.grids import Grid1D, StateVector

# Setup logger
logger = setup_logger(__name__)


def oscillator_functions(points: np.ndarray, count: int, center: float = 0.0,
                         width: float = 1.0) -> np.ndarray:
    """
    Harmonic-oscillator eigenfunctions via the stable three-term recurrence.

    Returns:
        Array of shape (count, len(points)), rows normalized in the continuum
    """
    y = (np.asarray(points, dtype=float) - center) / width
    functions = np.zeros((count, y.size))
    functions[0] = math.pi ** -0.25 * np.exp(-0.5 * y ** 2)
    if count > 1:
        functions[1] = math.sqrt(2.0) * y * functions[0]
    for n in range(1, count - 1):
        functions[n + 1] = (math.sqrt(2.0 / (n + 1)) * y * functions[n]
                            - math.sqrt(n / (n + 1)) * functions[n - 1])
    return functions / math.sqrt(width)


def orthonormalize(samples: np.ndarray, spacing: float) -> np.ndarray:
    """
    Gram-Schmidt re-orthonormalization under the weight ``spacing``.

    Implemented as a QR factorization with the diagonal of R made positive,
    which is the same as classical Gram-Schmidt in exact arithmetic.

    Args:
        samples: Array (count, n) of sampled functions
        spacing: Grid cell width

    Returns:
        Array (count, n) with sum(conj(e_i) * e_j) * spacing = delta_ij
    """
    weighted = np.asarray(samples, dtype=np.complex128).T * math.sqrt(spacing)
    q, r = np.linalg.qr(weighted)
    diagonal = np.diag(r)
    if np.min(np.abs(diagonal)) < 1e-12:
        raise ParameterError("mode functions are linearly dependent on this grid")
    q = q * (diagonal / np.abs(diagonal))
    return q.T / math.sqrt(spacing)


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """
    Orthonormal family e_0..e_{size-1} on a quantum grid.

    Attributes:
        grid: Quantum grid (label q)
        vectors: Array (size, n)
        family: Family name for reports
    """
    grid: Grid1D
    vectors: np.ndarray
    family: str = "custom"

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.complex128)
        if vectors.ndim != 2 or vectors.shape[1] != self.grid.n:
            raise ShapeError(f"basis vectors of shape {vectors.shape} do not fit grid of {self.grid.n} points")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def truncate(self, dimension: int) -> "ModeBasis":
        if dimension > self.size or dimension < 1:
            raise ParameterError(f"dimension {dimension} not in 1..{self.size}")
        return ModeBasis(self.grid, self.vectors[:dimension], self.family)

    def overlap_matrix(self) -> np.ndarray:
        return np.conj(self.vectors) @ self.vectors.T * self.grid.spacing

    def mode(self, index: int) -> StateVector:
        return StateVector((self.grid,), self.vectors[index])

    def coefficients(self, state: StateVector, dimension: int = None) -> np.ndarray:
        """Projections <e_i|psi> for a state on the quantum grid."""
        if state.labels != (self.grid.label,) or state.grids[0] != self.grid:
            raise ShapeError(f"state axes {state.labels} do not match basis grid '{self.grid.label}'")
        dimension = self.size if dimension is None else dimension
        return np.conj(self.vectors[:dimension]) @ state.amplitudes * self.grid.spacing

    def synthesize(self, coefficients: Sequence[complex]) -> StateVector:
        """State sum_i c_i e_i on the quantum grid."""
        coefficients = np.asarray(coefficients, dtype=np.complex128)
        if coefficients.size > self.size:
            raise ParameterError(f"{coefficients.size} coefficients for a basis of size {self.size}")
        return StateVector((self.grid,), coefficients @ self.vectors[:coefficients.size])


def hermite_basis(grid: Grid1D, size: int, center: float = 0.0, width: float = 1.0) -> ModeBasis:
    """Oscillator eigenfunctions sampled on the grid then re-orthonormalized."""
    if size < 1:
        raise ParameterError(f"basis size must be positive, got {size}")
    samples = oscillator_functions(grid.points, size, center, width)
    return ModeBasis(grid, orthonormalize(samples, grid.spacing), "hermite")


def packet_basis(grid: Grid1D, size: int, offset: float, width: float = 1.0) -> ModeBasis:
    """
    Localized packets at -offset and +offset.

    Modes alternate sides: e_0, e_2, ... sit left, e_1, e_3, ... sit right, with
    increasing oscillator excitation per pair.
    """
    if size < 1:
        raise ParameterError(f"basis size must be positive, got {size}")
    per_side = (size + 1) // 2
    left = oscillator_functions(grid.points, per_side, -offset, width)
    right = oscillator_functions(grid.points, per_side, offset, width)
    samples = np.empty((2 * per_side, grid.n))
    samples[0::2] = left
    samples[1::2] = right
    return ModeBasis(grid, orthonormalize(samples[:size], grid.spacing), "packets")


def build_basis(grid: Grid1D, family: str, size: int, offset: float = 0.0, width: float = 1.0) -> ModeBasis:
    """Construct a named mode family."""
    if family == "hermite":
        return hermite_basis(grid, size, width=width)
    if family == "packets":
        if offset <= 0:
            raise ConfigurationError("packet basis needs a positive packet offset")
        return packet_basis(grid, size, offset, width)
    raise ConfigurationError(f"unknown basis family '{family}'")
