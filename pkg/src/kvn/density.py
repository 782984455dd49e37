"""
Density matrices in a truncated quantum basis and the partial trace onto them.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from src.logger import setup_logger
from src.kvn.bases import ModeBasis
from src.kvn.errors import DomainError, ParameterError, ShapeError
from src.kvn.grids import StateVector

# Setup logger
logger = setup_logger(__name__)

LEAKAGE_WARNING = 1e-6


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    D x D density matrix expressed in the first D modes of a basis.

    Attributes:
        matrix: Complex (D, D) array
        basis: Mode family the indices refer to
        leakage: 1 - trace for reduced states (mass outside the truncated span)
    """
    matrix: np.ndarray
    basis: ModeBasis
    leakage: float = 0.0

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeError(f"density matrix must be square, got {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def pure(cls, coefficients: Sequence[complex], basis: ModeBasis) -> "DensityMatrix":
        vector = np.asarray(coefficients, dtype=np.complex128)
        return cls(np.outer(vector, np.conj(vector)), basis)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.hermitian_part())

    def hermitian_part(self) -> np.ndarray:
        return 0.5 * (self.matrix + self.matrix.conj().T)

    def fidelity_with(self, coefficients: Sequence[complex]) -> float:
        """<t|rho|t> for a pure target given by (normalized) basis coefficients."""
        target = np.asarray(coefficients, dtype=np.complex128)
        target = target / np.linalg.norm(target)
        return float(np.real(np.conj(target) @ self.matrix @ target))

    def trace_distance(self, other: "DensityMatrix") -> float:
        difference = 0.5 * ((self.matrix - other.matrix) + (self.matrix - other.matrix).conj().T)
        return 0.5 * float(np.sum(np.abs(scipy.linalg.eigvalsh(difference))))

    def normalized(self) -> "DensityMatrix":
        trace = self.trace()
        if trace <= 0:
            raise DomainError("cannot normalize a density matrix with nonpositive trace")
        return DensityMatrix(self.matrix / trace, self.basis, 0.0)

    def validate(self, hermitian_tol: float = 1e-10, trace_tol: float = 1e-9,
                 eigenvalue_tol: float = 1e-8, unit_trace: bool = True) -> None:
        """
        Check the density-matrix invariants.

        Raises:
            DomainError: If any invariant fails
        """
        asymmetry = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if asymmetry > hermitian_tol:
            raise DomainError(f"density matrix not Hermitian (deviation {asymmetry:.3e})")
        if unit_trace and abs(self.trace() - 1.0) > trace_tol:
            raise DomainError(f"density matrix trace {self.trace():.12f} differs from 1")
        smallest = float(np.min(self.eigenvalues()))
        if smallest < -eigenvalue_tol:
            raise DomainError(f"density matrix has negative eigenvalue {smallest:.3e}")


def reduced_coefficients(state: StateVector, basis: ModeBasis, dimension: int) -> np.ndarray:
    """
    Basis projections c_i(rest) = sum_q conj(e_i(q)) Psi(q, rest) dq.

    Returns:
        Array (dimension, number of non-quantum cells)
    """
    if dimension > basis.size:
        raise ParameterError(f"D={dimension} exceeds basis size {basis.size}")
    index = state.axis(basis.grid.label)
    if state.grids[index] != basis.grid:
        raise ShapeError("basis grid differs from the state's quantum grid")
    amplitudes = np.moveaxis(state.amplitudes, index, 0).reshape(basis.grid.n, -1)
    return np.conj(basis.vectors[:dimension]) @ amplitudes * basis.grid.spacing


def partial_trace_quantum(state: StateVector, basis: ModeBasis, dimension: int) -> DensityMatrix:
    """
    Reduced quantum density matrix in the first ``dimension`` basis modes.

    rho_ij = sum over the classical cells of <e_i|Psi(., x, k)><Psi(., x, k)|e_j> times
    the classical cell area. A trace below one signals leakage out of the
    truncated basis; it is recorded and logged.

    Args:
        state: State with a quantum axis (classical axes optional)
        basis: Orthonormal mode family on the quantum grid
        dimension: Truncation D

    Returns:
        DensityMatrix with its leakage recorded

    Raises:
        ParameterError: If D exceeds the basis size
    """
    coefficients = reduced_coefficients(state, basis, dimension)
    rest_volume = state.cell_volume / basis.grid.spacing
    matrix = coefficients @ coefficients.conj().T * rest_volume
    matrix = 0.5 * (matrix + matrix.conj().T)
    leakage = state.norm() ** 2 - float(np.real(np.trace(matrix)))
    if leakage > LEAKAGE_WARNING:
        logger.warning(f"Truncated basis misses {leakage:.3e} of the quantum state's norm (D={dimension})")
    return DensityMatrix(matrix, basis.truncate(dimension), leakage)
