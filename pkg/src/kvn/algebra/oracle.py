"""
Matrix representation of the generator algebra on small grids.

Each canonical pair acts on its own factor of a three-factor tensor space.
Per factor the grid is the Gauss-Hermite discrete-variable grid of N points:
the eigenbasis of the truncated oscillator position matrix (a + a^dagger)/sqrt(2).
The momentum matrix -i(a - a^dagger)/sqrt(2) is carried into that basis.
Truncation breaks [X, P] = i only on the highest mode, so for states
supported on low modes the representation is exact up to rounding.
"""

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.kvn.algebra.expr import PAIRS, OperatorExpr
from src.kvn.errors import ParameterError


def ladder(n: int) -> np.ndarray:
    """Truncated annihilation operator."""
    return np.diag(np.sqrt(np.arange(1, n)), k=1).astype(np.complex128)


class MatrixOracle:
    """
    Grid matrices for q, p, x, k, p_x, p_k.

    Args:
        points: Grid points per axis (N)
    """

    def __init__(self, points: int = 16):
        if points < 4:
            raise ParameterError(f"oracle grids need at least 4 points, got {points}")
        self.points = points
        a = ladder(points)
        position = (a + a.conj().T) / np.sqrt(2.0)
        momentum = -1j * (a - a.conj().T) / np.sqrt(2.0)
        nodes, vectors = scipy.linalg.eigh(position)
        self.nodes = nodes
        # rows of ``vectors.conj().T`` map Fock amplitudes to grid amplitudes
        self.to_grid = vectors.conj().T
        self.position = np.diag(nodes).astype(np.complex128)
        self.momentum = self.to_grid @ momentum @ vectors

    def matrix(self, generator_index: int) -> Tuple[int, np.ndarray]:
        """Tensor factor and matrix of one generator."""
        for axis, (position, derivative) in enumerate(PAIRS):
            if generator_index == position:
                return axis, self.position
            if generator_index == derivative:
                return axis, self.momentum
        raise ParameterError(f"unknown generator index {generator_index}")

    def _apply_matrix(self, matrix: np.ndarray, axis: int, state: np.ndarray) -> np.ndarray:
        return np.moveaxis(np.tensordot(matrix, state, axes=([1], [axis])), 0, axis)

    def apply(self, expression: OperatorExpr, state: np.ndarray, parameters: Optional[dict] = None) -> np.ndarray:
        """Apply a normal-ordered expression to a state of shape (N, N, N)."""
        if state.shape != (self.points,) * 3:
            raise ParameterError(f"oracle states must have shape {(self.points,) * 3}")
        result = np.zeros_like(state, dtype=np.complex128)
        for exponents, coefficient in expression.numeric_terms(parameters):
            vector = state.astype(np.complex128)
            # rightmost factor first: p_k, p_x, k, x, p, q
            for index in reversed(range(len(exponents))):
                axis, matrix = self.matrix(index)
                for _ in range(exponents[index]):
                    vector = self._apply_matrix(matrix, axis, vector)
            result = result + coefficient * vector
        return result

    def commutator_apply(self, a: OperatorExpr, b: OperatorExpr, state: np.ndarray,
                         parameters: Optional[dict] = None) -> np.ndarray:
        """(AB - BA) applied to a state, with A and B as grid matrices."""
        return (self.apply(a, self.apply(b, state, parameters), parameters)
                - self.apply(b, self.apply(a, state, parameters), parameters))

    def fock_state(self, modes: Sequence[int]) -> np.ndarray:
        """Product of oscillator eigenstates (one mode index per factor) on the grid."""
        factors = []
        for mode in modes:
            if not 0 <= mode < self.points:
                raise ParameterError(f"mode {mode} outside 0..{self.points - 1}")
            fock = np.zeros(self.points, dtype=np.complex128)
            fock[mode] = 1.0
            factors.append(self.to_grid @ fock)
        return np.einsum("i,j,k->ijk", *factors)

    def band_limited_states(self, max_mode: int, count: int, rng: np.random.Generator) -> List[np.ndarray]:
        """Random normalized superpositions of low modes (index <= max_mode per factor)."""
        states = []
        for _ in range(count):
            fock = np.zeros((self.points,) * 3, dtype=np.complex128)
            block = rng.normal(size=(max_mode + 1,) * 3) + 1j * rng.normal(size=(max_mode + 1,) * 3)
            fock[:max_mode + 1, :max_mode + 1, :max_mode + 1] = block
            fock /= np.linalg.norm(fock)
            grid = fock
            for axis in range(3):
                grid = self._apply_matrix(self.to_grid, axis, grid)
            states.append(grid)
        return states


def commutator_agreement(oracle: MatrixOracle, a: OperatorExpr, b: OperatorExpr,
                         symbolic: OperatorExpr, states: Iterable[np.ndarray],
                         parameters: Optional[dict] = None) -> float:
    """Max deviation between the matrix commutator and the symbolic one on test states."""
    deviation = 0.0
    for state in states:
        numeric = oracle.commutator_apply(a, b, state, parameters)
        predicted = oracle.apply(symbolic, state, parameters)
        deviation = max(deviation, float(np.max(np.abs(numeric - predicted))))
    return deviation
