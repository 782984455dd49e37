"""
Husimi (coherent-state) joint position-momentum distribution and the
quantum-classical correspondence diagnostics built on it.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.logger import setup_logger
from src.kvn.density import DensityMatrix
from src.kvn.errors import ParameterError, ShapeError
from src.kvn.grids import Density, StateVector
from src.kvn.trajectory import Trajectory
from src.kvn.utils import pairwise_sum

# Setup logger
logger = setup_logger(__name__)

COVERAGE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class DiagnosticGrid:
    """Uniform (q, p) grid on which Husimi densities are evaluated."""
    q: np.ndarray
    p: np.ndarray

    @classmethod
    def square(cls, n: int, extent: float) -> "DiagnosticGrid":
        """n x n points covering [-extent, extent] on both axes."""
        points = np.linspace(-extent, extent, n)
        return cls(points, points.copy())

    @classmethod
    def around(cls, n: int, q_range: Sequence[float], p_range: Sequence[float]) -> "DiagnosticGrid":
        return cls(np.linspace(q_range[0], q_range[1], n), np.linspace(p_range[0], p_range[1], n))

    @property
    def cell_area(self) -> float:
        return float((self.q[1] - self.q[0]) * (self.p[1] - self.p[0]))


@dataclass
class HusimiDistribution:
    """
    Husimi density f(q, p) on a diagnostic grid.

    Attributes:
        grid: Diagnostic grid
        values: Array (len(q), len(p)), nonnegative
        s: Coherent-state width
        warnings: Coverage warnings raised while evaluating
    """
    grid: DiagnosticGrid
    values: np.ndarray
    s: float
    warnings: List[str] = field(default_factory=list)

    def total(self) -> float:
        return float(pairwise_sum(self.values)) * self.grid.cell_area

    def mean(self) -> tuple:
        weights = self.values * self.grid.cell_area
        total = float(pairwise_sum(weights))
        return (float(pairwise_sum(weights * self.grid.q[:, None])) / total,
                float(pairwise_sum(weights * self.grid.p[None, :])) / total)

    def variance(self) -> tuple:
        weights = self.values * self.grid.cell_area
        total = float(pairwise_sum(weights))
        mean_q, mean_p = self.mean()
        return (float(pairwise_sum(weights * (self.grid.q[:, None] - mean_q) ** 2)) / total,
                float(pairwise_sum(weights * (self.grid.p[None, :] - mean_p) ** 2)) / total)


def _coherent_overlaps(amplitudes: np.ndarray, points: np.ndarray, spacing: float,
                       grid: DiagnosticGrid, s: float) -> np.ndarray:
    """<coherent(q_a, p_b)|psi> for all diagnostic points, as a (len(q), len(p)) array."""
    envelope = (math.pi * s ** 2) ** -0.25 * np.exp(-((points[None, :] - grid.q[:, None]) ** 2) / (2.0 * s ** 2))
    plane_waves = np.exp(-1j * np.outer(points, grid.p))
    return (envelope * amplitudes[None, :] * spacing) @ plane_waves


def husimi(source: Union[StateVector, DensityMatrix], grid: DiagnosticGrid, s: float = 1.0) -> HusimiDistribution:
    """
    f(q, p) = |<coherent(q, p, s)|psi>|^2 / (2 pi).

    Coherent states are Gaussians of position variance s^2/2 with a momentum
    phase. A density matrix in a truncated basis is decomposed into its
    eigenvectors and their Husimi densities are mixed.

    Raises:
        ParameterError: If s is not positive
    """
    if not s > 0:
        raise ParameterError(f"coherent width must be positive, got {s}")
    if isinstance(source, DensityMatrix):
        weights, vectors = np.linalg.eigh(source.hermitian_part())
        values = np.zeros((grid.q.size, grid.p.size))
        basis = source.basis
        for weight, vector in zip(weights, vectors.T):
            if weight <= 0:
                continue
            amplitudes = vector @ basis.vectors[:source.dimension]
            overlaps = _coherent_overlaps(amplitudes, basis.grid.points, basis.grid.spacing, grid, s)
            values = values + weight * np.abs(overlaps) ** 2 / (2.0 * math.pi)
    else:
        if source.labels != ("q",):
            raise ShapeError(f"Husimi densities need a wave function on (q,), got {source.labels}")
        q_grid = source.grids[0]
        overlaps = _coherent_overlaps(source.amplitudes, q_grid.points, q_grid.spacing, grid, s)
        values = np.abs(overlaps) ** 2 / (2.0 * math.pi)

    distribution = HusimiDistribution(grid, values, s)
    missing = 1.0 - distribution.total()
    if abs(missing) > COVERAGE_TOLERANCE:
        message = f"diagnostic grid misses {missing:.3e} of the Husimi mass"
        logger.warning(message)
        distribution.warnings.append(message)
    return distribution


def smoothed_liouville(density: Density, grid: DiagnosticGrid, s: float = 1.0) -> np.ndarray:
    """
    Liouville density convolved with the coherent-state kernel.

    The kernel is Gaussian with variance s^2/2 along x (mapped to q) and
    1/(2 s^2) along k (mapped to p), the same smoothing the Husimi transform
    applies to a Wigner function.
    """
    if density.labels != ("x", "k"):
        raise ShapeError(f"expected a density on (x, k), got {density.labels}")
    x = density.grids[0].points
    k = density.grids[1].points
    var_q = s ** 2 / 2.0
    var_p = 1.0 / (2.0 * s ** 2)
    kernel_q = np.exp(-((grid.q[:, None] - x[None, :]) ** 2) / (2.0 * var_q)) / math.sqrt(2.0 * math.pi * var_q)
    kernel_p = np.exp(-((grid.p[:, None] - k[None, :]) ** 2) / (2.0 * var_p)) / math.sqrt(2.0 * math.pi * var_p)
    return kernel_q @ density.values @ kernel_p.T * density.cell_volume


def husimi_l1(psi: StateVector, classical_state: StateVector, grid: DiagnosticGrid,
              s: float = 1.0) -> Tuple[float, List[str]]:
    """L1 distance between the Husimi density of psi and the smoothed Liouville density of a classical state."""
    distribution = husimi(psi, grid, s)
    density = Density(classical_state.grids, classical_state.density())
    difference = distribution.values - smoothed_liouville(density, grid, s)
    return float(pairwise_sum(np.abs(difference))) * grid.cell_area, distribution.warnings


@dataclass
class CorrespondenceReport:
    """
    Per saved time deviations between matched quantum and classical runs.

    mean_q_deviation = |<q>_quantum - <x>_classical|, mean_p_deviation =
    |<p>_quantum - <k>_classical|; husimi_l1 is the L1 distance between the
    Husimi density and the smoothed Liouville density (empty without histories).
    """
    times: np.ndarray
    mean_q_deviation: np.ndarray
    mean_p_deviation: np.ndarray
    husimi_l1: np.ndarray

    @property
    def max_mean_deviation(self) -> float:
        return float(max(np.max(self.mean_q_deviation), np.max(self.mean_p_deviation)))

    @property
    def max_l1(self) -> float:
        return float(np.max(self.husimi_l1)) if self.husimi_l1.size else float("nan")


def correspondence_compare(quantum: Trajectory, classical: Trajectory,
                           quantum_history: Optional[Sequence[StateVector]] = None,
                           classical_history: Optional[Sequence[StateVector]] = None,
                           grid: Optional[DiagnosticGrid] = None, s: float = 1.0,
                           husimi_distances: Optional[Sequence[float]] = None) -> CorrespondenceReport:
    """
    Compare a quantum run against a classical run with matched initial moments.

    Phase-space distances come either from the two state histories or, for
    runs too long to keep every state, from per-row values computed with
    :func:`husimi_l1` while the runs were saved.

    Raises:
        ParameterError: If the time stamps differ or the histories do not match the rows
    """
    times = quantum.times
    if times.shape != classical.times.shape or np.max(np.abs(times - classical.times)) > 1e-12:
        raise ParameterError("quantum and classical trajectories have different time stamps")
    dq = np.abs(quantum.column("mean_q") - classical.column("mean_x"))
    dp = np.abs(quantum.column("mean_p") - classical.column("mean_k"))
    distances: List[float] = []
    if husimi_distances is not None:
        distances = [float(value) for value in husimi_distances]
        if len(distances) != times.size:
            raise ParameterError("Husimi distances do not match the trajectory rows")
    elif quantum_history is not None and classical_history is not None:
        if grid is None:
            raise ParameterError("a diagnostic grid is required to compare phase-space densities")
        if len(quantum_history) != times.size or len(classical_history) != times.size:
            raise ParameterError("state histories do not match the trajectory rows")
        for psi, psi_c in zip(quantum_history, classical_history):
            distances.append(husimi_l1(psi, psi_c, grid, s)[0])
    return CorrespondenceReport(times, dq, dp, np.array(distances))
