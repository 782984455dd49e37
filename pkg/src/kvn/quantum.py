"""
Standard quantum evolution of one degree of freedom on a periodic q-grid.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.logger import setup_logger
from src.kvn.classical import HamiltonianSpec
from src.kvn.errors import ParameterError, ShapeError
from src.kvn.grids import GUARD_LIMIT, StateVector
from src.kvn.operators import OperatorSpec, transform_axes
from src.kvn.splitting import SubGenerator, evolve
from src.kvn.trajectory import Trajectory
from src.kvn.utils import central_difference, evaluate_polynomial, pairwise_sum

# Setup logger
logger = setup_logger(__name__)

QUANTUM_COLUMNS = ["t", "mean_q", "mean_p", "var_q", "var_p", "norm", "energy_q"]
FORCE_COLUMNS = ["mean_dT_dp", "mean_dV_dq"]
CLASSICAL_REGIME_RATIO = 0.1
CLASSICAL_REGIME_ACTION = 10.0


@dataclass
class QuantumRun:
    """Result of evolve_quantum."""
    trajectory: Trajectory
    final: StateVector
    ordering: List[dict]
    dt: float
    snapshots: List[StateVector] = field(default_factory=list)


@dataclass
class EhrenfestReport:
    """residual_q = d<q>/dt - <T'(p)>, residual_p = d<p>/dt + <V'(q)> on interior saved times."""
    times: np.ndarray
    residual_q: np.ndarray
    residual_p: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(max(np.max(np.abs(self.residual_q)), np.max(np.abs(self.residual_p))))


@dataclass
class SharpnessReport:
    """
    Per saved time: dq/<q>, dp/<p> and dq*dp.

    Ratios are NaN where the mean vanishes (|mean| < 1e-12). ``classical_regime``
    marks times where both ratios are at most 0.1 while dq*dp is at least 10 hbar.
    """
    times: np.ndarray
    ratio_q: np.ndarray
    ratio_p: np.ndarray
    product: np.ndarray
    classical_regime: np.ndarray

    def to_dict(self) -> dict:
        def clean(values):
            return [None if np.isnan(v) else float(v) for v in values]
        return {
            "t": clean(self.times),
            "ratio_q": clean(self.ratio_q),
            "ratio_p": clean(self.ratio_p),
            "uncertainty_product": clean(self.product),
            "classical_regime": [bool(v) for v in self.classical_regime],
        }


def quantum_generators(hamiltonian: HamiltonianSpec, axis: str = "q") -> List[SubGenerator]:
    """Potential phase V(q) first, then the spectral kinetic phase T(p)."""
    return [
        SubGenerator(f"V({axis})", OperatorSpec.coordinate(axis, hamiltonian.potential)),
        SubGenerator("T(p)", OperatorSpec.derivative(axis, hamiltonian.kinetic)),
    ]


def momentum_weights(state: StateVector, axis: str = "q") -> np.ndarray:
    """Momentum-representation probabilities along one axis (same shape as the state)."""
    index = state.axis(axis)
    transformed = transform_axes(state.amplitudes, [index])
    return np.abs(transformed) ** 2 * state.cell_volume


def quantum_moments(state: StateVector, hamiltonian: HamiltonianSpec) -> dict:
    """Position and momentum moments of a wave function on the q-grid."""
    if state.labels != ("q",):
        raise ShapeError(f"quantum wave function must live on (q,), got {state.labels}")
    q = state.grids[0].points
    p = state.grids[0].frequencies
    position = state.density() * state.cell_volume
    momentum = momentum_weights(state)
    mean_q = float(pairwise_sum(position * q))
    mean_p = float(pairwise_sum(momentum * p))
    return {
        "mean_q": mean_q,
        "mean_p": mean_p,
        "var_q": float(pairwise_sum(position * q ** 2)) - mean_q ** 2,
        "var_p": float(pairwise_sum(momentum * p ** 2)) - mean_p ** 2,
        "norm": float(np.sqrt(pairwise_sum(position))),
        "energy_q": float(pairwise_sum(momentum * evaluate_polynomial(hamiltonian.kinetic, p))
                          + pairwise_sum(position * evaluate_polynomial(hamiltonian.potential, q))),
        "mean_dT_dp": float(pairwise_sum(momentum * evaluate_polynomial(hamiltonian.kinetic_slope, p))),
        "mean_dV_dq": float(pairwise_sum(position * evaluate_polynomial(hamiltonian.potential_slope, q))),
    }


def evolve_quantum(initial: StateVector, hamiltonian: HamiltonianSpec, duration: float, dt: float,
                   save_every: int = 1, keep_snapshots: bool = False, workers: Optional[int] = None,
                   guard_limit: float = GUARD_LIMIT) -> QuantumRun:
    """
    Strang-split Schrodinger evolution with sub-generators V(q) and T(p).

    Args:
        initial: Normalized wave function on the q-grid
        hamiltonian: H_q = T(p) + V(q)
        duration: Total time T
        dt: Time step
        save_every: Steps between saved rows
        keep_snapshots: Keep the saved states (for Husimi histories)
        workers: FFT worker threads
        guard_limit: Boundary-mass limit

    Returns:
        QuantumRun with trajectory and final state
    """
    trajectory = Trajectory(QUANTUM_COLUMNS + FORCE_COLUMNS)
    snapshots: List[StateVector] = []

    def record(t: float, state: StateVector) -> None:
        trajectory.append(t=t, **quantum_moments(state, hamiltonian))
        if keep_snapshots:
            snapshots.append(state)

    logger.info(f"Quantum evolution: T={duration}, dt={dt}, grid {initial.shape}")
    result = evolve(initial, quantum_generators(hamiltonian), duration, dt, save_every,
                    record, workers=workers, guard_limit=guard_limit)
    return QuantumRun(trajectory, result.final, result.ordering, result.dt, snapshots)


def ehrenfest_check(trajectory: Trajectory) -> EhrenfestReport:
    """
    Central-difference check of d<q>/dt = <T'(p)> and d<p>/dt = -<V'(q)>.

    Raises:
        ParameterError: If fewer than 3 rows were saved
    """
    times = trajectory.times
    if times.size < 3:
        raise ParameterError(f"ehrenfest_check needs at least 3 saved points, got {times.size}")
    rate_q = central_difference(times, trajectory.column("mean_q"))
    rate_p = central_difference(times, trajectory.column("mean_p"))
    return EhrenfestReport(times[1:-1],
                           rate_q - trajectory.column("mean_dT_dp")[1:-1],
                           rate_p + trajectory.column("mean_dV_dq")[1:-1])


def sharpness_report(trajectory: Trajectory, hbar: float = 1.0) -> SharpnessReport:
    """Relative widths and the uncertainty product along a quantum trajectory."""
    mean_q = trajectory.column("mean_q")
    mean_p = trajectory.column("mean_p")
    spread_q = np.sqrt(np.clip(trajectory.column("var_q"), 0.0, None))
    spread_p = np.sqrt(np.clip(trajectory.column("var_p"), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_q = np.where(np.abs(mean_q) > 1e-12, spread_q / np.abs(mean_q), np.nan)
        ratio_p = np.where(np.abs(mean_p) > 1e-12, spread_p / np.abs(mean_p), np.nan)
    product = spread_q * spread_p
    sharp = (np.nan_to_num(ratio_q, nan=np.inf) <= CLASSICAL_REGIME_RATIO) & \
            (np.nan_to_num(ratio_p, nan=np.inf) <= CLASSICAL_REGIME_RATIO)
    classical_regime = sharp & (product >= CLASSICAL_REGIME_ACTION * hbar)
    return SharpnessReport(trajectory.times, ratio_q, ratio_p, product, classical_regime)
