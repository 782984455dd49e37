"""
Koopman–von Neumann representation of one classical degree of freedom.

The classical wave function lives on an (x, k) phase-space grid; its
modulus squared is the Liouville density. Evolution is generated by the
Liouvillian L = T'(k) p_x - V'(x) p_k, split into two exact spectral shears.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.logger import setup_logger
from src.kvn.algebra.expr import OperatorExpr, polynomial_expr
from src.kvn.errors import DomainError, ParameterError, SelfAdjointnessError, ShapeError
from src.kvn.grids import GUARD_LIMIT, Density, Grid1D, StateVector, inner_product
from src.kvn.operators import OperatorSpec, apply_operator
from src.kvn.splitting import SubGenerator, evolve
from src.kvn.trajectory import Trajectory
from src.kvn.utils import central_difference, evaluate_polynomial, pairwise_sum, polynomial_derivative

# Setup logger
logger = setup_logger(__name__)

CLASSICAL_COLUMNS = ["t", "mean_x", "mean_k", "var_x", "var_k", "norm", "energy_c"]
FLOW_COLUMNS = ["mean_dH_dk", "mean_dH_dx"]
MAX_DEGREE = 4

ClassicalWaveFunction = StateVector


@dataclass(frozen=True)
class HamiltonianSpec:
    """
    Separable Hamiltonian H = T(momentum) + V(position).

    Attributes:
        kinetic: Ascending coefficients of T
        potential: Ascending coefficients of V
    """
    kinetic: Tuple[float, ...] = (0.0, 0.0, 0.5)
    potential: Tuple[float, ...] = (0.0, 0.0, 0.5)

    def __post_init__(self):
        for name in ("kinetic", "potential"):
            coefficients = tuple(float(c) for c in getattr(self, name))
            if not coefficients:
                coefficients = (0.0,)
            if len(coefficients) > MAX_DEGREE + 1:
                raise ParameterError(f"{name} polynomial degree exceeds {MAX_DEGREE}")
            if not all(np.isfinite(coefficients)):
                raise ParameterError(f"{name} coefficients must be finite")
            object.__setattr__(self, name, coefficients)

    @classmethod
    def harmonic(cls) -> "HamiltonianSpec":
        return cls((0.0, 0.0, 0.5), (0.0, 0.0, 0.5))

    @classmethod
    def free_particle(cls) -> "HamiltonianSpec":
        return cls((0.0, 0.0, 0.5), (0.0,))

    @classmethod
    def quartic(cls, strength: float = 0.25) -> "HamiltonianSpec":
        return cls((0.0, 0.0, 0.5), (0.0, 0.0, 0.0, 0.0, strength))

    @property
    def kinetic_slope(self) -> Tuple[float, ...]:
        return polynomial_derivative(self.kinetic)

    @property
    def potential_slope(self) -> Tuple[float, ...]:
        return polynomial_derivative(self.potential)

    def energy(self, position: np.ndarray, momentum: np.ndarray) -> np.ndarray:
        return evaluate_polynomial(self.kinetic, momentum) + evaluate_polynomial(self.potential, position)

    def to_dict(self) -> dict:
        return {"kinetic": list(self.kinetic), "potential": list(self.potential)}


@dataclass
class ClassicalRun:
    """Result of evolve_classical."""
    trajectory: Trajectory
    final: StateVector
    ordering: List[dict]
    dt: float
    snapshots: List[StateVector] = field(default_factory=list)


@dataclass
class HamiltonReport:
    """
    Residuals of Hamilton's equations on expectation trajectories.

    residual_x = d<x>/dt - <dH/dk>, residual_k = d<k>/dt + <dH/dx>, both on
    the interior saved times (second-order central differences).
    """
    times: np.ndarray
    residual_x: np.ndarray
    residual_k: np.ndarray

    @property
    def max_x(self) -> float:
        return float(np.max(np.abs(self.residual_x)))

    @property
    def max_k(self) -> float:
        return float(np.max(np.abs(self.residual_k)))

    @property
    def max_residual(self) -> float:
        return max(self.max_x, self.max_k)


def _require_phase_space(state: StateVector) -> None:
    if state.labels != ("x", "k"):
        raise ShapeError(f"classical wave function must live on (x, k), got {state.labels}")


def from_density(density: Union[Density, np.ndarray], grids: Optional[Sequence[Grid1D]] = None) -> StateVector:
    """
    Classical wave function psi_c = sqrt(f / integral f), real nonnegative branch.

    Args:
        density: Density object, or raw values together with ``grids``
        grids: (x, k) grids when ``density`` is a raw array

    Raises:
        DomainError: If f has a value below -1e-14 or integrates to zero
    """
    if isinstance(density, Density):
        grids, values = density.grids, density.values
    else:
        if grids is None:
            raise ParameterError("grids are required for a raw density array")
        values = np.asarray(density, dtype=float)
    grids = tuple(grids)
    if not np.all(np.isfinite(values)):
        raise DomainError("density contains NaN or Inf")
    lowest = float(np.min(values))
    if lowest < -1e-14:
        raise DomainError(f"density has a negative value {lowest:.3e}")
    values = np.clip(values, 0.0, None)
    cell = float(np.prod([g.spacing for g in grids]))
    total = float(pairwise_sum(values)) * cell
    if not total > 0:
        raise DomainError("density integrates to zero")
    return StateVector(grids, np.sqrt(values / total))


def gaussian_density(grids: Sequence[Grid1D], centers: Sequence[float], variances: Sequence[float]) -> Density:
    """Normalized product Gaussian density on phase space."""
    values = None
    for grid, center, variance in zip(grids, centers, variances):
        factor = np.exp(-((grid.points - center) ** 2) / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)
        values = factor if values is None else np.multiply.outer(values, factor)
    return Density(tuple(grids), values)


def liouvillian_generators(hamiltonian: HamiltonianSpec, position: str = "x",
                           momentum: str = "k") -> List[SubGenerator]:
    """
    The two shear sub-generators of the Liouvillian, drift first.

    drift: T'(k) p_x shifts along x by an amount depending on k;
    kick: -V'(x) p_k shifts along k by an amount depending on x.
    """
    drift = OperatorSpec.composed(momentum, hamiltonian.kinetic_slope, position)
    kick = OperatorSpec.composed(position, hamiltonian.potential_slope, momentum, coefficient=-1.0)
    return [
        SubGenerator(f"drift T'({momentum}) p_{position}", drift),
        SubGenerator(f"kick -V'({position}) p_{momentum}", kick),
    ]


def apply_liouvillian(hamiltonian: HamiltonianSpec, state: StateVector,
                      workers: Optional[int] = None, check: bool = True) -> StateVector:
    """
    L psi = T'(k)(-i d psi/dx) - V'(x)(-i d psi/dk), computed spectrally.

    Raises:
        SelfAdjointnessError: If check is set and <psi|L psi> is not real
    """
    _require_phase_space(state)
    amplitudes = np.zeros(state.shape, dtype=np.complex128)
    for generator in liouvillian_generators(hamiltonian):
        if generator.operator.is_zero:
            continue
        amplitudes = amplitudes + apply_operator(generator.operator, state, workers).amplitudes
    result = state.with_amplitudes(amplitudes)
    if check:
        value = inner_product(state, result)
        scale = max(1.0, result.norm())
        if abs(value.imag) > 1e-10 * scale:
            raise SelfAdjointnessError(f"<psi|L psi> has imaginary part {value.imag:.3e}", value.imag)
    return result


def liouvillian_expr(hamiltonian: HamiltonianSpec, position: str = "x", momentum: str = "k") -> OperatorExpr:
    """The Liouvillian as a symbolic operator expression."""
    shift = "p_" + position
    boost = "p_" + momentum
    drift = polynomial_expr(hamiltonian.kinetic_slope, momentum) * OperatorExpr.generator(shift)
    kick = polynomial_expr(hamiltonian.potential_slope, position) * OperatorExpr.generator(boost)
    return drift - kick


def phase_space_moments(state: StateVector, hamiltonian: HamiltonianSpec) -> dict:
    """Expectations of the multiplication operators recorded per saved time."""
    weights = state.density() * state.cell_volume
    x = state.mesh("x")
    k = state.mesh("k")
    norm_sq = float(pairwise_sum(weights))
    mean_x = float(pairwise_sum(weights * x))
    mean_k = float(pairwise_sum(weights * k))
    return {
        "mean_x": mean_x,
        "mean_k": mean_k,
        "var_x": float(pairwise_sum(weights * x ** 2)) - mean_x ** 2,
        "var_k": float(pairwise_sum(weights * k ** 2)) - mean_k ** 2,
        "norm": float(np.sqrt(norm_sq)),
        "energy_c": float(pairwise_sum(weights * hamiltonian.energy(x, k))),
        "mean_dH_dk": float(pairwise_sum(weights * evaluate_polynomial(hamiltonian.kinetic_slope, k))),
        "mean_dH_dx": float(pairwise_sum(weights * evaluate_polynomial(hamiltonian.potential_slope, x))),
    }


def evolve_classical(initial: StateVector, hamiltonian: HamiltonianSpec, duration: float, dt: float,
                     save_every: int = 1, keep_snapshots: bool = False, workers: Optional[int] = None,
                     guard_limit: float = GUARD_LIMIT,
                     on_save: Optional[Callable[[float, StateVector], None]] = None) -> ClassicalRun:
    """
    Strang-split Koopman evolution i d psi/dt = L psi.

    Args:
        initial: Normalized classical wave function on (x, k)
        hamiltonian: Separable Hamiltonian
        duration: Total time T
        dt: Time step
        save_every: Steps between saved rows
        keep_snapshots: Keep immutable copies of the saved states
        workers: FFT worker threads
        guard_limit: Boundary-mass limit
        on_save: Called with (t, state) at every saved time

    Returns:
        ClassicalRun with trajectory and final state

    Raises:
        GuardViolation: If mass reaches the periodic boundary
    """
    _require_phase_space(initial)
    trajectory = Trajectory(CLASSICAL_COLUMNS + FLOW_COLUMNS, csv_columns=CLASSICAL_COLUMNS)
    snapshots: List[StateVector] = []

    def record(t: float, state: StateVector) -> None:
        trajectory.append(t=t, **phase_space_moments(state, hamiltonian))
        if keep_snapshots:
            snapshots.append(state)
        if on_save is not None:
            on_save(t, state)

    logger.info(f"Classical evolution: T={duration}, dt={dt}, grid {initial.shape}")
    result = evolve(initial, liouvillian_generators(hamiltonian), duration, dt, save_every,
                    record, workers=workers, guard_limit=guard_limit)
    drift = float(np.max(np.abs(trajectory.column("norm") - 1.0)))
    logger.debug(f"Classical run finished: {result.n_steps} steps, max norm drift {drift:.3e}")
    return ClassicalRun(trajectory, result.final, result.ordering, result.dt, snapshots)


def hamilton_check(trajectory: Trajectory, hamiltonian: Optional[HamiltonianSpec] = None,
                   snapshots: Optional[Sequence[StateVector]] = None) -> HamiltonReport:
    """
    Compare d<x>/dt with <dH/dk> and d<k>/dt with -<dH/dx>.

    The flow expectations come from the recorded columns, or are recomputed
    from a snapshot history when one is given together with the Hamiltonian.

    Raises:
        ParameterError: If fewer than 3 rows were saved
    """
    times = trajectory.times
    if times.size < 3:
        raise ParameterError(f"hamilton_check needs at least 3 saved points, got {times.size}")
    if snapshots is not None:
        if hamiltonian is None:
            raise ParameterError("a Hamiltonian is required to evaluate a snapshot history")
        if len(snapshots) != times.size:
            raise ParameterError("snapshot history does not match the trajectory rows")
        moments = [phase_space_moments(s, hamiltonian) for s in snapshots]
        slope_k = np.array([m["mean_dH_dk"] for m in moments])
        slope_x = np.array([m["mean_dH_dx"] for m in moments])
    else:
        slope_k = trajectory.column("mean_dH_dk")
        slope_x = trajectory.column("mean_dH_dx")
    rate_x = central_difference(times, trajectory.column("mean_x"))
    rate_k = central_difference(times, trajectory.column("mean_k"))
    return HamiltonReport(times[1:-1], rate_x - slope_k[1:-1], rate_k + slope_x[1:-1])
