"""
Phase-space partition measurements and the pre-measurement chain.

A classical measurement is the family of indicator projectors of a
partition of the classical grid. A quantum system is read out by entangling
it with a classical pointer (an exact spectral shift along x conditioned on
quantum subspaces), optionally coupling a small ancilla environment, and
registering the partition cell the pointer ends up in.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import scipy.stats

from src.logger import setup_logger
from src.kvn.bases import ModeBasis
from src.kvn.density import DensityMatrix, partial_trace_quantum, reduced_coefficients
from src.kvn.errors import ConfigurationError, ParameterError, ShapeError, ZeroProbabilityOutcome
from src.kvn.grids import GUARD_LIMIT, Grid1D, StateVector, check_boundary_guard, marginal, tensor_product
from src.kvn.operators import shear

# Setup logger
logger = setup_logger(__name__)

ZERO_PROBABILITY = 1e-12
COMPLETENESS_TOLERANCE = 1e-10
ORTHOGONALITY_TOLERANCE = 1e-8
MAX_ENVIRONMENT = 8
SIGN_OF_Q = "sign-of-q"
BASIS = "basis"
COMPLEMENT_LABEL = "rest"


# -- partitions ---------------------------------------------------------------

def _interval(bounds: Optional[Sequence[Optional[float]]]) -> tuple:
    if bounds is None:
        return -math.inf, math.inf
    if len(bounds) != 2:
        raise ConfigurationError(f"interval needs [lo, hi], got {bounds}")
    lo = -math.inf if bounds[0] is None else float(bounds[0])
    hi = math.inf if bounds[1] is None else float(bounds[1])
    if not lo < hi:
        raise ConfigurationError(f"empty interval [{lo}, {hi})")
    return lo, hi


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Outcome labels with one boolean cell mask each over a product of classical grids.

    Masks are disjoint and cover the grid; ``masks[i]`` has the shape of the grids.
    """
    grids: tuple
    labels: tuple
    masks: tuple

    def __post_init__(self):
        object.__setattr__(self, "grids", tuple(self.grids))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "masks", tuple(np.asarray(m, dtype=bool) for m in self.masks))
        if len(self.labels) != len(self.masks) or not self.labels:
            raise ConfigurationError("a partition needs one mask per outcome label")
        if len(set(self.labels)) != len(self.labels):
            raise ConfigurationError(f"duplicate outcome labels {self.labels}")
        shape = tuple(g.n for g in self.grids)
        counts = np.zeros(shape, dtype=int)
        for label, mask in zip(self.labels, self.masks):
            if mask.shape != shape:
                raise ConfigurationError(f"mask of '{label}' has shape {mask.shape}, expected {shape}")
            counts += mask
        if np.any(counts > 1):
            raise ConfigurationError("partition cells overlap")
        if np.any(counts == 0):
            raise ConfigurationError(f"partition leaves {int(np.sum(counts == 0))} grid cells uncovered")

    @property
    def axes(self) -> tuple:
        return tuple(g.label for g in self.grids)

    def mask(self, label: str) -> np.ndarray:
        try:
            return self.masks[self.labels.index(label)]
        except ValueError:
            raise ParameterError(f"unknown outcome '{label}', expected one of {list(self.labels)}")

    @classmethod
    def from_rectangles(cls, grids: Sequence[Grid1D], cells: Sequence[Mapping]) -> "Partition":
        """
        Build a partition from labelled half-open rectangles [lo, hi).

        A null bound is unbounded; a label may appear on several rectangles,
        which are then joined.

        Raises:
            ConfigurationError: If rectangles overlap or miss part of the grid
        """
        grids = tuple(grids)
        axes = [g.label for g in grids]
        meshes = np.meshgrid(*[g.points for g in grids], indexing="ij")
        labels: List[str] = []
        masks: Dict[str, np.ndarray] = {}
        for cell in cells:
            label = str(cell["label"])
            unknown = set(cell) - {"label"} - set(axes)
            if unknown:
                raise ConfigurationError(f"cell '{label}' names axes {sorted(unknown)} not in {axes}")
            selected = np.ones(meshes[0].shape, dtype=bool)
            for axis, mesh in zip(axes, meshes):
                lo, hi = _interval(cell.get(axis))
                selected &= (mesh >= lo) & (mesh < hi)
            if label in masks:
                if np.any(masks[label] & selected):
                    raise ConfigurationError(f"rectangles of '{label}' overlap")
                masks[label] = masks[label] | selected
            else:
                labels.append(label)
                masks[label] = selected
        return cls(grids, labels, [masks[label] for label in labels])

    @classmethod
    def half_planes(cls, grids: Sequence[Grid1D], axis: str = "x", split: float = 0.0,
                    labels: Sequence[str] = ("L", "R")) -> "Partition":
        cells = [{"label": labels[0], axis: [None, split]}, {"label": labels[1], axis: [split, None]}]
        return cls.from_rectangles(grids, cells)

    @classmethod
    def from_config(cls, grids: Sequence[Grid1D], settings: Mapping) -> "Partition":
        partition = cls.from_rectangles(grids, settings["cells"])
        if settings.get("lump"):
            partition = partition.coarsen(settings["lump"])
        return partition

    def coarsen(self, groups: Mapping[str, Sequence[str]]) -> "Partition":
        """
        Lump several outcomes into one; unlisted outcomes are kept.

        Raises:
            ConfigurationError: If a label is unknown or lumped twice
        """
        used = set()
        for name, members in groups.items():
            for member in members:
                if member not in self.labels:
                    raise ConfigurationError(f"cannot lump unknown outcome '{member}'")
                if member in used:
                    raise ConfigurationError(f"outcome '{member}' is lumped twice")
                used.add(member)
        labels, masks = [], []
        for label, mask in zip(self.labels, self.masks):
            if label not in used:
                labels.append(label)
                masks.append(mask)
        for name, members in groups.items():
            labels.append(name)
            masks.append(np.logical_or.reduce([self.mask(m) for m in members]))
        return Partition(self.grids, labels, masks)

    def product(self, other: "Partition") -> "Partition":
        """Joint partition of two systems, outcomes labelled 'a|b'."""
        if set(self.axes) & set(other.axes):
            raise ConfigurationError("product partitions need disjoint axes")
        labels = [f"{a}|{b}" for a in self.labels for b in other.labels]
        masks = [np.multiply.outer(ma, mb) for ma in self.masks for mb in other.masks]
        return Partition(self.grids + other.grids, labels, masks)

    def matches(self, state: StateVector) -> bool:
        return all(label in state.labels and state.grid(label) == grid
                   for label, grid in zip(self.axes, self.grids))


def _marginal_for(state: StateVector, partition: Partition):
    if not partition.matches(state):
        raise ShapeError(f"partition over {partition.axes} does not fit state axes {state.labels}")
    return marginal(state, partition.axes)


def outcome_probabilities(state: StateVector, partition: Partition) -> Dict[str, float]:
    """
    p_mu = classical marginal mass inside the cells of mu.

    Raises:
        ShapeError: If the partition grids are not axes of the state
    """
    density = _marginal_for(state, partition)
    probabilities = {label: density.mass(mask) for label, mask in zip(partition.labels, partition.masks)}
    total = sum(probabilities.values())
    if abs(total - state.norm() ** 2) > COMPLETENESS_TOLERANCE:
        logger.warning(f"Outcome probabilities sum to {total:.12f}")
    return probabilities


# -- pointer schemes ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PointerScheme:
    """
    Quantum subspace projectors with one pointer shift along x per outcome.

    ``sign-of-q`` uses the indicators of q < 0 and q >= 0 (labels L, R);
    ``basis`` uses the first len(shifts) modes of a truncated basis, the
    complement being left unshifted.
    """
    kind: str
    shifts: tuple
    labels: tuple = ()
    basis: Optional[ModeBasis] = None

    def __post_init__(self):
        object.__setattr__(self, "shifts", tuple(float(s) for s in self.shifts))
        if self.kind == SIGN_OF_Q:
            if len(self.shifts) != 2:
                raise ConfigurationError("the sign-of-q pointer needs exactly two shifts")
            labels = self.labels or ("L", "R")
        elif self.kind == BASIS:
            if self.basis is None:
                raise ConfigurationError("the basis pointer needs a mode basis")
            if len(self.shifts) > self.basis.size:
                raise ConfigurationError(f"{len(self.shifts)} shifts for a basis of size {self.basis.size}")
            labels = self.labels or tuple(f"e{i}" for i in range(len(self.shifts)))
        else:
            raise ConfigurationError(f"unknown pointer kind '{self.kind}'")
        if len(labels) != len(self.shifts):
            raise ConfigurationError("one label per pointer shift is required")
        object.__setattr__(self, "labels", tuple(labels))

    @classmethod
    def sign_of_q(cls, shift_left: float, shift_right: float) -> "PointerScheme":
        return cls(SIGN_OF_Q, (shift_left, shift_right))

    @classmethod
    def from_config(cls, settings: Mapping, basis: Optional[ModeBasis] = None) -> "PointerScheme":
        return cls(settings.get("kind", SIGN_OF_Q), tuple(settings["shifts"]), basis=basis)

    def components(self, state: StateVector) -> List[tuple]:
        """
        (label, shift, P_mu state) for every branch, plus the unshifted
        complement of a basis scheme.
        """
        if state.labels[0] != "q":
            raise ShapeError(f"pointer schemes act on a state whose first axis is q, got {state.labels}")
        amplitudes = state.amplitudes
        if self.kind == SIGN_OF_Q:
            q = state.grids[0].points.reshape((-1,) + (1,) * (amplitudes.ndim - 1))
            left = np.where(q < 0.0, amplitudes, 0.0)
            return [(self.labels[0], self.shifts[0], state.with_amplitudes(left)),
                    (self.labels[1], self.shifts[1], state.with_amplitudes(amplitudes - left))]
        count = len(self.shifts)
        coefficients = reduced_coefficients(state, self.basis, count)
        rest_shape = amplitudes.shape[1:]
        parts = []
        remainder = np.array(amplitudes)
        for i in range(count):
            piece = np.multiply.outer(self.basis.vectors[i], coefficients[i].reshape(rest_shape))
            remainder = remainder - piece
            parts.append((self.labels[i], self.shifts[i], state.with_amplitudes(piece)))
        parts.append((COMPLEMENT_LABEL, 0.0, state.with_amplitudes(remainder)))
        return parts

    def projector_matrices(self, basis: ModeBasis, dimension: int) -> Dict[str, np.ndarray]:
        """Quantum projectors restricted to the first D basis modes, <e_i|P_mu|e_j>."""
        vectors = basis.vectors[:dimension]
        result = {}
        if self.kind == SIGN_OF_Q:
            left = basis.grid.points < 0.0
            result[self.labels[0]] = np.conj(vectors[:, left]) @ vectors[:, left].T * basis.grid.spacing
            result[self.labels[1]] = np.conj(vectors[:, ~left]) @ vectors[:, ~left].T * basis.grid.spacing
            return result
        overlaps = np.conj(vectors) @ self.basis.vectors[:len(self.shifts)].T * basis.grid.spacing
        for i, label in enumerate(self.labels):
            result[label] = np.outer(overlaps[:, i], np.conj(overlaps[:, i]))
        return result


def pointer_overlaps(psi_c: StateVector, scheme: PointerScheme, workers: Optional[int] = None) -> float:
    """Max |<psi_c shifted by d_mu | psi_c shifted by d_nu>| over distinct shifts."""
    shifted = [shear(psi_c, "x", d, workers) for d in scheme.shifts]
    largest = 0.0
    for i in range(len(shifted)):
        for j in range(i + 1, len(shifted)):
            overlap = np.vdot(shifted[i].amplitudes, shifted[j].amplitudes) * psi_c.cell_volume
            largest = max(largest, abs(overlap))
    return largest


@dataclass
class PremeasureResult:
    """Entangled state with its branch weights ||P_mu psi_q||."""
    state: StateVector
    amplitudes: Dict[str, float]
    pointer_overlap: float

    @property
    def orthogonal(self) -> bool:
        return self.pointer_overlap < ORTHOGONALITY_TOLERANCE


def premeasure_state(state: StateVector, scheme: PointerScheme, workers: Optional[int] = None,
                     guard: bool = True, guard_limit: float = GUARD_LIMIT) -> StateVector:
    """
    Apply exp(-i sum_mu P_mu (x) d_mu p_x) exactly to a state on (q, x, ...).

    Raises:
        GuardViolation: If a shifted pointer reaches the boundary
    """
    total = np.zeros(state.shape, dtype=np.complex128)
    for _, shift, component in scheme.components(state):
        total = total + (shear(component, "x", shift, workers).amplitudes if shift else component.amplitudes)
    result = state.with_amplitudes(total)
    if guard:
        check_boundary_guard(result, None, guard_limit)
    return result


def premeasure(psi_q: StateVector, psi_c: StateVector, scheme: PointerScheme,
               workers: Optional[int] = None, guard_limit: float = GUARD_LIMIT) -> PremeasureResult:
    """
    Entangle a quantum state with a classical pointer.

    Args:
        psi_q: Wave function on (q,)
        psi_c: Pointer wave function on (x, k)
        scheme: Pointer scheme

    Returns:
        PremeasureResult with |Psi1> = sum_mu P_mu psi_q (x) psi_c(x - d_mu, k)

    Raises:
        GuardViolation: If a shifted pointer reaches the boundary
    """
    if psi_q.labels != ("q",) or psi_c.labels[0] != "x":
        raise ShapeError(f"premeasure needs psi_q on (q,) and psi_c on (x, ...), got {psi_q.labels}, {psi_c.labels}")
    joint = tensor_product(psi_q, psi_c)
    branch_amplitudes = {label: component.norm() for label, _, component in scheme.components(psi_q)}
    overlap = pointer_overlaps(psi_c, scheme, workers)
    if overlap >= ORTHOGONALITY_TOLERANCE:
        logger.debug(f"Pointer branches overlap: max |<c_mu|c_nu>| = {overlap:.3e}")
    state = premeasure_state(joint, scheme, workers, guard_limit=guard_limit)
    return PremeasureResult(state, branch_amplitudes, overlap)


# -- environment --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AncillaEnvironment:
    """
    Finite environment coupled after pre-measurement.

    The coupling is U = sum_{i, mu} |e_i><e_i| (x) Pi_mu (x) W[i][mu] + (1 - sum_i |e_i><e_i|) (x) 1,
    controlled on the truncated quantum modes and the coarse pointer cell.
    """
    dimension: int
    initial: np.ndarray
    unitaries: tuple

    def __post_init__(self):
        if not 1 <= self.dimension <= MAX_ENVIRONMENT:
            raise ConfigurationError(f"environment dimension must be in 1..{MAX_ENVIRONMENT}, got {self.dimension}")
        initial = np.asarray(self.initial, dtype=np.complex128)
        if initial.shape != (self.dimension,) or abs(np.linalg.norm(initial) - 1.0) > 1e-10:
            raise ConfigurationError("environment initial state must be a unit vector of its dimension")
        identity = np.eye(self.dimension)
        for row in self.unitaries:
            for unitary in row:
                unitary = np.asarray(unitary)
                if unitary.shape != (self.dimension, self.dimension) or \
                        np.max(np.abs(unitary.conj().T @ unitary - identity)) > 1e-10:
                    raise ConfigurationError("environment coupling is not unitary within 1e-10")
        object.__setattr__(self, "initial", initial)

    @classmethod
    def random(cls, dimension: int, modes: int, outcomes: int, seed: int = 0,
               initial: Optional[Sequence[float]] = None) -> "AncillaEnvironment":
        """Haar-random W[i][mu] for every mode and outcome, reproducible from the seed."""
        if initial is None:
            initial = np.zeros(dimension)
            initial[0] = 1.0
        initial = np.asarray(initial, dtype=np.complex128)
        initial = initial / np.linalg.norm(initial)
        if dimension == 1:
            unitaries = tuple(tuple(np.eye(1) for _ in range(outcomes)) for _ in range(modes))
        else:
            rng = np.random.default_rng(seed)
            sampler = scipy.stats.unitary_group(dimension, seed=rng)
            unitaries = tuple(tuple(sampler.rvs() for _ in range(outcomes)) for _ in range(modes))
        return cls(dimension, initial, unitaries)

    @property
    def modes(self) -> int:
        return len(self.unitaries)

    def couple(self, state: StateVector, basis: ModeBasis, partition: Partition) -> List[StateVector]:
        """
        Apply the coupling to state (x) initial and return the environment branches.

        Branch e holds <e|Psi> on the system grid; the branches together have the
        norm of the input.
        """
        if partition.axes != state.labels[1:]:
            raise ShapeError(f"environment coupling needs a partition over {state.labels[1:]}")
        if len(self.unitaries[0]) != len(partition.labels):
            raise ConfigurationError("environment couplings do not match the partition outcomes")
        coefficients = reduced_coefficients(state, basis, self.modes)
        rest_shape = state.shape[1:]
        span = np.zeros(state.shape, dtype=np.complex128)
        for i in range(self.modes):
            span = span + np.multiply.outer(basis.vectors[i], coefficients[i].reshape(rest_shape))
        remainder = state.amplitudes - span
        branches = []
        for e in range(self.dimension):
            amplitudes = self.initial[e] * remainder
            for i in range(self.modes):
                weights = np.zeros(rest_shape, dtype=np.complex128)
                for mu, mask in enumerate(partition.masks):
                    weights = weights + mask * (self.unitaries[i][mu] @ self.initial)[e]
                amplitudes = amplitudes + np.multiply.outer(basis.vectors[i],
                                                            weights * coefficients[i].reshape(rest_shape))
            branches.append(state.with_amplitudes(amplitudes))
        return branches

    @classmethod
    def from_config(cls, settings: Optional[Mapping], modes: int, outcomes: int) -> Optional["AncillaEnvironment"]:
        if not settings:
            return None
        return cls.random(int(settings.get("dimension", 2)), modes, outcomes,
                          int(settings.get("seed", 0)), settings.get("initial"))


# -- conditioning -------------------------------------------------------------

@dataclass
class ConditionalOutcome:
    """Probability, renormalized conditional state and its reduced quantum density matrix."""
    label: str
    probability: float
    state: StateVector
    density: DensityMatrix


def _project(state: StateVector, partition: Partition, label: str) -> StateVector:
    if not partition.matches(state):
        raise ShapeError(f"partition over {partition.axes} does not fit state axes {state.labels}")
    mask = partition.mask(label)
    indices = [state.axis(axis) for axis in partition.axes]
    order = np.argsort(indices)
    expanded = np.transpose(mask, order)
    shape = [1] * state.amplitudes.ndim
    for index in indices:
        shape[index] = state.grids[index].n
    return state.with_amplitudes(np.where(expanded.reshape(shape), state.amplitudes, 0.0))


def condition(state: StateVector, label: str, partition: Partition, basis: ModeBasis,
              dimension: int) -> ConditionalOutcome:
    """
    Register outcome ``label``: project with 1_q (x) Pi_mu and renormalize.

    Raises:
        ZeroProbabilityOutcome: If p_mu <= 1e-12
        ParameterError: If D exceeds the basis size
    """
    projected = _project(state, partition, label)
    probability = projected.norm() ** 2
    if probability <= ZERO_PROBABILITY:
        raise ZeroProbabilityOutcome(label, probability)
    conditional = projected.with_amplitudes(projected.amplitudes / math.sqrt(probability))
    return ConditionalOutcome(label, probability, conditional,
                              partial_trace_quantum(conditional, basis, dimension))


@dataclass
class ChainOutput:
    """Environment branches of a chain run (a single branch without environment)."""
    branches: List[StateVector]
    partition: Partition
    basis: ModeBasis
    dimension: int

    def probabilities(self) -> Dict[str, float]:
        totals = {label: 0.0 for label in self.partition.labels}
        for branch in self.branches:
            for label, value in outcome_probabilities(branch, self.partition).items():
                totals[label] += value
        return totals

    def conditional_map(self, label: str) -> np.ndarray:
        """Unnormalized reduced quantum state after outcome ``label`` (trace p_mu)."""
        result = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        for branch in self.branches:
            projected = _project(branch, self.partition, label)
            coefficients = reduced_coefficients(projected, self.basis, self.dimension)
            rest_volume = projected.cell_volume / self.basis.grid.spacing
            result = result + coefficients @ coefficients.conj().T * rest_volume
        return 0.5 * (result + result.conj().T)


@dataclass
class MeasurementChain:
    """
    System, pointer, optional environment and partition readout.

    Inputs are quantum states given by their coefficients in the first D
    modes of ``basis``.
    """
    pointer: StateVector
    scheme: PointerScheme
    partition: Partition
    basis: ModeBasis
    dimension: int
    environment: Optional[AncillaEnvironment] = None
    workers: Optional[int] = None
    guard_limit: float = GUARD_LIMIT

    def __post_init__(self):
        if self.dimension > self.basis.size:
            raise ParameterError(f"D={self.dimension} exceeds basis size {self.basis.size}")
        if self.partition.axes != self.pointer.labels:
            raise ShapeError(f"partition over {self.partition.axes} does not fit pointer axes {self.pointer.labels}")

    @property
    def labels(self) -> tuple:
        return self.partition.labels

    def input_state(self, coefficients: Sequence[complex]) -> StateVector:
        vector = np.asarray(coefficients, dtype=np.complex128)
        if vector.size != self.dimension:
            raise ParameterError(f"expected {self.dimension} coefficients, got {vector.size}")
        return self.basis.synthesize(vector / np.linalg.norm(vector))

    def run(self, coefficients: Sequence[complex]) -> ChainOutput:
        psi_q = self.input_state(coefficients)
        entangled = premeasure(psi_q, self.pointer, self.scheme, self.workers, self.guard_limit).state
        if self.environment is None:
            branches = [entangled]
        else:
            branches = self.environment.couple(entangled, self.basis, self.partition)
        return ChainOutput(branches, self.partition, self.basis, self.dimension)

    def probabilities(self, coefficients: Sequence[complex]) -> Dict[str, float]:
        return self.run(coefficients).probabilities()

    def conditional_map(self, coefficients: Sequence[complex], label: str) -> np.ndarray:
        return self.run(coefficients).conditional_map(label)


# -- fictitious entanglement ----------------------------------------------------

@dataclass
class PhaseInvarianceReport:
    """Largest change of any outcome probability over the phase-field trials."""
    passed: bool
    max_deviation: float
    trials: int
    tolerance: float

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_deviation": self.max_deviation,
                "trials": self.trials, "tolerance": self.tolerance}


def smooth_phase_field(grids: Sequence[Grid1D], rng: np.random.Generator, modes: int = 3,
                       max_wavenumber: int = 3) -> np.ndarray:
    """
    Random smooth real field on the grids: a few periodic cosines whose
    wave vectors mix all axes, so phases correlate distinct systems.
    """
    meshes = np.meshgrid(*[(g.points - g.origin) / g.length for g in grids], indexing="ij")
    field_values = np.zeros(meshes[0].shape)
    for _ in range(modes):
        wave = rng.integers(-max_wavenumber, max_wavenumber + 1, size=len(grids))
        argument = 2.0 * math.pi * sum(w * m for w, m in zip(wave, meshes))
        field_values = field_values + rng.uniform(0.0, 2.0 * math.pi) * np.cos(argument + rng.uniform(0.0, 2.0 * math.pi))
    return field_values


def with_phase(state: StateVector, phase: np.ndarray) -> StateVector:
    return state.with_amplitudes(state.amplitudes * np.exp(1j * phase))


def statistics_difference(first: StateVector, second: StateVector, partition: Partition) -> float:
    """Max |p_mu(first) - p_mu(second)| over the outcomes."""
    a = outcome_probabilities(first, partition)
    b = outcome_probabilities(second, partition)
    return max(abs(a[label] - b[label]) for label in partition.labels)


def phase_invariance_check(state: StateVector, partition: Partition, trials: int = 100, seed: int = 0,
                           tolerance: float = 1e-12) -> PhaseInvarianceReport:
    """
    Multiply the amplitudes by random smooth phase fields and compare outcome statistics.

    The first trial uses the zero field.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    reference = outcome_probabilities(state, partition)
    largest = 0.0
    for trial in range(trials):
        phase = np.zeros(state.shape) if trial == 0 else smooth_phase_field(state.grids, rng)
        shifted = outcome_probabilities(with_phase(state, phase), partition)
        largest = max(largest, max(abs(shifted[label] - reference[label]) for label in partition.labels))
    passed = largest <= tolerance
    logger.info(f"Phase invariance: {trials} trials, max deviation {largest:.3e} ({'pass' if passed else 'FAIL'})")
    return PhaseInvarianceReport(passed, largest, trials, tolerance)


def random_density_state(grids: Sequence[Grid1D], rng: np.random.Generator) -> StateVector:
    """Normalized state with a random nonnegative smooth modulus and zero phase."""
    values = np.exp(smooth_phase_field(grids, rng) / (2.0 * math.pi))
    values = values * np.exp(-sum(((m - (g.origin + g.length / 2)) / (g.length / 6)) ** 2
                                  for g, m in zip(grids, np.meshgrid(*[g.points for g in grids], indexing="ij"))))
    state = StateVector(tuple(grids), values)
    return state.normalized()
