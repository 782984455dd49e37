"""
Uniform periodic grids and immutable state vectors on them.

Amplitudes are stored as an n-dimensional array whose axes follow the grid
order (q outermost, then x, then k where present), which is the row-major
flattening order of the joint Hilbert space.
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.fft

from src.logger import setup_logger
from src.kvn.errors import GuardViolation, ParameterError, ShapeError
from src.kvn.utils import is_power_of_two, pairwise_sum, pairwise_sum_axes

# Setup logger
logger = setup_logger(__name__)

AXIS_LABELS = ("q", "x", "k", "x2", "k2")
CLASSICAL_AXES = ("x", "k", "x2", "k2")
GUARD_CELLS = 3
GUARD_LIMIT = 1e-10


@dataclass(frozen=True)
class Grid1D:
    """
    Periodic uniform grid along one axis.

    Attributes:
        n: Point count (power of two, at least 2)
        origin: Leftmost coordinate
        length: Period L
        label: Axis name
    """
    n: int
    origin: float
    length: float
    label: str

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2 or not is_power_of_two(int(self.n)):
            raise ParameterError(f"grid '{self.label}': n must be a power of two >= 2, got {self.n}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ParameterError(f"grid '{self.label}': length must be positive, got {self.length}")
        if not math.isfinite(self.origin):
            raise ParameterError(f"grid '{self.label}': origin must be finite")
        if self.label not in AXIS_LABELS:
            raise ParameterError(f"unknown axis label '{self.label}', expected one of {AXIS_LABELS}")

    @classmethod
    def symmetric(cls, label: str, n: int, half_width: float) -> "Grid1D":
        """Grid covering [-half_width, half_width)."""
        return cls(n=n, origin=-half_width, length=2.0 * half_width, label=label)

    @classmethod
    def from_config(cls, label: str, settings: Dict) -> "Grid1D":
        return cls(n=int(settings["n"]), origin=float(settings["origin"]),
                   length=float(settings["length"]), label=label)

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def points(self) -> np.ndarray:
        return self.origin + np.arange(self.n) * self.spacing

    @property
    def frequencies(self) -> np.ndarray:
        """Conjugate frequencies 2*pi*m/L in the standard signed FFT ladder."""
        return 2.0 * np.pi * scipy.fft.fftfreq(self.n, d=self.spacing)

    def to_dict(self) -> Dict:
        return {"n": int(self.n), "origin": self.origin, "length": self.length, "label": self.label}


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Complex amplitudes on a product of grids.

    The amplitude array is copied on construction and made read-only, so a
    StateVector can be shared between threads. Evolution drivers work on
    private buffers and wrap snapshots with ``with_amplitudes``.
    """
    grids: Tuple[Grid1D, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        grids = tuple(self.grids)
        labels = [g.label for g in grids]
        if not grids:
            raise ShapeError("a state needs at least one grid")
        if len(set(labels)) != len(labels):
            raise ShapeError(f"duplicate axis labels {labels}")
        shape = tuple(int(g.n) for g in grids)
        amplitudes = np.array(self.amplitudes, dtype=np.complex128)
        if amplitudes.shape != shape:
            if amplitudes.size != int(np.prod(shape)):
                raise ShapeError(f"amplitude shape {amplitudes.shape} does not fit grids {shape}")
            amplitudes = amplitudes.reshape(shape)
        if not np.all(np.isfinite(amplitudes)):
            raise ParameterError("amplitudes contain NaN or Inf")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(g.label for g in self.grids)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.amplitudes.shape

    @property
    def cell_volume(self) -> float:
        return float(np.prod([g.spacing for g in self.grids]))

    @property
    def flat(self) -> np.ndarray:
        """Row-major flattened amplitudes."""
        return self.amplitudes.ravel()

    def axis(self, label: str) -> int:
        """Index of the axis with the given label."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise ShapeError(f"axis '{label}' not present in state with axes {self.labels}")

    def grid(self, label: str) -> Grid1D:
        return self.grids[self.axis(label)]

    def mesh(self, label: str) -> np.ndarray:
        """Coordinates of one axis, shaped to broadcast against the amplitudes."""
        shape = [1] * len(self.grids)
        index = self.axis(label)
        shape[index] = self.grids[index].n
        return self.grids[index].points.reshape(shape)

    def density(self) -> np.ndarray:
        """Pointwise |amplitude|^2 (without the cell volume)."""
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return math.sqrt(float(pairwise_sum(self.density())) * self.cell_volume)

    def normalized(self) -> "StateVector":
        norm = self.norm()
        if norm == 0.0:
            raise ParameterError("cannot normalize the zero state")
        return self.with_amplitudes(self.amplitudes / norm)

    def with_amplitudes(self, amplitudes: np.ndarray) -> "StateVector":
        """New state on the same grids."""
        return StateVector(self.grids, amplitudes)

    def same_grids(self, other: "StateVector") -> bool:
        return self.grids == other.grids


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative density on a product of grids (values exclude the cell volume)."""
    grids: Tuple[Grid1D, ...]
    values: np.ndarray

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(g.label for g in self.grids)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([g.spacing for g in self.grids]))

    def total(self) -> float:
        return float(pairwise_sum(self.values)) * self.cell_volume

    def mass(self, mask: np.ndarray) -> float:
        """Integrated density over the cells selected by a boolean mask."""
        return float(pairwise_sum(np.where(mask, self.values, 0.0))) * self.cell_volume

    def mean(self, label: str) -> float:
        index = self.labels.index(label)
        shape = [1] * len(self.grids)
        shape[index] = self.grids[index].n
        coords = self.grids[index].points.reshape(shape)
        return float(pairwise_sum(self.values * coords)) * self.cell_volume


def check_same_grids(a: StateVector, b: StateVector) -> None:
    if not a.same_grids(b):
        raise ShapeError(f"grid mismatch: {a.labels} {a.shape} vs {b.labels} {b.shape}")


def inner_product(a: StateVector, b: StateVector) -> complex:
    """
    Discrete L2 inner product <a|b> = sum(conj(a) * b) * cell volume.

    Raises:
        ShapeError: If the grids differ
    """
    check_same_grids(a, b)
    return complex(pairwise_sum(np.conj(a.amplitudes) * b.amplitudes)) * a.cell_volume


def gaussian_amplitude(grid: Grid1D, center: float = 0.0, width: float = 1.0,
                       momentum: float = 0.0) -> np.ndarray:
    """
    Sampled Gaussian amplitude (pi w^2)^(-1/4) exp(-(y-c)^2 / 2w^2) exp(i k0 y).

    The density |.|^2 has variance w^2 / 2.
    """
    if width <= 0:
        raise ParameterError(f"width must be positive, got {width}")
    y = grid.points
    envelope = (math.pi * width ** 2) ** -0.25 * np.exp(-((y - center) ** 2) / (2.0 * width ** 2))
    return envelope * np.exp(1j * momentum * y)


def gaussian_state(grids: Sequence[Grid1D], centers: Sequence[float], widths: Sequence[float],
                   momenta: Optional[Sequence[float]] = None) -> StateVector:
    """Normalized product of Gaussian amplitudes, one factor per grid."""
    momenta = momenta if momenta is not None else [0.0] * len(grids)
    if not (len(grids) == len(centers) == len(widths) == len(momenta)):
        raise ParameterError("one center, width and momentum per grid is required")
    factors = [gaussian_amplitude(g, c, w, m) for g, c, w, m in zip(grids, centers, widths, momenta)]
    amplitudes = factors[0]
    for factor in factors[1:]:
        amplitudes = np.multiply.outer(amplitudes, factor)
    return StateVector(tuple(grids), amplitudes).normalized()


def state_from_function(grids: Sequence[Grid1D], function) -> StateVector:
    """Sample function(*meshes) on the grids (indexing 'ij')."""
    meshes = np.meshgrid(*[g.points for g in grids], indexing="ij")
    return StateVector(tuple(grids), function(*meshes))


def tensor_product(first: StateVector, second: StateVector) -> StateVector:
    """
    Tensor product of two states on disjoint axes.

    The result keeps the axes of ``first`` before those of ``second``; for the
    hybrid space pass the quantum state first.
    """
    overlap = set(first.labels) & set(second.labels)
    if overlap:
        raise ShapeError(f"tensor factors share axes {sorted(overlap)}")
    return StateVector(first.grids + second.grids, np.multiply.outer(first.amplitudes, second.amplitudes))


def marginal(state: StateVector, keep: Iterable[str]) -> Density:
    """
    Integrate |amplitude|^2 over every axis not listed in ``keep``.

    Raises:
        ShapeError: If a kept axis is missing
    """
    keep = tuple(keep)
    keep_indices = [state.axis(label) for label in keep]
    summed = tuple(i for i in range(len(state.grids)) if i not in keep_indices)
    weight = float(np.prod([state.grids[i].spacing for i in summed])) if summed else 1.0
    values = state.density()
    if summed:
        values = pairwise_sum_axes(values, summed) * weight
    # reorder the remaining axes to the requested order
    remaining = [i for i in range(len(state.grids)) if i in keep_indices]
    order = [remaining.index(i) for i in keep_indices]
    values = np.transpose(values, order)
    return Density(tuple(state.grids[i] for i in keep_indices), values)


def classical_marginal(state: StateVector) -> Density:
    """Density over the classical axes f = sum_q |Psi|^2 dq."""
    keep = [label for label in state.labels if label in CLASSICAL_AXES]
    if not keep:
        raise ShapeError(f"state with axes {state.labels} has no classical axes")
    return marginal(state, keep)


def boundary_mass(state: StateVector, label: str, cells: int = GUARD_CELLS) -> float:
    """Probability within ``cells`` grid cells of either edge of one axis."""
    index = state.axis(label)
    density = np.moveaxis(state.density(), index, 0)
    edge = np.concatenate([density[:cells], density[-cells:]], axis=0)
    return float(pairwise_sum(edge)) * state.cell_volume


def check_boundary_guard(state: StateVector, time: Optional[float] = None,
                         limit: float = GUARD_LIMIT) -> None:
    """
    Raise when mass reached the periodic boundary of any axis.

    Raises:
        GuardViolation: With the offending axis, mass and time
    """
    for label in state.labels:
        mass = boundary_mass(state, label)
        if mass > limit:
            logger.error(f"Boundary guard violated on axis '{label}' (mass {mass:.3e}, t={time})")
            raise GuardViolation(label, mass, time, limit)
