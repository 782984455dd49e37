"""
Symmetric (Strang) splitting over exactly exponentiable sub-generators.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.logger import setup_logger
from src.kvn.errors import ConfigurationError
from src.kvn.grids import GUARD_LIMIT, Grid1D, StateVector, check_boundary_guard
from src.kvn.operators import OperatorSpec, PhaseKernel
from src.kvn.utils import step_count

# Setup logger
logger = setup_logger(__name__)


@dataclass(frozen=True)
class SubGenerator:
    """Named self-adjoint piece of the total generator."""
    name: str
    operator: OperatorSpec


class StrangPropagator:
    """
    One step of exp(-i dt sum_j G_j) as the symmetric product

        G_0/2, G_1/2, ..., G_{m-1}, ..., G_1/2, G_0/2

    Adjacent kernels diagonal in the same representation commute and are
    fused into one transform pair. Across consecutive steps the trailing and
    leading half steps of G_0 are merged.
    """

    def __init__(self, grids: Sequence[Grid1D], generators: Sequence[SubGenerator], dt: float,
                 workers: Optional[int] = None):
        self.dt = dt
        self.generators = [g for g in generators if not g.operator.is_zero]
        for generator in self.generators:
            if not generator.operator.is_exponentiable:
                raise ConfigurationError(
                    f"sub-generator '{generator.name}' ({generator.operator.describe()}) "
                    f"is not exactly exponentiable")
        self.ordering: List[Dict] = []
        self._first_half = None
        self._first_full = None
        self._inner: List[PhaseKernel] = []
        if not self.generators:
            return

        count = len(self.generators)
        if count == 1:
            only = self.generators[0]
            self._inner = [PhaseKernel(only.operator, grids, dt, workers)]
            self.ordering = [{"generator": only.name, "fraction": 1.0}]
            return

        first = self.generators[0]
        self._first_half = PhaseKernel(first.operator, grids, 0.5 * dt, workers)
        self._first_full = PhaseKernel(first.operator, grids, dt, workers)
        middle = []
        for generator in self.generators[1:-1]:
            middle.append(PhaseKernel(generator.operator, grids, 0.5 * dt, workers))
        last = PhaseKernel(self.generators[-1].operator, grids, dt, workers)
        self._inner = self._fuse(middle + [last] + middle[::-1])

        names = [g.name for g in self.generators]
        self.ordering = (
            [{"generator": name, "fraction": 0.5} for name in names[:-1]]
            + [{"generator": names[-1], "fraction": 1.0}]
            + [{"generator": name, "fraction": 0.5} for name in reversed(names[:-1])]
        )

    @staticmethod
    def _fuse(kernels: List[PhaseKernel]) -> List[PhaseKernel]:
        fused: List[PhaseKernel] = []
        for kernel in kernels:
            if fused and fused[-1].axes == kernel.axes:
                fused[-1] = fused[-1].merged(kernel)
            else:
                fused.append(kernel)
        return fused

    def _inner_step(self, amplitudes: np.ndarray) -> np.ndarray:
        for kernel in self._inner:
            amplitudes = kernel(amplitudes)
        return amplitudes

    def advance(self, amplitudes: np.ndarray, steps: int) -> np.ndarray:
        """Apply ``steps`` full Strang steps to a raw amplitude buffer."""
        if steps <= 0 or not self.generators:
            return amplitudes
        if self._first_half is None:
            for _ in range(steps):
                amplitudes = self._inner_step(amplitudes)
            return amplitudes
        amplitudes = self._first_half(amplitudes)
        for step in range(steps):
            amplitudes = self._inner_step(amplitudes)
            amplitudes = self._first_full(amplitudes) if step < steps - 1 else self._first_half(amplitudes)
        return amplitudes


@dataclass
class EvolutionResult:
    """Outcome of a split-operator run."""
    final: StateVector
    times: List[float]
    ordering: List[Dict]
    dt: float
    n_steps: int


def evolve(initial: StateVector, generators: Sequence[SubGenerator], duration: float, dt: float,
           save_every: int, on_save: Callable[[float, StateVector], None],
           workers: Optional[int] = None, guard: bool = True,
           guard_limit: float = GUARD_LIMIT) -> EvolutionResult:
    """
    Drive a Strang-split evolution and report saved states.

    The step count is ceil(T/dt) and the effective step T/n_steps, so the
    run ends exactly at T. States are saved at t=0, every ``save_every``
    steps and at the final step; the boundary guard is checked at each
    saved state.

    Args:
        initial: Initial state
        generators: Ordered sub-generators
        duration: Total time T
        dt: Requested time step
        save_every: Steps between saved states
        on_save: Callback receiving (t, immutable state)
        workers: FFT worker threads
        guard: Whether to check the boundary-mass guard
        guard_limit: Maximum mass allowed within three cells of an edge

    Returns:
        EvolutionResult with the final state and sub-step ordering

    Raises:
        GuardViolation: If mass reaches a boundary
        ConfigurationError: If a sub-generator is not exactly exponentiable
    """
    if save_every < 1:
        raise ConfigurationError(f"save_every must be >= 1, got {save_every}")
    n_steps, effective_dt = step_count(duration, dt)
    propagator = StrangPropagator(initial.grids, generators, effective_dt, workers)
    logger.debug(f"Strang ordering: {[(o['generator'], o['fraction']) for o in propagator.ordering]}")
    logger.debug(f"Evolving {n_steps} steps of {effective_dt:.6g} on grid {initial.shape}")

    if guard:
        check_boundary_guard(initial, 0.0, guard_limit)
    on_save(0.0, initial)
    times = [0.0]
    amplitudes = np.array(initial.amplitudes)
    done = 0
    state = initial
    while done < n_steps:
        chunk = min(save_every, n_steps - done)
        amplitudes = propagator.advance(amplitudes, chunk)
        done += chunk
        t = done * effective_dt
        state = initial.with_amplitudes(amplitudes)
        if guard:
            check_boundary_guard(state, t, guard_limit)
        on_save(t, state)
        times.append(t)
    return EvolutionResult(state, times, propagator.ordering, effective_dt, n_steps)
