"""
Classical reference for two bilinearly coupled oscillators.

H = (q^2 + p^2)/2 + (x^2 + k^2)/2 + c q x gives the linear system

    q' = p,  p' = -q - c x,  x' = k,  k' = -x - c q
"""

from typing import List

import numpy as np

from src.logger import setup_logger
from src.kvn.errors import ParameterError
from src.kvn.trajectory import Trajectory
from src.kvn.utils import step_count

# Setup logger
logger = setup_logger(__name__)

REFERENCE_COLUMNS = ["t", "q", "p", "x", "k", "energy"]
SUBSTEPS = 10


def coupled_matrix(c: float) -> np.ndarray:
    """Generator A of d(q, p, x, k)/dt = A (q, p, x, k)."""
    return np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, -c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-c, 0.0, -1.0, 0.0],
    ])


def coupled_energy(state: np.ndarray, c: float) -> float:
    q, p, x, k = state
    return 0.5 * (q * q + p * p) + 0.5 * (x * x + k * k) + c * q * x


def rk4_step_matrix(matrix: np.ndarray, h: float) -> np.ndarray:
    """One classic Runge-Kutta step of a linear system, as a matrix."""
    a = h * matrix
    a2 = a @ a
    a3 = a2 @ a
    return np.eye(matrix.shape[0]) + a + a2 / 2.0 + a3 / 6.0 + a3 @ a / 24.0


def classical_reference(c: float, q0: float, p0: float, x0: float, k0: float, duration: float,
                        dt: float, save_every: int = 1) -> Trajectory:
    """
    Integrate the coupled oscillators with RK4 at dt/10.

    Saved times follow the same convention as the grid evolutions (t=0,
    every ``save_every`` steps of the effective dt, and the final step), so
    the result can be compared row by row with a hybrid trajectory.

    Args:
        c: Coupling constant (|c| < 1 for stable normal modes)
        q0, p0, x0, k0: Initial means
        duration: Total time T
        dt: Step of the matching grid run
        save_every: Steps between saved rows

    Returns:
        Trajectory with columns t, q, p, x, k, energy
    """
    if save_every < 1:
        raise ParameterError(f"save_every must be >= 1, got {save_every}")
    if abs(c) >= 1.0:
        logger.warning(f"|c| = {abs(c)} >= 1: the coupled oscillators have an unstable normal mode")
    n_steps, effective_dt = step_count(duration, dt)
    step = np.linalg.matrix_power(rk4_step_matrix(coupled_matrix(c), effective_dt / SUBSTEPS), SUBSTEPS)

    trajectory = Trajectory(REFERENCE_COLUMNS)
    state = np.array([q0, p0, x0, k0], dtype=float)

    def record(t: float) -> None:
        trajectory.append(t=t, q=state[0], p=state[1], x=state[2], k=state[3],
                          energy=coupled_energy(state, c))

    record(0.0)
    done = 0
    while done < n_steps:
        chunk = min(save_every, n_steps - done)
        for _ in range(chunk):
            state = step @ state
        done += chunk
        record(done * effective_dt)
    return trajectory


def normal_mode_frequencies(trajectory: Trajectory) -> List[float]:
    """
    Angular frequencies of the modes present in a reference trajectory.

    The one-step linear map between consecutive uniformly spaced rows is
    fitted by least squares; its eigenvalues are exp(+-i w dt).

    Raises:
        ParameterError: If fewer than 6 uniformly spaced rows are available
    """
    times = trajectory.times
    steps = np.diff(times)
    uniform = np.isclose(steps, steps[0], rtol=1e-9, atol=0.0) if steps.size else steps
    count = int(np.argmin(uniform)) if not np.all(uniform) else steps.size
    if count < 5:
        raise ParameterError("normal_mode_frequencies needs at least 6 uniformly spaced rows")
    states = np.column_stack([trajectory.column(name) for name in ("q", "p", "x", "k")])[:count + 1]
    solution, *_ = np.linalg.lstsq(states[:-1], states[1:], rcond=None)
    angles = np.abs(np.angle(np.linalg.eigvals(solution.T))) / steps[0]
    frequencies = sorted({round(float(w), 10) for w in angles if w > 1e-9})
    return frequencies


def analytic_uncoupled(q0: float, p0: float, times: np.ndarray) -> np.ndarray:
    """(q, p)(t) of a unit oscillator, rows per time."""
    return np.column_stack([q0 * np.cos(times) + p0 * np.sin(times),
                            p0 * np.cos(times) - q0 * np.sin(times)])
