"""
Utility functions shared across the laboratory.
"""

import math
from typing import Sequence

import numpy as np

from src.kvn.errors import ParameterError


def is_power_of_two(n: int) -> bool:
    """Return True when n is a positive power of two."""
    return n > 0 and (n & (n - 1)) == 0


def pairwise_sum(values: np.ndarray) -> complex:
    """
    Sum every entry of an array in a fixed order.

    numpy reduces a contiguous 1-D buffer with pairwise summation, so the
    flattened (row-major) view gives a deterministic, well-conditioned total.

    Args:
        values: Array of any shape

    Returns:
        Scalar total
    """
    return np.sum(np.ascontiguousarray(values).ravel())


def pairwise_sum_axes(values: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """
    Sum over some axes of an array in a fixed order.

    The summed axes are moved last and flattened into one contiguous run, so
    every output entry is reduced the same way as :func:`pairwise_sum`.

    Args:
        values: Array of any shape
        axes: Axes to sum over

    Returns:
        Array over the remaining axes, in their original order
    """
    summed = sorted({axis % values.ndim for axis in axes})
    kept = [axis for axis in range(values.ndim) if axis not in summed]
    moved = np.ascontiguousarray(np.transpose(values, kept + summed))
    return np.sum(moved.reshape(moved.shape[:len(kept)] + (-1,)), axis=-1)


def step_count(duration: float, dt: float) -> tuple:
    """
    Resolve the number of steps and the effective step for a run.

    Args:
        duration: Total time T (>= 0)
        dt: Requested step (> 0)

    Returns:
        (n_steps, effective_dt) with n_steps * effective_dt == duration

    Raises:
        ParameterError: If dt <= 0 or duration < 0
    """
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if duration < 0:
        raise ParameterError(f"T must be non-negative, got {duration}")
    if duration == 0:
        return 0, dt
    n_steps = max(1, math.ceil(duration / dt - 1e-9))
    return n_steps, duration / n_steps


def central_difference(times: Sequence[float], values: Sequence[float]) -> np.ndarray:
    """
    Second-order central difference on the interior of a uniformly saved series.

    Args:
        times: Strictly increasing sample times
        values: Sampled values

    Returns:
        Derivative estimates at times[1:-1]

    Raises:
        ParameterError: If fewer than 3 samples are given
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values)
    if t.size < 3:
        raise ParameterError(f"need at least 3 saved points for central differences, got {t.size}")
    return (v[2:] - v[:-2]) / (t[2:] - t[:-2])


def polynomial_derivative(coefficients: Sequence[float]) -> tuple:
    """Coefficients (ascending powers) of the derivative of a polynomial."""
    coeffs = tuple(float(c) for c in coefficients)
    if len(coeffs) <= 1:
        return (0.0,)
    return tuple(power * c for power, c in enumerate(coeffs) if power > 0)


def evaluate_polynomial(coefficients: Sequence[float], points: np.ndarray) -> np.ndarray:
    """Evaluate a polynomial given by ascending coefficients at the given points."""
    return np.polynomial.polynomial.polyval(points, np.asarray(coefficients, dtype=float))
