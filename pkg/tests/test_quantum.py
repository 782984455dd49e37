import numpy as np
import pytest

from src.kvn.classical import HamiltonianSpec
from src.kvn.errors import ParameterError, ShapeError
from src.kvn.grids import Grid1D, gaussian_state
from src.kvn.quantum import (
    FORCE_COLUMNS,
    QUANTUM_COLUMNS,
    ehrenfest_check,
    evolve_quantum,
    quantum_moments,
    sharpness_report,
)
from src.kvn.reference import analytic_uncoupled


def test_moments_of_a_moving_packet(quantum_grid):
    state = gaussian_state((quantum_grid,), (1.0,), (1.0,), momenta=(-0.75,))
    moments = quantum_moments(state, HamiltonianSpec.harmonic())
    assert abs(moments["mean_q"] - 1.0) < 1e-12
    assert abs(moments["mean_p"] + 0.75) < 1e-10
    assert abs(moments["var_q"] - 0.5) < 1e-10
    assert abs(moments["var_p"] - 0.5) < 1e-10
    expected_energy = 0.5 * (0.5 + 0.75 ** 2) + 0.5 * (0.5 + 1.0)
    assert abs(moments["energy_q"] - expected_energy) < 1e-10


def test_moments_need_a_quantum_axis(phase_grids):
    with pytest.raises(ShapeError):
        quantum_moments(gaussian_state(phase_grids, (0.0, 0.0), (1.0, 1.0)), HamiltonianSpec.harmonic())


def test_coherent_state_follows_the_oscillator(quantum_grid):
    initial = gaussian_state((quantum_grid,), (2.0,), (1.0,))
    run = evolve_quantum(initial, HamiltonianSpec.harmonic(), 1.0, 0.01, save_every=10)
    expected = analytic_uncoupled(2.0, 0.0, run.trajectory.times)
    assert np.max(np.abs(run.trajectory.column("mean_q") - expected[:, 0])) < 1e-4
    assert np.max(np.abs(run.trajectory.column("mean_p") - expected[:, 1])) < 1e-4
    assert np.max(np.abs(run.trajectory.column("var_q") - 0.5)) < 1e-3
    assert np.max(np.abs(run.trajectory.column("norm") - 1.0)) < 1e-12
    assert run.trajectory.columns == QUANTUM_COLUMNS + FORCE_COLUMNS
    assert run.ordering[0] == {"generator": "V(q)", "fraction": 0.5}


def test_free_packet_variance_law():
    grid = Grid1D.symmetric("q", 256, 32.0)
    initial = gaussian_state((grid,), (0.0,), (1.0,))
    run = evolve_quantum(initial, HamiltonianSpec.free_particle(), 2.0, 0.05, save_every=8)
    times = run.trajectory.times
    np.testing.assert_allclose(run.trajectory.column("var_q"), 0.5 + 0.5 * times ** 2, atol=1e-8)
    np.testing.assert_allclose(run.trajectory.column("var_p"), 0.5, atol=1e-10)


def test_ehrenfest_residuals_are_small(quantum_grid):
    initial = gaussian_state((quantum_grid,), (1.0,), (1.0,), momenta=(0.5,))
    run = evolve_quantum(initial, HamiltonianSpec.quartic(), 0.5, 0.005)
    report = ehrenfest_check(run.trajectory)
    assert report.max_residual < 1e-3


def test_ehrenfest_needs_three_rows(quantum_grid):
    initial = gaussian_state((quantum_grid,), (0.0,), (1.0,))
    run = evolve_quantum(initial, HamiltonianSpec.harmonic(), 0.1, 0.1)
    with pytest.raises(ParameterError):
        ehrenfest_check(run.trajectory)


def test_sharpness_of_a_coherent_state(quantum_grid):
    initial = gaussian_state((quantum_grid,), (2.0,), (1.0,), momenta=(1.0,))
    run = evolve_quantum(initial, HamiltonianSpec.harmonic(), 0.5, 0.05, save_every=5)
    report = sharpness_report(run.trajectory)
    assert abs(report.product[0] - 0.5) < 1e-8
    assert abs(report.ratio_q[0] - np.sqrt(0.5) / 2.0) < 1e-8
    assert not np.any(report.classical_regime)
