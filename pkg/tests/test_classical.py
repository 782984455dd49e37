import numpy as np
import pytest

from src.kvn.algebra.parser import parse
from src.kvn.classical import (
    CLASSICAL_COLUMNS,
    HamiltonianSpec,
    apply_liouvillian,
    evolve_classical,
    from_density,
    gaussian_density,
    hamilton_check,
    liouvillian_expr,
)
from src.kvn.errors import DomainError, ParameterError, ShapeError
from src.kvn.grids import Grid1D, gaussian_state, inner_product
from src.kvn.reference import analytic_uncoupled


def test_from_density_recovers_normalized_sqrt(phase_grids):
    density = gaussian_density(phase_grids, (0.5, -0.5), (0.5, 0.5))
    psi = from_density(density)
    assert abs(psi.norm() - 1.0) < 1e-12
    assert np.all(psi.amplitudes.imag == 0.0)
    np.testing.assert_allclose(psi.density(), density.values / density.total(), atol=1e-12)


def test_from_density_rejects_negative_and_empty(phase_grids):
    values = np.zeros((64, 64))
    with pytest.raises(DomainError):
        from_density(values, phase_grids)
    values[10, 10] = -1e-6
    with pytest.raises(DomainError):
        from_density(values, phase_grids)
    with pytest.raises(ParameterError):
        from_density(np.ones((64, 64)))


def test_liouvillian_expression_for_oscillator():
    assert liouvillian_expr(HamiltonianSpec.harmonic()) == parse("k*px - x*pk")
    assert liouvillian_expr(HamiltonianSpec.free_particle()) == parse("k*px")


def test_liouvillian_is_self_adjoint_on_a_packet(phase_grids):
    state = gaussian_state(phase_grids, (1.0, 0.5), (1.0, 1.0))
    image = apply_liouvillian(HamiltonianSpec.harmonic(), state)
    assert abs(inner_product(state, image).imag) < 1e-10


def test_liouvillian_needs_phase_space():
    grid = Grid1D.symmetric("q", 32, 8.0)
    with pytest.raises(ShapeError):
        apply_liouvillian(HamiltonianSpec.harmonic(), gaussian_state((grid,), (0.0,), (1.0,)))


def test_oscillator_means_follow_the_classical_flow(phase_grids):
    initial = gaussian_state(phase_grids, (2.0, 0.0), (1.0, 1.0))
    run = evolve_classical(initial, HamiltonianSpec.harmonic(), 1.0, 0.01, save_every=10)
    times = run.trajectory.times
    expected = analytic_uncoupled(2.0, 0.0, times)
    assert np.max(np.abs(run.trajectory.column("mean_x") - expected[:, 0])) < 1e-4
    assert np.max(np.abs(run.trajectory.column("mean_k") - expected[:, 1])) < 1e-4
    assert np.max(np.abs(run.trajectory.column("norm") - 1.0)) < 1e-12
    assert run.trajectory.csv_columns == CLASSICAL_COLUMNS
    assert [o["generator"] for o in run.ordering][0].startswith("drift")


def test_free_flow_is_exact_and_spreads():
    grids = (Grid1D.symmetric("x", 128, 12.0), Grid1D.symmetric("k", 64, 8.0))
    initial = gaussian_state(grids, (-1.0, 0.5), (1.0, 1.0))
    run = evolve_classical(initial, HamiltonianSpec.free_particle(), 2.0, 0.1, save_every=5)
    times = run.trajectory.times
    np.testing.assert_allclose(run.trajectory.column("mean_x"), -1.0 + 0.5 * times, atol=1e-10)
    np.testing.assert_allclose(run.trajectory.column("var_x"), 0.5 + 0.5 * times ** 2, atol=1e-8)
    np.testing.assert_allclose(run.trajectory.column("mean_k"), 0.5, atol=1e-10)


def test_hamilton_check_on_quartic_oscillator():
    grids = (Grid1D.symmetric("x", 128, 8.0), Grid1D.symmetric("k", 128, 8.0))
    hamiltonian = HamiltonianSpec.quartic()
    initial = gaussian_state(grids, (1.0, 0.0), (1.0, 1.0))
    run = evolve_classical(initial, hamiltonian, 0.5, 0.005, keep_snapshots=True)
    report = hamilton_check(run.trajectory)
    assert report.max_residual < 1e-3
    recomputed = hamilton_check(run.trajectory, hamiltonian, run.snapshots)
    np.testing.assert_allclose(recomputed.residual_x, report.residual_x, atol=1e-12)


def test_energy_is_kept_by_the_oscillator_flow(phase_grids):
    initial = gaussian_state(phase_grids, (1.5, 0.5), (1.0, 1.0))
    run = evolve_classical(initial, HamiltonianSpec.harmonic(), 1.0, 0.01, save_every=20)
    energy = run.trajectory.column("energy_c")
    assert np.max(np.abs(energy - energy[0])) < 5e-4


def test_hamilton_check_needs_three_rows(phase_grids):
    initial = gaussian_state(phase_grids, (0.0, 0.0), (1.0, 1.0))
    run = evolve_classical(initial, HamiltonianSpec.harmonic(), 0.1, 0.1)
    with pytest.raises(ParameterError):
        hamilton_check(run.trajectory)


def test_hamiltonian_degree_limit():
    with pytest.raises(ParameterError):
        HamiltonianSpec((0.0, 0.0, 0.5), (0.0,) * 6)
