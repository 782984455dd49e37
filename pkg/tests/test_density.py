import numpy as np
import pytest

from src.kvn.bases import build_basis, hermite_basis, packet_basis
from src.kvn.density import DensityMatrix, partial_trace_quantum, reduced_coefficients
from src.kvn.errors import ConfigurationError, DomainError, ParameterError, ShapeError
from src.kvn.grids import Grid1D, gaussian_state, tensor_product


@pytest.fixture
def q_grid():
    return Grid1D.symmetric("q", 64, 12.0)


def test_hermite_basis_is_orthonormal(q_grid):
    basis = hermite_basis(q_grid, 6)
    np.testing.assert_allclose(basis.overlap_matrix(), np.eye(6), atol=1e-12)
    assert basis.family == "hermite"


def test_packet_basis_alternates_sides(q_grid):
    basis = packet_basis(q_grid, 4, offset=4.0)
    np.testing.assert_allclose(basis.overlap_matrix(), np.eye(4), atol=1e-12)
    points = q_grid.points
    centres = [float(np.sum(np.abs(basis.vectors[i]) ** 2 * points) * q_grid.spacing) for i in range(4)]
    assert centres[0] < 0 < centres[1]
    assert centres[2] < 0 < centres[3]


def test_build_basis_rejects_bad_families(q_grid):
    with pytest.raises(ConfigurationError):
        build_basis(q_grid, "packets", 2, offset=0.0)
    with pytest.raises(ConfigurationError):
        build_basis(q_grid, "legendre", 2)
    assert build_basis(q_grid, "hermite", 3).size == 3


def test_synthesize_and_coefficients_are_inverse(q_grid):
    basis = hermite_basis(q_grid, 5)
    coefficients = np.array([0.5, 0.5j, -0.5, 0.0, 0.5])
    state = basis.synthesize(coefficients)
    np.testing.assert_allclose(basis.coefficients(state), coefficients, atol=1e-12)
    assert basis.truncate(2).size == 2
    with pytest.raises(ParameterError):
        basis.truncate(6)
    with pytest.raises(ParameterError):
        basis.synthesize(np.ones(6))


def test_pure_density_matrix_properties(q_grid):
    basis = hermite_basis(q_grid, 2)
    rho = DensityMatrix.pure(np.array([1.0, 1.0j]) / np.sqrt(2.0), basis)
    rho.validate()
    assert abs(rho.trace() - 1.0) < 1e-12
    assert abs(rho.purity() - 1.0) < 1e-12
    assert abs(rho.fidelity_with([1.0, 1.0j]) - 1.0) < 1e-12
    assert abs(rho.fidelity_with([1.0, -1.0j])) < 1e-12
    mixed = DensityMatrix(np.eye(2) / 2.0, basis)
    assert abs(rho.trace_distance(mixed) - 0.5) < 1e-12


def test_validate_rejects_invalid_matrices(q_grid):
    basis = hermite_basis(q_grid, 2)
    with pytest.raises(DomainError):
        DensityMatrix(np.array([[1.0, 1.0], [0.0, 0.0]]), basis).validate()
    with pytest.raises(DomainError):
        DensityMatrix(np.diag([1.5, -0.5]), basis).validate()
    with pytest.raises(DomainError):
        DensityMatrix(np.diag([0.5, 0.25]), basis).validate()
    with pytest.raises(ShapeError):
        DensityMatrix(np.ones((2, 3)), basis)


def test_partial_trace_of_product_state_is_pure(q_grid, phase_grids):
    basis = hermite_basis(q_grid, 3)
    coefficients = np.array([0.6, 0.8, 0.0])
    joint = tensor_product(basis.synthesize(coefficients), gaussian_state(phase_grids, (1.0, -1.0), (1.0, 1.0)))
    rho = partial_trace_quantum(joint, basis, 3)
    np.testing.assert_allclose(rho.matrix, np.outer(coefficients, coefficients), atol=1e-12)
    assert abs(rho.leakage) < 1e-12
    assert reduced_coefficients(joint, basis, 2).shape == (2, 64 * 64)


def test_partial_trace_of_entangled_state_is_mixed(q_grid, phase_grids):
    basis = hermite_basis(q_grid, 2)
    left = tensor_product(basis.mode(0), gaussian_state(phase_grids, (-4.0, -4.0), (1.0, 1.0)))
    right = tensor_product(basis.mode(1), gaussian_state(phase_grids, (4.0, 4.0), (1.0, 1.0)))
    joint = left.with_amplitudes((left.amplitudes + right.amplitudes) / np.sqrt(2.0))
    rho = partial_trace_quantum(joint, basis, 2)
    np.testing.assert_allclose(rho.matrix, np.eye(2) / 2.0, atol=1e-8)
    assert abs(rho.purity() - 0.5) < 1e-8


def test_truncation_leakage_is_recorded(q_grid, phase_grids):
    basis = hermite_basis(q_grid, 3)
    joint = tensor_product(basis.mode(2), gaussian_state(phase_grids, (0.0, 0.0), (1.0, 1.0)))
    rho = partial_trace_quantum(joint, basis, 2)
    assert abs(rho.leakage - 1.0) < 1e-10
    with pytest.raises(ParameterError):
        partial_trace_quantum(joint, basis, 4)
