import numpy as np
import pytest

from src.kvn.bases import hermite_basis, packet_basis
from src.kvn.errors import ExtractionFailure
from src.kvn.grids import Grid1D, gaussian_state
from src.kvn.measurement import MeasurementChain, Partition, PointerScheme
from src.kvn.tomography import (
    choi_matrix,
    choi_to_kraus,
    collect,
    conditional_consistency,
    born_rule_check,
    extract_kraus,
    extract_povm,
    tomography_inputs,
    unsharpness_gap,
    unvec,
    vec,
)


@pytest.fixture(scope="module")
def pointer_grids():
    return Grid1D.symmetric("x", 64, 16.0), Grid1D.symmetric("k", 32, 8.0)


@pytest.fixture(scope="module")
def q_grid():
    return Grid1D.symmetric("q", 64, 12.0)


@pytest.fixture(scope="module")
def sharp_chain(q_grid, pointer_grids):
    pointer = gaussian_state(pointer_grids, (0.0, 0.0), (1.0, 1.0))
    return MeasurementChain(pointer, PointerScheme.sign_of_q(-5.0, 5.0), Partition.half_planes(pointer_grids),
                            packet_basis(q_grid, 2, offset=5.0), 2)


@pytest.fixture(scope="module")
def unsharp_chain(q_grid, pointer_grids):
    pointer = gaussian_state(pointer_grids, (0.0, 0.0), (1.0, 1.0))
    basis = hermite_basis(q_grid, 2)
    return MeasurementChain(pointer, PointerScheme("basis", (-0.5, 0.5), basis=basis),
                            Partition.half_planes(pointer_grids, labels=("e0", "e1")), basis, 2)


def test_vec_stacks_columns():
    matrix = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(vec(matrix), [1.0, 3.0, 2.0, 4.0])
    np.testing.assert_array_equal(unvec(vec(matrix), 2), matrix)


def test_probe_family_is_informationally_complete():
    inputs = tomography_inputs(3)
    assert len(inputs) == 9
    assert [p.name for p in inputs[:3]] == ["e0", "e1", "e2"]
    assert inputs[3].name == "(e0+e1)/sqrt2"
    assert inputs[4].name == "(e0+ie1)/sqrt2"
    for probe in inputs:
        assert abs(np.trace(probe.density) - 1.0) < 1e-12
    design = np.array([p.density.T.ravel() for p in inputs])
    assert np.linalg.matrix_rank(design) == 9


def test_identity_channel_has_a_single_kraus_factor():
    dimension = 2
    images = {}
    for a in range(dimension):
        for b in range(dimension):
            image = np.zeros((dimension, dimension), dtype=np.complex128)
            image[a, b] = 1.0
            images[(a, b)] = image
    choi = choi_matrix(images, dimension)
    operators, eigenvalues = choi_to_kraus(choi, dimension)
    assert len(operators) == 1
    assert abs(eigenvalues[-1] - 2.0) < 1e-12
    np.testing.assert_allclose(operators[0].conj().T @ operators[0], np.eye(dimension), atol=1e-12)


def test_sharp_chain_gives_projective_povm(sharp_chain):
    data = collect(sharp_chain)
    assert len(data.inputs) == 4
    povm = extract_povm(sharp_chain, data)
    np.testing.assert_allclose(povm.elements["L"], np.diag([1.0, 0.0]), atol=1e-8)
    np.testing.assert_allclose(povm.elements["R"], np.diag([0.0, 1.0]), atol=1e-8)
    assert povm.completeness_error < 1e-10
    assert unsharpness_gap(povm.elements["L"]) < 1e-8
    assert born_rule_check(sharp_chain, povm, samples=5) < 1e-10

    kraus = extract_kraus(sharp_chain, data=data, povm=povm)
    assert kraus.ranks == {"L": 1, "R": 1}
    np.testing.assert_allclose(kraus.effect("L"), povm.elements["L"], atol=1e-7)
    assert conditional_consistency(sharp_chain, kraus, "L", [0.6, 0.8j]) < 1e-8
    serialized = kraus.to_dict()
    assert serialized["outcomes"][0]["choi_rank"] == 1


def test_overlapping_pointer_gives_unsharp_effects(unsharp_chain):
    povm = extract_povm(unsharp_chain)
    assert povm.completeness_error < 1e-10
    assert povm.min_eigenvalue > 0.0
    assert unsharpness_gap(povm.elements["e0"]) > 0.1
    assert abs(povm.elements["e0"][0, 1]) < 1e-10
    assert povm.elements["e0"][0, 0] > povm.elements["e0"][1, 1]
    assert born_rule_check(unsharp_chain, povm, samples=5) < 1e-10

    kraus = extract_kraus(unsharp_chain, povm=povm)
    assert kraus.ranks == {"e0": 2, "e1": 2}
    assert max(kraus.consistency_error.values()) < 1e-7
    assert conditional_consistency(unsharp_chain, kraus, "e1", [1.0, 1.0j]) < 1e-8
    assert len(povm.to_dict()["outcomes"]) == 2


def test_povm_extraction_rejects_incomplete_data(sharp_chain):
    data = collect(sharp_chain, ())
    for probabilities in data.probabilities:
        probabilities["L"] *= 0.5
    with pytest.raises(ExtractionFailure):
        extract_povm(sharp_chain, data)
