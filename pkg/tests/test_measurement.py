import numpy as np
import pytest

from src.kvn.bases import hermite_basis, packet_basis
from src.kvn.errors import ConfigurationError, GuardViolation, ParameterError, ShapeError, ZeroProbabilityOutcome
from src.kvn.grids import Grid1D, gaussian_state
from src.kvn.measurement import (
    AncillaEnvironment,
    MeasurementChain,
    Partition,
    PointerScheme,
    condition,
    outcome_probabilities,
    phase_invariance_check,
    premeasure,
    random_density_state,
    smooth_phase_field,
    statistics_difference,
    with_phase,
)


@pytest.fixture
def q_grid():
    return Grid1D.symmetric("q", 64, 12.0)


@pytest.fixture
def pointer_grids():
    return Grid1D.symmetric("x", 64, 16.0), Grid1D.symmetric("k", 32, 8.0)


@pytest.fixture
def pointer(pointer_grids):
    return gaussian_state(pointer_grids, (0.0, 0.0), (1.0, 1.0))


@pytest.fixture
def small_grids():
    return Grid1D.symmetric("x", 8, 4.0), Grid1D.symmetric("k", 8, 4.0)


def test_rectangles_build_a_partition(small_grids):
    x_grid = small_grids[:1]
    partition = Partition.from_rectangles(x_grid, [
        {"label": "A", "x": [None, 0.0]},
        {"label": "B", "x": [0.0, 2.0]},
        {"label": "C", "x": [2.0, None]},
    ])
    assert partition.labels == ("A", "B", "C")
    assert partition.axes == ("x",)
    assert int(np.sum(partition.mask("A"))) == 4
    assert int(np.sum(partition.mask("B"))) == 2
    with pytest.raises(ParameterError):
        partition.mask("D")

    coarse = partition.coarsen({"BC": ["B", "C"]})
    assert coarse.labels == ("A", "BC")
    assert int(np.sum(coarse.mask("BC"))) == 4


def test_repeated_label_joins_rectangles(small_grids):
    partition = Partition.from_rectangles(small_grids[:1], [
        {"label": "outer", "x": [None, -2.0]},
        {"label": "inner", "x": [-2.0, 2.0]},
        {"label": "outer", "x": [2.0, None]},
    ])
    assert partition.labels == ("outer", "inner")
    assert int(np.sum(partition.mask("outer"))) == 4


def test_invalid_partitions_are_rejected(small_grids):
    x_grid = small_grids[:1]
    with pytest.raises(ConfigurationError):
        Partition.from_rectangles(x_grid, [{"label": "A", "x": [None, 1.0]}, {"label": "B", "x": [0.0, None]}])
    with pytest.raises(ConfigurationError):
        Partition.from_rectangles(x_grid, [{"label": "A", "x": [None, 0.0]}, {"label": "B", "x": [1.0, None]}])
    with pytest.raises(ConfigurationError):
        Partition.from_rectangles(x_grid, [{"label": "A", "k": [None, None]}])
    with pytest.raises(ConfigurationError):
        Partition.from_rectangles(x_grid, [{"label": "A", "x": [1.0, 1.0]}])
    halves = Partition.half_planes(x_grid)
    with pytest.raises(ConfigurationError):
        halves.coarsen({"all": ["L", "M"]})
    with pytest.raises(ConfigurationError):
        halves.coarsen({"a": ["L"], "b": ["L"]})


def test_product_partition_labels(small_grids):
    x_grid, k_grid = small_grids
    joint = Partition.half_planes((x_grid,)).product(Partition.half_planes((k_grid,), "k", labels=("-", "+")))
    assert joint.labels == ("L|-", "L|+", "R|-", "R|+")
    assert joint.axes == ("x", "k")
    assert int(np.sum(joint.mask("R|+"))) == 16
    with pytest.raises(ConfigurationError):
        Partition.half_planes((x_grid,)).product(Partition.half_planes((x_grid,)))


def test_outcome_probabilities_of_a_displaced_packet(pointer_grids):
    state = gaussian_state(pointer_grids, (1.0, 0.0), (1.0, 1.0))
    partition = Partition.half_planes(pointer_grids)
    probabilities = outcome_probabilities(state, partition)
    assert abs(sum(probabilities.values()) - 1.0) < 1e-12
    assert probabilities["R"] > 0.8
    with pytest.raises(ShapeError):
        outcome_probabilities(state, Partition.half_planes((Grid1D.symmetric("x", 32, 16.0),)))


def test_pointer_schemes_validate_their_settings(q_grid):
    with pytest.raises(ConfigurationError):
        PointerScheme("sign-of-q", (1.0,))
    with pytest.raises(ConfigurationError):
        PointerScheme("basis", (1.0, -1.0))
    with pytest.raises(ConfigurationError):
        PointerScheme("basis", (1.0, -1.0, 2.0), basis=hermite_basis(q_grid, 2))
    with pytest.raises(ConfigurationError):
        PointerScheme("parity", (1.0, -1.0))
    assert PointerScheme.sign_of_q(-5.0, 5.0).labels == ("L", "R")
    assert PointerScheme("basis", (1.0, -1.0), basis=hermite_basis(q_grid, 3)).labels == ("e0", "e1")


def test_sign_of_q_projectors_resolve_identity(q_grid):
    basis = hermite_basis(q_grid, 3)
    projectors = PointerScheme.sign_of_q(-5.0, 5.0).projector_matrices(basis, 3)
    np.testing.assert_allclose(projectors["L"] + projectors["R"], np.eye(3), atol=1e-12)
    for matrix in projectors.values():
        np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-14)
        eigenvalues = np.linalg.eigvalsh(matrix)
        assert np.all(eigenvalues > -1e-12) and np.all(eigenvalues < 1.0 + 1e-12)
    assert abs(projectors["L"][0, 1]) > 0.3


def test_premeasure_records_the_sign_of_q(q_grid, pointer_grids, pointer):
    psi_q = gaussian_state((q_grid,), (-1.0,), (1.0,))
    result = premeasure(psi_q, pointer, PointerScheme.sign_of_q(-5.0, 5.0))
    expected_left = float(np.sum(psi_q.density()[q_grid.points < 0.0])) * q_grid.spacing
    assert abs(result.amplitudes["L"] ** 2 - expected_left) < 1e-12
    assert abs(result.amplitudes["L"] ** 2 + result.amplitudes["R"] ** 2 - 1.0) < 1e-12
    assert result.orthogonal
    assert result.state.labels == ("q", "x", "k")
    assert abs(result.state.norm() - 1.0) < 1e-12

    probabilities = outcome_probabilities(result.state, Partition.half_planes(pointer_grids[:1]))
    assert abs(probabilities["L"] - expected_left) < 1e-10


def test_overlapping_pointer_is_not_orthogonal(q_grid, pointer):
    psi_q = gaussian_state((q_grid,), (0.0,), (1.0,))
    result = premeasure(psi_q, pointer, PointerScheme.sign_of_q(-0.5, 0.5))
    assert not result.orthogonal
    assert abs(result.pointer_overlap - np.exp(-0.25)) < 1e-6


def test_premeasure_guards_the_pointer_grid(q_grid, pointer):
    psi_q = gaussian_state((q_grid,), (0.0,), (1.0,))
    with pytest.raises(GuardViolation) as excinfo:
        premeasure(psi_q, pointer, PointerScheme.sign_of_q(-15.0, 15.0))
    assert excinfo.value.axis == "x"
    with pytest.raises(ShapeError):
        premeasure(pointer, pointer, PointerScheme.sign_of_q(-5.0, 5.0))


def test_conditioning_on_an_outcome(q_grid, pointer_grids, pointer):
    basis = packet_basis(q_grid, 2, offset=5.0)
    psi_q = basis.synthesize(np.array([1.0, 1.0]) / np.sqrt(2.0))
    result = premeasure(psi_q, pointer, PointerScheme.sign_of_q(-5.0, 5.0))
    partition = Partition.from_rectangles(pointer_grids[:1], [
        {"label": "L", "x": [None, 0.0]},
        {"label": "R", "x": [0.0, 12.0]},
        {"label": "far", "x": [12.0, None]},
    ])
    outcome = condition(result.state, "L", partition, basis, 2)
    assert abs(outcome.probability - 0.5) < 1e-10
    assert abs(outcome.state.norm() - 1.0) < 1e-12
    np.testing.assert_allclose(outcome.density.matrix, np.diag([1.0, 0.0]), atol=1e-8)
    with pytest.raises(ZeroProbabilityOutcome) as excinfo:
        condition(result.state, "far", partition, basis, 2)
    assert excinfo.value.label == "far"


def test_chain_rejects_inconsistent_parts(q_grid, pointer_grids, pointer):
    basis = packet_basis(q_grid, 2, offset=5.0)
    scheme = PointerScheme.sign_of_q(-5.0, 5.0)
    partition = Partition.half_planes(pointer_grids)
    with pytest.raises(ParameterError):
        MeasurementChain(pointer, scheme, partition, basis, 3)
    with pytest.raises(ShapeError):
        MeasurementChain(pointer, scheme, Partition.half_planes(pointer_grids[:1]), basis, 2)
    chain = MeasurementChain(pointer, scheme, partition, basis, 2)
    with pytest.raises(ParameterError):
        chain.run([1.0, 0.0, 0.0])


def test_chain_conditional_map_has_trace_of_probability(q_grid, pointer_grids, pointer):
    basis = packet_basis(q_grid, 2, offset=5.0)
    chain = MeasurementChain(pointer, PointerScheme.sign_of_q(-5.0, 5.0), Partition.half_planes(pointer_grids),
                             basis, 2)
    output = chain.run([0.6, 0.8])
    probabilities = output.probabilities()
    assert abs(probabilities["L"] - 0.36) < 1e-10
    assert abs(probabilities["R"] - 0.64) < 1e-10
    conditional = output.conditional_map("R")
    assert abs(np.trace(conditional).real - 0.64) < 1e-10
    np.testing.assert_allclose(conditional, np.diag([0.0, 0.64]), atol=1e-8)


def test_environment_validation():
    with pytest.raises(ConfigurationError):
        AncillaEnvironment(9, np.eye(9)[0], ())
    with pytest.raises(ConfigurationError):
        AncillaEnvironment(2, np.array([1.0, 1.0]), ((np.eye(2),),))
    with pytest.raises(ConfigurationError):
        AncillaEnvironment(2, np.array([1.0, 0.0]), ((np.ones((2, 2)),),))
    first = AncillaEnvironment.random(2, 2, 2, seed=7)
    second = AncillaEnvironment.random(2, 2, 2, seed=7)
    assert first.modes == 2
    np.testing.assert_allclose(first.unitaries[1][0], second.unitaries[1][0])
    assert AncillaEnvironment.from_config(None, 2, 2) is None
    assert AncillaEnvironment.from_config({"dimension": 3, "seed": 1}, 2, 2).dimension == 3


def test_environment_keeps_outcome_statistics(q_grid, pointer_grids, pointer):
    basis = hermite_basis(q_grid, 2)
    scheme = PointerScheme("basis", (-5.0, 5.0), basis=basis)
    partition = Partition.half_planes(pointer_grids, labels=("e0", "e1"))
    bare = MeasurementChain(pointer, scheme, partition, basis, 2)
    environment = AncillaEnvironment.random(3, 2, 2, seed=11)
    coupled = MeasurementChain(pointer, scheme, partition, basis, 2, environment=environment)

    coefficients = [0.6, 0.8j]
    output = coupled.run(coefficients)
    assert len(output.branches) == 3
    assert abs(sum(b.norm() ** 2 for b in output.branches) - 1.0) < 1e-10
    bare_probabilities = bare.probabilities(coefficients)
    for label, value in output.probabilities().items():
        assert abs(value - bare_probabilities[label]) < 1e-10
    assert abs(bare_probabilities["e0"] - 0.36) < 1e-10


def test_smooth_phases_do_not_change_statistics(pointer_grids, rng):
    state = random_density_state(pointer_grids, rng)
    assert abs(state.norm() - 1.0) < 1e-12
    partition = Partition.from_rectangles(pointer_grids, [
        {"label": "a", "x": [None, 0.0], "k": [None, 0.0]},
        {"label": "b", "x": [None, 0.0], "k": [0.0, None]},
        {"label": "c", "x": [0.0, None]},
    ])
    phase = smooth_phase_field(pointer_grids, rng)
    assert phase.shape == state.shape
    assert statistics_difference(state, with_phase(state, phase), partition) < 1e-14

    report = phase_invariance_check(state, partition, trials=10, seed=2)
    assert report.passed
    assert report.trials == 10
    assert report.to_dict()["max_deviation"] <= 1e-12
    with pytest.raises(ParameterError):
        phase_invariance_check(state, partition, trials=0)
