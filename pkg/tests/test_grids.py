import numpy as np
import pytest

from src.kvn.errors import GuardViolation, ParameterError, ShapeError
from src.kvn.grids import (
    Grid1D,
    StateVector,
    boundary_mass,
    check_boundary_guard,
    classical_marginal,
    gaussian_state,
    inner_product,
    marginal,
    tensor_product,
)
from src.kvn.utils import (
    central_difference,
    evaluate_polynomial,
    pairwise_sum,
    pairwise_sum_axes,
    polynomial_derivative,
    step_count,
)


def test_grid_points_and_frequencies():
    grid = Grid1D(n=8, origin=-2.0, length=4.0, label="x")
    assert grid.spacing == 0.5
    np.testing.assert_allclose(grid.points, -2.0 + 0.5 * np.arange(8))
    np.testing.assert_allclose(grid.frequencies[:4], 2 * np.pi / 4.0 * np.arange(4))
    assert grid.frequencies[4] < 0


@pytest.mark.parametrize("n", [0, 1, 3, 12, 100])
def test_grid_rejects_non_power_of_two(n):
    with pytest.raises(ParameterError):
        Grid1D(n=n, origin=0.0, length=1.0, label="x")


def test_grid_rejects_unknown_label_and_bad_length():
    with pytest.raises(ParameterError):
        Grid1D(n=8, origin=0.0, length=1.0, label="z")
    with pytest.raises(ParameterError):
        Grid1D(n=8, origin=0.0, length=0.0, label="x")


def test_state_vector_is_read_only_and_reshapes_flat_input():
    grids = (Grid1D.symmetric("x", 4, 1.0), Grid1D.symmetric("k", 8, 1.0))
    state = StateVector(grids, np.arange(32, dtype=float))
    assert state.shape == (4, 8)
    with pytest.raises(ValueError):
        state.amplitudes[0, 0] = 1.0


def test_state_vector_shape_errors():
    grid = Grid1D.symmetric("x", 4, 1.0)
    with pytest.raises(ShapeError):
        StateVector((grid, grid), np.zeros((4, 4)))
    with pytest.raises(ShapeError):
        StateVector((grid,), np.zeros(5))
    with pytest.raises(ParameterError):
        StateVector((grid,), np.array([0.0, np.nan, 0.0, 0.0]))


def test_gaussian_state_is_normalized_with_expected_moments(phase_grids):
    state = gaussian_state(phase_grids, centers=(1.5, -0.5), widths=(1.0, 1.0))
    assert abs(state.norm() - 1.0) < 1e-12
    density = marginal(state, ["x"])
    assert abs(density.total() - 1.0) < 1e-12
    assert abs(density.mean("x") - 1.5) < 1e-10
    variance = float(np.sum(density.values * (phase_grids[0].points - 1.5) ** 2)) * phase_grids[0].spacing
    assert abs(variance - 0.5) < 1e-10


def test_inner_product_requires_same_grids(phase_grids):
    a = gaussian_state(phase_grids, (0.0, 0.0), (1.0, 1.0))
    assert abs(inner_product(a, a) - 1.0) < 1e-12
    other = gaussian_state((Grid1D.symmetric("x", 32, 8.0), phase_grids[1]), (0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ShapeError):
        inner_product(a, other)


def test_marginal_reorders_axes_and_classical_marginal_drops_q(hybrid_grids):
    q_state = gaussian_state(hybrid_grids[:1], (1.0,), (1.0,))
    c_state = gaussian_state(hybrid_grids[1:], (0.5, -1.0), (1.0, 1.0))
    joint = tensor_product(q_state, c_state)
    assert joint.labels == ("q", "x", "k")
    f = classical_marginal(joint)
    assert f.labels == ("x", "k")
    np.testing.assert_allclose(f.values, c_state.density(), atol=1e-12)
    swapped = marginal(joint, ["k", "x"])
    np.testing.assert_allclose(swapped.values, f.values.T, atol=1e-14)


def test_axis_reductions_follow_the_flat_summation_order(rng, hybrid_grids):
    values = rng.random((4, 6, 5))
    assert pairwise_sum_axes(values, (0, 1, 2)) == pairwise_sum(values)
    middle = pairwise_sum_axes(values, (1,))
    assert middle.shape == (4, 5)
    assert middle[2, 3] == pairwise_sum(values[2, :, 3])
    np.testing.assert_allclose(pairwise_sum_axes(values, (-1, 0)), values.sum(axis=(0, 2)), rtol=1e-14)
    state = gaussian_state(hybrid_grids, (1.0, 0.5, -1.0), (1.0, 1.0, 1.0))
    expected = pairwise_sum_axes(state.density(), (0,)) * hybrid_grids[0].spacing
    assert np.array_equal(classical_marginal(state).values, expected)


def test_tensor_product_rejects_shared_axes(phase_grids):
    a = gaussian_state(phase_grids, (0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ShapeError):
        tensor_product(a, a)


def test_boundary_guard_reports_axis():
    grid = Grid1D.symmetric("x", 64, 8.0)
    centred = gaussian_state((grid,), (0.0,), (1.0,))
    check_boundary_guard(centred)
    edge = gaussian_state((grid,), (7.5,), (1.0,))
    assert boundary_mass(edge, "x") > 1e-3
    with pytest.raises(GuardViolation) as excinfo:
        check_boundary_guard(edge, time=0.25)
    assert excinfo.value.axis == "x"


def test_step_count_ends_exactly_at_duration():
    n, dt = step_count(1.0, 0.3)
    assert n == 4
    assert abs(n * dt - 1.0) < 1e-15
    assert step_count(0.0, 0.1) == (0, 0.1)
    assert step_count(1.0, 0.1)[0] == 10
    with pytest.raises(ParameterError):
        step_count(1.0, 0.0)


def test_central_difference_is_exact_for_quadratics():
    t = np.linspace(0.0, 1.0, 11)
    rates = central_difference(t, t ** 2)
    np.testing.assert_allclose(rates, 2 * t[1:-1], atol=1e-12)
    with pytest.raises(ParameterError):
        central_difference([0.0, 1.0], [0.0, 1.0])


def test_polynomial_helpers():
    assert polynomial_derivative((1.0, 2.0, 3.0)) == (2.0, 6.0)
    assert polynomial_derivative((5.0,)) == (0.0,)
    np.testing.assert_allclose(evaluate_polynomial((1.0, 0.0, 2.0), np.array([0.0, 1.0, 2.0])), [1.0, 3.0, 9.0])
