import numpy as np
import pytest

from src.kvn.errors import ConfigurationError, SelfAdjointnessError, ShapeError
from src.kvn.grids import Grid1D, gaussian_state, marginal
from src.kvn.operators import (
    COORDINATE,
    DERIVATIVE,
    AxisFactor,
    OperatorSpec,
    apply_operator,
    expectation,
    exponentiate,
    shear,
)
from src.kvn.splitting import StrangPropagator, SubGenerator, evolve


@pytest.fixture
def line():
    return Grid1D.symmetric("x", 128, 16.0)


def test_derivative_expectation_is_packet_momentum(line):
    state = gaussian_state((line,), (0.0,), (1.0,), momenta=(1.25,))
    assert abs(expectation(OperatorSpec.derivative("x"), state) - 1.25) < 1e-10
    assert abs(expectation(OperatorSpec.coordinate("x"), state)) < 1e-12


def test_second_moment_of_momentum(line):
    state = gaussian_state((line,), (0.0,), (1.0,))
    # |psi|^2 has variance w^2/2, so <p^2> = 1/(2 w^2)
    assert abs(expectation(OperatorSpec.derivative("x", (0.0, 0.0, 1.0)), state) - 0.5) < 1e-10


def test_non_hermitian_product_is_rejected(line):
    state = gaussian_state((line,), (0.0,), (1.0,))
    x_p = OperatorSpec((AxisFactor("x", COORDINATE), AxisFactor("x", DERIVATIVE)))
    with pytest.raises(SelfAdjointnessError) as excinfo:
        expectation(x_p, state)
    assert abs(excinfo.value.imaginary_part - 0.5) < 1e-8


def test_apply_operator_requires_axis(line):
    state = gaussian_state((line,), (0.0,), (1.0,))
    with pytest.raises(ShapeError):
        apply_operator(OperatorSpec.coordinate("k"), state)


def test_composed_needs_distinct_axes():
    with pytest.raises(ConfigurationError):
        OperatorSpec.composed("x", (0.0, 1.0), "x")
    op = OperatorSpec.composed("k", (0.0, 1.0), "x")
    assert op.is_exponentiable
    assert op.derivative_axes == ("x",)


def test_exponentiated_momentum_translates(line):
    state = gaussian_state((line,), (-1.0,), (1.0,))
    moved = exponentiate(OperatorSpec.derivative("x"), state, 2.0)
    assert abs(marginal(moved, ["x"]).mean("x") - 1.0) < 1e-10
    assert abs(moved.norm() - 1.0) < 1e-12
    sheared = shear(state, "x", 2.0)
    np.testing.assert_allclose(sheared.amplitudes, moved.amplitudes, atol=1e-12)


def test_complex_coefficient_cannot_be_exponentiated(line):
    state = gaussian_state((line,), (0.0,), (1.0,))
    with pytest.raises(ConfigurationError):
        exponentiate(OperatorSpec.coordinate("x", coefficient=1j), state, 0.1)


def test_strang_ordering_is_symmetric(phase_grids):
    a = SubGenerator("a", OperatorSpec.derivative("x"))
    b = SubGenerator("b", OperatorSpec.derivative("k"))
    c = SubGenerator("c", OperatorSpec.coordinate("x"))
    two = StrangPropagator(phase_grids, [a, b], 0.1).ordering
    assert [(o["generator"], o["fraction"]) for o in two] == [("a", 0.5), ("b", 1.0), ("a", 0.5)]
    three = StrangPropagator(phase_grids, [a, b, c], 0.1).ordering
    assert [(o["generator"], o["fraction"]) for o in three] == [
        ("a", 0.5), ("b", 0.5), ("c", 1.0), ("b", 0.5), ("a", 0.5)]


def test_strang_rejects_non_exponentiable_generator(phase_grids):
    op = OperatorSpec((AxisFactor("x", COORDINATE), AxisFactor("x", DERIVATIVE)))
    with pytest.raises(ConfigurationError):
        StrangPropagator(phase_grids, [SubGenerator("xp", op)], 0.1)


def test_evolve_save_schedule_and_final_time(phase_grids):
    state = gaussian_state(phase_grids, (0.0, 0.0), (1.0, 1.0))
    saved = []
    result = evolve(state, [SubGenerator("drift", OperatorSpec.derivative("x"))], 1.0, 0.1, 3,
                    lambda t, s: saved.append(t))
    assert result.n_steps == 10
    np.testing.assert_allclose(saved, [0.0, 0.3, 0.6, 0.9, 1.0], atol=1e-12)
    assert abs(marginal(result.final, ["x"]).mean("x") - 1.0) < 1e-10


def test_evolve_rejects_save_every_zero(phase_grids):
    state = gaussian_state(phase_grids, (0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ConfigurationError):
        evolve(state, [], 1.0, 0.1, 0, lambda t, s: None)


def test_zero_duration_saves_initial_only(phase_grids):
    state = gaussian_state(phase_grids, (0.0, 0.0), (1.0, 1.0))
    saved = []
    result = evolve(state, [SubGenerator("drift", OperatorSpec.derivative("x"))], 0.0, 0.1, 1,
                    lambda t, s: saved.append(t))
    assert saved == [0.0]
    assert result.n_steps == 0
