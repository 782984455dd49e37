"""
Grid expectations of symbolic operator expressions.

Generators map onto grid axes: q and p act on axis q, x and p_x on x, k and
p_k on k. A monomial that carries at most one member of each canonical pair
is diagonal in a mixed representation (its derivative axes transformed),
so its expectation is a weighted sum of a transformed density. Other
monomials are applied factor by factor.
"""

from typing import Dict, FrozenSet, Mapping, Optional

import numpy as np

from src.kvn.algebra.expr import GENERATORS, PAIRS, Exponents, OperatorExpr
from src.kvn.errors import SelfAdjointnessError, ShapeError
from src.kvn.grids import StateVector, inner_product
from src.kvn.operators import COORDINATE, DERIVATIVE, AxisFactor, OperatorSpec, apply_operator, transform_axes
from src.kvn.utils import pairwise_sum

GENERATOR_AXES = {"q": ("q", COORDINATE), "p": ("q", DERIVATIVE),
                  "x": ("x", COORDINATE), "p_x": ("x", DERIVATIVE),
                  "k": ("k", COORDINATE), "p_k": ("k", DERIVATIVE)}
IMAGINARY_THRESHOLD = 1e-10


def monomial_operator(exponents: Exponents, coefficient: complex = 1.0) -> OperatorSpec:
    """
    Grid operator of a normal-ordered monomial q^a p^b x^c k^d p_x^e p_k^f.

    Factors keep the written order; a generator power becomes one polynomial factor.
    """
    factors = []
    for index, power in enumerate(exponents):
        if power == 0:
            continue
        axis, kind = GENERATOR_AXES[GENERATORS[index]]
        factors.append(AxisFactor(axis, kind, (0.0,) * power + (1.0,)))
    return OperatorSpec(tuple(factors), coefficient)


def is_diagonal_monomial(exponents: Exponents) -> bool:
    """True when no canonical pair contributes both its position and derivative."""
    return all(exponents[a] == 0 or exponents[b] == 0 for a, b in PAIRS)


class MixedDensities:
    """
    Per-state cache of |FFT_D(Psi)|^2 * cell volume for sets D of transformed axes.

    The orthonormal transform keeps the total equal to the norm, so these are
    probability weights in the mixed representation.
    """

    def __init__(self, state: StateVector, workers: Optional[int] = None):
        self.state = state
        self.workers = workers
        self._cache: Dict[FrozenSet[int], np.ndarray] = {}

    def weights(self, axes: FrozenSet[int]) -> np.ndarray:
        if axes not in self._cache:
            transformed = transform_axes(self.state.amplitudes, sorted(axes), workers=self.workers)
            self._cache[axes] = np.abs(transformed) ** 2 * self.state.cell_volume
        return self._cache[axes]

    def diagonal_expectation(self, op: OperatorSpec) -> float:
        labels = self.state.labels
        axes = frozenset(labels.index(factor.axis) for factor in op.factors if factor.kind == DERIVATIVE)
        values = np.ones([1] * len(labels))
        for factor in op.factors:
            index = labels.index(factor.axis)
            grid = self.state.grids[index]
            shape = [1] * len(labels)
            shape[index] = grid.n
            values = values * factor.values(grid).reshape(shape)
        return float(pairwise_sum(self.weights(axes) * values)) * float(np.real(op.coefficient))


def expr_expectation(expression: OperatorExpr, state: StateVector,
                     parameters: Optional[Mapping] = None, cache: Optional[MixedDensities] = None,
                     workers: Optional[int] = None, threshold: float = IMAGINARY_THRESHOLD) -> float:
    """
    <state| expression |state> for a normal-ordered expression.

    Raises:
        ShapeError: If the expression uses a generator whose axis is missing
        SelfAdjointnessError: If the expectation has an imaginary part above threshold
    """
    cache = cache or MixedDensities(state, workers)
    total = 0j
    for exponents, coefficient in expression.numeric_terms(parameters):
        op = monomial_operator(exponents)
        missing = [axis for axis in op.axes if axis not in state.labels]
        if missing:
            raise ShapeError(f"expression {expression} needs axes {missing} absent from {state.labels}")
        if is_diagonal_monomial(exponents):
            total += coefficient * cache.diagonal_expectation(op)
        else:
            total += coefficient * inner_product(state, apply_operator(op, state, workers))
    if abs(total.imag) > threshold:
        raise SelfAdjointnessError(f"<{expression}> has imaginary part {total.imag:.3e}", total.imag)
    return total.real
