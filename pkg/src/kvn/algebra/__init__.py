"""
Symbolic calculus over noncommutative polynomials in q, p, x, k, p_x, p_k.
"""

from src.kvn.algebra.expr import CommutationRules, OperatorExpr, polynomial_expr
from src.kvn.algebra.heisenberg import (
    EomReport,
    IsolationVerdict,
    commutator,
    eom_compare,
    heisenberg_rhs,
    isolation_check,
    normal_order,
)
from src.kvn.algebra.parser import parse, symbol

__all__ = [
    "CommutationRules",
    "EomReport",
    "IsolationVerdict",
    "OperatorExpr",
    "commutator",
    "eom_compare",
    "heisenberg_rhs",
    "isolation_check",
    "normal_order",
    "parse",
    "polynomial_expr",
    "symbol",
]
