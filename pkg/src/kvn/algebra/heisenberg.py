"""
Commutators, Heisenberg equations and the no-go checks built on them.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import sympy

from src.logger import setup_logger
from src.kvn.algebra.expr import GENERATORS, CommutationRules, OperatorExpr, Scalar, exact_number
from src.kvn.algebra.parser import parse, symbol
from src.kvn.errors import ParameterError

# Setup logger
logger = setup_logger(__name__)

OBSERVABLE_GENERATORS = ("q", "p", "x", "k")
DYNAMICAL_VARIABLES = ("q", "p", "x", "k")


def commutator(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    """[a, b] = a*b - b*a in normal order."""
    return a * b - b * a


def normal_order(expression: OperatorExpr) -> OperatorExpr:
    """
    Canonical form of an expression.

    Expressions are normal-ordered on construction, so this re-derives the
    form from the stored monomials and is idempotent.
    """
    result = OperatorExpr.zero(expression.rules)
    for exponents, coefficient in expression.sorted_terms():
        word = [GENERATORS[i] for i, power in enumerate(exponents) for _ in range(power)]
        result = result + OperatorExpr.from_word(word, coefficient, expression.rules)
    return result


def heisenberg_rhs(generator: OperatorExpr, observable: OperatorExpr) -> OperatorExpr:
    """
    dO/dt = -i [O, K] for the generator K of exp(-i t K).

    A generator that is not formally self-adjoint is reported with a warning
    and the computation proceeds.
    """
    if not generator.is_self_adjoint():
        logger.warning(f"Generator {generator} is not self-adjoint; Heisenberg equations may be meaningless")
    return commutator(observable, generator) * (-sympy.I)


@dataclass
class IsolationVerdict:
    """Outcome of isolation_check with its witness commutators [x, K_i] and [k, K_i]."""
    isolating: bool
    witness_x: OperatorExpr
    witness_k: OperatorExpr

    @property
    def verdict(self) -> str:
        return "isolating" if self.isolating else "non-isolating"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "[x,K_i]": str(self.witness_x), "[k,K_i]": str(self.witness_k)}


def isolation_check(interaction: OperatorExpr) -> IsolationVerdict:
    """The interaction isolates the classical sector iff [x, K_i] = [k, K_i] = 0."""
    rules = interaction.rules
    witness_x = commutator(OperatorExpr.generator("x", rules), interaction)
    witness_k = commutator(OperatorExpr.generator("k", rules), interaction)
    return IsolationVerdict(witness_x.is_zero and witness_k.is_zero, witness_x, witness_k)


@dataclass
class EomEntry:
    derived: OperatorExpr
    target: OperatorExpr
    residual: OperatorExpr
    unobservable: bool

    def to_dict(self) -> dict:
        return {
            "derived": str(self.derived),
            "target": str(self.target),
            "residual": str(self.residual),
            "unobservable": self.unobservable,
        }


@dataclass
class EomReport:
    """
    Heisenberg right-hand sides against target equations, per dynamical variable.

    residual = derived - target; ``unobservable`` flags a derived side that
    contains p_x or p_k.
    """
    entries: Dict[str, EomEntry] = field(default_factory=dict)

    @property
    def correspondence_holds(self) -> bool:
        return all(entry.residual.is_zero for entry in self.entries.values())

    def to_dict(self) -> dict:
        return {
            "classical_correspondence_holds": self.correspondence_holds,
            "equations": {name: entry.to_dict() for name, entry in self.entries.items()},
        }


def eom_compare(generator: OperatorExpr, targets: Mapping[str, OperatorExpr]) -> EomReport:
    """Derive dO/dt for every target variable and compare."""
    report = EomReport()
    for name, target in targets.items():
        derived = heisenberg_rhs(generator, OperatorExpr.generator(name, generator.rules))
        residual = derived - target
        report.entries[name] = EomEntry(derived, target, residual, derived.contains_unobservable())
    return report


def oscillator_targets(c: Scalar = 0, rules: Optional[CommutationRules] = None) -> Dict[str, OperatorExpr]:
    """Equations of motion of two bilinearly coupled oscillators."""
    parameters = {"c": exact_number(c)}
    return {
        "x": parse("k", parameters, rules),
        "k": parse("-x - c*q", parameters, rules),
        "q": parse("p", parameters, rules),
        "p": parse("-q - c*x", parameters, rules),
    }


def coupled_generator(c: Scalar = 0, kind: str = "boost",
                      rules: Optional[CommutationRules] = None) -> OperatorExpr:
    """
    K = 1/2 (q^2 + p^2) + (k p_x - x p_k) + K_i for the oscillator pair.

    kind: "none", "observable" (K_i = c q x) or "boost" (K_i = -c q p_k).
    """
    base = "1/2*(q^2 + p^2) + k*px - x*pk"
    interactions = {"none": "0", "observable": "c*q*x", "boost": "-c*q*pk"}
    if kind not in interactions:
        raise ParameterError(f"unsupported coupling kind '{kind}'")
    return parse(f"{base} + {interactions[kind]}", {"c": exact_number(c)}, rules)


def symbolic_c() -> sympy.Symbol:
    return symbol("c")


def random_observable_polynomial(rng: np.random.Generator, max_degree: int = 4,
                                 generators: Sequence[str] = OBSERVABLE_GENERATORS,
                                 max_terms: int = 4, rules: Optional[CommutationRules] = None) -> OperatorExpr:
    """
    Random polynomial over the given generators, written as unordered products.

    Words are drawn in random order (so p*q style products occur) with small
    integer coefficients, then normal-ordered.
    """
    result = OperatorExpr.zero(rules)
    for _ in range(int(rng.integers(1, max_terms + 1))):
        length = int(rng.integers(1, max_degree + 1))
        word = [generators[int(i)] for i in rng.integers(0, len(generators), size=length)]
        coefficient = sympy.Rational(int(rng.integers(-5, 6)) or 1, int(rng.integers(1, 4)))
        result = result + OperatorExpr.from_word(word, coefficient, rules)
    return result


def jacobi_residual(a: OperatorExpr, b: OperatorExpr, c: OperatorExpr) -> OperatorExpr:
    """[a,[b,c]] + [b,[c,a]] + [c,[a,b]], identically zero for a Lie bracket."""
    return (commutator(a, commutator(b, c)) + commutator(b, commutator(c, a))
            + commutator(c, commutator(a, b)))


def hamiltonian_rate_identities(c: Scalar, kind: str, rules: Optional[CommutationRules] = None) -> Dict[str, OperatorExpr]:
    """Symbolic d<H_q>/dt and d<H_c>/dt for the oscillator pair."""
    generator = coupled_generator(c, kind, rules)
    h_q = parse("1/2*(q^2 + p^2)", rules=rules)
    h_c = parse("1/2*(x^2 + k^2)", rules=rules)
    return {"H_q": heisenberg_rhs(generator, h_q), "H_c": heisenberg_rhs(generator, h_c)}
