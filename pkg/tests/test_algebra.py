import numpy as np
import pytest
import sympy

from src.kvn.algebra.expr import CommutationRules, OperatorExpr
from src.kvn.algebra.heisenberg import (
    commutator,
    coupled_generator,
    eom_compare,
    hamiltonian_rate_identities,
    heisenberg_rhs,
    isolation_check,
    jacobi_residual,
    normal_order,
    oscillator_targets,
    random_observable_polynomial,
    symbolic_c,
)
from src.kvn.algebra.oracle import MatrixOracle, commutator_agreement
from src.kvn.algebra.parser import parse, symbol
from src.kvn.errors import DegreeOverflowError, ExpressionSyntaxError, ParameterError, UnknownSymbolError


def g(name):
    return OperatorExpr.generator(name)


def test_canonical_commutators():
    assert commutator(g("q"), g("p")) == OperatorExpr.constant(sympy.I)
    assert commutator(g("x"), g("p_x")) == OperatorExpr.constant(sympy.I)
    assert commutator(g("k"), g("p_k")) == OperatorExpr.constant(sympy.I)
    assert commutator(g("q"), g("p_x")).is_zero
    assert commutator(g("x"), g("k")).is_zero
    assert commutator(g("p"), g("p_k")).is_zero


def test_hbar_scales_the_canonical_pair():
    rules = CommutationRules(hbar=sympy.Rational(1, 2))
    q = OperatorExpr.generator("q", rules)
    p = OperatorExpr.generator("p", rules)
    assert commutator(q, p) == OperatorExpr.constant(sympy.I / 2, rules)


def test_products_are_normal_ordered():
    assert str(parse("p*q")) == "-i + q*p"
    assert parse("p^2*q") == parse("q*p^2 - 2*i*p")
    assert normal_order(parse("pk*k*x")) == parse("pk*k*x")
    assert parse("(q + p)^2") == parse("q^2 + 2*q*p - i + p^2")


def test_float_coefficients_become_exact():
    expression = g("q") * 0.2
    assert expression.coefficient((1, 0, 0, 0, 0, 0)) == sympy.Rational(1, 5)


def test_adjoint_and_self_adjointness():
    assert parse("q*p").adjoint() == parse("p*q")
    assert not parse("q*p").is_self_adjoint()
    assert parse("q*p + p*q").is_self_adjoint()
    assert coupled_generator(symbolic_c(), "boost").is_self_adjoint()


def test_parser_accepts_parameters_and_aliases():
    c = symbol("c")
    expression = parse("-c*q*p_k + 3/4*x", {"c": c})
    assert expression == OperatorExpr.generator("q") * OperatorExpr.generator("pk") * (-c) + g("x") * sympy.Rational(3, 4)
    assert parse("2i*q") == g("q") * (2 * sympy.I)
    assert parse("−q") == -g("q")


@pytest.mark.parametrize("text, offset", [
    ("q p", 2), ("q^", 2), ("(q + p", 6), ("q + * p", 4), ("", 0), ("1/0*q", 0), ("q + 3/0", 4),
])
def test_parser_syntax_errors_carry_offsets(text, offset):
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse(text)
    assert excinfo.value.offset == offset


def test_unknown_symbol_and_degree_overflow():
    with pytest.raises(UnknownSymbolError) as excinfo:
        parse("q + z")
    assert excinfo.value.symbol == "z"
    assert excinfo.value.offset == 4
    with pytest.raises(DegreeOverflowError):
        parse("q^13")


def test_numeric_terms_need_resolved_parameters():
    expression = parse("c*q", {"c": symbol("c")})
    with pytest.raises(ParameterError):
        expression.numeric_terms()
    assert expression.numeric_terms({"c": 0.5}) == [((1, 0, 0, 0, 0, 0), 0.5 + 0j)]


def test_uncoupled_generator_reproduces_both_oscillators():
    report = eom_compare(coupled_generator(0, "none"), oscillator_targets(0))
    assert report.correspondence_holds
    assert not any(entry.unobservable for entry in report.entries.values())


def test_boost_coupling_breaks_the_p_equation():
    c = symbolic_c()
    report = eom_compare(coupled_generator(c, "boost"), oscillator_targets(c))
    assert not report.correspondence_holds
    assert report.entries["p"].derived == parse("-q + c*pk", {"c": c})
    assert report.entries["p"].unobservable
    assert report.entries["k"].residual.is_zero
    assert report.entries["q"].residual.is_zero


def test_observable_coupling_has_no_back_reaction():
    c = symbolic_c()
    report = eom_compare(coupled_generator(c, "observable"), oscillator_targets(c))
    assert report.entries["p"].residual.is_zero
    assert report.entries["k"].residual == parse("c*q", {"c": c})
    assert not report.entries["k"].unobservable


def test_hamiltonian_rate_identities_of_the_boost():
    c = symbolic_c()
    rates = hamiltonian_rate_identities(c, "boost")
    assert rates["H_c"] == parse("-c*q*k", {"c": c})
    assert rates["H_q"] == parse("c*p*pk", {"c": c})


def test_heisenberg_rhs_of_free_particle():
    assert heisenberg_rhs(parse("1/2*p^2"), g("q")) == g("p")
    assert heisenberg_rhs(parse("1/2*p^2"), g("p")).is_zero


def test_isolation_verdicts_and_witnesses():
    c = symbolic_c()
    assert isolation_check(parse("c*q*x + q^2*k^3", {"c": c})).isolating
    q_px = isolation_check(parse("q*px"))
    assert not q_px.isolating
    assert q_px.witness_x == g("q") * sympy.I
    assert q_px.witness_k.is_zero
    boost = isolation_check(parse("-c*q*pk", {"c": c}))
    assert boost.witness_k == g("q") * (-sympy.I * c)
    assert boost.to_dict()["verdict"] == "non-isolating"


def test_random_observable_polynomials_isolate_and_satisfy_jacobi():
    rng = np.random.default_rng(5)
    for _ in range(10):
        polynomial = random_observable_polynomial(rng)
        assert not polynomial.contains_unobservable()
        assert isolation_check(polynomial).isolating
    a, b, c = (random_observable_polynomial(rng, max_degree=2) for _ in range(3))
    assert jacobi_residual(a, b, c).is_zero
    assert jacobi_residual(g("q"), g("p"), parse("x*pk")).is_zero


@pytest.mark.parametrize("left, right", [("q", "p"), ("x", "px"), ("q*x", "p*px"), ("x*k", "px*pk"), ("q^2", "p^2")])
def test_matrix_oracle_agrees_with_symbolic_commutators(left, right):
    oracle = MatrixOracle(16)
    states = oracle.band_limited_states(3, 2, np.random.default_rng(3))
    a, b = parse(left), parse(right)
    assert commutator_agreement(oracle, a, b, commutator(a, b), states) < 1e-8


def test_matrix_oracle_input_checks():
    with pytest.raises(ParameterError):
        MatrixOracle(2)
    oracle = MatrixOracle(8)
    with pytest.raises(ParameterError):
        oracle.apply(g("q"), np.zeros((8, 8)))
    state = oracle.fock_state((0, 1, 2))
    assert abs(np.linalg.norm(state) - 1.0) < 1e-12
