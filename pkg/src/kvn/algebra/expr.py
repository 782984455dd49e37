"""
Normal-ordered noncommutative polynomials over q, p, x, k, p_x, p_k.

Monomials are stored as exponent vectors in the canonical generator order
(q, p, x, k, p_x, p_k); within each canonical pair the position factor sits
left of its derivative. Coefficients are sympy numbers, exact Gaussian
rationals when the inputs are rational.
"""

from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import sympy

from src.kvn.errors import DegreeOverflowError, ParameterError

GENERATORS = ("q", "p", "x", "k", "p_x", "p_k")
DISPLAY_NAMES = ("q", "p", "x", "k", "px", "pk")
ALIASES = {"px": "p_x", "pk": "p_k"}
# (position index, derivative index) of each canonical pair
PAIRS = ((0, 1), (2, 4), (3, 5))
UNOBSERVABLE = (4, 5)
MAX_DEGREE = 12

Exponents = Tuple[int, int, int, int, int, int]
Scalar = Union[int, float, complex, sympy.Expr]


def exact_number(value: Scalar) -> sympy.Expr:
    """
    Convert a Python number into an exact sympy number where possible.

    Floats become the rational with the same shortest decimal representation,
    so 0.2 becomes 1/5.
    """
    if isinstance(value, sympy.Basic):
        return value
    if isinstance(value, bool):
        return sympy.Integer(int(value))
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, float):
        return sympy.Rational(repr(value)) if value == value and abs(value) != float("inf") else sympy.Float(value)
    if isinstance(value, complex):
        return exact_number(value.real) + sympy.I * exact_number(value.imag)
    return sympy.sympify(value)


def generator_index(name: str) -> int:
    """Canonical index of a generator name (accepts px / pk shorthands)."""
    name = ALIASES.get(name, name)
    try:
        return GENERATORS.index(name)
    except ValueError:
        raise ParameterError(f"unknown generator '{name}'")


class CommutationRules:
    """
    Commutation table [q,p] = i*hbar, [x,p_x] = i, [k,p_k] = i, all other pairs commute.

    Normal ordering rewrites adjacent (derivative, position) pairs of the same
    canonical pair with  d*a = a*d - [a, d]. Words are rewritten per pair, since
    factors of different pairs commute, and memoized.
    """

    def __init__(self, hbar: Scalar = 1):
        self.hbar = exact_number(hbar)
        self._memo: Dict[Tuple[int, Tuple[int, ...]], Dict[Tuple[int, int], sympy.Expr]] = {}

    def pair_commutator(self, pair: int) -> sympy.Expr:
        """[position, derivative] of one canonical pair."""
        return sympy.I * self.hbar if pair == 0 else sympy.I

    def same_as(self, other: "CommutationRules") -> bool:
        return self is other or sympy.simplify(self.hbar - other.hbar) == 0

    def order_pair_word(self, pair: int, word: Tuple[int, ...]) -> Dict[Tuple[int, int], sympy.Expr]:
        """
        Normal-order a product of one pair's generators.

        Args:
            pair: Index into PAIRS
            word: Sequence of 0 (position) and 1 (derivative) in written order

        Returns:
            Mapping (position power, derivative power) -> coefficient
        """
        key = (pair, word)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        swap_at = next((i for i in range(len(word) - 1) if word[i] == 1 and word[i + 1] == 0), None)
        if swap_at is None:
            result = {(word.count(0), word.count(1)): sympy.Integer(1)}
        else:
            swapped = word[:swap_at] + (0, 1) + word[swap_at + 2:]
            contracted = word[:swap_at] + word[swap_at + 2:]
            result = dict(self.order_pair_word(pair, swapped))
            constant = self.pair_commutator(pair)
            for powers, coefficient in self.order_pair_word(pair, contracted).items():
                result[powers] = sympy.expand(result.get(powers, 0) - constant * coefficient)
        self._memo[key] = result
        return result

    def multiply_monomials(self, left: Exponents, right: Exponents) -> Dict[Exponents, sympy.Expr]:
        """Normal-ordered product of two normal-ordered monomials."""
        if sum(left) + sum(right) > MAX_DEGREE:
            raise DegreeOverflowError(
                f"product degree {sum(left) + sum(right)} exceeds the bound {MAX_DEGREE}")
        per_pair = []
        for pair, (position, derivative) in enumerate(PAIRS):
            word = ((0,) * left[position] + (1,) * left[derivative]
                    + (0,) * right[position] + (1,) * right[derivative])
            per_pair.append(self.order_pair_word(pair, word))
        result: Dict[Exponents, sympy.Expr] = {}
        for (a, b), c0 in per_pair[0].items():
            for (c, e), c1 in per_pair[1].items():
                for (d, f), c2 in per_pair[2].items():
                    exponents = (a, b, c, d, e, f)
                    result[exponents] = result.get(exponents, 0) + c0 * c1 * c2
        return result


DEFAULT_RULES = CommutationRules()


class OperatorExpr:
    """
    Immutable normal-ordered sum of monomials.

    Arithmetic (+, -, *, ** with a nonnegative integer) keeps the normal form;
    multiplication follows the written operator order.
    """

    __slots__ = ("_terms", "_rules")

    def __init__(self, terms: Optional[Mapping[Exponents, Scalar]] = None,
                 rules: Optional[CommutationRules] = None):
        self._rules = rules or DEFAULT_RULES
        clean: Dict[Exponents, sympy.Expr] = {}
        for exponents, coefficient in (terms or {}).items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != len(GENERATORS) or min(exponents) < 0:
                raise ParameterError(f"invalid exponent vector {exponents}")
            if sum(exponents) > MAX_DEGREE:
                raise DegreeOverflowError(f"monomial degree {sum(exponents)} exceeds the bound {MAX_DEGREE}")
            value = sympy.expand(exact_number(coefficient))
            if value != 0:
                clean[exponents] = value
        self._terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def generator(cls, name: str, rules: Optional[CommutationRules] = None) -> "OperatorExpr":
        exponents = [0] * len(GENERATORS)
        exponents[generator_index(name)] = 1
        return cls({tuple(exponents): 1}, rules)

    @classmethod
    def constant(cls, value: Scalar, rules: Optional[CommutationRules] = None) -> "OperatorExpr":
        return cls({(0,) * len(GENERATORS): value}, rules)

    @classmethod
    def zero(cls, rules: Optional[CommutationRules] = None) -> "OperatorExpr":
        return cls({}, rules)

    @classmethod
    def from_word(cls, word: Iterable[str], coefficient: Scalar = 1,
                  rules: Optional[CommutationRules] = None) -> "OperatorExpr":
        """Normal-order a written product of generator names."""
        result = cls.constant(coefficient, rules)
        for name in word:
            result = result * cls.generator(name, rules)
        return result

    # -- inspection ---------------------------------------------------------

    @property
    def rules(self) -> CommutationRules:
        return self._rules

    @property
    def terms(self) -> Dict[Exponents, sympy.Expr]:
        return dict(self._terms)

    def sorted_terms(self) -> List[Tuple[Exponents, sympy.Expr]]:
        return sorted(self._terms.items(), key=lambda item: (sum(item[0]), item[0]))

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def free_symbols(self) -> set:
        symbols = set()
        for coefficient in self._terms.values():
            symbols |= coefficient.free_symbols
        return symbols

    def coefficient(self, exponents: Exponents) -> sympy.Expr:
        return self._terms.get(tuple(exponents), sympy.Integer(0))

    def contains_unobservable(self) -> bool:
        """True when any monomial contains p_x or p_k."""
        return any(exponents[i] > 0 for exponents in self._terms for i in UNOBSERVABLE)

    def uses(self, name: str) -> bool:
        index = generator_index(name)
        return any(exponents[index] > 0 for exponents in self._terms)

    # -- algebra ------------------------------------------------------------

    def _coerce(self, other) -> "OperatorExpr":
        if isinstance(other, OperatorExpr):
            if not self._rules.same_as(other._rules):
                raise ParameterError("cannot combine expressions with different commutation rules")
            return other
        return OperatorExpr.constant(other, self._rules)

    def __add__(self, other) -> "OperatorExpr":
        other = self._coerce(other)
        terms = dict(self._terms)
        for exponents, coefficient in other._terms.items():
            terms[exponents] = terms.get(exponents, 0) + coefficient
        return OperatorExpr(terms, self._rules)

    __radd__ = __add__

    def __neg__(self) -> "OperatorExpr":
        return OperatorExpr({e: -c for e, c in self._terms.items()}, self._rules)

    def __sub__(self, other) -> "OperatorExpr":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "OperatorExpr":
        return self._coerce(other) - self

    def __mul__(self, other) -> "OperatorExpr":
        if not isinstance(other, OperatorExpr):
            factor = exact_number(other)
            return OperatorExpr({e: c * factor for e, c in self._terms.items()}, self._rules)
        other = self._coerce(other)
        terms: Dict[Exponents, sympy.Expr] = {}
        for left, a in self._terms.items():
            for right, b in other._terms.items():
                for exponents, c in self._rules.multiply_monomials(left, right).items():
                    terms[exponents] = terms.get(exponents, 0) + a * b * c
        return OperatorExpr(terms, self._rules)

    def __rmul__(self, other) -> "OperatorExpr":
        return self._coerce(other) * self

    def __pow__(self, power: int) -> "OperatorExpr":
        if not isinstance(power, int) or power < 0:
            raise ParameterError(f"powers must be nonnegative integers, got {power}")
        result = OperatorExpr.constant(1, self._rules)
        for _ in range(power):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, (OperatorExpr, int, float, complex, sympy.Basic)):
            return NotImplemented
        difference = self - other
        return all(sympy.simplify(c) == 0 for c in difference._terms.values())

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def adjoint(self) -> "OperatorExpr":
        """Formal adjoint: conjugate coefficients and reverse every product."""
        result = OperatorExpr.zero(self._rules)
        for exponents, coefficient in self._terms.items():
            word = []
            for index in reversed(range(len(GENERATORS))):
                word.extend([GENERATORS[index]] * exponents[index])
            result = result + OperatorExpr.from_word(word, sympy.conjugate(coefficient), self._rules)
        return result

    def is_self_adjoint(self) -> bool:
        return self == self.adjoint()

    def substitute(self, values: Mapping) -> "OperatorExpr":
        """Replace symbolic parameters (by name or symbol) with values."""
        replacements = {}
        for key, value in values.items():
            symbol = key if isinstance(key, sympy.Symbol) else sympy.Symbol(key, real=True)
            replacements[symbol] = exact_number(value)
        return OperatorExpr({e: c.subs(replacements) for e, c in self._terms.items()}, self._rules)

    def numeric_terms(self, values: Optional[Mapping] = None) -> List[Tuple[Exponents, complex]]:
        """Monomials with complex coefficients, after substituting parameters."""
        expression = self.substitute(values) if values else self
        if expression.free_symbols:
            names = sorted(str(s) for s in expression.free_symbols)
            raise ParameterError(f"unresolved parameters {names}")
        return [(e, complex(sympy.N(c))) for e, c in expression.sorted_terms()]

    # -- printing -----------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for exponents, coefficient in self.sorted_terms():
            monomial = format_monomial(exponents)
            text = format_coefficient(coefficient)
            if monomial == "1":
                term = text
            elif text == "1":
                term = monomial
            elif text == "-1":
                term = "-" + monomial
            else:
                term = f"{text}*{monomial}"
            pieces.append(term)
        output = pieces[0]
        for term in pieces[1:]:
            output += f" - {term[1:]}" if term.startswith("-") else f" + {term}"
        return output

    def __repr__(self) -> str:
        return f"OperatorExpr({self})"


def format_monomial(exponents: Exponents) -> str:
    factors = []
    for name, power in zip(DISPLAY_NAMES, exponents):
        if power == 1:
            factors.append(name)
        elif power > 1:
            factors.append(f"{name}^{power}")
    return "*".join(factors) or "1"


def _format_real(value: sympy.Expr) -> str:
    text = str(value)
    return f"({text})" if isinstance(value, sympy.Add) else text


def format_coefficient(coefficient: sympy.Expr) -> str:
    """Deterministic text for a coefficient, writing the imaginary unit as i."""
    real, imag = coefficient.as_real_imag()
    real, imag = sympy.expand(real), sympy.expand(imag)
    if imag == 0:
        return _format_real(real)
    if imag == 1:
        imaginary = "i"
    elif imag == -1:
        imaginary = "-i"
    else:
        imaginary = f"{_format_real(imag)}*i"
    if real == 0:
        return imaginary
    sign = "" if imaginary.startswith("-") else "+"
    return f"({real}{sign}{imaginary})"


def polynomial_expr(coefficients: Iterable[Scalar], generator: str,
                    rules: Optional[CommutationRules] = None) -> OperatorExpr:
    """sum_j c_j g^j for ascending coefficients c_j."""
    index = generator_index(generator)
    terms = {}
    for power, coefficient in enumerate(coefficients):
        exponents = [0] * len(GENERATORS)
        exponents[index] = power
        terms[tuple(exponents)] = exact_number(coefficient)
    return OperatorExpr(terms, rules)
