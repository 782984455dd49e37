"""
Recursive-descent parser for operator expressions.

Grammar (juxtaposition is not multiplication):

    expr  := [sign] term (('+' | '-') term)*
    term  := power ('*' power)*
    power := atom ('^' INTEGER)?
    atom  := NUMBER | NUMBER ('i' | 'j') | NAME | 'i' | '(' expr ')'

NUMBER is an integer, a decimal or an integer ratio such as 3/4, all read as
exact rationals. NAME is one of q, p, x, k, px, pk (p_x and p_k are accepted
too) or a declared real parameter. U+2212 is accepted as a minus sign.
"""

import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import sympy

from src.kvn.algebra.expr import ALIASES, GENERATORS, CommutationRules, OperatorExpr
from src.kvn.errors import ExpressionSyntaxError, UnknownSymbolError

NUMBER = re.compile(r'(\d+/\d+|\d+\.\d*|\.\d+|\d+)([ij](?![A-Za-z0-9_]))?')
NAME = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')
OPERATOR = re.compile(r'[-+*^()]')
SPACES = re.compile(r'\s+')
IMAGINARY_UNITS = ("i", "j")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(text: str) -> List[Token]:
    """
    Split text into tokens with their character offsets.

    Raises:
        ExpressionSyntaxError: On a character that starts no token
    """
    normalized = text.replace("−", "-")
    tokens: List[Token] = []
    position = 0
    while position < len(normalized):
        spaces = SPACES.match(normalized, position)
        if spaces:
            position = spaces.end()
            continue
        for kind, pattern in (("number", NUMBER), ("name", NAME), ("op", OPERATOR)):
            match = pattern.match(normalized, position)
            if match:
                tokens.append(Token(kind, match.group(0), position))
                position = match.end()
                break
        else:
            raise ExpressionSyntaxError(f"unexpected character {normalized[position]!r}", position, text)
    tokens.append(Token("end", "", len(normalized)))
    return tokens


class Parser:
    """
    Parser state over a token list.

    Args:
        text: Expression source
        parameters: Declared parameters, name -> sympy symbol or number
        rules: Commutation rules for the resulting expression
    """

    def __init__(self, text: str, parameters: Optional[Mapping[str, object]] = None,
                 rules: Optional[CommutationRules] = None):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0
        self.rules = rules
        self.parameters: Dict[str, sympy.Expr] = {}
        for name, value in (parameters or {}).items():
            self.parameters[name] = value if isinstance(value, sympy.Basic) else sympy.sympify(value)

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ExpressionSyntaxError:
        token = token or self.current
        return ExpressionSyntaxError(message, token.offset, self.text)

    def parse(self) -> OperatorExpr:
        if self.current.kind == "end":
            raise self.error("empty expression")
        result = self.parse_expr()
        if self.current.kind != "end":
            raise self.error(f"unexpected {self.current.text!r}")
        return result

    def parse_expr(self) -> OperatorExpr:
        negate = False
        if self.current.text in ("+", "-"):
            negate = self.advance().text == "-"
        result = self.parse_term()
        if negate:
            result = -result
        while self.current.text in ("+", "-"):
            operator = self.advance().text
            term = self.parse_term()
            result = result + term if operator == "+" else result - term
        return result

    def parse_term(self) -> OperatorExpr:
        result = self.parse_power()
        while True:
            if self.current.text == "*":
                self.advance()
                result = result * self.parse_power()
            elif self.current.kind in ("number", "name") or self.current.text == "(":
                raise self.error("implicit multiplication is not allowed; use '*'")
            else:
                return result

    def parse_power(self) -> OperatorExpr:
        base = self.parse_atom()
        if self.current.text != "^":
            return base
        self.advance()
        exponent = self.current
        if exponent.kind != "number" or not exponent.text.isdigit():
            raise self.error("expected a nonnegative integer exponent", exponent)
        self.advance()
        return base ** int(exponent.text)

    def parse_atom(self) -> OperatorExpr:
        token = self.current
        if token.kind == "number":
            self.advance()
            return OperatorExpr.constant(self._number(token), self.rules)
        if token.kind == "name":
            self.advance()
            return self._name(token)
        if token.text == "(":
            self.advance()
            inner = self.parse_expr()
            if self.current.text != ")":
                raise self.error("expected ')'")
            self.advance()
            return inner
        if token.kind == "end":
            raise self.error("unexpected end of expression")
        raise self.error(f"unexpected {token.text!r}")

    def _number(self, token: Token) -> sympy.Expr:
        text = token.text
        imaginary = text[-1] in IMAGINARY_UNITS
        digits = text[:-1] if imaginary else text
        if "/" in digits and int(digits.split("/")[1]) == 0:
            raise self.error("division by zero in ratio", token)
        value = sympy.Rational(digits)
        return value * sympy.I if imaginary else value

    def _name(self, token: Token) -> OperatorExpr:
        name = ALIASES.get(token.text, token.text)
        if name in GENERATORS:
            return OperatorExpr.generator(name, self.rules)
        if token.text in IMAGINARY_UNITS:
            return OperatorExpr.constant(sympy.I, self.rules)
        if token.text in self.parameters:
            return OperatorExpr.constant(self.parameters[token.text], self.rules)
        raise UnknownSymbolError(token.text, token.offset)


def parse(text: str, parameters: Optional[Mapping[str, object]] = None,
          rules: Optional[CommutationRules] = None) -> OperatorExpr:
    """
    Parse and normal-order an operator expression.

    Args:
        text: Expression such as "q*p - p*q" or "1/2*(q^2 + p^2) - c*q*pk"
        parameters: Declared parameters; use symbol("c") for a symbolic real c
        rules: Commutation rules (default hbar = 1)

    Raises:
        ExpressionSyntaxError: With the character offset of the problem
        UnknownSymbolError: For an undeclared identifier
    """
    return Parser(text, parameters, rules).parse()


def symbol(name: str) -> sympy.Symbol:
    """A real symbolic parameter."""
    return sympy.Symbol(name, real=True)
