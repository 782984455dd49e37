"""
Exception hierarchy for the Koopman–von Neumann laboratory.

The CLI maps these onto process exit codes (see ``exit_code_for``).
"""

from typing import Optional


class KvnError(Exception):
    """Base class for every error raised by the laboratory."""


class ShapeError(KvnError):
    """Grids do not match or an operator names an axis the state lacks."""


class ParameterError(KvnError):
    """An argument is outside its documented range."""


class DomainError(KvnError):
    """Input data violates a mathematical precondition (e.g. negative density)."""


class SelfAdjointnessError(KvnError):
    """An expectation value came out with a non-negligible imaginary part."""

    def __init__(self, message: str, imaginary_part: float):
        super().__init__(message)
        self.imaginary_part = imaginary_part


class GuardViolation(KvnError):
    """Probability mass reached the periodic boundary of the grid."""

    def __init__(self, axis: str, mass: float, time: Optional[float] = None, limit: float = 1e-10):
        where = f" at t={time:.6g}" if time is not None else ""
        super().__init__(
            f"boundary mass {mass:.3e} on axis '{axis}' exceeds {limit:.1e}{where}; enlarge the domain"
        )
        self.axis = axis
        self.mass = mass
        self.time = time
        self.limit = limit


class ConfigurationError(KvnError):
    """A scenario, partition, pointer scheme or interaction is malformed."""


class ZeroProbabilityOutcome(KvnError):
    """Conditioning was requested on an outcome that (numerically) never occurs."""

    def __init__(self, label: str, probability: float):
        super().__init__(f"outcome '{label}' has probability {probability:.3e} <= 1e-12")
        self.label = label
        self.probability = probability


class ExtractionFailure(KvnError):
    """Reconstructed POVM or Kraus data violate their validity invariants."""

    def __init__(self, message: str, offending_value: float):
        super().__init__(f"{message} (offending value {offending_value:.3e})")
        self.offending_value = offending_value


class ExpressionSyntaxError(KvnError):
    """An operator expression could not be parsed."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnknownSymbolError(KvnError):
    """An identifier in an operator expression is neither a generator nor a declared parameter."""

    def __init__(self, symbol: str, offset: int):
        super().__init__(f"unknown symbol '{symbol}' at offset {offset}")
        self.symbol = symbol
        self.offset = offset


class DegreeOverflowError(KvnError):
    """A normal-ordered monomial exceeded the supported degree."""


class UnknownScenarioError(KvnError):
    """The requested scenario is not registered."""

    def __init__(self, name: str, known: list):
        super().__init__(f"unknown scenario '{name}'; known scenarios ({len(known)}): {', '.join(known)}")
        self.name = name
        self.known = list(known)


EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_GUARD = 2
EXIT_VALIDATION = 3
EXIT_UNKNOWN_SCENARIO = 4


def exit_code_for(error: BaseException) -> int:
    """Map an exception onto the CLI exit code contract."""
    if isinstance(error, UnknownScenarioError):
        return EXIT_UNKNOWN_SCENARIO
    if isinstance(error, GuardViolation):
        return EXIT_GUARD
    return EXIT_VALIDATION
