"""Exception hierarchy shared by all paracalc modules.

Exit-code mapping used by the CLI: ConfigurationError and DomainError are
validation failures (exit 2), NonContractionError and OracleUnreliableError
are numerical failures (exit 3), I/O problems surface as OSError (exit 4).
"""


class ParacalcError(Exception):
    """Base class for all paracalc errors."""


class ConfigurationError(ParacalcError):
    """Invalid grid, time grid, or operator configuration."""


class DomainError(ParacalcError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedModeError(ParacalcError):
    """Operation requested in a mode it does not support (e.g. variable-coefficient L)."""


class DegenerateFieldError(ParacalcError):
    """Field too degenerate for the requested measurement (e.g. too few dyadic blocks)."""


class IncompleteSystemError(ParacalcError):
    """A paracontrolled system is missing a remainder field."""


class MissingTermError(ParacalcError):
    """A required reference/stochastic term is absent from the reference store."""


class NonContractionError(ParacalcError):
    """Fixed-point iteration failed to contract; advises a smaller time horizon."""


class OracleUnreliableError(ParacalcError):
    """Reference solver self-convergence check failed."""


class OrderingError(ParacalcError):
    """Recipe evaluation requested before its children were evaluated."""
