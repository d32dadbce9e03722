"""Exception types shared by all modules (and mapped to CLI exit codes)."""


class PfabError(Exception):
    """Base class."""


class DomainError(PfabError, ValueError):
    """Input outside the mathematical domain (h outside Sigma, x <= 0, ...)."""


class NumericalError(PfabError, ArithmeticError):
    """A numerical procedure failed to converge or detected an inconsistency."""


class ReductionError(PfabError, ArithmeticError):
    """Recurrence hit a zero pivot or an unreachable index."""
