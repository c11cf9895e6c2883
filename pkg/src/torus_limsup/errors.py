"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class UnsupportedExact(NotImplementedError):
    """Exact computation is not available; use the Monte Carlo path instead."""


class SingularityError(ZeroDivisionError):
    """A defining expression has a zero denominator at the requested point."""


class UnsupportedError(NotImplementedError):
    """The input lacks a certificate needed to finish the computation."""
