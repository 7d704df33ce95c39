"""Exception types shared across the package."""


class RabiZetaError(Exception):
    """Base class for all package errors."""


class ParameterError(RabiZetaError, ValueError):
    """A physical or numerical parameter violates its validity constraint."""


class DomainError(RabiZetaError, ValueError):
    """An argument lies outside the mathematical domain of the quantity."""


class UnsupportedConfigError(RabiZetaError, ValueError):
    """The requested operation is undefined for this parameter combination."""


class ConvergenceError(RabiZetaError, RuntimeError):
    """An adaptive computation failed to reach its tolerance within its caps."""


class NumericalError(RabiZetaError, RuntimeError):
    """A numerical kernel (eigensolver, linear solve) failed or lost accuracy."""
