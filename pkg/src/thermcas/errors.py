"""Exception types raised by the evaluators."""


class InvalidModelError(ValueError):
    """A dielectric model was built with non-finite or inconsistent parameters."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SingularInterfaceError(ArithmeticError):
    """A Fresnel denominator vanished."""


class ConvergenceError(RuntimeError):
    """Quadrature or summation did not reach its tolerance within budget.

    The best available estimate is attached as ``partial`` so callers can
    still inspect it.
    """

    def __init__(self, message, partial=None, where=None):
        super().__init__(message)
        self.partial = partial
        self.where = where or {}


class ConfigError(ValueError):
    """A configuration entry is missing, malformed or has the wrong unit.

    ``key`` names the offending entry so front ends can report it.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
