"""
Exception hierarchy for cran_duplex
Every error raised on purpose by the library derives from CranDuplexError
"""


class CranDuplexError(Exception):
    """Root of all library errors."""


class ConfigError(CranDuplexError, ValueError):
    """Invalid scenario file, override or environment setting."""

    def __init__(self, message: str, key: str = None):
        super().__init__(message)
        self.key = key


class DomainError(CranDuplexError, ValueError):
    """Argument outside the domain of a mathematical operation."""


class MeijerGDegeneracyError(DomainError):
    """No admissible Mellin-Barnes contour for the requested G-function."""


class QuadratureError(CranDuplexError, RuntimeError):
    """Adaptive integration ran out of budget before meeting its tolerance."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class IntegrandError(CranDuplexError, ArithmeticError):
    """An MGF evaluation inside the rate integral failed."""

    def __init__(self, message: str, z: float):
        super().__init__(f"{message} at z={z!r}")
        self.z = z


class NoAssociationError(CranDuplexError, LookupError):
    """No RRH of the requested type exists in the realization."""


class SeriesDivergenceError(CranDuplexError, ArithmeticError):
    """An alternating series stopped shrinking before meeting its tolerance."""


class PoleCoincidenceError(CranDuplexError, ArithmeticError):
    """Partial fractions are undefined because two poles coincide."""


class TruncationError(CranDuplexError, RuntimeError):
    """The Poisson outer sum did not reach its tail-mass target."""
