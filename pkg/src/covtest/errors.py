"""Exception hierarchy shared by every module of the package."""


class CovTestError(ValueError):
    """Base class for all errors raised by ``covtest``."""


class InvalidModelError(CovTestError):
    pass


class InvalidWindowError(CovTestError):
    pass


class DomainError(CovTestError):
    """An argument lies outside the domain of a formula."""


class EvaluationError(CovTestError):
    """A numerical evaluation produced a non-finite or inadmissible value."""


class DegenerateCpError(CovTestError):
    """C_p vanished; the tail bound divides by C_p ** (1/p)."""


class CoverageError(CovTestError):
    """A path or correlogram does not cover the requested grid."""


class EmbeddingError(CovTestError):
    """Circulant embedding of the covariance is not nonnegative definite."""


class SimulationError(CovTestError):
    pass
