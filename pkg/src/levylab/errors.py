"""Exception hierarchy shared by every module of the package."""


class LevyLabError(Exception):
    """Base class for all errors raised by levylab."""


class DomainError(LevyLabError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class OverflowDomainError(DomainError, OverflowError):
    """The result is not representable as a finite double."""


class ConvergenceError(LevyLabError, RuntimeError):
    """A quadrature, ODE solve or iteration failed to reach its tolerance."""


class SingularityError(DomainError):
    """Evaluation requested at a point where the function is unbounded."""


class StabilityError(LevyLabError, ValueError):
    """An explicit time step violates the stability bound of the scheme."""


class SymmetryError(LevyLabError, ValueError):
    """A kernel that must be symmetric was found not to be."""


class PositivityError(DomainError):
    """Data that must be strictly positive is not."""


class InconclusiveError(LevyLabError):
    """Numerical evidence is insufficient to classify an asymptotic behaviour."""


class LeakageError(LevyLabError):
    """Too much mass reached the boundary band of the periodic box."""
