"""Exception hierarchy shared by all modules."""


class GrushinError(Exception):
    """Base class for all package errors."""


class DomainError(GrushinError, ValueError):
    """An argument lies outside the domain of the operation."""


class NonConvergent(GrushinError, RuntimeError):
    """An iterative or adaptive procedure exhausted its budget."""


class InfeasibleSpec(GrushinError, ValueError):
    """The partition data admit no admissible set (or no root was found)."""


class UnsupportedAlpha(GrushinError, ValueError):
    """The requested exponent is outside the supported closed-form range."""


class DegenerateInput(GrushinError, ValueError):
    """The input set is degenerate (for instance it has zero area)."""


class FitError(GrushinError, RuntimeError):
    """A regression could not be performed on the supplied data."""
