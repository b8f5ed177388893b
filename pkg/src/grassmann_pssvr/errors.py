"""Exception hierarchy shared by all modules."""


class GrassmannError(Exception):
    """Base class for all package errors."""


class DimensionError(GrassmannError, ValueError):
    """Shapes or dimensions are inconsistent."""


class RankDeficiencyError(GrassmannError, ValueError):
    """Input frames do not have enough linearly independent columns."""

    def __init__(self, message, effective_rank):
        super().__init__(message)
        self.effective_rank = effective_rank


class ParameterError(GrassmannError, ValueError):
    """A configuration value is out of range."""


class NumericalError(GrassmannError, ArithmeticError):
    """An iterate became non-finite or a factorization failed."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class DataFormatError(GrassmannError, ValueError):
    """A file on disk is malformed, truncated, or unreadable."""
