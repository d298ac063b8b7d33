"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so raising the right class
matters more than the message text.
"""


class ParameterError(ValueError):
    """An argument is outside its documented domain."""


class GeometryError(ValueError):
    """A geometric precondition fails (circle exits domain, shape mismatch, ...)."""


class FormatError(ValueError):
    """A binary or CSV input is malformed; message names the offending offset."""


class ResolutionError(RuntimeError):
    """The grid is too coarse to discretize the requested construction."""

    def __init__(self, message: str, min_grid_n: int | None = None):
        super().__init__(message)
        self.min_grid_n = min_grid_n
