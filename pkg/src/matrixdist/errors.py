"""Exception types shared across the package."""


class MatrixDistError(ValueError):
    """Base class for all parameter and domain failures."""


class ParameterError(MatrixDistError):
    pass


class DomainError(MatrixDistError):
    """A point lies outside a space, or a kernel is paired with the wrong spaces."""


class UnsupportedSpaceError(ParameterError):
    pass


class DegenerateSpectrumError(MatrixDistError):
    pass
