"""Exception types raised by energycp."""


class InvalidInputError(ValueError):
    """Input data or parameters violate a documented precondition."""


class InsufficientSampleError(InvalidInputError):
    """A sample is too small for the within-sample U-statistics."""


class DataError(InvalidInputError):
    """A data file could not be turned into a valid series.

    ``line`` and ``column`` are 1-based and refer to the source file when
    known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
