"""Exception hierarchy shared by every qpathsim module."""


class SimError(Exception):
    """Base class for all qpathsim errors."""


class RangeError(SimError, ValueError):
    """An index, bit position, program counter or size is out of range."""


class ParseError(SimError):
    """A circuit file is malformed. Carries the file name and 1-based line."""

    def __init__(self, message, filename=None, line=None):
        self.filename = filename
        self.line = line
        where = ""
        if filename is not None:
            where = f"{filename}:{line}: " if line is not None else f"{filename}: "
        super().__init__(where + message)
        self.message = message


class CapacityError(SimError):
    """A dense representation would exceed the configured memory budget."""


class NumericalDegeneracyError(SimError, ArithmeticError):
    """A neighbourhood carries (numerically) no probability mass."""
