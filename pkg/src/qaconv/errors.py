"""Exception types shared across the package."""


class QaconvError(Exception):
    """Base class for all errors raised by this package."""


class CapacityError(QaconvError):
    """A register or array is larger than the simulator supports."""


class ShapeError(QaconvError, ValueError):
    """Operand dimensions do not line up."""


class InvariantError(QaconvError, ValueError):
    """A value violates a structural invariant (unit norm, unitarity, ...)."""


class DegeneratePatchError(QaconvError, ValueError):
    """An all-zero window or kernel cannot be amplitude encoded."""


class ParseError(QaconvError, ValueError):
    """An input file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
